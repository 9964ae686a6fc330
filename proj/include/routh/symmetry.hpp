#pragma once
/// @file symmetry.hpp
/// @brief Symmetry data of a magnetic Lagrangian system, momentum maps, single-stage
/// Routh reduction, and the reduction of systems whose configuration space is the group.

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "routh/lie.hpp"
#include "routh/magnetic_system.hpp"

namespace routh {

/// Principal connection on Q. `value` maps (q, v) to the algebra and is linear in v.
struct PrincipalConnection {
    SmoothMap value;

    /// dim g x n matrix A(q) with value(q, v) = A(q) v.
    template <class T>
    Mat<T> matrix(const Vec<T>& q) const {
        const int n = static_cast<int>(q.size());
        const int d = value.out_dim();
        Mat<T> A(d, n);
        Vec<T> in(q);
        in.resize(static_cast<std::size_t>(2 * n), T(0.0));
        for (int j = 0; j < n; ++j) {
            in[n + j] = T(1.0);
            Vec<T> col = value(in);
            for (int a = 0; a < d; ++a) A(a, j) = col[a];
            in[n + j] = T(0.0);
        }
        return A;
    }
};

using StateSampler = std::function<State(std::mt19937_64&)>;

struct SymmetrySetup {
    MagneticLagrangianSystem sys;
    LieGroupModel group = LieGroupModel::real(1);
    GroupAction actionQ;
    GroupAction actionP;
    PrincipalConnection connection;
    SmoothMap delta;          ///< potential P -> g*
    bool mechanical = true;   ///< L quadratic in v, so the momentum shift is affine
    StateSampler sampler;     ///< draws states in the chart domain

    /// Validates dimensions; an empty delta becomes the zero potential.
    static SymmetrySetup make(MagneticLagrangianSystem sys, GroupAction actionQ, GroupAction actionP,
                              PrincipalConnection connection, SmoothMap delta, StateSampler sampler,
                              bool mechanical = true);
};

namespace detail {

template <class T>
Vec<T> concat(const Vec<T>& a, const Vec<T>& b) {
    Vec<T> r(a);
    r.insert(r.end(), b.begin(), b.end());
    return r;
}
template <class T>
Vec<T> concat(const Vec<T>& a, const Vec<T>& b, const Vec<T>& c) {
    return concat(concat(a, b), c);
}

template <class T>
Vec<T> legendre_generic(const ScalarField& L, const Vec<T>& q, const Vec<T>& v, const Vec<T>& p) {
    const Vec<T> x = concat(q, v, p);
    const std::size_t n = q.size();
    Vec<T> alpha(n);
    for (std::size_t i = 0; i < n; ++i) alpha[i] = directional(L, x, unit<T>(x.size(), n + i));
    return alpha;
}

template <class T>
Vec<T> momentum_with(const SymmetrySetup& setup, const Mat<T>& Xi, const Vec<T>& q, const Vec<T>& v,
                     const Vec<T>& p) {
    Vec<T> alpha = legendre_generic(setup.sys.L, q, v, p);
    Vec<T> d = setup.delta(concat(q, p));
    Vec<T> J(static_cast<std::size_t>(Xi.cols), T(0.0));
    for (int a = 0; a < Xi.cols; ++a) {
        T s(0.0);
        for (int i = 0; i < Xi.rows; ++i) s += alpha[i] * Xi(i, a);
        J[a] = s - d[a];
    }
    return J;
}

template <class T>
Vec<T> lift_vec(const Vec<double>& x) {
    return Vec<T>(x.begin(), x.end());
}

}  // namespace detail

/// <FL(s), xi_Q(q)> - delta_xi(q, p) on the algebra basis.
template <class T>
Vec<T> momentum_map(const SymmetrySetup& setup, const Vec<T>& q, const Vec<T>& v, const Vec<T>& p) {
    return detail::momentum_with(setup, fundamental_matrix(setup.actionQ, q), q, v, p);
}
Vec<double> momentum_map(const SymmetrySetup& setup, const State& s);

struct InertiaTensor {
    Matrix value;
    bool positive_definite = false;
};

/// I(xi, eta) = d2L/dv dv contracted with xi_Q, eta_Q (at zero velocity).
InertiaTensor inertia_tensor(const SymmetrySetup& setup, const Vec<double>& q, const Vec<double>& p);

/// Find xi with J(v + xi_Q, p) = mu.
template <class T>
Vec<T> momentum_shift_solve(const SymmetrySetup& setup, const Vec<T>& q, const Vec<T>& v, const Vec<T>& p,
                            const Vec<double>& mu) {
    const int d = setup.group.dim();
    const Mat<T> Xi = fundamental_matrix(setup.actionQ, q);
    auto shifted = [&](const Vec<T>& xi) {
        Vec<T> w(v);
        for (int i = 0; i < Xi.rows; ++i)
            for (int a = 0; a < d; ++a) w[i] += Xi(i, a) * xi[a];
        return w;
    };
    auto residual_norm = [&](const Vec<T>& xi) {
        Vec<T> J = detail::momentum_with(setup, Xi, q, shifted(xi), p);
        double r = 0.0;
        for (int a = 0; a < d; ++a) r = std::max(r, std::abs(value_of(J[a]) - mu[a]));
        return r;
    };
    if (setup.mechanical) {
        // J restricted to the fiber is affine: its columns are exact secants.
        Vec<T> J0 = detail::momentum_with(setup, Xi, q, v, p);
        Mat<T> C(d, d);
        for (int b = 0; b < d; ++b) {
            Vec<T> Jb = detail::momentum_with(setup, Xi, q, shifted(unit<T>(d, b)), p);
            for (int a = 0; a < d; ++a) C(a, b) = Jb[a] - J0[a];
        }
        Vec<T> rhs(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) rhs[a] = mu[a] - J0[a];
        Vec<T> xi;
        try {
            xi = lu_solve(C, rhs, "inertia tensor");
        } catch (const RankError&) {
            throw GRegularityError("inertia tensor is singular");
        }
        double scale = 1.0;
        for (double m : mu) scale = std::max(scale, std::abs(m));
        if (residual_norm(xi) <= 1e-10 * scale) return xi;
    }
    if constexpr (depth_available<T, 2>()) {
        auto residual = [&](const auto& xi) {
            using U = elem_t<std::remove_cvref_t<decltype(xi)>>;
            Vec<U> qq(q.begin(), q.end()), vv(v.begin(), v.end()), pp(p.begin(), p.end());
            Mat<U> X(Xi.rows, Xi.cols);
            for (std::size_t i = 0; i < Xi.a.size(); ++i) X.a[i] = U(Xi.a[i]);
            Vec<U> w(vv);
            for (int i = 0; i < X.rows; ++i)
                for (int a = 0; a < d; ++a) w[i] += X(i, a) * xi[a];
            Vec<U> J = detail::momentum_with(setup, X, qq, w, pp);
            for (int a = 0; a < d; ++a) J[a] -= mu[a];
            return J;
        };
        try {
            return newton_solve(residual, Vec<T>(static_cast<std::size_t>(d), T(0.0)), NewtonOptions{1e-12, 50});
        } catch (const NumericError& e) {
            throw GRegularityError(std::string("momentum shift did not converge: ") + e.what());
        }
    } else {
        throw_depth_exceeded();
    }
}

/// Explicit quotient charts. project_P maps P to (base coordinates, fiber coordinates)
/// of P/G_mu; project_Q maps Q to Q/G. Sections are right inverses.
struct QuotientChartData {
    SmoothMap project_P, section_P, project_Q, section_Q;
    std::vector<std::string> base_names;   ///< coordinates of Q/G
    std::vector<std::string> fiber_names;  ///< remaining coordinates of P/G_mu
};

struct InvarianceReport {
    std::vector<std::pair<std::string, double>> residuals;
    double tolerance = 1e-8;

    bool pass() const;
    std::vector<std::string> violations() const;
    double residual(const std::string& name) const;
};

/// Sampled checks of L and B invariance, connection equivariance and reproduction,
/// compatibility of the actions with eps, and the potential property.
InvarianceReport invariance_check(const SymmetrySetup& setup, int sample_count, std::uint64_t seed = 20240531);

/// Basis (columns) of the isotropy algebra of mu for the affine action.
Matrix isotropy_algebra(const SymmetrySetup& setup, const Vec<double>& mu);

class ReducedSystemPackage {
public:
    MagneticLagrangianSystem reduced;
    Vec<double> mu;
    Matrix isotropy;  ///< basis of the isotropy algebra (columns)

    State project_state(const State& s) const;
    State lift_state(const State& reduced_state) const;
    const SymmetrySetup& parent() const { return *parent_; }
    const QuotientChartData& charts() const { return *charts_; }
    /// Sampler for reduced states (projection of parent samples).
    StateSampler sampler() const;

private:
    friend ReducedSystemPackage routh_reduce(const SymmetrySetup&, const Vec<double>&, const QuotientChartData&,
                                             std::uint64_t);
    std::shared_ptr<const SymmetrySetup> parent_;
    std::shared_ptr<const QuotientChartData> charts_;
};

/// Routh reduction at momentum mu with respect to the given quotient charts.
ReducedSystemPackage routh_reduce(const SymmetrySetup& setup, const Vec<double>& mu, const QuotientChartData& charts,
                                  std::uint64_t seed = 20240531);

/// Reduced dynamics of a system whose configuration space is the group itself,
/// written on the dual of the algebra.
class GroupReducedSystem {
public:
    GroupReducedSystem(LieGroupModel group, ScalarField ell, SmoothMap delta, ActionSide side,
                       std::uint64_t seed = 20240531);

    const LieGroupModel& group() const { return group_; }
    ActionSide side() const { return side_; }
    const Matrix& sigma() const { return sigma_; }
    const ScalarField& ell() const { return ell_; }

    /// chi = (F ell)^{-1}(nu) by Newton.
    template <class T>
    Vec<T> chi(const Vec<T>& nu) const {
        const int d = group_.dim();
        ScalarField ell = ell_;
        auto residual = [&](const auto& xi) {
            using U = elem_t<std::remove_cvref_t<decltype(xi)>>;
            Vec<U> r(static_cast<std::size_t>(d));
            for (int a = 0; a < d; ++a) r[a] = directional(ell, xi, unit<U>(d, a)) - U(nu[a]);
            return r;
        };
        try {
            return newton_solve(residual, Vec<T>(static_cast<std::size_t>(d), T(0.0)), NewtonOptions{1e-13, 60});
        } catch (const NumericError& e) {
            throw GRegularityError(std::string("Legendre transform of the reduced Lagrangian not invertible: ") +
                                   e.what());
        }
    }

    /// Routhian ell(chi) - <nu, chi>.
    template <class T>
    T routhian(const Vec<T>& nu) const {
        Vec<T> c = chi(nu);
        return ell_(c) - dot(nu, c);
    }

    /// Tangent to the affine orbit generated by eta at nu.
    Vec<double> orbit_tangent(const Vec<double>& nu, const Vec<double>& eta) const;
    Vec<double> rhs(const Vec<double>& nu) const;
    /// Reduced two-form: <nu_dot, eta> with nu_dot2 = orbit_tangent(nu, eta).
    double reduced_form(const Vec<double>& nu, const Vec<double>& nu_dot, const Vec<double>& nu_dot2) const;
    double energy(const Vec<double>& nu) const;
    /// Residual |B(nu_dot, w) - dRouthian(w)| maximised over orbit tangents w from basis generators.
    double form_residual(const Vec<double>& nu) const;
    Trajectory integrate(const Vec<double>& nu0, double t0, double t1, double h) const;

private:
    LieGroupModel group_;
    ScalarField ell_;
    ActionSide side_;
    Matrix sigma_;
};

GroupReducedSystem group_config_reduce(const ScalarField& ell, const LieGroupModel& group, const SmoothMap& delta,
                                       ActionSide side);

}  // namespace routh
