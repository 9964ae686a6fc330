#include "routh/magnetic_system.hpp"

#include <algorithm>
#include <cmath>

namespace routh {

BundleChart BundleChart::make(std::vector<std::string> q_names, std::vector<std::string> p_names,
                              std::function<bool(const Vec<double>&)> domain) {
    BundleChart c;
    c.n = static_cast<int>(q_names.size());
    c.k = static_cast<int>(p_names.size());
    if (c.n < 1) throw ConfigurationError("a bundle chart needs n >= 1");
    c.q_names = std::move(q_names);
    c.p_names = std::move(p_names);
    c.domain = std::move(domain);
    return c;
}

Vec<double> State::flat() const {
    Vec<double> x(q);
    x.insert(x.end(), v.begin(), v.end());
    x.insert(x.end(), p.begin(), p.end());
    return x;
}

Vec<double> State::point() const {
    Vec<double> x(q);
    x.insert(x.end(), p.begin(), p.end());
    return x;
}

State State::unflat(const Vec<double>& x, int n, int k) {
    if (static_cast<int>(x.size()) != 2 * n + k) throw StructuralError("state vector has wrong length");
    State s;
    s.q.assign(x.begin(), x.begin() + n);
    s.v.assign(x.begin() + n, x.begin() + 2 * n);
    s.p.assign(x.begin() + 2 * n, x.end());
    return s;
}

MagneticLagrangianSystem MagneticLagrangianSystem::make(BundleChart chart, ScalarField L, SampledForm B) {
    if (L.arity() != chart.state_dim())
        throw StructuralError("Lagrangian arity must be 2n+k = " + std::to_string(chart.state_dim()));
    if (B.degree != 2 || B.dim != chart.dim_P())
        throw StructuralError("magnetic form must be a two-form on P of dimension " +
                              std::to_string(chart.dim_P()));
    return {std::move(chart), std::move(L), std::move(B)};
}

MagneticLagrangianSystem MagneticLagrangianSystem::lagrangian(BundleChart chart, ScalarField L) {
    if (chart.k != 0) throw StructuralError("an ordinary Lagrangian system has k = 0");
    SampledForm B = SampledForm::zero(2, chart.n);
    return make(std::move(chart), std::move(L), std::move(B));
}

void MagneticLagrangianSystem::require_domain(const State& s) const {
    if (static_cast<int>(s.q.size()) != n() || static_cast<int>(s.v.size()) != n() ||
        static_cast<int>(s.p.size()) != k())
        throw StructuralError("state dimensions do not match the chart");
    if (chart.domain && !chart.domain(s.point())) throw DomainError("state outside chart domain");
}

LagrangianJet lagrangian_jet(const MagneticLagrangianSystem& sys, const State& s) {
    const int n = sys.n(), k = sys.k(), N = 2 * n + k;
    const Vec<double> x = s.flat();
    LagrangianJet jet;
    jet.dq.assign(n, 0.0);
    jet.dv.assign(n, 0.0);
    jet.dp.assign(k, 0.0);
    jet.vv = Matrix(n, n);
    jet.vq = Matrix(n, n);
    jet.vp = Matrix(n, k);
    // One second-order evaluation per (v_i, x_j) pair also yields both first derivatives.
    auto mixed = [&](int i, int j) {
        Vec<Dual<Dual<double>>> y(static_cast<std::size_t>(N));
        for (int m = 0; m < N; ++m)
            y[m] = Dual<Dual<double>>(Dual<double>(x[m], m == j ? 1.0 : 0.0), Dual<double>(m == i ? 1.0 : 0.0, 0.0));
        return sys.L(y);
    };
    for (int i = 0; i < n; ++i) {
        const int vi = n + i;
        for (int j = 0; j < n; ++j) {
            auto r = mixed(vi, j);
            jet.vq(i, j) = r.du.du;
            jet.dq[j] = r.re.du;
            jet.dv[i] = r.du.re;
        }
        for (int j = i; j < n; ++j) {
            auto r = mixed(vi, n + j);
            jet.vv(i, j) = jet.vv(j, i) = r.du.du;
        }
        for (int a = 0; a < k; ++a) {
            auto r = mixed(vi, 2 * n + a);
            jet.vp(i, a) = r.du.du;
            jet.dp[a] = r.re.du;
        }
    }
    check_finite(jet.dq, x, "Lagrangian derivatives");
    check_finite(jet.dv, x, "Lagrangian derivatives");
    check_finite(jet.vv.a, x, "Lagrangian Hessian");
    return jet;
}

namespace {

Accelerations solve_el(const MagneticLagrangianSystem& sys, const State& s, const LagrangianJet& jet,
                       const Matrix& B) {
    const int n = sys.n(), k = sys.k();
    Accelerations acc;
    acc.pdot.assign(k, 0.0);
    if (k > 0) {
        Matrix Bpp(k, k);
        Vec<double> rhs(k, 0.0);
        for (int a = 0; a < k; ++a) {
            for (int b = 0; b < k; ++b) Bpp(a, b) = B(n + a, n + b);
            for (int i = 0; i < n; ++i) rhs[a] += B(i, n + a) * s.v[i];
            rhs[a] -= jet.dp[a];
        }
        try {
            acc.pdot = lu_solve(Bpp, rhs, "fiber block of the magnetic form");
        } catch (const RankError&) {
            throw HyperregularityError("magnetic form is degenerate on the fiber block B_ab", "B_ab");
        }
    }
    Vec<double> rhs(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double r = jet.dq[i];
        for (int j = 0; j < n; ++j) r += -jet.vq(i, j) * s.v[j] + B(i, j) * s.v[j];
        for (int a = 0; a < k; ++a) r += -jet.vp(i, a) * acc.pdot[a] + B(i, n + a) * acc.pdot[a];
        rhs[i] = r;
    }
    try {
        acc.vdot = lu_solve(jet.vv, rhs, "velocity Hessian of L");
    } catch (const RankError&) {
        throw HyperregularityError("Hessian d2L/dv dv is singular", "d2L/dvdv");
    }
    return acc;
}

}  // namespace

Accelerations el_dynamics(const MagneticLagrangianSystem& sys, const State& s) {
    sys.require_domain(s);
    LagrangianJet jet = lagrangian_jet(sys, s);
    Matrix B = sys.B.matrix(s.point());
    check_finite(B.a, s.flat(), "magnetic form");
    return solve_el(sys, s, jet, B);
}

double el_residual(const MagneticLagrangianSystem& sys, const State& s, const Accelerations& acc) {
    const int n = sys.n(), k = sys.k();
    LagrangianJet jet = lagrangian_jet(sys, s);
    Matrix B = sys.B.matrix(s.point());
    double worst = 0.0;
    // -dL/dp^a = -B_ia v^i + B_ab pdot^b
    for (int a = 0; a < k; ++a) {
        double lhs = -jet.dp[a];
        double rhs = 0.0;
        for (int i = 0; i < n; ++i) rhs -= B(i, n + a) * s.v[i];
        for (int b = 0; b < k; ++b) rhs += B(n + a, n + b) * acc.pdot[b];
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    // d/dt dL/dv^i - dL/dq^i = B_ij v^j + B_ia pdot^a
    for (int i = 0; i < n; ++i) {
        double lhs = -jet.dq[i];
        for (int j = 0; j < n; ++j) lhs += jet.vv(i, j) * acc.vdot[j] + jet.vq(i, j) * s.v[j];
        for (int a = 0; a < k; ++a) lhs += jet.vp(i, a) * acc.pdot[a];
        double rhs = 0.0;
        for (int j = 0; j < n; ++j) rhs += B(i, j) * s.v[j];
        for (int a = 0; a < k; ++a) rhs += B(i, n + a) * acc.pdot[a];
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return worst;
}

CotangentState legendre(const MagneticLagrangianSystem& sys, const State& s) {
    const int n = sys.n();
    const Vec<double> x = s.flat();
    CotangentState c{s.q, Vec<double>(n), s.p};
    for (int i = 0; i < n; ++i) c.alpha[i] = directional(sys.L, x, unit<double>(x.size(), n + i));
    return c;
}

double energy(const MagneticLagrangianSystem& sys, const State& s) {
    return dot(legendre(sys, s).alpha, s.v) - sys.L(s.flat());
}

namespace {

/// Rows i: full gradient of dL/dv^i with respect to (q, v, p).
Matrix momentum_gradients(const MagneticLagrangianSystem& sys, const State& s) {
    const int n = sys.n(), N = sys.chart.state_dim();
    const Vec<double> x = s.flat();
    Matrix G(n, N);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < N; ++j)
            G(i, j) = second_directional(sys.L, x, unit<double>(N, n + i), unit<double>(N, j));
    return G;
}

}  // namespace

Matrix presymplectic_matrix(const MagneticLagrangianSystem& sys, const State& s) {
    const int n = sys.n(), k = sys.k(), N = sys.chart.state_dim();
    Matrix G = momentum_gradients(sys, s);
    Matrix B = sys.B.matrix(s.point());
    auto to_P = [n](int idx) { return idx < n ? idx : (idx >= 2 * n ? idx - n : -1); };
    Matrix W(N, N);
    for (int a = 0; a < N; ++a)
        for (int b = 0; b < N; ++b) {
            double w = 0.0;
            // d(alpha_i) ^ dq^i evaluated on basis vectors a, b
            if (b < n) w += G(b, a);
            if (a < n) w -= G(a, b);
            int pa = to_P(a), pb = to_P(b);
            if (pa >= 0 && pb >= 0) w += B(pa, pb);
            (void)k;
            W(a, b) = w;
        }
    return W;
}

double presymplectic_form(const MagneticLagrangianSystem& sys, const State& s, const Vec<double>& U,
                          const Vec<double>& W) {
    return dot(U, matvec(presymplectic_matrix(sys, s), W));
}

double presymplectic_residual(const MagneticLagrangianSystem& sys, const State& s) {
    const int n = sys.n(), N = sys.chart.state_dim();
    Accelerations acc = el_dynamics(sys, s);
    Vec<double> gamma(s.v);
    gamma.insert(gamma.end(), acc.vdot.begin(), acc.vdot.end());
    gamma.insert(gamma.end(), acc.pdot.begin(), acc.pdot.end());
    Matrix Om = presymplectic_matrix(sys, s);
    // dE = v^i d(alpha_i) - dL/dq dq - dL/dp dp  (the alpha_i dv^i terms cancel against dL/dv dv)
    Matrix G = momentum_gradients(sys, s);
    LagrangianJet jet = lagrangian_jet(sys, s);
    Vec<double> dE(N, 0.0);
    for (int j = 0; j < N; ++j)
        for (int i = 0; i < n; ++i) dE[j] += s.v[i] * G(i, j);
    for (int i = 0; i < n; ++i) dE[i] -= jet.dq[i];
    for (int a = 0; a < sys.k(); ++a) dE[2 * n + a] -= jet.dp[a];
    Vec<double> lhs(N, 0.0);
    for (int b = 0; b < N; ++b)
        for (int a = 0; a < N; ++a) lhs[b] += gamma[a] * Om(a, b);
    double worst = 0.0;
    for (int b = 0; b < N; ++b) worst = std::max(worst, std::abs(lhs[b] + dE[b]));
    return worst;
}

MagneticLagrangianSystem gauge_transform(const MagneticLagrangianSystem& sys, const SmoothMap& alpha) {
    const int n = sys.n(), k = sys.k();
    if (alpha.in_dim() != n + k || alpha.out_dim() != n)
        throw StructuralError("gauge one-form must map (q, p) to n components");
    ScalarField L = sys.L;
    ScalarField L2 = ScalarField::from(2 * n + k, [L, alpha, n, k](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> pt(x.begin(), x.begin() + n);
        pt.insert(pt.end(), x.begin() + 2 * n, x.end());
        Vec<T> a = alpha(pt);
        T r = L(x);
        for (int i = 0; i < n; ++i) r -= a[i] * x[n + i];
        (void)k;
        return r;
    });
    // eps^* alpha as a one-form on P, then its exterior derivative
    SmoothMap pulled = SmoothMap::from(n + k, n + k, [alpha, n, k](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> a = alpha(x);
        a.resize(static_cast<std::size_t>(n + k), T(0.0));
        return a;
    });
    SampledForm dA = exterior_derivative(SampledForm{1, n + k, pulled});
    SmoothMap Bmap = sys.B.components, dAmap = dA.components;
    SmoothMap sum = SmoothMap::from(n + k, (n + k) * (n + k), [Bmap, dAmap](auto x) {
        auto a = Bmap(x);
        auto b = dAmap(x);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
        return a;
    });
    return MagneticLagrangianSystem::make(sys.chart, L2, SampledForm{2, n + k, sum});
}

VectorFieldFn dynamics_field(const MagneticLagrangianSystem& sys) {
    const int n = sys.n(), k = sys.k();
    return [sys, n, k](double t, const Vec<double>& x) {
        State s = State::unflat(x, n, k);
        Accelerations acc;
        try {
            acc = el_dynamics(sys, s);
        } catch (const DomainError& e) {
            throw NumericError(std::string("trajectory left the chart domain: ") + e.what(), x, t);
        }
        Vec<double> d(s.v);
        d.insert(d.end(), acc.vdot.begin(), acc.vdot.end());
        d.insert(d.end(), acc.pdot.begin(), acc.pdot.end());
        return d;
    };
}

Trajectory integrate(const MagneticLagrangianSystem& sys, const State& s0, double t0, double t1, double h) {
    sys.require_domain(s0);
    Trajectory tr = rk4_integrate(dynamics_field(sys), s0.flat(), t0, t1, h);
    std::vector<double> e;
    e.reserve(tr.size());
    for (const auto& x : tr.states) e.push_back(energy(sys, State::unflat(x, sys.n(), sys.k())));
    tr.audits.emplace_back("energy", std::move(e));
    return tr;
}

std::vector<std::string> state_column_names(const BundleChart& chart) {
    std::vector<std::string> names{"t"};
    for (const auto& q : chart.q_names) names.push_back(q);
    for (const auto& q : chart.q_names) names.push_back(q + "dot");
    for (const auto& p : chart.p_names) names.push_back(p);
    return names;
}

}  // namespace routh
