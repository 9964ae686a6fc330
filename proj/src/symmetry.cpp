#include "routh/symmetry.hpp"

#include <algorithm>
#include <cmath>

namespace routh {

using detail::concat;

SymmetrySetup SymmetrySetup::make(MagneticLagrangianSystem sys, GroupAction actionQ, GroupAction actionP,
                                  PrincipalConnection connection, SmoothMap delta, StateSampler sampler,
                                  bool mechanical) {
    const int n = sys.n(), N = sys.chart.dim_P();
    const LieGroupModel group = actionQ.group;
    if (!(actionP.group == group)) throw StructuralError("actions on Q and P use different groups");
    if (actionQ.manifold_dim != n || actionP.manifold_dim != N)
        throw StructuralError("action dimensions do not match the bundle chart");
    if (connection.value.in_dim() != 2 * n || connection.value.out_dim() != group.dim())
        throw StructuralError("connection must map (q, v) to the algebra");
    if (delta.empty()) delta = SmoothMap::zero(N, group.dim());
    if (delta.in_dim() != N || delta.out_dim() != group.dim())
        throw StructuralError("potential must map P to the dual algebra");
    if (!sampler) throw StructuralError("symmetry setup needs a state sampler");
    return {std::move(sys), group, std::move(actionQ), std::move(actionP), std::move(connection),
            std::move(delta), mechanical, std::move(sampler)};
}

Vec<double> momentum_map(const SymmetrySetup& setup, const State& s) {
    setup.sys.require_domain(s);
    return momentum_map(setup, s.q, s.v, s.p);
}

InertiaTensor inertia_tensor(const SymmetrySetup& setup, const Vec<double>& q, const Vec<double>& p) {
    const int n = setup.sys.n(), d = setup.group.dim();
    const Matrix Xi = fundamental_matrix(setup.actionQ, q);
    const Vec<double> x = concat(q, Vec<double>(n, 0.0), p);
    auto embed = [&](int a) {
        Vec<double> u(x.size(), 0.0);
        for (int i = 0; i < n; ++i) u[n + i] = Xi(i, a);
        return u;
    };
    InertiaTensor I{Matrix(d, d), false};
    for (int a = 0; a < d; ++a)
        for (int b = a; b < d; ++b)
            I.value(a, b) = I.value(b, a) = second_directional(setup.sys.L, x, embed(a), embed(b));
    // Cholesky-style test for positive definiteness.
    Matrix c = I.value;
    I.positive_definite = true;
    for (int k = 0; k < d && I.positive_definite; ++k) {
        if (c(k, k) <= 0.0) {
            I.positive_definite = false;
            break;
        }
        for (int i = k + 1; i < d; ++i) {
            double f = c(i, k) / c(k, k);
            for (int j = k; j < d; ++j) c(i, j) -= f * c(k, j);
        }
    }
    return I;
}

// ---------------------------------------------------------------------------

bool InvarianceReport::pass() const { return violations().empty(); }

std::vector<std::string> InvarianceReport::violations() const {
    std::vector<std::string> v;
    for (const auto& [name, r] : residuals)
        if (!(r <= tolerance)) v.push_back(name);
    return v;
}

double InvarianceReport::residual(const std::string& name) const {
    for (const auto& [n, r] : residuals)
        if (n == name) return r;
    throw StructuralError("no residual named " + name);
}

namespace {

double max_abs_diff(const Vec<double>& a, const Vec<double>& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

Matrix action_jacobian(const GroupAction& action, const Vec<double>& g, const Vec<double>& m) {
    const int N = action.manifold_dim;
    Matrix D(N, N);
    for (int j = 0; j < N; ++j) {
        Vec<double> col = action.push_forward(g, m, unit<double>(N, j));
        for (int i = 0; i < N; ++i) D(i, j) = col[i];
    }
    return D;
}

Vec<double> head(const Vec<double>& x, int n) { return Vec<double>(x.begin(), x.begin() + n); }
Vec<double> tail(const Vec<double>& x, int n) { return Vec<double>(x.begin() + n, x.end()); }

}  // namespace

InvarianceReport invariance_check(const SymmetrySetup& setup, int sample_count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto& sys = setup.sys;
    const int n = sys.n(), N = sys.chart.dim_P(), d = setup.group.dim();
    double r_compat = 0, r_L = 0, r_B = 0, r_equiv = 0, r_repro = 0, r_pot = 0;
    for (int k = 0; k < sample_count; ++k) {
        State s = setup.sampler(rng);
        Vec<double> g = setup.group.random_element(rng, 1.0);
        const Vec<double> pt = s.point();
        const Vec<double> pt2 = setup.actionP.apply(g, pt);
        const Vec<double> q2 = setup.actionQ.apply(g, s.q);
        r_compat = std::max(r_compat, max_abs_diff(head(pt2, n), q2));

        const Vec<double> v2 = setup.actionQ.push_forward(g, s.q, s.v);
        const Vec<double> p2 = tail(pt2, n);
        r_L = std::max(r_L, std::abs(sys.L(concat(q2, v2, p2)) - sys.L(s.flat())));

        Matrix D = action_jacobian(setup.actionP, g, pt);
        Matrix pulled = matmul(transpose(D), matmul(sys.B.matrix(pt2), D));
        r_B = std::max(r_B, max_abs_diff(pulled.a, sys.B.matrix(pt).a));

        const Vec<double> a1 = setup.connection.value(concat(s.q, s.v));
        const Vec<double> a2 = setup.connection.value(concat(q2, v2));
        const Vec<double> expected = setup.actionQ.side == ActionSide::Right
                                         ? setup.group.Ad(setup.group.inverse(g), a1)
                                         : setup.group.Ad(g, a1);
        r_equiv = std::max(r_equiv, max_abs_diff(a2, expected));

        const Matrix Xi = fundamental_matrix(setup.actionQ, s.q);
        const Matrix A = setup.connection.matrix(s.q);
        const Matrix AX = matmul(A, Xi);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) r_repro = std::max(r_repro, std::abs(AX(a, b) - (a == b ? 1.0 : 0.0)));

        const Matrix XiP = fundamental_matrix(setup.actionP, pt);
        const Matrix B = sys.B.matrix(pt);
        const Matrix Dd = jacobian(setup.delta, pt);
        for (int a = 0; a < d; ++a)
            for (int j = 0; j < N; ++j) {
                double contraction = 0.0;
                for (int i = 0; i < N; ++i) contraction += XiP(i, a) * B(i, j);
                r_pot = std::max(r_pot, std::abs(contraction - Dd(a, j)));
            }
    }
    InvarianceReport rep;
    rep.residuals = {{"compatibility", r_compat},        {"L invariance", r_L},
                     {"B invariance", r_B},              {"connection equivariance", r_equiv},
                     {"connection reproduction", r_repro}, {"potential property", r_pot}};
    return rep;
}

Matrix isotropy_algebra(const SymmetrySetup& setup, const Vec<double>& mu) {
    const int d = setup.group.dim();
    std::mt19937_64 rng(7);
    std::vector<Vec<double>> points;
    for (int i = 0; i < 3; ++i) points.push_back(setup.sampler(rng).point());
    const Matrix Sigma = sigma_matrix(setup.actionP, setup.delta, points);
    Matrix M(d, d);
    for (int j = 0; j < d; ++j) {
        Vec<double> ad = setup.group.coad_inf(unit<double>(d, j), mu);
        for (int i = 0; i < d; ++i) M(i, j) = ad[i] - Sigma(j, i);
    }
    return null_space(M, 1e-10);
}

// ---------------------------------------------------------------------------

namespace {

struct ReductionCore {
    std::shared_ptr<const SymmetrySetup> setup;
    std::shared_ptr<const QuotientChartData> charts;
    Vec<double> mu;
    int n = 0, k = 0, n_red = 0, k_red = 0, d = 0;

    /// Horizontal lift of a base velocity at q: [D project_Q; A] w = (xdot, 0).
    template <class T>
    Vec<T> horizontal_lift(const Vec<T>& q, const Vec<T>& xdot) const {
        Mat<T> Dpi = jacobian(charts->project_Q, q);
        Mat<T> A = setup->connection.matrix(q);
        Mat<T> M(n, n);
        Vec<T> rhs(static_cast<std::size_t>(n), T(0.0));
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n_red; ++i) M(i, j) = Dpi(i, j);
            for (int a = 0; a < d; ++a) M(n_red + a, j) = A(a, j);
        }
        for (int i = 0; i < n_red; ++i) rhs[i] = xdot[i];
        return lu_solve(M, rhs, "horizontal lift");
    }

    /// Full state on the momentum level set over a reduced state (x, xdot, ptilde).
    template <class T>
    void lift(const Vec<T>& x, const Vec<T>& xdot, const Vec<T>& ptilde, Vec<T>& q, Vec<T>& v, Vec<T>& p) const {
        Vec<T> pt = charts->section_P(concat(x, ptilde));
        q.assign(pt.begin(), pt.begin() + n);
        p.assign(pt.begin() + n, pt.end());
        v = horizontal_lift(q, xdot);
        Vec<T> xi = momentum_shift_solve(*setup, q, v, p, mu);
        Mat<T> Xi = fundamental_matrix(setup->actionQ, q);
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < d; ++a) v[i] += Xi(i, a) * xi[a];
    }

    template <class T>
    T routhian(std::span<const T> y) const {
        Vec<T> x(y.begin(), y.begin() + n_red);
        Vec<T> xdot(y.begin() + n_red, y.begin() + 2 * n_red);
        Vec<T> ptilde(y.begin() + 2 * n_red, y.end());
        Vec<T> q, v, p;
        lift(x, xdot, ptilde, q, v, p);
        Vec<T> shift = setup->delta(concat(q, p));
        Vec<T> a = setup->connection.value(concat(q, v));
        T r = setup->sys.L(concat(q, v, p));
        for (int b = 0; b < d; ++b) r -= (mu[b] + shift[b]) * a[b];
        return r;
    }
};

}  // namespace

State ReducedSystemPackage::project_state(const State& s) const {
    const int n_red = reduced.n();
    Vec<double> y = charts_->project_P(s.point());
    Matrix Dpi = jacobian(charts_->project_Q, s.q);
    State r;
    r.q.assign(y.begin(), y.begin() + n_red);
    r.p.assign(y.begin() + n_red, y.end());
    r.v = matvec(Dpi, s.v);
    return r;
}

State ReducedSystemPackage::lift_state(const State& rs) const {
    ReductionCore core{parent_, charts_, mu, parent_->sys.n(), parent_->sys.k(), reduced.n(), reduced.k(),
                       parent_->group.dim()};
    State s;
    core.lift(rs.q, rs.v, rs.p, s.q, s.v, s.p);
    return s;
}

StateSampler ReducedSystemPackage::sampler() const {
    auto self = std::make_shared<ReducedSystemPackage>(*this);
    return [self](std::mt19937_64& rng) { return self->project_state(self->parent().sampler(rng)); };
}

ReducedSystemPackage routh_reduce(const SymmetrySetup& setup, const Vec<double>& mu, const QuotientChartData& charts,
                                  std::uint64_t seed) {
    const auto& sys = setup.sys;
    const int n = sys.n(), k = sys.k(), N = n + k, d = setup.group.dim();
    const int n_red = static_cast<int>(charts.base_names.size());
    const int k_red = static_cast<int>(charts.fiber_names.size());
    if (static_cast<int>(mu.size()) != d) throw ConfigurationError("momentum value has wrong dimension");
    if (charts.project_Q.in_dim() != n || charts.project_Q.out_dim() != n_red || charts.section_Q.in_dim() != n_red ||
        charts.section_Q.out_dim() != n || charts.project_P.in_dim() != N ||
        charts.project_P.out_dim() != n_red + k_red || charts.section_P.in_dim() != n_red + k_red ||
        charts.section_P.out_dim() != N)
        throw ConfigurationError("quotient chart maps have inconsistent dimensions");
    if (n_red + d != n) throw ConfigurationError("dim Q/G + dim G must equal dim Q (free action)");

    auto parent = std::make_shared<const SymmetrySetup>(setup);
    auto chart_ptr = std::make_shared<const QuotientChartData>(charts);
    ReductionCore core{parent, chart_ptr, mu, n, k, n_red, k_red, d};

    // Chart consistency, orbit constancy and regularity probes.
    std::mt19937_64 rng(seed);
    const Matrix iso = isotropy_algebra(setup, mu);
    for (int t = 0; t < 20; ++t) {
        State s = setup.sampler(rng);
        const Vec<double> pt = s.point();
        const Vec<double> y = charts.project_P(pt);
        if (max_abs_diff(charts.project_P(charts.section_P(y)), y) > 1e-10)
            throw ConfigurationError("project_P o section_P is not the identity");
        const Vec<double> x = charts.project_Q(s.q);
        if (max_abs_diff(charts.project_Q(charts.section_Q(x)), x) > 1e-10)
            throw ConfigurationError("project_Q o section_Q is not the identity");
        if (max_abs_diff(head(y, n_red), x) > 1e-10)
            throw ConfigurationError("base coordinates of project_P disagree with project_Q");
        const Vec<double> sec = charts.section_P(y);
        if (max_abs_diff(charts.project_Q(head(sec, n)), x) > 1e-10)
            throw ConfigurationError("section_P does not lie over the base point");
        Vec<double> g = setup.group.random_element(rng, 1.0);
        if (max_abs_diff(charts.project_Q(setup.actionQ.apply(g, s.q)), x) > 1e-9)
            throw ConfigurationError("project_Q is not constant on group orbits");
        for (int c = 0; c < iso.cols; ++c) {
            Vec<double> zeta(d);
            for (int a = 0; a < d; ++a) zeta[a] = 0.7 * iso(a, c);
            Vec<double> moved = setup.actionP.apply(setup.group.exp(zeta), pt);
            if (max_abs_diff(charts.project_P(moved), y) > 1e-9)
                throw ConfigurationError("project_P is not constant on isotropy orbits");
        }
        momentum_shift_solve(setup, s.q, s.v, s.p, mu);
    }

    ScalarField Lred = ScalarField::from(2 * n_red + k_red, [core](auto y) {
        using T = elem_t<decltype(y)>;
        if constexpr (depth_available<T, 1>()) {
            return core.routhian(y);
        } else {
            throw_depth_exceeded();
            return T(0.0);
        }
    });

    // beta = <mu + delta(p), A^P(p)> as a one-form on P.
    SmoothMap beta = SmoothMap::from(N, N, [core](auto y) {
        using T = elem_t<decltype(y)>;
        const int nn = core.n;
        Vec<T> q(y.begin(), y.begin() + nn);
        Mat<T> A = core.setup->connection.matrix(q);
        Vec<T> shift = core.setup->delta(Vec<T>(y.begin(), y.end()));
        Vec<T> out(y.size(), T(0.0));
        for (int j = 0; j < nn; ++j)
            for (int b = 0; b < core.d; ++b) out[j] += (core.mu[b] + shift[b]) * A(b, j);
        return out;
    });
    SmoothMap dbeta = exterior_derivative(SampledForm{1, N, beta}).components;
    SmoothMap Bparent = sys.B.components;
    SmoothMap section = charts.section_P;
    const int Nr = n_red + k_red;
    SmoothMap Bred = SmoothMap::from(Nr, Nr * Nr, [=](auto y) {
        using T = elem_t<decltype(y)>;
        Vec<T> out(static_cast<std::size_t>(Nr * Nr), T(0.0));
        if constexpr (depth_available<T, 1>()) {
            Vec<T> yy(y.begin(), y.end());
            Mat<T> S = jacobian(section, yy);
            Vec<T> pt = section(yy);
            Mat<T> total(N, N);
            total.a = Bparent(pt);
            Vec<T> db = dbeta(pt);
            for (std::size_t i = 0; i < db.size(); ++i) total.a[i] += db[i];
            Mat<T> r = matmul(transpose(S), matmul(total, S));
            out = r.a;
        } else {
            throw_depth_exceeded();
        }
        return out;
    });

    auto domain = sys.chart.domain;
    std::function<bool(const Vec<double>&)> red_domain;
    if (domain) red_domain = [domain, section](const Vec<double>& y) { return domain(section(y)); };
    BundleChart chart = BundleChart::make(charts.base_names, charts.fiber_names, red_domain);

    ReducedSystemPackage pkg;
    pkg.reduced = MagneticLagrangianSystem::make(chart, Lred, SampledForm{2, Nr, Bred});
    pkg.mu = mu;
    pkg.isotropy = iso;
    pkg.parent_ = parent;
    pkg.charts_ = chart_ptr;
    return pkg;
}

// ---------------------------------------------------------------------------

GroupReducedSystem::GroupReducedSystem(LieGroupModel group, ScalarField ell, SmoothMap delta, ActionSide side,
                                       std::uint64_t seed)
    : group_(std::move(group)), ell_(std::move(ell)), side_(side) {
    const int d = group_.dim();
    if (ell_.arity() != d) throw StructuralError("reduced Lagrangian must be a function on the algebra");
    if (delta.empty()) delta = SmoothMap::zero(d, d);
    GroupAction self = self_action(group_, side_);
    std::mt19937_64 rng(seed);
    std::vector<Vec<double>> points{group_.identity<double>()};
    for (int i = 0; i < 3; ++i) points.push_back(group_.random_element(rng, 1.0));
    sigma_ = sigma_matrix(self, delta, points);
}

Vec<double> GroupReducedSystem::orbit_tangent(const Vec<double>& nu, const Vec<double>& eta) const {
    Vec<double> ad = group_.coad_inf(eta, nu);
    const int d = group_.dim();
    Vec<double> out(d);
    for (int j = 0; j < d; ++j) {
        double contraction = 0.0;
        for (int i = 0; i < d; ++i) contraction += eta[i] * sigma_(i, j);
        out[j] = side_ == ActionSide::Right ? -ad[j] + contraction : ad[j] - contraction;
    }
    return out;
}

Vec<double> GroupReducedSystem::rhs(const Vec<double>& nu) const { return orbit_tangent(nu, chi(nu)); }

double GroupReducedSystem::reduced_form(const Vec<double>& nu, const Vec<double>& nu_dot,
                                        const Vec<double>& nu_dot2) const {
    const int d = group_.dim();
    Matrix M(d, d);
    for (int j = 0; j < d; ++j) {
        Vec<double> col = orbit_tangent(nu, unit<double>(d, j));
        for (int i = 0; i < d; ++i) M(i, j) = col[i];
    }
    Vec<double> eta = least_squares(M, nu_dot2);
    return dot(nu_dot, eta);
}

double GroupReducedSystem::energy(const Vec<double>& nu) const { return -routhian(nu); }

double GroupReducedSystem::form_residual(const Vec<double>& nu) const {
    const int d = group_.dim();
    const Vec<double> nu_dot = rhs(nu);
    double worst = 0.0;
    for (int j = 0; j < d; ++j) {
        Vec<double> w = orbit_tangent(nu, unit<double>(d, j));
        double dR = routhian(lift(nu, w)).du;
        worst = std::max(worst, std::abs(reduced_form(nu, nu_dot, w) - dR));
    }
    return worst;
}

Trajectory GroupReducedSystem::integrate(const Vec<double>& nu0, double t0, double t1, double h) const {
    Trajectory tr = rk4_integrate([this](double, const Vec<double>& nu) { return rhs(nu); }, nu0, t0, t1, h);
    std::vector<double> e;
    for (const auto& nu : tr.states) e.push_back(energy(nu));
    tr.audits.emplace_back("energy", std::move(e));
    return tr;
}

GroupReducedSystem group_config_reduce(const ScalarField& ell, const LieGroupModel& group, const SmoothMap& delta,
                                       ActionSide side) {
    return GroupReducedSystem(group, ell, delta, side);
}

}  // namespace routh
