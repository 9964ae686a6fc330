#include "routh/stages.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <iomanip>

namespace routh {

namespace {

double max_abs(const Vec<double>& a) {
    double w = 0.0;
    for (double x : a) w = std::max(w, std::abs(x));
    return w;
}

Vec<double> minus(const Vec<double>& a, const Vec<double>& b) {
    Vec<double> r(a);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
    return r;
}

Matrix pseudo_inverse(const Matrix& m) {
    Matrix out(m.cols, m.rows);
    for (int j = 0; j < m.rows; ++j) {
        Vec<double> col = least_squares(m, unit<double>(m.rows, j));
        for (int i = 0; i < m.cols; ++i) out(i, j) = col[i];
    }
    return out;
}

Matrix column(const Matrix& m, int c) {
    Matrix r(m.rows, 1);
    for (int i = 0; i < m.rows; ++i) r(i, 0) = m(i, c);
    return r;
}

Vec<double> column_vec(const Matrix& m, int c) {
    Vec<double> r(m.rows);
    for (int i = 0; i < m.rows; ++i) r[i] = m(i, c);
    return r;
}

/// Restrict an action of G to a subgroup via a coordinate embedding.
GroupAction restrict_action(const GroupAction& action, const LieGroupModel& sub, const SmoothMap& embed) {
    const int dk = sub.dim(), dg = action.group.dim(), m = action.manifold_dim;
    SmoothMap act = SmoothMap::from(dk + m, m, [action, embed, dk, dg](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> k(x.begin(), x.begin() + dk);
        Vec<T> pt(x.begin() + dk, x.end());
        Vec<T> g = embed(k);
        (void)dg;
        return action.apply(g, pt);
    });
    return GroupAction::make(sub, m, action.side, act, action.domain);
}

/// -<nu, A1(q)(xi_Q(q))> + <nu_bar, rep> for each residual basis element.
struct InducedPotential {
    GroupAction actionQ;
    PrincipalConnection connection1;
    Vec<double> nu;
    Matrix rep_in_g;        // dim g x dim gbar
    Vec<double> nu_bar_rep; // <nu_bar, representative> per residual basis element

    template <class T>
    Vec<T> at_q(const Vec<T>& q) const {
        Mat<T> Xi = fundamental_matrix(actionQ, q);
        Mat<T> A1 = connection1.matrix(q);
        const int db = rep_in_g.cols;
        Vec<T> out(static_cast<std::size_t>(db), T(0.0));
        for (int b = 0; b < db; ++b) {
            Vec<T> xiQ(q.size(), T(0.0));
            for (int i = 0; i < Xi.rows; ++i)
                for (int a = 0; a < Xi.cols; ++a) xiQ[i] += Xi(i, a) * rep_in_g(a, b);
            Vec<T> a1 = matvec(A1, xiQ);
            T s(0.0);
            for (std::size_t c = 0; c < a1.size(); ++c) s += nu[c] * a1[c];
            out[b] = nu_bar_rep[b] - s;
        }
        return out;
    }
};

}  // namespace

StagesPlan StagesPlan::make(SymmetrySetup setup, LieGroupModel subgroup, SmoothMap subgroup_embedding,
                            Matrix inclusion, Vec<double> mu, Matrix isotropy, Matrix quotient, Vec<double> nu_bar,
                            PrincipalConnection connection1, QuotientChartData charts1) {
    const int dg = setup.group.dim(), dk = subgroup.dim();
    if (inclusion.rows != dg || inclusion.cols != dk) throw ConfigurationError("inclusion must be dim g x dim k");
    if (static_cast<int>(mu.size()) != dg) throw ConfigurationError("momentum has wrong dimension");
    if (isotropy.rows != dg) throw ConfigurationError("isotropy basis must live in g");
    if (quotient.cols != isotropy.cols) throw ConfigurationError("r'_nu must act on the isotropy algebra");
    if (static_cast<int>(nu_bar.size()) != isotropy.cols) throw ConfigurationError("nu_bar must be in g_nu*");
    if (subgroup_embedding.in_dim() != dk || subgroup_embedding.out_dim() != dg)
        throw ConfigurationError("subgroup embedding has wrong dimensions");

    StagesPlan plan;
    plan.nu = matvec(transpose(inclusion), mu);
    // g_nu must fix nu: <mu, [xi, i kappa]> = 0.
    for (int c = 0; c < isotropy.cols; ++c)
        for (int b = 0; b < dk; ++b) {
            double r = dot(mu, setup.group.bracket(column_vec(isotropy, c), column_vec(inclusion, b)));
            if (std::abs(r) > 1e-10) throw ConfigurationError("declared isotropy algebra does not fix nu");
        }
    std::mt19937_64 rng(11);
    for (int t = 0; t < 5; ++t) {
        State s = setup.sampler(rng);
        if (max_abs(setup.delta(s.point())) > 0.0)
            throw ConfigurationError("reduction by stages is implemented for a vanishing potential on the full system");
    }
    plan.setup = std::move(setup);
    plan.subgroup = std::move(subgroup);
    plan.subgroup_embedding = std::move(subgroup_embedding);
    plan.inclusion = std::move(inclusion);
    plan.mu = std::move(mu);
    plan.isotropy = std::move(isotropy);
    plan.quotient = std::move(quotient);
    plan.nu_bar = std::move(nu_bar);
    plan.connection1 = std::move(connection1);
    plan.charts1 = std::move(charts1);
    if (plan.restriction_residual() > 1e-12)
        throw ConfigurationError("nu_bar restricted to k_nu differs from nu");
    return plan;
}

double StagesPlan::restriction_residual() const {
    Matrix kernel = null_space(quotient, 1e-10);  // k_nu in g_nu coordinates
    double worst = 0.0;
    for (int c = 0; c < kernel.cols; ++c) {
        Vec<double> in_gnu = column_vec(kernel, c);
        Vec<double> in_g = matvec(isotropy, in_gnu);
        worst = std::max(worst, std::abs(dot(nu_bar, in_gnu) - dot(mu, in_g)));
    }
    return worst;
}

PrincipalConnection maurer_cartan(const LieGroupModel& group, ActionSide side) {
    const int d = group.dim();
    SmoothMap value = SmoothMap::from(2 * d, d, [group, side, d](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> out(static_cast<std::size_t>(d), T(0.0));
        if constexpr (depth_available<T, 1>()) {
            Vec<T> q(x.begin(), x.begin() + d), v(x.begin() + d, x.end());
            Vec<Dual<T>> moving = lift(q, v);
            Vec<Dual<T>> inv = lift(group.inverse(q));
            Vec<Dual<T>> prod = side == ActionSide::Left ? group.compose(moving, inv) : group.compose(inv, moving);
            out = du_part(prod);
        } else {
            throw_depth_exceeded();
        }
        return out;
    });
    return {value};
}

FirstStage first_stage(const StagesPlan& plan, std::uint64_t seed) {
    const SymmetrySetup& G = plan.setup;
    const int n = G.sys.n(), dk = plan.subgroup.dim();
    GroupAction aQ = restrict_action(G.actionQ, plan.subgroup, plan.subgroup_embedding);
    GroupAction aP = restrict_action(G.actionP, plan.subgroup, plan.subgroup_embedding);
    const Matrix incl = plan.inclusion;
    SmoothMap delta = G.delta;
    SmoothMap delta_k = SmoothMap::from(G.sys.chart.dim_P(), dk, [delta, incl](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> full = delta(x);
        Vec<T> out(static_cast<std::size_t>(incl.cols), T(0.0));
        for (int b = 0; b < incl.cols; ++b)
            for (int a = 0; a < incl.rows; ++a) out[b] += incl(a, b) * full[a];
        return out;
    });
    SymmetrySetup k_setup = SymmetrySetup::make(G.sys, aQ, aP, plan.connection1, delta_k, G.sampler, G.mechanical);

    // Normality of K and G-equivariance of the K-connection, sampled.
    std::mt19937_64 rng(seed);
    const Matrix pinv = pseudo_inverse(incl);
    for (int t = 0; t < 20; ++t) {
        Vec<double> g = G.group.random_element(rng, 1.0);
        for (int b = 0; b < dk; ++b) {
            Vec<double> moved = G.group.Ad(g, column_vec(incl, b));
            Vec<double> back = matvec(incl, matvec(pinv, moved));
            if (max_abs(minus(moved, back)) > 1e-9)
                throw ConfigurationError("declared subgroup is not normal: Ad_g(k) leaves k");
        }
        State s = G.sampler(rng);
        Vec<double> q2 = G.actionQ.apply(g, s.q);
        Vec<double> v2 = G.actionQ.push_forward(g, s.q, s.v);
        Vec<double> a1 = plan.connection1.value(detail::concat(s.q, s.v));
        Vec<double> a2 = plan.connection1.value(detail::concat(q2, v2));
        Vec<double> ga = G.actionQ.side == ActionSide::Left ? G.group.Ad(g, matvec(incl, a1))
                                                            : G.group.Ad(G.group.inverse(g), matvec(incl, a1));
        if (max_abs(minus(a2, matvec(pinv, ga))) > 1e-8)
            throw ConfigurationError("the connection for the normal subgroup must be G-equivariant");
    }

    FirstStage out{routh_reduce(k_setup, plan.nu, plan.charts1, seed), std::nullopt, k_setup};
    if (plan.residual_dim() == 0) return out;

    const ReducedSystemPackage& pkg1 = out.pkg1;
    const int n1 = pkg1.reduced.n(), N1 = pkg1.reduced.chart.dim_P(), db = plan.residual_dim();
    const QuotientChartData c1 = plan.charts1;
    const SmoothMap lift_g = plan.residual_lift;
    const GroupAction gaQ = G.actionQ, gaP = G.actionP;
    SmoothMap actQ1 = SmoothMap::from(db + n1, n1, [=](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> gb(x.begin(), x.begin() + db), xq(x.begin() + db, x.end());
        return c1.project_Q(gaQ.apply(lift_g(gb), c1.section_Q(xq)));
    });
    SmoothMap actP1 = SmoothMap::from(db + N1, N1, [=](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> gb(x.begin(), x.begin() + db), y(x.begin() + db, x.end());
        return c1.project_P(gaP.apply(lift_g(gb), c1.section_P(y)));
    });
    GroupAction induced_Q = GroupAction::make(plan.residual_group, n1, G.actionQ.side, actQ1);
    GroupAction induced_P = GroupAction::make(plan.residual_group, N1, G.actionQ.side, actP1);

    const Matrix rsec = pseudo_inverse(plan.quotient);  // gbar -> g_nu
    InducedPotential pot{G.actionQ, plan.connection1, plan.nu, matmul(plan.isotropy, rsec), Vec<double>(db, 0.0)};
    for (int b = 0; b < db; ++b) pot.nu_bar_rep[b] = dot(plan.nu_bar, column_vec(rsec, b));
    SmoothMap delta1 = SmoothMap::from(N1, db, [pot, c1, n, db](auto y) {
        using T = elem_t<decltype(y)>;
        Vec<T> out(static_cast<std::size_t>(db), T(0.0));
        if constexpr (depth_available<T, 1>()) {
            Vec<T> pt = c1.section_P(Vec<T>(y.begin(), y.end()));
            out = pot.at_q(Vec<T>(pt.begin(), pt.begin() + n));
        } else {
            throw_depth_exceeded();
        }
        return out;
    });
    out.induced = SymmetrySetup::make(pkg1.reduced, induced_Q, induced_P, plan.connection2, delta1, pkg1.sampler(),
                                      G.mechanical);
    return out;
}

Vec<double> compatible_rho(const StagesPlan& plan) {
    const Vec<double> target = minus(matvec(transpose(plan.isotropy), plan.mu), plan.nu_bar);
    const Matrix rt = transpose(plan.quotient);
    Vec<double> rho = least_squares(rt, target);
    if (max_abs(minus(matvec(rt, rho), target)) > 1e-12)
        throw ConfigurationError("no rho satisfies the compatibility condition");
    return rho;
}

SecondStage second_stage(const FirstStage& first, const StagesPlan& plan, const Vec<double>& rho) {
    if (!first.induced) return first.pkg1;
    const SymmetrySetup& induced = *first.induced;
    if (plan.group_configuration) {
        const auto& L1 = induced.sys.L;
        const int d = plan.residual_group.dim();
        if (induced.sys.k() != 0 || induced.sys.n() != d)
            throw ConfigurationError("group-configuration second stage needs Q/K to be the residual group");
        ScalarField ell = ScalarField::from(d, [L1, d](auto xi) {
            using T = elem_t<decltype(xi)>;
            Vec<T> x(static_cast<std::size_t>(d), T(0.0));
            x.insert(x.end(), xi.begin(), xi.end());
            return L1(x);
        });
        return GroupReducedSystem(plan.residual_group, ell, induced.delta, induced.actionQ.side);
    }
    if (!plan.charts2) throw ConfigurationError("second stage needs quotient charts for the residual group");
    return routh_reduce(induced, rho, *plan.charts2);
}

ReducedFlow ReducedFlow::of(const MagneticLagrangianSystem& sys) {
    return {[sys](const Vec<double>& x0, double t0, double t1, double h) {
                return routh::integrate(sys, State::unflat(x0, sys.n(), sys.k()), t0, t1, h);
            },
            [sys](const Vec<double>& x) { return routh::energy(sys, State::unflat(x, sys.n(), sys.k())); }};
}

ReducedFlow ReducedFlow::of(const GroupReducedSystem& sys) {
    return {[sys](const Vec<double>& x0, double t0, double t1, double h) { return sys.integrate(x0, t0, t1, h); },
            [sys](const Vec<double>& x) { return sys.energy(x); }};
}

ReducedFlow ReducedFlow::of(const SecondStage& stage) {
    if (const auto* pkg = std::get_if<ReducedSystemPackage>(&stage)) return of(pkg->reduced);
    return of(std::get<GroupReducedSystem>(stage));
}

bool StagesReport::pass() const {
    return std::all_of(entries.begin(), entries.end(), [](const Entry& e) { return e.pass(); });
}

std::string StagesReport::to_text() const {
    std::ostringstream os;
    os << std::setprecision(6);
    for (const auto& e : entries)
        os << (e.pass() ? "PASS " : "FAIL ") << e.name << ": " << std::scientific << e.value
           << " (tolerance " << e.tolerance << ")\n";
    os << "overall: " << (pass() ? "PASS" : "FAIL") << "\n";
    return os.str();
}

StagesReport stages_equivalence_check(const StagesPlan& plan, const FirstStage& first, const ReducedFlow& direct,
                                      const ReducedFlow& staged, const StateMap& F_map,
                                      const std::vector<Vec<double>>& ics, double t0, double t1, double h,
                                      const StateMap& direct_base, const StateMap& tau, std::uint64_t seed) {
    StagesReport rep;
    rep.add("nu_bar restriction", plan.restriction_residual(), 1e-12);

    const Vec<double> rho = compatible_rho(plan);
    const Vec<double> target = minus(matvec(transpose(plan.isotropy), plan.mu), plan.nu_bar);
    rep.add("rho compatibility", max_abs(minus(matvec(transpose(plan.quotient), rho), target)), 1e-12);

    std::mt19937_64 rng(seed);
    const StateSampler s1_sampler = first.pkg1.sampler();
    double r_mom = 0.0;
    for (int t = 0; t < 20; ++t) {
        State s1 = s1_sampler(rng);
        State s = first.pkg1.lift_state(s1);
        Vec<double> JG = momentum_map(plan.setup, s);
        Vec<double> rhs = minus(matvec(transpose(plan.isotropy), JG), plan.nu_bar);
        Vec<double> lhs(rhs.size(), 0.0);
        if (first.induced) lhs = matvec(transpose(plan.quotient), momentum_map(*first.induced, s1));
        r_mom = std::max(r_mom, max_abs(minus(lhs, rhs)));
    }
    rep.add("induced momentum identity", r_mom, 1e-8);

    if (first.induced) {
        // delta1 evaluated on Q must be invariant along K_nu orbits.
        const Matrix kernel = null_space(plan.quotient, 1e-10);
        const Matrix knu = matmul(plan.isotropy, kernel);  // k_nu inside g
        const Matrix pinv = pseudo_inverse(plan.inclusion);
        const Matrix rsec = pseudo_inverse(plan.quotient);
        InducedPotential pot{plan.setup.actionQ, plan.connection1, plan.nu, matmul(plan.isotropy, rsec),
                             Vec<double>(plan.residual_dim(), 0.0)};
        for (int b = 0; b < plan.residual_dim(); ++b) pot.nu_bar_rep[b] = dot(plan.nu_bar, column_vec(rsec, b));
        const GroupAction kQ = first.k_setup.actionQ;
        double r_inv = 0.0;
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int t = 0; t < 20; ++t) {
            State s = plan.setup.sampler(rng);
            for (int c = 0; c < knu.cols; ++c) {
                Vec<double> kappa = matvec(pinv, column_vec(knu, c));
                for (auto& x : kappa) x *= u(rng);
                Vec<double> q2 = kQ.apply(plan.subgroup.exp(kappa), s.q);
                r_inv = std::max(r_inv, max_abs(minus(pot.at_q(q2), pot.at_q(s.q))));
            }
        }
        rep.add("delta1 invariance along K_nu orbits", r_inv, 1e-8);
    }

    double sup = 0.0, r_tau = 0.0;
    bool have_ref = false;
    double e_ref = 0.0, e_dev = 0.0;
    for (const auto& ic : ics) {
        Trajectory td = direct.integrate(ic, t0, t1, h);
        Trajectory ts = staged.integrate(F_map(ic), t0, t1, h);
        for (std::size_t i = 0; i < td.size(); ++i) {
            Vec<double> mapped = F_map(td.states[i]);
            sup = std::max(sup, max_abs(minus(mapped, ts.states[i])));
            if (i % 100 == 0) {
                double diff = staged.energy(mapped) - direct.energy(td.states[i]);
                if (!have_ref) {
                    e_ref = diff;
                    have_ref = true;
                }
                e_dev = std::max(e_dev, std::abs(diff - e_ref));
                if (tau && direct_base)
                    r_tau = std::max(r_tau, max_abs(minus(tau(mapped), direct_base(td.states[i]))));
            }
        }
    }
    rep.add("F-relatedness of reduced flows (sup norm)", sup, 1e-6);
    rep.add("energy match modulo constant", e_dev, 1e-6);
    if (tau && direct_base) rep.add("tau fibration", r_tau, 1e-12);
    (void)column;
    return rep;
}

}  // namespace routh
