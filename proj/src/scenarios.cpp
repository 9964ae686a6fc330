#include "routh/scenarios.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

namespace routh {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_number(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v))
        throw ConfigurationError("key '" + key + "': '" + text + "' is not a finite number");
    return v;
}

Vec<double> parse_list(const std::string& key, const std::string& text) {
    Vec<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
    return out;
}

std::string fmt(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

std::string fmt_vec(const Vec<double>& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + ")";
}

double max_abs_diff(const Vec<double>& a, const Vec<double>& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

constexpr double kPi = std::numbers::pi;

StateSampler box_sampler(int n, Vec<double> lo, Vec<double> hi) {
    return [n, lo, hi](std::mt19937_64& rng) {
        Vec<double> x(lo.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::uniform_real_distribution<double>(lo[i], hi[i])(rng);
        return State::unflat(x, n, 0);
    };
}

// ---------------------------------------------------------------------------
// Spring pendulum: Q = (r, theta), the circle rotates theta.
// ---------------------------------------------------------------------------

void build_spring(Scenario& sc) {
    const double m = sc.cfg.m, k = sc.cfg.k;
    auto domain = [](const Vec<double>& x) { return x[0] > 0.0; };
    BundleChart chart = BundleChart::make({"r", "theta"}, {}, domain);
    ScalarField L = ScalarField::from(4, [m, k](auto x) {
        return 0.5 * m * (x[2] * x[2] + x[0] * x[0] * x[3] * x[3]) - 0.5 * k * x[0] * x[0];
    });
    auto sys = MagneticLagrangianSystem::lagrangian(chart, L);
    SmoothMap rot = SmoothMap::from(3, 2, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[1], x[2] + x[0]};
    });
    GroupAction action = GroupAction::make(LieGroupModel::circle(), 2, ActionSide::Right, rot, domain);
    PrincipalConnection conn{SmoothMap::from(4, 1, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[3]};
    })};
    sc.setup = SymmetrySetup::make(sys, action, action, conn, {},
                                   box_sampler(2, {0.5, -kPi, -1.0, -1.0}, {2.0, kPi, 1.0, 1.0}));
    sc.description = "spring pendulum in the plane, reduced by rotations";

    SmoothMap radius = SmoothMap::from(2, 1, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[0]};
    });
    SmoothMap at_zero_angle = SmoothMap::from(1, 2, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[0], T(0.0)};
    });
    sc.charts = QuotientChartData{radius, at_zero_angle, radius, at_zero_angle, {"r"}, {}};
    if (sc.cfg.initial.empty()) sc.initial = {1.0, 0.0, 0.0, 1.0};
}

// ---------------------------------------------------------------------------
// Elroy's beanie: Q = SE(2) x S^1 with coordinates (x, y, theta, psi).
// ---------------------------------------------------------------------------

void build_beanie(Scenario& sc) {
    const double m = sc.cfg.m, I1 = sc.cfg.I1, I2 = sc.cfg.I2;
    BundleChart chart = BundleChart::make({"x", "y", "theta", "psi"});
    ScalarField L = ScalarField::from(8, [m, I1, I2](auto x) {
        using std::cos;
        return 0.5 * m * (x[4] * x[4] + x[5] * x[5]) + 0.5 * I1 * x[6] * x[6] +
               0.5 * I2 * (x[6] + x[7]) * (x[6] + x[7]) - (1.0 - cos(x[3]));
    });
    auto sys = MagneticLagrangianSystem::lagrangian(chart, L);
    const LieGroupModel se2 = LieGroupModel::se2();
    SmoothMap act = SmoothMap::from(7, 4, [se2](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> r = se2.compose(Vec<T>{x[0], x[1], x[2]}, Vec<T>{x[3], x[4], x[5]});
        return Vec<T>{r[0], r[1], r[2], x[6]};
    });
    GroupAction action = GroupAction::make(se2, 4, ActionSide::Left, act);
    PrincipalConnection conn{SmoothMap::from(8, 3, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[4] + x[1] * x[6], x[5] - x[0] * x[6], x[6]};
    })};
    sc.setup = SymmetrySetup::make(
        sys, action, action, conn, {},
        box_sampler(4, {-1.0, -1.0, -kPi, -kPi, -1.0, -1.0, -1.0, -1.0}, {1.0, 1.0, kPi, kPi, 1.0, 1.0, 1.0, 1.0}));
    sc.description = "Elroy's beanie: two planar bodies joined at their centre of mass, SE(2) symmetry";

    if (sc.cfg.initial.empty()) {
        const Vec<double> mu = sc.cfg.mu.empty() ? Vec<double>{1.0, 0.3, 0.7} : sc.cfg.mu;
        if (mu.size() != 3) throw ConfigurationError("momentum.mu must have 3 components for elroy_beanie");
        const double psi = 0.5, psidot = 0.2;
        const double thetadot = (mu[2] - I2 * psidot) / (I1 + I2);
        sc.initial = {0.0, 0.0, 0.0, psi, mu[0] / m, mu[1] / m, thetadot, psidot};
    }
}

void finish_beanie(Scenario& sc) {
    const Vec<double>& mu = sc.mu;
    if (std::abs(mu[0] - 1.0) > 1e-12)
        throw ConfigurationError("elroy_beanie quotient charts are written for mu_1 = 1 (got " + fmt(mu[0]) + ")");
    const double mu2 = mu[1];
    SmoothMap project_P = SmoothMap::from(4, 3, [mu2](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[3], x[1] - mu2 * x[0], x[2]};
    });
    SmoothMap section_P = SmoothMap::from(3, 4, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{T(0.0), x[1], x[2], x[0]};
    });
    SmoothMap project_Q = SmoothMap::from(4, 1, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[3]};
    });
    SmoothMap section_Q = SmoothMap::from(1, 4, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{T(0.0), T(0.0), T(0.0), x[0]};
    });
    sc.charts = QuotientChartData{project_P, section_P, project_Q, section_Q, {"psi"}, {"yp", "theta"}};

    // First stage by the translations K = R^2.
    SmoothMap embed = SmoothMap::from(2, 3, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[0], x[1], T(0.0)};
    });
    Matrix incl(3, 2);
    incl(0, 0) = 1.0;
    incl(1, 1) = 1.0;
    PrincipalConnection conn1{SmoothMap::from(8, 2, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[4], x[5]};
    })};
    SmoothMap drop_translation = SmoothMap::from(4, 2, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[2], x[3]};
    });
    SmoothMap at_origin = SmoothMap::from(2, 4, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{T(0.0), T(0.0), x[0], x[1]};
    });
    QuotientChartData charts1{drop_translation, at_origin, drop_translation, at_origin, {"theta", "psi"}, {}};
    const Vec<double> nu_bar = sc.cfg.nu_bar.empty() ? Vec<double>{mu[0], mu[1]} : sc.cfg.nu_bar;
    sc.plan = StagesPlan::make(sc.setup, LieGroupModel::real(2), embed, incl, mu, incl, Matrix(0, 2), nu_bar, conn1,
                               charts1);
}

// ---------------------------------------------------------------------------
// Disc in a potential flow with circulation: Q = Heisenberg group (x, y, s).
// ---------------------------------------------------------------------------

void build_heisenberg(Scenario& sc) {
    const double A = sc.cfg.A, B = sc.cfg.B, C = sc.cfg.C, G = sc.cfg.Gamma;
    BundleChart chart = BundleChart::make({"x", "y", "s"});
    ScalarField L = ScalarField::from(6, [A, B, C](auto x) {
        auto w = x[5] - 0.5 * (x[0] * x[4] - x[1] * x[3]);
        return 0.5 * (A * x[3] * x[3] + 2.0 * B * x[3] * x[4] + C * x[4] * x[4]) + 0.5 * w * w;
    });
    auto sys = MagneticLagrangianSystem::lagrangian(chart, L);
    const LieGroupModel H = LieGroupModel::heisenberg();
    GroupAction action = self_action(H, ActionSide::Left);
    sc.setup = SymmetrySetup::make(sys, action, action, maurer_cartan(H, ActionSide::Left), {},
                                   box_sampler(3, {-1, -1, -1, -1, -1, -1}, {1, 1, 1, 1, 1, 1}));
    sc.description = "circular disc in a potential flow with circulation, configuration space the Heisenberg group";
    sc.group_configuration = true;
    if (sc.cfg.initial.empty()) {
        const double x = 0.1, y = -0.2, vx = 0.3, vy = 0.4;
        sc.initial = {x, y, 0.0, vx, vy, G + 0.5 * (x * vy - y * vx)};
    }
}

void finish_heisenberg(Scenario& sc) {
    const double G = sc.cfg.Gamma;
    if (std::abs(sc.mu[2] - G) > 1e-9)
        throw ConfigurationError("heisenberg_body: the central momentum component must equal params.Gamma");
    SmoothMap embed = SmoothMap::from(1, 3, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{T(0.0), T(0.0), x[0]};
    });
    Matrix incl(3, 1);
    incl(2, 0) = 1.0;
    Matrix iso(3, 3);
    for (int i = 0; i < 3; ++i) iso(i, i) = 1.0;
    Matrix quotient(2, 3);
    quotient(0, 0) = 1.0;
    quotient(1, 1) = 1.0;
    PrincipalConnection conn1{SmoothMap::from(6, 1, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[5] - 0.5 * (x[0] * x[4] - x[1] * x[3])};
    })};
    SmoothMap drop_flux = SmoothMap::from(3, 2, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[0], x[1]};
    });
    SmoothMap zero_flux = SmoothMap::from(2, 3, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{x[0], x[1], T(0.0)};
    });
    QuotientChartData charts1{drop_flux, zero_flux, drop_flux, zero_flux, {"x", "y"}, {}};
    const Vec<double> nu_bar = sc.cfg.nu_bar.empty() ? Vec<double>{0.0, 0.0, G} : sc.cfg.nu_bar;
    StagesPlan plan = StagesPlan::make(sc.setup, LieGroupModel::real(1), embed, incl, sc.mu, iso, quotient, nu_bar,
                                       conn1, charts1);
    plan.residual_group = LieGroupModel::real(2);
    plan.residual_lift = zero_flux;
    plan.connection2 = maurer_cartan(plan.residual_group, ActionSide::Left);
    plan.group_configuration = true;
    sc.plan = std::move(plan);
}

/// Lagrangian on the algebra: L restricted to the identity.
ScalarField algebra_lagrangian(const SymmetrySetup& setup) {
    const ScalarField L = setup.sys.L;
    const int d = setup.group.dim();
    return ScalarField::from(d, [L, d](auto xi) {
        using T = elem_t<decltype(xi)>;
        Vec<T> x(static_cast<std::size_t>(d), T(0.0));
        x.insert(x.end(), xi.begin(), xi.end());
        return L(x);
    });
}

/// Trivialised velocity matching the symmetry side (g^{-1} gdot for left actions).
Vec<double> trivialised_velocity(const LieGroupModel& G, ActionSide side, const Vec<double>& g,
                                 const Vec<double>& gdot) {
    Vec<Dual<double>> moving = lift(g, gdot);
    Vec<Dual<double>> inv = lift(G.inverse(g));
    return du_part(side == ActionSide::Left ? G.compose(inv, moving) : G.compose(moving, inv));
}

}  // namespace

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

ScenarioConfig ScenarioConfig::parse(const std::string& text) {
    ScenarioConfig c;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigurationError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) throw ConfigurationError("duplicate key '" + key + "'");
        if (key == "scenario") c.scenario = value;
        else if (key == "params.m") c.m = parse_number(key, value);
        else if (key == "params.k") c.k = parse_number(key, value);
        else if (key == "params.I1") c.I1 = parse_number(key, value);
        else if (key == "params.I2") c.I2 = parse_number(key, value);
        else if (key == "params.A") c.A = parse_number(key, value);
        else if (key == "params.B") c.B = parse_number(key, value);
        else if (key == "params.C") c.C = parse_number(key, value);
        else if (key == "params.Gamma") c.Gamma = parse_number(key, value);
        else if (key == "momentum.mu") c.mu = parse_list(key, value);
        else if (key == "momentum.nu_bar") c.nu_bar = parse_list(key, value);
        else if (key == "initial.state") c.initial = parse_list(key, value);
        else if (key == "integrator.h") c.h = parse_number(key, value);
        else if (key == "integrator.tmax") c.tmax = parse_number(key, value);
        else if (key == "sampling.seed") {
            const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), c.seed);
            if (ec != std::errc() || ptr != value.data() + value.size())
                throw ConfigurationError("sampling.seed must be an unsigned integer");
        } else if (key == "output.path") c.out = value;
        else throw ConfigurationError("unknown key '" + key + "'");
    }
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigurationError("cannot read config file " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

void ScenarioConfig::validate() const {
    std::vector<std::string> bad;
    const auto& ids = scenario_ids();
    if (scenario == "custom")
        bad.push_back("scenario 'custom' is assembled through the library interface, not the command line");
    else if (std::find(ids.begin(), ids.end(), scenario) == ids.end())
        bad.push_back("unknown scenario '" + scenario + "'");
    if (!(m > 0)) bad.push_back("params.m must be positive");
    if (!(k > 0)) bad.push_back("params.k must be positive");
    if (!(I1 > 0)) bad.push_back("params.I1 must be positive");
    if (!(I2 > 0)) bad.push_back("params.I2 must be positive");
    if (!(A > 0) || !(A * C - B * B > 0)) bad.push_back("mass matrix [[A, B], [B, C]] must be positive definite");
    if (!(h > 0)) bad.push_back("integrator.h must be positive");
    if (!(tmax > 0)) bad.push_back("integrator.tmax must be positive");
    if (bad.empty()) return;
    std::string msg = "invalid configuration:";
    for (const auto& b : bad) msg += "\n  - " + b;
    throw ConfigurationError(msg);
}

const std::vector<std::string>& scenario_ids() {
    static const std::vector<std::string> ids{"spring_pendulum", "elroy_beanie", "heisenberg_body"};
    return ids;
}

// ---------------------------------------------------------------------------
// Scenario assembly
// ---------------------------------------------------------------------------

Scenario build_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    Scenario sc;
    sc.id = cfg.scenario;
    sc.cfg = cfg;
    sc.initial = cfg.initial;
    if (sc.id == "spring_pendulum") build_spring(sc);
    else if (sc.id == "elroy_beanie") build_beanie(sc);
    else build_heisenberg(sc);

    const int n = sc.setup.sys.n();
    if (static_cast<int>(sc.initial.size()) != 2 * n)
        throw ConfigurationError("initial.state must have " + std::to_string(2 * n) + " components");
    const State s0 = State::unflat(sc.initial, n, 0);
    sc.setup.sys.require_domain(s0);
    const Vec<double> J0 = momentum_map(sc.setup, s0);
    if (!cfg.mu.empty()) {
        if (cfg.mu.size() != J0.size())
            throw ConfigurationError("momentum.mu must have " + std::to_string(J0.size()) + " components");
        if (max_abs_diff(cfg.mu, J0) > 1e-9)
            throw ConfigurationError("momentum.mu " + fmt_vec(cfg.mu) + " differs from the momentum of the initial state " +
                                     fmt_vec(J0));
    }
    sc.mu = J0;
    if (sc.id == "elroy_beanie") finish_beanie(sc);
    if (sc.id == "heisenberg_body") finish_heisenberg(sc);
    return sc;
}

DirectReduction direct_reduction(const Scenario& sc) {
    if (sc.group_configuration)
        return group_config_reduce(algebra_lagrangian(sc.setup), sc.setup.group, sc.setup.delta, sc.setup.actionQ.side);
    return routh_reduce(sc.setup, sc.mu, *sc.charts, sc.cfg.seed);
}

Vec<double> direct_initial(const Scenario& sc, const DirectReduction& direct) {
    const int n = sc.setup.sys.n();
    const State s0 = State::unflat(sc.initial, n, 0);
    if (const auto* pkg = std::get_if<ReducedSystemPackage>(&direct)) return pkg->project_state(s0).flat();
    const auto& grs = std::get<GroupReducedSystem>(direct);
    const Vec<double> xi = trivialised_velocity(grs.group(), grs.side(), s0.q, s0.v);
    return gradient(grs.ell(), xi);
}

StateMap stages_map(const Scenario& sc, const DirectReduction& direct, const FirstStage& first) {
    const ReducedSystemPackage pkg1 = first.pkg1;
    const int n = sc.setup.sys.n(), k = sc.setup.sys.k();
    if (const auto* pkg = std::get_if<ReducedSystemPackage>(&direct)) {
        // Quotient-chart bookkeeping: lift to the level set of mu, project by K_nu.
        const ReducedSystemPackage pkg0 = *pkg;
        return [pkg0, pkg1](const Vec<double>& x) {
            const State s = pkg0.lift_state(State::unflat(x, pkg0.reduced.n(), pkg0.reduced.k()));
            return pkg1.project_state(s).flat();
        };
    }
    // Group configuration: nu -> state at the identity -> first stage -> algebra momentum.
    const GroupReducedSystem grs = std::get<GroupReducedSystem>(direct);
    const LieGroupModel G = sc.setup.group;
    return [grs, pkg1, G, n, k](const Vec<double>& nu) {
        State s;
        s.q = G.identity<double>();
        s.v = grs.chi(nu);
        s.p = Vec<double>(static_cast<std::size_t>(k), 0.0);
        (void)n;
        const State s1 = pkg1.project_state(s);
        return detail::legendre_generic(pkg1.reduced.L, s1.q, s1.v, s1.p);
    };
}

std::pair<StateMap, StateMap> stages_base_maps(const Scenario& sc) {
    if (sc.id != "elroy_beanie") return {};
    StateMap direct_base = [](const Vec<double>& x) { return Vec<double>{x[0]}; };
    StateMap tau = [](const Vec<double>& x) { return Vec<double>{x[1]}; };
    return {direct_base, tau};
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

namespace oracles {

double spring_routhian(const ScenarioConfig& c, double mu, double r, double rdot) {
    return 0.5 * c.m * rdot * rdot - 0.5 * c.k * r * r - mu * mu / (2.0 * c.m * r * r);
}

double beanie_L0(const ScenarioConfig& c, const Vec<double>& mu, const Vec<double>& s) {
    const double psi = s[0], psidot = s[1], yp = s[2];
    const double I = c.I1 + c.I2;
    return 0.5 * c.I1 * c.I2 / I * psidot * psidot + c.I2 * (mu[2] + yp) / I * psidot -
           ((1.0 - std::cos(psi)) + 0.5 * (mu[2] + yp) * (mu[2] + yp) / I);
}

double beanie_L1(const ScenarioConfig& c, const Vec<double>& s) {
    const double psi = s[1], thetadot = s[2], psidot = s[3];
    return 0.5 * c.I1 * thetadot * thetadot + 0.5 * c.I2 * (thetadot + psidot) * (thetadot + psidot) -
           (1.0 - std::cos(psi));
}

Vec<double> beanie_normal_form(const ScenarioConfig& c, const Vec<double>& mu, const Vec<double>& s) {
    const double psi = s[0], psidot = s[1], yp = s[2];
    const double I = c.I1 + c.I2;
    const double ypdot = 0.0;
    return {ypdot, (yp + mu[2] - c.I2 * psidot) / I, -I / (c.I1 * c.I2) * std::sin(psi) - ypdot / c.I1};
}

double heisenberg_kinetic(const ScenarioConfig& c, const Vec<double>& s) {
    const double vx = s[2], vy = s[3];
    return 0.5 * (c.A * vx * vx + 2.0 * c.B * vx * vy + c.C * vy * vy);
}

Vec<double> heisenberg_velocity(const ScenarioConfig& c, const Vec<double>& v0, double t) {
    const double det = c.A * c.C - c.B * c.B;
    // A_flow = Gamma M^{-1} [[0, -1], [1, 0]]
    const double g = c.Gamma / det;
    const double a00 = g * (-c.B), a01 = g * (-c.C), a10 = g * c.A, a11 = g * c.B;
    const double w = std::abs(c.Gamma) / std::sqrt(det);
    const double cw = std::cos(w * t), sw = w > 0 ? std::sin(w * t) / w : t;
    return {cw * v0[0] + sw * (a00 * v0[0] + a01 * v0[1]), cw * v0[1] + sw * (a10 * v0[0] + a11 * v0[1])};
}

}  // namespace oracles

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

void write_csv(std::ostream& os, const std::vector<std::string>& columns, const Trajectory& tr) {
    for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << "\n";
    const auto old_flags = os.flags();
    const auto old_prec = os.precision();
    os << std::setprecision(17);
    for (std::size_t r = 0; r < tr.size(); ++r) {
        os << tr.times[r];
        for (double x : tr.states[r]) os << "," << x;
        for (const auto& a : tr.audits) os << "," << a.second[r];
        os << "\n";
    }
    os.flags(old_flags);
    os.precision(old_prec);
}

Trajectory simulate(const Scenario& sc, std::vector<std::string>& columns) {
    const auto& sys = sc.setup.sys;
    Trajectory tr = integrate(sys, State::unflat(sc.initial, sys.n(), sys.k()), 0.0, sc.cfg.tmax, sc.cfg.h);
    columns = state_column_names(sys.chart);
    const int d = sc.setup.group.dim();
    std::vector<std::vector<double>> J(static_cast<std::size_t>(d));
    for (const auto& x : tr.states) {
        Vec<double> j = momentum_map(sc.setup, State::unflat(x, sys.n(), sys.k()));
        for (int a = 0; a < d; ++a) J[a].push_back(j[a]);
    }
    for (int a = 0; a < d; ++a)
        tr.audits.emplace_back(d == 1 ? std::string("J") : "J" + std::to_string(a + 1), std::move(J[a]));
    for (const auto& a : tr.audits) columns.push_back(a.first);
    return tr;
}

namespace {

void describe_package(std::ostringstream& os, const ReducedSystemPackage& pkg, std::uint64_t seed) {
    os << "momentum: " << fmt_vec(pkg.mu) << "\n";
    os << "isotropy algebra basis (columns of g):\n";
    for (int c = 0; c < pkg.isotropy.cols; ++c) {
        Vec<double> col(pkg.isotropy.rows);
        for (int r = 0; r < pkg.isotropy.rows; ++r) col[r] = pkg.isotropy(r, c);
        os << "  " << fmt_vec(col) << "\n";
    }
    const auto& red = pkg.reduced;
    os << "reduced coordinates: base";
    for (const auto& q : red.chart.q_names) os << " " << q;
    os << "; fiber";
    for (const auto& p : red.chart.p_names) os << " " << p;
    os << "\n";
    std::mt19937_64 rng(seed);
    const StateSampler sampler = pkg.sampler();
    const State ref = sampler(rng);
    const Matrix Bm = red.B.matrix(ref.point());
    os << "reduced 2-form at reference point " << fmt_vec(ref.point()) << ":\n";
    for (int i = 0; i < Bm.rows; ++i) {
        os << " ";
        for (int j = 0; j < Bm.cols; ++j) os << " " << fmt(Bm(i, j));
        os << "\n";
    }
    os << "Routhian at reference states (q, v, p) -> value:\n";
    os << "  " << fmt_vec(ref.flat()) << " -> " << fmt(red.L(detail::concat(ref.q, ref.v, ref.p))) << "\n";
    for (int t = 0; t < 4; ++t) {
        const State s = sampler(rng);
        os << "  " << fmt_vec(s.flat()) << " -> " << fmt(red.L(detail::concat(s.q, s.v, s.p))) << "\n";
    }
}

void describe_invariance(std::ostringstream& os, const SymmetrySetup& setup, std::uint64_t seed) {
    const InvarianceReport inv = invariance_check(setup, 100, seed);
    os << "invariance residuals (100 samples, tolerance " << fmt(inv.tolerance) << "):\n";
    for (const auto& [name, value] : inv.residuals) os << "  " << name << ": " << fmt(value) << "\n";
}

}  // namespace

std::string reduction_report(const Scenario& sc, const std::string& group) {
    std::ostringstream os;
    os << "scenario: " << sc.id << "\n";
    os << "seed: " << sc.cfg.seed << "\n";
    if (group == "full") {
        os << "group: " << sc.setup.group.name() << "\n";
        describe_invariance(os, sc.setup, sc.cfg.seed);
        const DirectReduction direct = direct_reduction(sc);
        if (const auto* pkg = std::get_if<ReducedSystemPackage>(&direct)) {
            describe_package(os, *pkg, sc.cfg.seed);
        } else {
            const auto& grs = std::get<GroupReducedSystem>(direct);
            os << "momentum of the initial state: " << fmt_vec(sc.mu) << "\n";
            os << "reduced on the dual of the algebra; cocycle matrix:\n";
            for (int i = 0; i < grs.sigma().rows; ++i) {
                os << " ";
                for (int j = 0; j < grs.sigma().cols; ++j) os << " " << fmt(grs.sigma()(i, j));
                os << "\n";
            }
            const Vec<double> nu0 = direct_initial(sc, direct);
            os << "initial algebra momentum: " << fmt_vec(nu0) << "\n";
            os << "Routhian at initial momentum: " << fmt(grs.routhian(nu0)) << "\n";
        }
    } else if (group == "normal") {
        if (!sc.plan) throw ConfigurationError("scenario " + sc.id + " has no normal subgroup declared");
        os << "group: normal subgroup " << sc.plan->subgroup.name() << " of " << sc.setup.group.name() << "\n";
        const FirstStage first = first_stage(*sc.plan, sc.cfg.seed);
        describe_invariance(os, first.k_setup, sc.cfg.seed);
        describe_package(os, first.pkg1, sc.cfg.seed);
    } else {
        throw ConfigurationError("--group must be 'full' or 'normal'");
    }
    return os.str();
}

StagesReport run_stages(const Scenario& sc) {
    if (!sc.plan) throw ConfigurationError("scenario " + sc.id + " has no reduction by stages");
    const StagesPlan& plan = *sc.plan;
    const FirstStage first = first_stage(plan, sc.cfg.seed);
    const Vec<double> rho = compatible_rho(plan);
    const SecondStage second = second_stage(first, plan, rho);
    const DirectReduction direct = direct_reduction(sc);
    const StateMap F = stages_map(sc, direct, first);

    std::vector<Vec<double>> ics{direct_initial(sc, direct)};
    std::mt19937_64 rng(sc.cfg.seed);
    if (const auto* pkg = std::get_if<ReducedSystemPackage>(&direct)) {
        ics.push_back(pkg->sampler()(rng).flat());
    } else {
        // A sampled velocity on the level of the central momentum.
        const State s = sc.setup.sampler(rng);
        Scenario moved = sc;
        moved.initial = detail::concat(s.q, s.v);
        const int n = sc.setup.sys.n();
        const Vec<double> J = momentum_map(sc.setup, State::unflat(moved.initial, n, 0));
        moved.initial.back() += sc.mu[2] - J[2];
        ics.push_back(direct_initial(moved, direct));
    }
    const ReducedFlow direct_flow = std::holds_alternative<ReducedSystemPackage>(direct)
                                        ? ReducedFlow::of(std::get<ReducedSystemPackage>(direct).reduced)
                                        : ReducedFlow::of(std::get<GroupReducedSystem>(direct));
    const auto [direct_base, tau] = stages_base_maps(sc);
    return stages_equivalence_check(plan, first, direct_flow, ReducedFlow::of(second), F, ics, 0.0, sc.cfg.tmax,
                                    sc.cfg.h, direct_base, tau, sc.cfg.seed);
}

VerifyResult verify_scenario(const Scenario& sc, bool stages) {
    StagesReport rep;
    const InvarianceReport inv = invariance_check(sc.setup, 100, sc.cfg.seed);
    double worst_inv = 0.0;
    for (const auto& r : inv.residuals) worst_inv = std::max(worst_inv, r.second);
    rep.add("invariance suite (100 samples)", worst_inv, inv.tolerance);

    std::vector<std::string> columns;
    const Trajectory full = simulate(sc, columns);
    const auto& e = full.audit("energy");
    double drift = 0.0;
    for (double x : e) drift = std::max(drift, std::abs(x - e.front()));
    rep.add("full-system energy drift", drift, 1e-6);
    double jdrift = 0.0;
    for (const auto& [name, col] : full.audits) {
        if (name == "energy") continue;
        if (sc.group_configuration && name != "J3") continue;  // only the central component is conserved in value
        for (double x : col) jdrift = std::max(jdrift, std::abs(x - col.front()));
    }
    rep.add("momentum audit", jdrift, 1e-8);

    const DirectReduction direct = direct_reduction(sc);
    const int n = sc.setup.sys.n();
    double sup = 0.0;
    if (const auto* pkg = std::get_if<ReducedSystemPackage>(&direct)) {
        const Trajectory red = integrate(pkg->reduced, pkg->project_state(State::unflat(sc.initial, n, 0)), 0.0,
                                         sc.cfg.tmax, sc.cfg.h);
        for (std::size_t i = 0; i < red.size(); ++i) {
            const Vec<double> proj = pkg->project_state(State::unflat(full.states[i], n, 0)).flat();
            sup = std::max(sup, max_abs_diff(proj, red.states[i]));
        }
    } else {
        const auto& grs = std::get<GroupReducedSystem>(direct);
        const Trajectory red = grs.integrate(direct_initial(sc, direct), 0.0, sc.cfg.tmax, sc.cfg.h);
        for (std::size_t i = 0; i < red.size(); ++i) {
            const State s = State::unflat(full.states[i], n, 0);
            const Vec<double> nu = gradient(grs.ell(), trivialised_velocity(grs.group(), grs.side(), s.q, s.v));
            sup = std::max(sup, max_abs_diff(nu, red.states[i]));
        }
    }
    rep.add("reduced flow vs projected full flow (sup norm)", sup, 1e-6);

    VerifyResult out;
    std::ostringstream os;
    os << "scenario: " << sc.id << "\nseed: " << sc.cfg.seed << "\n";
    if (!inv.pass())
        for (const auto& v : inv.violations()) os << "invariance violation: " << v << "\n";
    os << rep.to_text();
    bool pass = rep.pass();
    if (stages) {
        const StagesReport st = run_stages(sc);
        os << "reduction by stages:\n" << st.to_text();
        pass = pass && st.pass();
    }
    out.pass = pass;
    out.text = os.str();
    return out;
}

}  // namespace routh
