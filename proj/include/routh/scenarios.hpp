#pragma once
/// @file scenarios.hpp
/// @brief Built-in mechanical scenarios, the flat key=value configuration format,
/// closed-form oracles, and CSV / report output.

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "routh/stages.hpp"

namespace routh {

/// Flat configuration with dotted keys. See README for the grammar.
struct ScenarioConfig {
    std::string scenario = "spring_pendulum";
    // physical parameters
    double m = 1.0, k = 1.0;          ///< spring pendulum mass / stiffness; beanie mass
    double I1 = 2.0, I2 = 1.0;        ///< beanie inertias
    double A = 2.0, B = 0.5, C = 1.0; ///< Heisenberg mass matrix [[A, B], [B, C]]
    double Gamma = 1.0;               ///< circulation
    // momentum values; empty means scenario default
    Vec<double> mu, nu_bar;
    Vec<double> initial;              ///< full-system state (q, v); empty means scenario default
    // integrator
    double h = 1e-3, tmax = 10.0;
    std::uint64_t seed = 20240531;
    std::string out;

    /// Parse `key = value` lines; `#` starts a comment. Throws ConfigurationError.
    static ScenarioConfig parse(const std::string& text);
    static ScenarioConfig load(const std::string& path);
    /// Throws ConfigurationError listing every violated constraint.
    void validate() const;
};

const std::vector<std::string>& scenario_ids();

struct Scenario {
    std::string id;
    std::string description;
    ScenarioConfig cfg;
    SymmetrySetup setup;                       ///< full system with the full symmetry group
    Vec<double> mu;                            ///< momentum used for direct reduction / the stages plan
    Vec<double> initial;                       ///< full flat state (q, v)
    std::optional<QuotientChartData> charts;   ///< direct reduction charts (absent for group configurations)
    std::optional<StagesPlan> plan;            ///< reduction by stages, when the scenario has one
    bool group_configuration = false;          ///< Q is the symmetry group itself
};

/// Build a scenario from a validated configuration. Throws ConfigurationError.
Scenario build_scenario(const ScenarioConfig& cfg);

/// Reduced-space form of the direct reduction: a Routh package or a Lie-algebra system.
using DirectReduction = std::variant<ReducedSystemPackage, GroupReducedSystem>;
DirectReduction direct_reduction(const Scenario& sc);

/// Initial state of the direct reduced flow for the scenario's initial condition.
Vec<double> direct_initial(const Scenario& sc, const DirectReduction& direct);

/// Map from direct reduced states to the state space of the staged reduced flow.
StateMap stages_map(const Scenario& sc, const DirectReduction& direct, const FirstStage& first);

/// Base-point maps for the tau check (empty when the scenario has none).
std::pair<StateMap, StateMap> stages_base_maps(const Scenario& sc);

/// Closed forms for the built-in scenarios.
namespace oracles {
/// Routhian of the spring pendulum at (r, rdot), constants dropped.
double spring_routhian(const ScenarioConfig& c, double mu, double r, double rdot);
/// Beanie Routhian after full reduction at state (psi, psidot, y', theta).
double beanie_L0(const ScenarioConfig& c, const Vec<double>& mu, const Vec<double>& s);
/// Beanie Routhian after reduction by translations at state (theta, psi, thetadot, psidot).
double beanie_L1(const ScenarioConfig& c, const Vec<double>& s);
/// Normal-form equations (y'dot, thetadot, psiddot) at (psi, psidot, y', theta).
Vec<double> beanie_normal_form(const ScenarioConfig& c, const Vec<double>& mu, const Vec<double>& s);
/// Kinetic Lagrangian of the disc at (x, y, xdot, ydot).
double heisenberg_kinetic(const ScenarioConfig& c, const Vec<double>& s);
/// Closed-form solution of M vdot = Gamma (-v_y, v_x).
Vec<double> heisenberg_velocity(const ScenarioConfig& c, const Vec<double>& v0, double t);
}  // namespace oracles

/// CSV with a header row and 17 significant digits.
void write_csv(std::ostream& os, const std::vector<std::string>& columns, const Trajectory& tr);

/// Column names and audits (energy, momentum components) for a full-system run.
Trajectory simulate(const Scenario& sc, std::vector<std::string>& columns);

/// Structured text report of a reduction: momentum, isotropy, invariance residuals,
/// reduced 2-form values and Routhian values at reference states.
std::string reduction_report(const Scenario& sc, const std::string& group);

struct VerifyResult {
    bool pass = false;
    std::string text;
};
/// Invariance suite, energy drift and reduced-vs-full consistency; with `stages`, the
/// equivalence check of reduction by stages.
VerifyResult verify_scenario(const Scenario& sc, bool stages);

/// Run the stages pipeline and return its report.
StagesReport run_stages(const Scenario& sc);

}  // namespace routh
