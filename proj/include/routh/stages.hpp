#pragma once
/// @file stages.hpp
/// @brief Two-stage Routh reduction: first by a normal subgroup K at nu = i^T mu,
/// then by the residual group G_nu / K_nu at a compatible rho.

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "routh/symmetry.hpp"

namespace routh {

struct StagesPlan {
    SymmetrySetup setup;            ///< G acting on the full system
    LieGroupModel subgroup = LieGroupModel::real(1);  ///< K
    SmoothMap subgroup_embedding;   ///< K coordinates -> G coordinates
    Matrix inclusion;               ///< i: k -> g (dim g x dim k)
    Vec<double> mu;                 ///< momentum in g*
    Vec<double> nu;                 ///< i^T mu, constructed
    Matrix isotropy;                ///< basis of g_nu inside g (dim g x dim g_nu)
    Matrix quotient;                ///< r'_nu: g_nu -> gbar_nu (dim gbar x dim g_nu)
    Vec<double> nu_bar;             ///< element of g_nu* in the isotropy basis
    PrincipalConnection connection1;  ///< K-connection on Q (values in k)
    QuotientChartData charts1;      ///< charts of P/K_nu over Q/K

    // Residual group data (unused when gbar_nu = 0).
    LieGroupModel residual_group = LieGroupModel::real(1);
    SmoothMap residual_lift;        ///< Gbar_nu coordinates -> G_nu coordinates in G
    PrincipalConnection connection2;
    std::optional<QuotientChartData> charts2;
    bool group_configuration = false;  ///< Q/K is the residual group itself

    static StagesPlan make(SymmetrySetup setup, LieGroupModel subgroup, SmoothMap subgroup_embedding,
                           Matrix inclusion, Vec<double> mu, Matrix isotropy, Matrix quotient, Vec<double> nu_bar,
                           PrincipalConnection connection1, QuotientChartData charts1);
    int residual_dim() const { return quotient.rows; }
    /// Residual of nu_bar restricted to k_nu against nu.
    double restriction_residual() const;
};

struct FirstStage {
    ReducedSystemPackage pkg1;
    std::optional<SymmetrySetup> induced;  ///< residual-group setup on the first reduced system
    SymmetrySetup k_setup;                 ///< K acting on the full system
};

FirstStage first_stage(const StagesPlan& plan, std::uint64_t seed = 20240531);

Vec<double> compatible_rho(const StagesPlan& plan);

using SecondStage = std::variant<ReducedSystemPackage, GroupReducedSystem>;

SecondStage second_stage(const FirstStage& first, const StagesPlan& plan, const Vec<double>& rho);

/// A reduced flow viewed as an integrator on flat state vectors plus an energy.
struct ReducedFlow {
    std::function<Trajectory(const Vec<double>&, double, double, double)> integrate;
    std::function<double(const Vec<double>&)> energy;

    static ReducedFlow of(const MagneticLagrangianSystem& sys);
    static ReducedFlow of(const GroupReducedSystem& sys);
    static ReducedFlow of(const SecondStage& stage);
};

struct StagesReport {
    struct Entry {
        std::string name;
        double value;
        double tolerance;
        bool pass() const { return value <= tolerance; }
    };
    std::vector<Entry> entries;

    bool pass() const;
    void add(std::string name, double value, double tolerance) { entries.push_back({std::move(name), value, tolerance}); }
    std::string to_text() const;
};

using StateMap = std::function<Vec<double>(const Vec<double>&)>;

/// Integrate both flows from F-related initial states and compare; also certify the
/// plan identities. `tau` (optional) maps staged base coordinates to direct ones.
StagesReport stages_equivalence_check(const StagesPlan& plan, const FirstStage& first, const ReducedFlow& direct,
                                      const ReducedFlow& staged, const StateMap& F_map,
                                      const std::vector<Vec<double>>& ics, double t0, double t1, double h,
                                      const StateMap& direct_base = {}, const StateMap& tau = {},
                                      std::uint64_t seed = 20240531);

/// Connection on a group acting on itself: right trivialisation for left actions,
/// left trivialisation for right actions.
PrincipalConnection maurer_cartan(const LieGroupModel& group, ActionSide side);

}  // namespace routh
