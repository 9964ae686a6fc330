#pragma once
/// @file magnetic_system.hpp
/// @brief Magnetic Lagrangian systems (eps: P -> Q, L, B) in one adapted chart (q, p).

#include <functional>
#include <string>
#include <vector>

#include "routh/numerics.hpp"
#include "routh/smooth_map.hpp"

namespace routh {

struct BundleChart {
    int n = 1;  ///< dim Q
    int k = 0;  ///< fiber dimension of P -> Q
    std::vector<std::string> q_names;
    std::vector<std::string> p_names;
    std::function<bool(const Vec<double>&)> domain;  ///< optional predicate on P points (q, p)

    static BundleChart make(std::vector<std::string> q_names, std::vector<std::string> p_names = {},
                            std::function<bool(const Vec<double>&)> domain = {});
    int dim_P() const { return n + k; }
    int state_dim() const { return 2 * n + k; }
};

/// Point of T_P Q = TQ x_Q P.
struct State {
    Vec<double> q, v, p;

    Vec<double> flat() const;
    Vec<double> point() const;  ///< (q, p)
    static State unflat(const Vec<double>& x, int n, int k);
};

struct CotangentState {
    Vec<double> q, alpha, p;
};

/// L takes (q, v, p) of arity 2n+k; B is a two-form on P in coordinates (q, p).
struct MagneticLagrangianSystem {
    BundleChart chart;
    ScalarField L;
    SampledForm B;

    static MagneticLagrangianSystem make(BundleChart chart, ScalarField L, SampledForm B);
    /// Ordinary Lagrangian system (k = 0, B = 0).
    static MagneticLagrangianSystem lagrangian(BundleChart chart, ScalarField L);

    int n() const { return chart.n; }
    int k() const { return chart.k; }
    void require_domain(const State& s) const;
};

struct Accelerations {
    Vec<double> vdot, pdot;
};

/// Derivative data of L at a state, used by the EL assembly.
struct LagrangianJet {
    Vec<double> dq, dv, dp;
    Matrix vv, vq, vp;
};

LagrangianJet lagrangian_jet(const MagneticLagrangianSystem& sys, const State& s);

/// Solve the Euler–Lagrange equations block-wise: pdot from the fiber block of B, then vdot.
Accelerations el_dynamics(const MagneticLagrangianSystem& sys, const State& s);

/// Residuals of both equation groups for given accelerations (max abs).
double el_residual(const MagneticLagrangianSystem& sys, const State& s, const Accelerations& acc);

CotangentState legendre(const MagneticLagrangianSystem& sys, const State& s);

double energy(const MagneticLagrangianSystem& sys, const State& s);

/// Omega = d(dL/dv^i) ^ dq^i + B on tangent vectors (dq, dv, dp).
double presymplectic_form(const MagneticLagrangianSystem& sys, const State& s, const Vec<double>& U,
                          const Vec<double>& W);
Matrix presymplectic_matrix(const MagneticLagrangianSystem& sys, const State& s);

/// max over basis W of |Omega(gamma', W) + dE(W)| at s with gamma' from el_dynamics.
double presymplectic_residual(const MagneticLagrangianSystem& sys, const State& s);

/// L' = L - alpha_i(q,p) v^i, B' = B + d(eps^* alpha). alpha maps (q, p) to n components.
MagneticLagrangianSystem gauge_transform(const MagneticLagrangianSystem& sys, const SmoothMap& alpha);

/// Vector field (q, v, p) -> (v, vdot, pdot).
VectorFieldFn dynamics_field(const MagneticLagrangianSystem& sys);

/// Integrate with an energy audit column.
Trajectory integrate(const MagneticLagrangianSystem& sys, const State& s0, double t0, double t1, double h);

/// Column names t, q..., v..., p... for CSV output.
std::vector<std::string> state_column_names(const BundleChart& chart);

}  // namespace routh
