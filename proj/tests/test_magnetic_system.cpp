#include <cmath>
#include <random>

#include "doctest.h"
#include "routh/magnetic_system.hpp"

using namespace routh;

namespace {

MagneticLagrangianSystem spring(double m, double k) {
    BundleChart chart = BundleChart::make({"r", "theta"}, {}, [](const Vec<double>& x) { return x[0] > 0; });
    return MagneticLagrangianSystem::lagrangian(chart, ScalarField::from(4, [m, k](auto x) {
        return 0.5 * m * (x[2] * x[2] + x[0] * x[0] * x[3] * x[3]) - 0.5 * k * x[0] * x[0];
    }));
}

/// Particle in the plane with mass matrix M, potential and uniform field b dx^dy.
MagneticLagrangianSystem charged(double b) {
    BundleChart chart = BundleChart::make({"x", "y"});
    ScalarField L = ScalarField::from(4, [](auto x) {
        using std::cos;
        return 0.5 * (2.0 * x[2] * x[2] + x[2] * x[3] + x[3] * x[3]) - 0.1 * cos(x[0]) * x[1] * x[1];
    });
    SampledForm B{2, 2, SmoothMap::from(2, 4, [b](auto x) {
                      using T = elem_t<decltype(x)>;
                      (void)x;
                      return Vec<T>{T(0.0), T(b), T(-b), T(0.0)};
                  })};
    return MagneticLagrangianSystem::make(chart, L, B);
}

/// Q = R with a two-dimensional fiber (a, b), B = da ^ db plus a mixed term c dq ^ da.
MagneticLagrangianSystem fibered(double c) {
    BundleChart chart = BundleChart::make({"q"}, {"a", "b"});
    ScalarField L = ScalarField::from(4, [](auto x) {
        return 0.5 * x[1] * x[1] - 0.5 * x[0] * x[0] - x[2] * x[3] - 0.25 * x[2] * x[2];
    });
    SampledForm B{2, 3, SmoothMap::from(3, 9, [c](auto x) {
                      using T = elem_t<decltype(x)>;
                      (void)x;
                      Vec<T> m(9, T(0.0));
                      m[0 * 3 + 1] = T(c);
                      m[1 * 3 + 0] = T(-c);
                      m[1 * 3 + 2] = T(1.0);
                      m[2 * 3 + 1] = T(-1.0);
                      return m;
                  })};
    return MagneticLagrangianSystem::make(chart, L, B);
}

double max_abs(const Vec<double>& v) {
    double w = 0;
    for (double x : v) w = std::max(w, std::abs(x));
    return w;
}

}  // namespace

TEST_CASE("spring pendulum accelerations match the textbook equations") {
    const double m = 1.5, k = 2.0;
    auto sys = spring(m, k);
    State s{{1.3, 0.4}, {0.2, -0.7}, {}};
    Accelerations a = el_dynamics(sys, s);
    CHECK(a.vdot[0] == doctest::Approx(1.3 * 0.49 - k / m * 1.3).epsilon(1e-13));
    CHECK(a.vdot[1] == doctest::Approx(-2.0 * 0.2 * -0.7 / 1.3).epsilon(1e-13));
    CHECK(el_residual(sys, s, a) < 1e-12);
}

TEST_CASE("the magnetic term enters as the force B(v, .)") {
    const double b = 0.8;
    auto sys = charged(b);
    State s{{0.0, 0.0}, {0.3, -0.5}, {}};
    Accelerations a = el_dynamics(sys, s);
    // M vdot = b (vy, -vx) at the origin (potential force vanishes there)
    const double fx = b * -0.5, fy = -b * 0.3;
    CHECK(2.0 * a.vdot[0] + 0.5 * a.vdot[1] == doctest::Approx(fx).epsilon(1e-13));
    CHECK(0.5 * a.vdot[0] + 1.0 * a.vdot[1] == doctest::Approx(fy).epsilon(1e-13));
}

TEST_CASE("fiber velocities are solved from the fiber block of B") {
    const double c = 0.6;
    auto sys = fibered(c);
    State s{{0.4}, {1.1}, {-0.3, 0.9}};
    Accelerations acc = el_dynamics(sys, s);
    // B(gamma', d_a) = dL/da: row a gives bdot = c v - dL/da, row b gives -adot = -dL/db,
    // with dL/da = -b - a/2 and dL/db = -a.
    const double a = -0.3, bb = 0.9, v = 1.1;
    CHECK(acc.pdot[1] == doctest::Approx(c * v + bb + 0.5 * a).epsilon(1e-13));
    CHECK(acc.pdot[0] == doctest::Approx(-a).epsilon(1e-13));
    CHECK(el_residual(sys, s, acc) < 1e-12);
    CHECK(presymplectic_residual(sys, s) < 1e-10);
}

TEST_CASE("presymplectic equation holds with a magnetic form") {
    auto sys = charged(0.8);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 20; ++t) {
        State s{{u(rng), u(rng)}, {u(rng), u(rng)}, {}};
        CHECK(presymplectic_residual(sys, s) < 1e-10);
        Matrix O = presymplectic_matrix(sys, s);
        for (int i = 0; i < O.rows; ++i)
            for (int j = 0; j < O.cols; ++j) CHECK(std::abs(O(i, j) + O(j, i)) < 1e-12);
    }
}

TEST_CASE("energy is conserved along the flow") {
    auto sys = charged(0.8);
    Trajectory tr = integrate(sys, State{{0.2, 0.1}, {0.5, -0.2}, {}}, 0.0, 10.0, 1e-3);
    const auto& e = tr.audit("energy");
    double drift = 0;
    for (double x : e) drift = std::max(drift, std::abs(x - e.front()));
    CHECK(drift < 1e-6);
    auto fs = fibered(0.6);
    Trajectory tf = integrate(fs, State{{0.4}, {1.1}, {-0.3, 0.9}}, 0.0, 10.0, 1e-3);
    const auto& ef = tf.audit("energy");
    for (double x : ef) CHECK(std::abs(x - ef.front()) < 1e-6);
}

TEST_CASE("gauge transformations leave trajectories unchanged") {
    auto sys = charged(0.8);
    SmoothMap alpha = SmoothMap::from(2, 2, [](auto x) {
        using T = elem_t<decltype(x)>;
        using std::sin;
        return Vec<T>{x[0] * x[0] * x[1], sin(x[0]) + x[1]};
    });
    auto gauged = gauge_transform(sys, alpha);
    State s0{{0.2, 0.1}, {0.5, -0.2}, {}};
    Trajectory a = integrate(sys, s0, 0.0, 10.0, 1e-3), b = integrate(gauged, s0, 0.0, 10.0, 1e-3);
    double sup = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a.states[i].size(); ++j)
            sup = std::max(sup, std::abs(a.states[i][j] - b.states[i][j]));
    CHECK(sup < 1e-6);
    CHECK(closedness_residual(gauged.B, Vec<double>{0.3, -0.2}) < 1e-7);
}

TEST_CASE("degenerate Lagrangians and fiber blocks are rejected") {
    BundleChart chart = BundleChart::make({"x", "y"});
    auto degenerate = MagneticLagrangianSystem::lagrangian(chart, ScalarField::from(4, [](auto x) {
        return 0.5 * x[2] * x[2];
    }));
    try {
        el_dynamics(degenerate, State{{0, 0}, {1, 1}, {}});
        FAIL("expected hyperregularity error");
    } catch (const HyperregularityError& e) {
        CHECK(e.block == "d2L/dvdv");
    }
    BundleChart fiber = BundleChart::make({"q"}, {"a"});
    auto odd = MagneticLagrangianSystem::make(fiber, ScalarField::from(3, [](auto x) { return 0.5 * x[1] * x[1]; }),
                                              SampledForm::zero(2, 2));
    try {
        el_dynamics(odd, State{{0}, {1}, {0}});
        FAIL("expected hyperregularity error");
    } catch (const HyperregularityError& e) {
        CHECK(e.block == "B_ab");
    }
}

TEST_CASE("chart domain and arity are enforced") {
    auto sys = spring(1, 1);
    CHECK_THROWS_AS(el_dynamics(sys, State{{-1.0, 0.0}, {0.0, 0.0}, {}}), DomainError);
    BundleChart chart = BundleChart::make({"x"});
    CHECK_THROWS_AS(MagneticLagrangianSystem::lagrangian(chart, ScalarField::from(3, [](auto x) { return x[0]; })),
                    StructuralError);
}

TEST_CASE("legendre transform and energy of a quadratic Lagrangian") {
    auto sys = spring(2.0, 1.0);
    State s{{1.5, 0.3}, {0.4, 0.2}, {}};
    CotangentState c = legendre(sys, s);
    CHECK(c.alpha[0] == doctest::Approx(0.8));
    CHECK(c.alpha[1] == doctest::Approx(2.0 * 2.25 * 0.2));
    CHECK(energy(sys, s) == doctest::Approx(0.5 * 2.0 * (0.16 + 2.25 * 0.04) + 0.5 * 2.25));
    CHECK(state_column_names(sys.chart) == std::vector<std::string>{"t", "r", "theta", "rdot", "thetadot"});
    CHECK(max_abs(State::unflat(s.flat(), 2, 0).v) == doctest::Approx(0.4));
}
