#include <cmath>
#include <random>

#include "doctest.h"
#include "routh/numerics.hpp"

using namespace routh;

namespace {

ScalarField wavy() {
    return ScalarField::from(3, [](auto x) {
        using std::exp;
        using std::sin;
        return sin(x[0]) * exp(x[1]) + x[0] * x[0] * x[2] / (1.0 + x[1] * x[1]);
    });
}

}  // namespace

TEST_CASE("dual arithmetic matches hand derivatives") {
    Dual<double> x(0.7, 1.0);
    auto f = sin(x) * x + exp(x) / x;
    const double v = 0.7;
    CHECK(f.re == doctest::Approx(std::sin(v) * v + std::exp(v) / v).epsilon(1e-15));
    CHECK(f.du == doctest::Approx(std::cos(v) * v + std::sin(v) + std::exp(v) / v - std::exp(v) / (v * v))
                      .epsilon(1e-14));
    Dual<double> s = sqrt(Dual<double>(4.0, 1.0));
    CHECK(s.du == doctest::Approx(0.25));
    Dual<double> a = atan2(Dual<double>(1.0, 1.0), Dual<double>(1.0, 0.0));
    CHECK(a.du == doctest::Approx(0.5));
}

TEST_CASE("nested duals give second derivatives") {
    using D2 = Dual<Dual<double>>;
    const double v = 0.3;
    D2 x(Dual<double>(v, 1.0), Dual<double>(1.0, 0.0));
    D2 y = sin(x) * x;
    CHECK(y.du.du == doctest::Approx(2.0 * std::cos(v) - v * std::sin(v)).epsilon(1e-14));
    CHECK(depth_v<D2> == 2);
}

TEST_CASE("dual gradients agree with central differences") {
    const ScalarField f = wavy();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        Vec<double> x{u(rng), u(rng), u(rng)};
        Vec<double> g = gradient(f, x), fd = fd_gradient(f, x);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(g[i] - fd[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])));
    }
}

TEST_CASE("hessian is symmetric and matches the analytic one") {
    const ScalarField f = ScalarField::from(2, [](auto x) { return x[0] * x[0] * x[1] + x[1] * x[1] * x[1]; });
    Matrix H = hessian(f, Vec<double>{1.5, -0.5});
    CHECK(H(0, 0) == doctest::Approx(-1.0));
    CHECK(H(0, 1) == doctest::Approx(3.0));
    CHECK(H(1, 0) == doctest::Approx(3.0));
    CHECK(H(1, 1) == doctest::Approx(-3.0));
}

TEST_CASE("lu_solve solves and rejects singular systems") {
    Matrix A(2, 2);
    A(0, 0) = 2;
    A(0, 1) = 1;
    A(1, 0) = 1;
    A(1, 1) = 3;
    Vec<double> x = lu_solve(A, Vec<double>{3, 5});
    CHECK(x[0] == doctest::Approx(0.8));
    CHECK(x[1] == doctest::Approx(1.4));
    Matrix S(2, 2);
    S(0, 0) = 1;
    S(0, 1) = 2;
    S(1, 0) = 2;
    S(1, 1) = 4;
    CHECK_THROWS_AS(lu_solve(S, Vec<double>{1, 1}), RankError);
}

TEST_CASE("null space and least squares") {
    Matrix M(1, 3);
    M(0, 0) = 1;
    M(0, 1) = 1;
    Matrix N = null_space(M);
    CHECK(N.cols == 2);
    for (int c = 0; c < N.cols; ++c) CHECK(std::abs(N(0, c) + N(1, c)) < 1e-12);
    CHECK(numerical_rank(M) == 1);
    Vec<double> x = least_squares(M, Vec<double>{2});
    CHECK(x[0] + x[1] == doctest::Approx(2.0));
    Matrix empty(0, 2);
    CHECK(null_space(empty).cols == 2);
    CHECK(least_squares(Matrix(2, 0), Vec<double>{0, 0}).empty());
}

TEST_CASE("newton converges on a nonlinear system and reports failure") {
    auto residual = [](const auto& x) {
        using T = elem_t<std::remove_cvref_t<decltype(x)>>;
        return Vec<T>{x[0] * x[0] - 2.0, x[0] * x[1] - 1.0};
    };
    Vec<double> x = newton_solve(residual, Vec<double>{1.0, 1.0});
    CHECK(x[0] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
    auto hopeless = [](const auto& x) {
        using T = elem_t<std::remove_cvref_t<decltype(x)>>;
        return Vec<T>{x[0] * x[0] + 1.0};
    };
    CHECK_THROWS_AS(newton_solve(hopeless, Vec<double>{0.5}), NumericError);
}

TEST_CASE("rk4 has fourth-order convergence on the exponential") {
    VectorFieldFn f = [](double, const Vec<double>& x) { return Vec<double>{x[0]}; };
    auto err = [&](double h) { return std::abs(rk4_integrate(f, {1.0}, 0.0, 1.0, h).states.back()[0] - std::exp(1.0)); };
    CHECK(err(0.1) / err(0.05) >= 12.0);
}

TEST_CASE("rk4 lands on t1 with a shortened last step") {
    VectorFieldFn f = [](double, const Vec<double>&) { return Vec<double>{1.0}; };
    Trajectory tr = rk4_integrate(f, {0.0}, 0.0, 0.25, 0.1);
    CHECK(tr.times.back() == doctest::Approx(0.25));
    CHECK(tr.states.back()[0] == doctest::Approx(0.25));
    for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
}

TEST_CASE("blow-up is reported with the last finite state") {
    VectorFieldFn f = [](double, const Vec<double>& x) { return Vec<double>{x[0] * x[0]}; };
    try {
        rk4_integrate(f, {1.0}, 0.0, 2.0, 0.01);
        FAIL("expected a numeric error");
    } catch (const NumericError& e) {
        REQUIRE(e.point.size() == 1);
        CHECK(std::isfinite(e.point[0]));
        CHECK(e.time > 0.9);
        CHECK(e.time < 1.1);
    }
}

TEST_CASE("exterior derivative of an exact form is closed") {
    // alpha = y z dx + x^2 dy + sin(x) dz
    SampledForm alpha{1, 3, SmoothMap::from(3, 3, [](auto x) {
                          using T = elem_t<decltype(x)>;
                          using std::sin;
                          return Vec<T>{x[1] * x[2], x[0] * x[0], sin(x[0])};
                      })};
    SampledForm d = exterior_derivative(alpha);
    Vec<double> p{0.3, -0.4, 0.9};
    Matrix m = d.matrix(p);
    // (d alpha)_{xy} = d_x(x^2) - d_y(yz) = 2x - z
    CHECK(m(0, 1) == doctest::Approx(2 * 0.3 - 0.9));
    CHECK(m(1, 0) == doctest::Approx(-(2 * 0.3 - 0.9)));
    CHECK(m(0, 2) == doctest::Approx(std::cos(0.3) - (-0.4)));
    CHECK(closedness_residual(d, p) < 1e-12);
    Vec<double> e0{1, 0, 0}, e1{0, 1, 0};
    CHECK(exterior_derivative(alpha, p, e0, e1) == doctest::Approx(m(0, 1)));
    CHECK(evaluate(d, p, e0, e1) == doctest::Approx(m(0, 1)));
}

TEST_CASE("a non-closed two-form is detected") {
    // x dx^dy + z dy^dz has d = dz^dx^dy... pick beta = z dx^dy, d beta = dz^dx^dy != 0
    SampledForm beta{2, 3, SmoothMap::from(3, 9, [](auto x) {
                         using T = elem_t<decltype(x)>;
                         Vec<T> m(9, T(0.0));
                         m[1] = x[2];
                         m[3] = -x[2];
                         return m;
                     })};
    CHECK(closedness_residual(beta, Vec<double>{0.1, 0.2, 0.3}) == doctest::Approx(1.0));
}

TEST_CASE("smooth maps check arity") {
    SmoothMap f = SmoothMap::zero(2, 1);
    CHECK_THROWS_AS(f(Vec<double>{1.0}), StructuralError);
}
