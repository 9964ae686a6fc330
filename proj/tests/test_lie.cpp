#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "routh/lie.hpp"

using namespace routh;

namespace {

std::vector<LieGroupModel> all_groups() {
    return {LieGroupModel::real(2), LieGroupModel::circle(), LieGroupModel::se2(), LieGroupModel::heisenberg(),
            LieGroupModel::product({LieGroupModel::se2(), LieGroupModel::circle()})};
}

Vec<double> random_algebra(std::mt19937_64& rng, int d) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vec<double> x(d);
    for (auto& v : x) v = u(rng);
    return x;
}

double diff(const Vec<double>& a, const Vec<double>& b) {
    double w = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) w = std::max(w, std::abs(a[i] - b[i]));
    return w;
}

/// Vector-field bracket [X, Y] = DY X - DX Y at m.
Vec<double> field_bracket(const GroupAction& a, const Vec<double>& xi, const Vec<double>& eta, const Vec<double>& m) {
    auto X = [&](const Vec<Dual<double>>& p) { return fundamental_vector(a, p, lift(xi)); };
    auto Y = [&](const Vec<Dual<double>>& p) { return fundamental_vector(a, p, lift(eta)); };
    Vec<double> Xm = fundamental_vector(a, m, xi), Ym = fundamental_vector(a, m, eta);
    Vec<double> DYX = du_part(Y(lift(m, Xm))), DXY = du_part(X(lift(m, Ym)));
    Vec<double> r(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) r[i] = DYX[i] - DXY[i];
    return r;
}

}  // namespace

TEST_CASE("group axioms hold for every model") {
    std::mt19937_64 rng(1);
    for (const auto& G : all_groups()) {
        CAPTURE(G.name());
        for (int t = 0; t < 20; ++t) {
            Vec<double> g = G.random_element(rng), h = G.random_element(rng), k = G.random_element(rng);
            CHECK(G.distance(G.compose(G.compose(g, h), k), G.compose(g, G.compose(h, k))) < 1e-12);
            CHECK(G.distance(G.compose(g, G.inverse(g)), G.identity<double>()) < 1e-12);
            CHECK(G.distance(G.compose(G.identity<double>(), g), g) < 1e-12);
        }
    }
}

TEST_CASE("exp is a one-parameter subgroup and continuous across the series switch") {
    std::mt19937_64 rng(2);
    for (const auto& G : all_groups()) {
        CAPTURE(G.name());
        Vec<double> xi = random_algebra(rng, G.dim());
        auto scaled = [&](double s) {
            Vec<double> r(xi);
            for (auto& v : r) v *= s;
            return r;
        };
        CHECK(G.distance(G.compose(G.exp(scaled(0.3)), G.exp(scaled(0.5))), G.exp(scaled(0.8))) < 1e-12);
    }
    const auto se2 = LieGroupModel::se2();
    Vec<double> below = se2.exp(Vec<double>{1.0, 0.5, 0.999e-3}), above = se2.exp(Vec<double>{1.0, 0.5, 1.001e-3});
    CHECK(diff(below, above) < 3e-6);
    Vec<double> exact = se2.exp(Vec<double>{1.0, 0.0, std::numbers::pi / 2});
    CHECK(exact[0] == doctest::Approx(2.0 / std::numbers::pi));
    CHECK(exact[1] == doctest::Approx(2.0 / std::numbers::pi));
}

TEST_CASE("bracket is the derivative of Ad and satisfies Jacobi") {
    std::mt19937_64 rng(3);
    for (const auto& G : all_groups()) {
        CAPTURE(G.name());
        const int d = G.dim();
        for (int t = 0; t < 10; ++t) {
            Vec<double> xi = random_algebra(rng, d), eta = random_algebra(rng, d), zeta = random_algebra(rng, d);
            Vec<Dual<double>> txi(d);
            for (int i = 0; i < d; ++i) txi[i] = Dual<double>(0.0, xi[i]);
            Vec<double> dAd = du_part(G.Ad(G.exp(txi), lift(eta)));
            CHECK(diff(dAd, G.bracket(xi, eta)) < 1e-12);
            Vec<double> j1 = G.bracket(xi, G.bracket(eta, zeta)), j2 = G.bracket(eta, G.bracket(zeta, xi)),
                        j3 = G.bracket(zeta, G.bracket(xi, eta));
            for (int i = 0; i < d; ++i) CHECK(std::abs(j1[i] + j2[i] + j3[i]) < 1e-12);
        }
    }
}

TEST_CASE("Ad is a homomorphism and coadjoint maps are its transposes") {
    std::mt19937_64 rng(4);
    for (const auto& G : all_groups()) {
        CAPTURE(G.name());
        const int d = G.dim();
        for (int t = 0; t < 10; ++t) {
            Vec<double> g = G.random_element(rng), h = G.random_element(rng);
            Vec<double> xi = random_algebra(rng, d), eta = random_algebra(rng, d), mu = random_algebra(rng, d);
            CHECK(diff(G.Ad(G.compose(g, h), xi), G.Ad(g, G.Ad(h, xi))) < 1e-12);
            CHECK(dot(G.coadjoint(g, mu), xi) == doctest::Approx(dot(mu, G.Ad(g, xi))));
            CHECK(dot(G.coad_inf(xi, mu), eta) == doctest::Approx(dot(mu, G.bracket(xi, eta))));
        }
    }
}

TEST_CASE("heisenberg coadjoint generator matches the Euler-Poincare right-hand side") {
    const auto H = LieGroupModel::heisenberg();
    Vec<double> v{0.3, -0.7, 2.0}, mu{1.0, 4.0, 1.5};
    Vec<double> r = H.coad_inf(v, mu);
    CHECK(r[0] == doctest::Approx(-1.5 * -0.7));
    CHECK(r[1] == doctest::Approx(1.5 * 0.3));
    CHECK(r[2] == doctest::Approx(0.0));
}

TEST_CASE("SE(2) left action generators match the closed-form fundamental fields") {
    const auto se2 = LieGroupModel::se2();
    SmoothMap act = SmoothMap::from(7, 4, [se2](auto x) {
        using T = elem_t<decltype(x)>;
        Vec<T> r = se2.compose(Vec<T>{x[0], x[1], x[2]}, Vec<T>{x[3], x[4], x[5]});
        return Vec<T>{r[0], r[1], r[2], x[6]};
    });
    GroupAction a = GroupAction::make(se2, 4, ActionSide::Left, act);
    Vec<double> q{0.4, -1.1, 0.6, 0.2};
    Matrix Xi = fundamental_matrix(a, q);
    CHECK(Xi(0, 0) == 1.0);
    CHECK(Xi(1, 1) == 1.0);
    CHECK(Xi(0, 2) == doctest::Approx(1.1));   // -y
    CHECK(Xi(1, 2) == doctest::Approx(0.4));   // x
    CHECK(Xi(2, 2) == doctest::Approx(1.0));
    CHECK(Xi(3, 2) == doctest::Approx(0.0));
    // The relation [e1, e3] = e2 holds for the generator fields; for a left
    // action this is minus the generator of the algebra bracket.
    Vec<double> e1{1, 0, 0}, e2{0, 1, 0}, e3{0, 0, 1};
    CHECK(diff(field_bracket(a, e1, e3, q), fundamental_vector(a, q, e2)) < 1e-12);
    Vec<double> alg = fundamental_vector(a, q, se2.bracket(e1, e3));
    CHECK(diff(field_bracket(a, e1, e3, q), Vec<double>{-alg[0], -alg[1], -alg[2], -alg[3]}) < 1e-12);
}

TEST_CASE("right action generators are the derivative of the action") {
    const auto H = LieGroupModel::heisenberg();
    GroupAction a = self_action(H, ActionSide::Right);
    Vec<double> m{0.5, 0.25, -1.0}, xi{1.0, 0.0, 0.0};
    Vec<double> X = fundamental_vector(a, m, xi);
    // m * (e, 0, 0) = (x + e, y, s - y e / 2)
    CHECK(X[0] == doctest::Approx(1.0));
    CHECK(X[2] == doctest::Approx(-0.125));
}

TEST_CASE("cocycle of the circulation potential on the plane") {
    const double Gamma = 1.3;
    const auto R2 = LieGroupModel::real(2);
    GroupAction a = self_action(R2, ActionSide::Left);
    SmoothMap delta = SmoothMap::from(2, 2, [Gamma](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{-Gamma * x[1], Gamma * x[0]};
    });
    std::vector<Vec<double>> pts{{0.0, 0.0}, {1.0, -2.0}, {0.3, 0.7}};
    Matrix S = sigma_matrix(a, delta, pts);
    CHECK(S(0, 1) == doctest::Approx(-Gamma));
    CHECK(S(1, 0) == doctest::Approx(Gamma));
    CHECK(S(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("group cocycle identity for a coboundary potential") {
    std::mt19937_64 rng(5);
    for (const auto& G : {LieGroupModel::se2(), LieGroupModel::heisenberg()}) {
        for (ActionSide side : {ActionSide::Left, ActionSide::Right}) {
            CAPTURE(G.name());
            GroupAction a = self_action(G, side);
            const Vec<double> c{0.7, -0.2, 1.1};
            // delta(m) = Ad*_{m^-1} c - c (left) or Ad*_m c - c (right): sigma(g) = Ad*_{g^-1} c - c.
            SmoothMap delta = SmoothMap::from(3, 3, [G, c, side](auto m) {
                using T = elem_t<decltype(m)>;
                Vec<T> mm(m.begin(), m.end());
                Vec<T> cc(c.begin(), c.end());
                Vec<T> r = G.coadjoint(side == ActionSide::Left ? G.inverse(mm) : mm, cc);
                for (int i = 0; i < 3; ++i) r[i] -= cc[i];
                return r;
            });
            std::vector<Vec<double>> pts;
            for (int i = 0; i < 4; ++i) pts.push_back(G.random_element(rng));
            for (int t = 0; t < 50; ++t) {
                Vec<double> g = G.random_element(rng), h = G.random_element(rng);
                Vec<double> sg = sigma_cocycle_checked(a, delta, g, pts);
                Vec<double> sh = sigma_cocycle_checked(a, delta, h, pts);
                Vec<double> sgh = sigma_cocycle_checked(a, delta, G.compose(g, h), pts);
                Vec<double> rhs = G.coadjoint(G.inverse(g), sh);
                Vec<double> expected = G.coadjoint(G.inverse(g), c);
                for (int i = 0; i < 3; ++i) {
                    CHECK(std::abs(sgh[i] - sg[i] - rhs[i]) < 1e-8);
                    CHECK(std::abs(sg[i] - expected[i] + c[i]) < 1e-8);
                }
            }
            // Infinitesimal cocycle is antisymmetric and satisfies the 2-cocycle identity.
            Matrix S = sigma_matrix(a, delta, pts);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) CHECK(std::abs(S(i, j) + S(j, i)) < 1e-8);
        }
    }
}

TEST_CASE("base-point dependent cocycle is rejected") {
    const auto R2 = LieGroupModel::real(2);
    GroupAction a = self_action(R2, ActionSide::Left);
    SmoothMap delta = SmoothMap::from(2, 2, [](auto x) {
        using T = elem_t<decltype(x)>;
        return Vec<T>{T(0.0), x[0] * x[0]};
    });
    CHECK_THROWS_AS(sigma_matrix(a, delta, {{0.0, 0.0}, {1.0, 1.0}}), ConsistencyError);
}

TEST_CASE("angular coordinates are compared modulo 2 pi") {
    const auto S1 = LieGroupModel::circle();
    CHECK(S1.distance(Vec<double>{0.1}, Vec<double>{2 * std::numbers::pi - 0.1}) == doctest::Approx(0.2));
    CHECK(LieGroupModel::se2().angle_coordinates() == std::vector<int>{2});
    CHECK_THROWS_AS(S1.compose(Vec<double>{1.0, 2.0}, Vec<double>{1.0, 2.0}), StructuralError);
}
