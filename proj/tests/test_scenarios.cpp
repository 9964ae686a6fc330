#include <cmath>
#include <sstream>

#include "doctest.h"
#include "routh/scenarios.hpp"

using namespace routh;

TEST_CASE("config grammar: comments, lists, dotted keys") {
    const std::string text = R"(# beanie with a lighter second body
scenario = elroy_beanie
params.I2 = 0.5   # trailing comment
momentum.mu = 1, 0.25, -0.4

integrator.h = 2e-3
integrator.tmax = 3
sampling.seed = 42
output.path = out.csv
)";
    ScenarioConfig c = ScenarioConfig::parse(text);
    CHECK(c.scenario == "elroy_beanie");
    CHECK(c.I2 == 0.5);
    CHECK(c.mu == Vec<double>{1.0, 0.25, -0.4});
    CHECK(c.h == 2e-3);
    CHECK(c.tmax == 3.0);
    CHECK(c.seed == 42u);
    CHECK(c.out == "out.csv");
    Scenario sc = build_scenario(c);
    CHECK(sc.mu[1] == doctest::Approx(0.25));
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(ScenarioConfig::parse("params.q = 1"), ConfigurationError);
    CHECK_THROWS_AS(ScenarioConfig::parse("params.m = one"), ConfigurationError);
    CHECK_THROWS_AS(ScenarioConfig::parse("params.m = 1\nparams.m = 2"), ConfigurationError);
    CHECK_THROWS_AS(ScenarioConfig::parse("just text"), ConfigurationError);
    CHECK_THROWS_AS(ScenarioConfig::parse("sampling.seed = -3"), ConfigurationError);
    CHECK_THROWS_AS(ScenarioConfig::load("/nonexistent/config.txt"), ConfigurationError);
}

TEST_CASE("validation lists every violation") {
    ScenarioConfig c;
    c.scenario = "heisenberg_body";
    c.A = 1.0;
    c.B = 2.0;
    c.h = -1.0;
    try {
        c.validate();
        FAIL("expected configuration error");
    } catch (const ConfigurationError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("positive definite") != std::string::npos);
        CHECK(msg.find("integrator.h") != std::string::npos);
    }
    c = ScenarioConfig{};
    c.scenario = "custom";
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
    c.scenario = "pendulum";
    CHECK_THROWS_AS(c.validate(), ConfigurationError);
}

TEST_CASE("momentum must match the initial state and the beanie charts need mu_1 = 1") {
    ScenarioConfig c;
    c.scenario = "spring_pendulum";
    c.mu = {2.0};
    CHECK_THROWS_AS(build_scenario(c), ConfigurationError);
    c.mu.clear();
    c.initial = {-1.0, 0.0, 0.0, 1.0};
    CHECK_THROWS_AS(build_scenario(c), DomainError);
    ScenarioConfig b;
    b.scenario = "elroy_beanie";
    b.mu = {2.0, 0.3, 0.7};
    CHECK_THROWS_AS(build_scenario(b), ConfigurationError);
    b.mu = {1.0, 0.3};
    CHECK_THROWS_AS(build_scenario(b), ConfigurationError);
}

TEST_CASE("spring pendulum CSV format") {
    ScenarioConfig c;
    c.tmax = 0.003;
    Scenario sc = build_scenario(c);
    std::vector<std::string> cols;
    Trajectory tr = simulate(sc, cols);
    std::ostringstream os;
    write_csv(os, cols, tr);
    std::istringstream in(os.str());
    std::string header, row;
    std::getline(in, header);
    CHECK(header == "t,r,theta,rdot,thetadot,energy,J");
    std::getline(in, row);
    CHECK(row == "0,1,0,0,1,1,1");
    std::getline(in, row);
    CHECK(row == "0.001,1,0.001,0,1,1,1");
    std::getline(in, row);
    std::getline(in, row);
    // 17 significant digits
    CHECK(row.rfind("0.0030000000000000001,1,0.0030000000000000001,", 0) == 0);
    std::ostringstream again;
    std::vector<std::string> cols2;
    write_csv(again, cols2.empty() ? cols : cols2, simulate(build_scenario(c), cols2));
    CHECK(again.str() == os.str());
}

TEST_CASE("reduction report content") {
    ScenarioConfig c;
    c.scenario = "elroy_beanie";
    const std::string rep = reduction_report(build_scenario(c), "full");
    CHECK(rep.find("seed: 20240531") != std::string::npos);
    CHECK(rep.find("reduced 2-form") != std::string::npos);
    CHECK(rep.find("Routhian at reference states") != std::string::npos);
    CHECK(rep.find("base psi; fiber yp theta") != std::string::npos);
    const std::string normal = reduction_report(build_scenario(c), "normal");
    CHECK(normal.find("base theta psi") != std::string::npos);
    CHECK_THROWS_AS(reduction_report(build_scenario(c), "partial"), ConfigurationError);
    c.scenario = "spring_pendulum";
    CHECK_THROWS_AS(reduction_report(build_scenario(c), "normal"), ConfigurationError);
}

TEST_CASE("closed-form circulation solution satisfies its equation") {
    ScenarioConfig c;
    const Vec<double> v0{0.3, -0.8};
    const double t = 1.7, eps = 1e-6;
    Vec<double> v = oracles::heisenberg_velocity(c, v0, t);
    Vec<double> vp = oracles::heisenberg_velocity(c, v0, t + eps), vm = oracles::heisenberg_velocity(c, v0, t - eps);
    const double ax = (vp[0] - vm[0]) / (2 * eps), ay = (vp[1] - vm[1]) / (2 * eps);
    CHECK(c.A * ax + c.B * ay == doctest::Approx(-c.Gamma * v[1]).epsilon(1e-7));
    CHECK(c.B * ax + c.C * ay == doctest::Approx(c.Gamma * v[0]).epsilon(1e-7));
    Vec<double> same = oracles::heisenberg_velocity(c, v0, 0.0);
    CHECK(same == v0);
}

TEST_CASE("verify passes on every built-in scenario") {
    for (const auto& id : scenario_ids()) {
        CAPTURE(id);
        ScenarioConfig c;
        c.scenario = id;
        c.tmax = 1.0;
        VerifyResult r = verify_scenario(build_scenario(c), false);
        CHECK(r.pass);
        CHECK(r.text.find("overall: PASS") != std::string::npos);
    }
}
