#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "routh/scenarios.hpp"

namespace {

enum Exit { kPass = 0, kVerifyFail = 1, kConfigError = 2, kNumericError = 3 };

struct Options {
    std::string scenario, config, out, group = "full";
    std::optional<double> h, tmax;
    std::optional<std::uint64_t> seed;
    bool stages = false;
};

routh::Scenario load(const Options& o) {
    routh::ScenarioConfig cfg = o.config.empty() ? routh::ScenarioConfig{} : routh::ScenarioConfig::load(o.config);
    if (!o.scenario.empty()) cfg.scenario = o.scenario;
    if (o.h) cfg.h = *o.h;
    if (o.tmax) cfg.tmax = *o.tmax;
    if (o.seed) cfg.seed = *o.seed;
    if (!o.out.empty()) cfg.out = o.out;
    return routh::build_scenario(cfg);
}

/// Writes to the configured output path, or stdout when none is set.
template <class F>
void emit(const routh::Scenario& sc, F write) {
    if (sc.cfg.out.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream f(sc.cfg.out);
    if (!f) throw routh::ConfigurationError("cannot write " + sc.cfg.out);
    write(f);
}

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--scenario", o.scenario, "built-in scenario id");
    cmd->add_option("--config", o.config, "key = value configuration file");
    cmd->add_option("--out", o.out, "output path (default stdout)");
    cmd->add_option("--h", o.h, "integrator step");
    cmd->add_option("--tmax", o.tmax, "integration horizon in seconds");
    cmd->add_option("--seed", o.seed, "seed for sampled checks");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Routh reduction of magnetic Lagrangian systems"};
    app.set_help_flag("--help", "print help");
    app.require_subcommand(1);
    Options o;
    auto* simulate = app.add_subcommand("simulate", "integrate the full system and write a CSV trajectory");
    auto* reduce = app.add_subcommand("reduce", "reduce at the momentum of the initial state and write a report");
    auto* stages = app.add_subcommand("stages", "run reduction by stages and write the equivalence report");
    auto* verify = app.add_subcommand("verify", "run the verification suite; exit status reflects the result");
    auto* list = app.add_subcommand("list-scenarios", "list built-in scenarios");
    for (auto* cmd : {simulate, reduce, stages, verify}) add_common(cmd, o);
    reduce->add_option("--group", o.group, "full or normal")->check(CLI::IsMember({"full", "normal"}));
    verify->add_flag("--stages", o.stages, "include the reduction-by-stages equivalence check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kConfigError;
    }

    try {
        if (list->parsed()) {
            for (const auto& id : routh::scenario_ids()) {
                routh::ScenarioConfig cfg;
                cfg.scenario = id;
                std::cout << id << "\t" << routh::build_scenario(cfg).description << "\n";
            }
            return kPass;
        }
        const routh::Scenario sc = load(o);
        if (simulate->parsed()) {
            std::vector<std::string> columns;
            const routh::Trajectory tr = routh::simulate(sc, columns);
            emit(sc, [&](std::ostream& os) { routh::write_csv(os, columns, tr); });
            return kPass;
        }
        if (reduce->parsed()) {
            const std::string text = routh::reduction_report(sc, o.group);
            emit(sc, [&](std::ostream& os) { os << text; });
            return kPass;
        }
        if (stages->parsed()) {
            const routh::StagesReport rep = routh::run_stages(sc);
            emit(sc, [&](std::ostream& os) {
                os << "scenario: " << sc.id << "\nseed: " << sc.cfg.seed << "\n" << rep.to_text();
            });
            return rep.pass() ? kPass : kVerifyFail;
        }
        const routh::VerifyResult res = routh::verify_scenario(sc, o.stages);
        emit(sc, [&](std::ostream& os) { os << res.text; });
        return res.pass ? kPass : kVerifyFail;
    } catch (const routh::ConfigurationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const routh::DomainError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const routh::StructuralError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const routh::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumericError;
    } catch (const routh::ConsistencyError& e) {
        std::cerr << "verification failure: " << e.what() << "\n";
        return kVerifyFail;
    }
}
