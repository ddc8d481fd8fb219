// Command-line front end: analyze / crosscheck / export / validate /
// list-builders over JSON scenario files.
//
// Exit codes: 0 success, 1 input error, 2 validation failure,
// 3 resource/budget error, 4 crosscheck mismatch.

#include <CLI11.hpp>
#include <iostream>

#include "bac/scenario.hpp"

namespace {

int run(int argc, char** argv) {
    CLI::App app{"Convergence analysis of bounded agents in finite environments"};
    app.require_subcommand(1);

    std::string scenario_path, out_path, format = "json";
    int workers = 1;
    int oracle_depth = -1;
    uint64_t seed = 0;
    bool seed_set = false;

    auto add_common = [&](CLI::App* cmd, bool need_scenario = true) {
        auto* opt = cmd->add_option("--scenario", scenario_path, "scenario JSON file");
        if (need_scenario) opt->required();
        cmd->add_option("--workers", workers, "worker pool size")->check(CLI::PositiveNumber);
        cmd->add_option("--oracle-depth", oracle_depth, "history enumeration depth");
        cmd->add_option("--seed", seed, "override the scenario seed")
            ->each([&](const std::string&) { seed_set = true; });
    };

    auto* analyze = app.add_subcommand("analyze", "run the full analysis pipeline");
    add_common(analyze);
    analyze->add_option("--out", out_path, "write the JSON report here instead of stdout");

    auto* crosscheck = app.add_subcommand("crosscheck", "engine vs independent oracles");
    add_common(crosscheck);

    auto* exp = app.add_subcommand("export", "analyze and export sequences");
    add_common(exp);
    exp->add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    exp->add_option("--out", out_path, "output path")->required();

    auto* validate = app.add_subcommand("validate", "load and validate a scenario");
    add_common(validate);

    auto* list = app.add_subcommand("list-builders", "list agent and environment builders");
    (void)list;

    CLI11_PARSE(app, argc, argv);

    if (list->parsed()) {
        std::cout << "agent builders:\n";
        for (const auto& b : bac::known_agent_builders()) std::cout << "  " << b << '\n';
        std::cout << "environment builders:\n";
        for (const auto& b : bac::known_env_builders()) std::cout << "  " << b << '\n';
        return 0;
    }

    bac::Scenario sc = bac::load_scenario(scenario_path);
    if (seed_set) sc.options.seed = seed;
    if (oracle_depth >= 0) sc.options.oracle_depth = oracle_depth;

    if (validate->parsed()) {
        std::cout << "ok: " << scenario_path << " (digest " << sc.digest << ")\n";
        return 0;
    }
    if (analyze->parsed()) {
        auto rep = bac::cmd_analyze(sc, workers);
        if (out_path.empty())
            std::cout << bac::report_to_json(rep).dump(2) << '\n';
        else
            bac::cmd_export(rep, "json", out_path);
        return 0;
    }
    if (exp->parsed()) {
        auto rep = bac::cmd_analyze(sc, workers);
        bac::cmd_export(rep, format, out_path);
        return 0;
    }
    if (crosscheck->parsed()) {
        auto rep = bac::cmd_crosscheck(sc, sc.options.oracle_depth);
        std::cout << bac::crosscheck_to_json(rep).dump(2) << '\n';
        return rep.ok() ? 0 : 4;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const bac::ValidationFailure& e) {
        std::cerr << "validation failure:\n";
        for (const auto& msg : e.report.issues) std::cerr << "  " << msg << '\n';
        return 2;
    } catch (const bac::ResourceError& e) {
        std::cerr << "resource error: " << e.what() << '\n';
        return 3;
    } catch (const bac::UnsupportedError& e) {
        std::cerr << "unsupported: " << e.what() << '\n';
        return 1;
    } catch (const bac::InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
