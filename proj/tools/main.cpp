#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace lastlook;
using namespace lastlook::cli;

int main(int argc, char** argv) {
    CLI::App app{"Last Look venue model: spreads, thresholds, equilibria and Monte Carlo checks"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string mode;

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const Scenario&, const RunContext&);
    };
    const Sub subs[] = {
        {"spread", "break-even spread sweep (exact and first-order columns)", cmd_spread},
        {"optimal-xi", "effective ST cost curve over the rejection threshold and its minimizer", cmd_optimal_xi},
        {"region", "two-venue equilibrium masks and conic boundaries", cmd_region},
        {"flow", "sequential migration or continuous flow trajectory", cmd_flow},
        {"verify", "Monte Carlo oracle and limit-reduction checks", cmd_verify},
    };
    std::vector<CLI::App*> apps;
    for (const auto& s : subs) {
        CLI::App* sub = app.add_subcommand(s.name, s.help);
        sub->add_option("--scenario", scenario_path, "scenario JSON file (defaults apply when omitted)");
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed, "override the scenario seed");
        sub->add_option("--mode", mode, "override the evaluation mode")->check(CLI::IsMember({"exact", "asymptotic"}));
        apps.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ExitCode::validation_failure;
    }

    try {
        Scenario s = scenario_path.empty() ? parse_scenario(nlohmann::json::object()) : load_scenario(scenario_path);
        if (seed) s.seed = *seed;
        if (!mode.empty()) s.mode = mode;
        const RunContext ctx{out_dir, &std::cout};
        for (std::size_t i = 0; i < apps.size(); ++i) {
            if (apps[i]->parsed()) return subs[i].run(s, ctx);
        }
        return ExitCode::validation_failure;
    } catch (const ValidationError& e) {
        std::cerr << "validation error at " << e.what() << '\n';
        return ExitCode::validation_failure;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return ExitCode::solver_failure;
    } catch (const std::domain_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return ExitCode::validation_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
