#pragma once

#include <iosfwd>
#include <string>

#include "scenario.hpp"

namespace lastlook::cli {

enum ExitCode : int { ok = 0, validation_failure = 2, solver_failure = 3, verification_failure = 4 };

struct RunContext {
    std::string out_dir = ".";
    std::ostream* log = nullptr;  // human-readable summary; may be null
};

int cmd_spread(const Scenario& s, const RunContext& ctx);
int cmd_optimal_xi(const Scenario& s, const RunContext& ctx);
int cmd_region(const Scenario& s, const RunContext& ctx);
int cmd_flow(const Scenario& s, const RunContext& ctx);
int cmd_verify(const Scenario& s, const RunContext& ctx);

// Shortest decimal text that parses back to the same double; inf/nan spelled out.
[[nodiscard]] std::string format_number(double v);

}  // namespace lastlook::cli
