#pragma once

// Run configuration and the pipelines behind the command-line tool.
// run() writes <output>.csv and <output>.meta.json and returns an exit code:
// 0 success, 1 verify-example reported a failed check, 2 invalid input,
// 3 numerical failure.

#include "ebs/io.hpp"

#include <iosfwd>

namespace ebs::cli {

struct StateConfig {
    double omega = 1;
    double alpha = 1;
};

struct KGridConfig {
    double k_min = 0.2, k_max = 3;
    std::size_t n = 200;
    RealVec exclusions{1.0};
};

struct Tolerances {
    double ode_rtol = 1e-13, ode_atol = 1e-15;
    double max_spacing = 1e-2;
    double tail_window = 20;
    double exclusion_radius = 1e-3;
    double residue_delta = 1e-2;
};

struct RunConfig {
    std::string command = "verify-example";
    PotentialSpec potential = PotentialSpec::wvn_example(2.0);
    Grid grid{-20, 20, 4001};
    std::vector<StateConfig> states;
    KGridConfig k_grid;
    RealVec t_values{0.0};
    Tolerances tolerances;
    std::string output = "out";
    // verify-example only
    double rho = 2, alpha = 1;

    void validate() const;
};

extern const std::vector<std::string> kCommands;

// Accepts a bare config or a .meta.json (its "config" member).
RunConfig config_from_json(const io::json& j);
io::json to_json(const RunConfig& c);

struct CheckRow {
    std::string label;
    double value = 0, tolerance = 0;
    bool passed = false;
};

// Closed-form example checks at (rho, alpha); each row compares a numerical
// pipeline with its closed form.
std::vector<CheckRow> verify_example(double rho, double alpha);

// Executes the configured command. Errors are reported on `err` as one JSON
// object {"error": code, "message": ..., "exit_code": ...}.
int run(const RunConfig& c, std::ostream& out, std::ostream& err);

}  // namespace ebs::cli
