// darboux <scatter|insert|remove|evolve|verify-example> [--config run.json] [flags]
// Flags override the config file.

#include "ebs/cli.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <optional>

namespace {

int fail_input(const std::string& code, const std::string& msg) {
    std::cerr << ebs::io::json{{"error", code}, {"kind", "validation"}, {"message", msg}, {"exit_code", 2}}.dump()
              << "\n";
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Embedded eigenvalues by binary Darboux transformation"};
    app.require_subcommand(1);

    std::string config_path, output;
    std::optional<double> rho, alpha, omega, x_min, x_max, k_min, k_max;
    std::optional<std::size_t> n, k_n;
    std::vector<double> t_values;

    for (const auto& name : ebs::cli::kCommands) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration (or a .meta.json)");
        sub->add_option("-o,--output", output, "output prefix");
        sub->add_option("--rho", rho, "wvn_example coupling");
        sub->add_option("--alpha", alpha, "norming constant of the inserted state");
        sub->add_option("--omega", omega, "embedded momentum (default 1)");
        sub->add_option("--x-min", x_min);
        sub->add_option("--x-max", x_max);
        sub->add_option("--n", n, "grid points");
        sub->add_option("--k-min", k_min);
        sub->add_option("--k-max", k_max);
        sub->add_option("--k-n", k_n);
        sub->add_option("--t", t_values, "evolution times");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail_input("usage", e.what());
    }

    ebs::cli::RunConfig c;
    try {
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) return fail_input("config", "cannot open config file " + config_path);
            c = ebs::cli::config_from_json(ebs::io::json::parse(f));
        }
        c.command = app.get_subcommands().front()->get_name();
        if (!output.empty()) c.output = output;
        if (c.command == "verify-example") {
            if (rho) c.rho = *rho;
            if (alpha) c.alpha = *alpha;
        } else {
            if (rho) c.potential = ebs::PotentialSpec::wvn_example(*rho);
            if (alpha) c.states = {{omega.value_or(1.0), *alpha}};
        }
        if (x_min || x_max || n)
            c.grid = ebs::Grid(x_min.value_or(c.grid.x_min), x_max.value_or(c.grid.x_max), n.value_or(c.grid.n));
        if (k_min) c.k_grid.k_min = *k_min;
        if (k_max) c.k_grid.k_max = *k_max;
        if (k_n) c.k_grid.n = *k_n;
        if (!t_values.empty()) c.t_values = t_values;
    } catch (const ebs::Error& e) {
        return fail_input(e.code(), e.what());
    } catch (const std::exception& e) {
        return fail_input("config", e.what());
    }
    return ebs::cli::run(c, std::cout, std::cerr);
}
