#include "doctest.h"

#include "ebs/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ebs;
using io::json;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / "ebs_io_cli_tests";
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string* header = nullptr) {
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    if (header) *header = line;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        std::vector<double> r;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) r.push_back(std::stod(cell));
        rows.push_back(r);
    }
    return rows;
}

}  // namespace

TEST_SUITE("io_cli") {

TEST_CASE("number formatting") {
    CHECK(io::fmt17(-0.0) == "0");
    CHECK(io::fmt17(0.1) == "0.10000000000000001");
    for (double v : {1.0 / 3, -2.5e-300, 6.02214076e23, 1e-320}) CHECK(std::strtod(io::fmt17(v).c_str(), nullptr) == v);
}

TEST_CASE("potential JSON") {
    const Grid g(-1, 1, 5);
    const std::vector<PotentialSpec> specs{
        PotentialSpec::zero(),
        PotentialSpec::wvn_example(2),
        PotentialSpec::sym_plus_one(1.5, 50),
        PotentialSpec::soliton(0.7),
        PotentialSpec::sampled(g, {0, 1, 2, 1, 0}, 1.0, -1.0),
        PotentialSpec::shifted(PotentialSpec::soliton(1), 0.5),
        PotentialSpec::sum({PotentialSpec::wvn_example(1), PotentialSpec::soliton(2)}),
    };
    for (const auto& s : specs) {
        const json j = io::to_json(s);
        const PotentialSpec b = io::potential_from_json(j);
        CHECK(io::to_json(b) == j);
        for (double x : {-0.9, -0.2, 0.0, 0.3}) CHECK(eval_potential(b, x) == eval_potential(s, x));
    }
    CHECK(io::to_json(PotentialSpec::sampled(g, {0, 1, 2, 1, 0}, 1.0))["left_cutoff"].is_null());
    CHECK_THROWS_AS(io::potential_from_json({{"kind", "wvn_example"}, {"rho", 2}, {"right_cutoff", -1}}), InputError);
    CHECK_THROWS_AS(io::potential_from_json({{"kind", "square_well"}}), InputError);
    CHECK_THROWS_AS(io::potential_from_json({{"kind", "wvn_example"}}), InputError);
    CHECK_THROWS_AS(io::potential_from_json(json::array()), InputError);
}

TEST_CASE("scattering and grid JSON") {
    ScatteringData d;
    d.k = {0.5, 2};
    d.R = {{0.1, -0.2}, {0.3, 0.05}};
    d.T = CplxVec{{0.9, 0.1}, {0.8, -0.3}};
    d.bound = {{1.0, 0.5}};
    d.embedded = {{1.0, 1.0}};
    const ScatteringData b = io::scattering_from_json(io::to_json(d));
    CHECK(b.k == d.k);
    CHECK(b.R == d.R);
    REQUIRE(b.T);
    CHECK(*b.T == *d.T);
    CHECK_FALSE(b.L);
    CHECK(b.bound == d.bound);
    CHECK(b.embedded == d.embedded);
    const Grid g(-3.5, 7.25, 431);
    const Grid h = io::grid_from_json(io::to_json(g));
    CHECK(h.x_min == g.x_min);
    CHECK(h.x_max == g.x_max);
    CHECK(h.n == g.n);
    CHECK_THROWS_AS(io::grid_from_json({{"x_min", 1}, {"x_max", 0}, {"n", 10}}), InputError);
}

TEST_CASE("wave field CSV round trip") {
    const Grid g(-2, 2, 41);
    const WaveField f = right_jost(PotentialSpec::wvn_example(2), 1.3, g);
    std::stringstream ss;
    write_csv(f, ss);
    const WaveField b = io::read_wavefield_csv(ss, f.k);
    REQUIRE(b.size() == f.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(b.u[i] == f.u[i]);
        CHECK(b.du[i] == f.du[i]);
    }
    std::stringstream bad("x,re_u\n0,1\n");
    CHECK_THROWS_AS(io::read_wavefield_csv(bad), InputError);
}

TEST_CASE("config parsing") {
    const cli::RunConfig d = cli::config_from_json(json::object());
    CHECK(d.command == "verify-example");
    CHECK(d.grid.n == 4001);
    const json full = cli::to_json(d);
    CHECK(cli::to_json(cli::config_from_json(full)) == full);
    // a sidecar is accepted as a config
    CHECK(cli::to_json(cli::config_from_json({{"config", full}})) == full);

    json j = full;
    j["states"] = {{{"omega", 1}, {"alpha", 0.5}}};
    j["tolerances"]["residue_delta"] = 1e-3;
    const cli::RunConfig c = cli::config_from_json(j);
    REQUIRE(c.states.size() == 1);
    CHECK(c.states[0].alpha == 0.5);
    CHECK(c.tolerances.residue_delta == 1e-3);

    j = full;
    j["tolerances"]["ode_rtoll"] = 1e-9;
    CHECK_THROWS_AS(cli::config_from_json(j), InputError);
    j = full;
    j["grid"]["n"] = "many";
    CHECK_THROWS(cli::config_from_json(j));
    cli::RunConfig v;
    v.command = "explode";
    CHECK_THROWS_AS(v.validate(), InputError);
    v.command = "insert";
    v.states = {{1.0, 0.0}};
    CHECK_THROWS_AS(v.validate(), InputError);
}

TEST_CASE("run: exit codes and outputs") {
    const fs::path dir = scratch_dir();
    std::stringstream out, err;

    cli::RunConfig c;
    c.command = "insert";
    c.grid = Grid(-5, 5, 501);
    c.output = (dir / "empty").string();
    REQUIRE(cli::run(c, out, err) == 0);
    std::string header;
    const auto rows = read_csv(dir / "empty.csv", &header);
    CHECK(header == "x,q_seed,q_new,log_det");
    REQUIRE(rows.size() == 501);
    for (const auto& r : rows) CHECK(r[1] == r[2]);
    const json meta = json::parse(slurp(dir / "empty.meta.json"));
    CHECK(meta.contains("versions"));
    CHECK(meta["config"]["command"] == "insert");

    c.states = {{1.0, 1.0}};
    c.output = (dir / "one").string();
    REQUIRE(cli::run(c, out, err) == 0);
    const json m1 = json::parse(slurp(dir / "one.meta.json"));
    CHECK(std::abs(m1["diagnostics"]["y_l2_norms"][0].get<double>() - 1) < 1e-6);

    // not a full-reflection momentum
    err.str("");
    c.states = {{2.0, 1.0}};
    CHECK(cli::run(c, out, err) == 2);
    const json e2 = json::parse(err.str());
    CHECK(e2["exit_code"] == 2);
    CHECK(e2["error"] == "not_resonant");

    // a tail window too short for the Cauchy test
    err.str("");
    c.states = {{1.0, 1.0}};
    c.tolerances.tail_window = 3;
    CHECK(cli::run(c, out, err) == 3);
    CHECK(json::parse(err.str())["kind"] == "numerical");
}

TEST_CASE("run: scatter is deterministic") {
    const fs::path dir = scratch_dir();
    std::stringstream out, err;
    cli::RunConfig c;
    c.command = "scatter";
    c.k_grid.n = 40;
    c.output = (dir / "s1").string();
    REQUIRE(cli::run(c, out, err) == 0);
    c.output = (dir / "s2").string();
    REQUIRE(cli::run(c, out, err) == 0);
    CHECK(slurp(dir / "s1.csv") == slurp(dir / "s2.csv"));
    CHECK(slurp(dir / "s1.scattering.json") == slurp(dir / "s2.scattering.json"));
    std::string header;
    const auto rows = read_csv(dir / "s1.csv", &header);
    CHECK(rows.size() == 40);
    for (const auto& r : rows) CHECK(std::hypot(r[1], r[2]) <= 1 + 1e-12);
}

}  // TEST_SUITE
