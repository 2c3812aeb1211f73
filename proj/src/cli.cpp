#include "ebs/cli.hpp"

#include "ebs/kdv.hpp"
#include "ebs/wvn_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ebs::cli {

using io::json;

const std::vector<std::string> kCommands{"scatter", "insert", "remove", "evolve",
                                         "verify-example"};

void RunConfig::validate() const {
    if (std::find(kCommands.begin(), kCommands.end(), command) == kCommands.end())
        throw InputError("config", "unknown command '" + command + "'");
    if (!(grid.n >= 2 && grid.x_min < grid.x_max)) throw InputError("grid", "bad grid");
    for (const auto& s : states) {
        if (!(std::isfinite(s.omega) && s.omega > 0))
            throw InputError("state", "omega must be positive and finite");
        if (!(std::isfinite(s.alpha) && s.alpha != 0))
            throw InputError("state", "alpha must be finite and nonzero");
    }
    if (!(k_grid.k_min < k_grid.k_max) || k_grid.n < 2)
        throw InputError("k_grid", "k grid needs k_min < k_max and n >= 2");
    for (double t : t_values)
        if (!(std::isfinite(t) && t >= 0)) throw InputError("time", "t values must be finite and >= 0");
    const Tolerances& o = tolerances;
    for (double v : {o.ode_rtol, o.ode_atol, o.max_spacing, o.tail_window, o.exclusion_radius,
                     o.residue_delta})
        if (!(std::isfinite(v) && v > 0)) throw InputError("tolerances", "tolerances must be positive");
    if (output.empty()) throw InputError("config", "output prefix is empty");
    if (command == "verify-example" && !(rho > 0 && alpha != 0))
        throw InputError("config", "verify-example needs rho > 0 and alpha != 0");
}

namespace {

double num_or(const json& j, const char* key, double fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    if (!j[key].is_number()) throw InputError("config", std::string("field '") + key + "' must be a number");
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) throw InputError("config", std::string("field '") + key + "' is not finite");
    return v;
}

std::size_t count_or(const json& j, const char* key, std::size_t fallback) {
    const double v = num_or(j, key, double(fallback));
    if (v < 0 || v != std::floor(v)) throw InputError("config", std::string("field '") + key + "' must be a count");
    return std::size_t(v);
}

RealVec vec_or(const json& j, const char* key, const RealVec& fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_array()) throw InputError("config", std::string("field '") + key + "' must be an array");
    RealVec v;
    for (const auto& e : j[key]) {
        if (!e.is_number()) throw InputError("config", std::string("non-numeric entry in '") + key + "'");
        v.push_back(e.get<double>());
    }
    return v;
}

void write_text(const std::string& path, const std::string& text) {
    const auto dir = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!dir.empty()) std::filesystem::create_directories(dir, ec);
    std::ofstream f(path, std::ios::binary);
    if (!f) throw InputError("output", "cannot write " + path);
    f << text;
}

void write_meta(const RunConfig& c, json diag) {
    json m;
    m["config"] = to_json(c);
    m["versions"] = io::versions();
    m["threads"] = worker_count();
    m["diagnostics"] = std::move(diag);
    write_text(c.output + ".meta.json", m.dump(2) + "\n");
}

OdeTolerances ode_of(const Tolerances& t) { return {t.ode_rtol, t.ode_atol}; }

TransformOptions transform_options(const Tolerances& t) {
    TransformOptions o;
    o.ode = ode_of(t);
    o.max_spacing = t.max_spacing;
    o.tail_window = t.tail_window;
    return o;
}

cplx reflection_at(const PotentialSpec& spec, double omega, const Tolerances& t) {
    if (spec.kind == PotentialKind::WvnExample)
        return wvn::scattering_closed({spec.rho, 1.0}, omega).R;
    return reflection_limit(spec, omega, t.residue_delta, ode_of(t));
}

std::vector<EmbeddedStateSpec> resolve_states(const RunConfig& c) {
    std::vector<EmbeddedStateSpec> out;
    for (const auto& s : c.states)
        out.push_back({s.omega, s.alpha, reflection_at(c.potential, s.omega, c.tolerances)});
    validate_states(out);
    return out;
}

double max_abs_diff(const RealVec& a, const RealVec& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---- commands -------------------------------------------------------------

int cmd_scatter(const RunConfig& c, std::ostream& out) {
    const RealVec k = make_k_grid(c.k_grid.k_min, c.k_grid.k_max, c.k_grid.n, c.k_grid.exclusions,
                                  c.tolerances.exclusion_radius);
    ScatteringData d = compute_scattering(c.potential, k, ode_of(c.tolerances));
    for (const auto& s : c.states) d.embedded.emplace_back(s.omega, s.alpha * s.alpha);
    d.validate(1e-6);
    std::ostringstream csv;
    io::write_scattering_csv(d, csv);
    write_text(c.output + ".csv", csv.str());
    write_text(c.output + ".scattering.json", io::to_json(d).dump(2) + "\n");

    double unitarity = 0;
    for (std::size_t i = 0; i < k.size(); ++i)
        unitarity = std::max(unitarity, std::abs(std::norm(d.R[i]) + std::norm((*d.T)[i]) - 1));
    json diag{{"k_points", k.size()}, {"unitarity_defect", unitarity}};
    if (c.potential.kind == PotentialKind::WvnExample) {
        double err = 0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            const auto s = wvn::scattering_closed({c.potential.rho, 1.0}, k[i]);
            err = std::max({err, std::abs(s.R - d.R[i]), std::abs(s.T - (*d.T)[i])});
        }
        diag["closed_form_max_error"] = err;
    }
    write_meta(c, diag);
    out << "scatter: " << k.size() << " momenta, unitarity defect " << unitarity << "\n";
    return 0;
}

int cmd_insert(const RunConfig& c, std::ostream& out) {
    const auto states = resolve_states(c);
    const TransformResult r = insert_embedded(c.potential, states, c.grid, transform_options(c.tolerances));
    std::ostringstream csv;
    io::write_transform_csv(r, csv);
    write_text(c.output + ".csv", csv.str());
    json diag = io::transform_sidecar(r);
    json norms = json::array();
    for (std::size_t n = 0; n < r.y.size(); ++n) norms.push_back(std::sqrt(eigenfunction_norm_sq(r, n)));
    diag["y_l2_norms"] = norms;
    diag["min_log_det"] = r.log_det.empty() ? 0.0 : *std::min_element(r.log_det.begin(), r.log_det.end());
    write_meta(c, diag);
    out << "insert: " << states.size() << " state(s) on " << c.grid.n << " points\n";
    return 0;
}

int cmd_remove(const RunConfig& c, std::ostream& out) {
    // Inserts the configured states, then removes them again through the
    // eigenfunctions of the transformed operator.
    const auto states = resolve_states(c);
    const TransformResult r = insert_embedded(c.potential, states, c.grid, transform_options(c.tolerances));
    RemovalOptions ro;
    ro.tail_window = c.tolerances.tail_window;
    const RemovalResult rm = remove_embedded(r, ro);
    const RealVec qs = r.requested(r.q_seed), qn = r.requested(r.q_new);
    const RealVec qr = r.requested(rm.q_new);
    std::ostringstream csv;
    csv << "x,q_seed,q_inserted,q_removed\n";
    for (std::size_t i = 0; i < c.grid.n; ++i)
        csv << io::fmt17(c.grid.x(i)) << ',' << io::fmt17(qs[i]) << ',' << io::fmt17(qn[i]) << ','
            << io::fmt17(qr[i]) << '\n';
    write_text(c.output + ".csv", csv.str());
    json diag = io::transform_sidecar(r);
    diag["orthonormality_error"] = rm.orthonormality_error;
    diag["round_trip_max_error"] = max_abs_diff(qr, qs);
    write_meta(c, diag);
    out << "remove: round trip max error " << max_abs_diff(qr, qs) << "\n";
    return 0;
}

int cmd_evolve(const RunConfig& c, std::ostream& out) {
    if (c.potential.kind != PotentialKind::WvnExample)
        throw InputError("potential", "evolve supports the wvn_example seed only");
    if (c.states.size() > 1) throw InputError("state", "evolve inserts at most one embedded state");
    const auto states = resolve_states(c);
    const wvn::Params p{c.potential.rho, states.empty() ? 1.0 : states[0].alpha};
    RealVec xs(c.grid.n);
    for (std::size_t i = 0; i < c.grid.n; ++i) xs[i] = c.grid.x(i);

    std::vector<io::EvolveRow> rows;
    json diag = json::array();
    for (double t : c.t_values) {
        const kdv::EvolvedState st = kdv::make_state(p, t);
        RealVec q(xs.size()), qp(xs.size());
        if (states.empty()) {
            q = kdv::dyson_q(st, xs);
            qp = q;
        } else {
            const auto v = kdv::q_plus_evolved(st, states[0], xs);
            for (std::size_t i = 0; i < xs.size(); ++i) {
                q[i] = v[i].q;
                qp[i] = v[i].q_plus;
            }
        }
        for (std::size_t i = 0; i < xs.size(); ++i) rows.push_back({xs[i], t, q[i], qp[i]});
        const double xm = 0.5 * (c.grid.x_min + c.grid.x_max);
        const kdv::PhiSymbol ph = kdv::phi_symbol(st, xm, 0.0);
        const kdv::MarchenkoSolution ms = kdv::solve_marchenko(st, xm);
        diag.push_back({{"t", t},
                        {"kappa", st.kappa},
                        {"c2", st.c2},
                        {"contour_height", st.disc.b},
                        {"marchenko_nodes_at_mid", ms.a.size()},
                        {"log_det_at_mid", ms.log_det},
                        {"phi_symbol_truncation_error", ph.truncation_error},
                        {"phi_symbol_converged", ph.converged}});
    }
    std::ostringstream csv;
    io::write_evolve_csv(rows, csv);
    write_text(c.output + ".csv", csv.str());
    const kdv::MarchenkoOptions mo;
    const kdv::HankelDiscretization hd;
    json meta{{"per_time", diag},
              {"marchenko",
               {{"panel_order", mo.panel_order},
                {"min_nodes", mo.min_nodes},
                {"panel_resolution", mo.panel_resolution},
                {"lower_shift", mo.lower_shift},
                {"upper_shift", mo.upper_shift},
                {"table_step", mo.table_step},
                {"tail_tol", mo.tail_tol},
                {"long_double_below", mo.long_double_below}}},
              {"hankel", {{"S", hd.S}, {"M", hd.M}, {"eta", hd.eta}, {"S_op", hd.S_op}, {"M_op", hd.M_op}}}};
    write_meta(c, meta);
    out << "evolve: " << c.t_values.size() << " time(s) x " << xs.size() << " points\n";
    return 0;
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
    const auto rows = verify_example(c.rho, c.alpha);
    std::ostringstream csv;
    csv << "check,value,tolerance,passed\n";
    bool all = true;
    char buf[160];
    out << "check                              value          tolerance  result\n";
    for (const auto& r : rows) {
        csv << r.label << ',' << io::fmt17(r.value) << ',' << io::fmt17(r.tolerance) << ','
            << (r.passed ? 1 : 0) << '\n';
        std::snprintf(buf, sizeof buf, "%-34s %-14.6e %-10.1e %s\n", r.label.c_str(), r.value,
                      r.tolerance, r.passed ? "PASS" : "FAIL");
        out << buf;
        all = all && r.passed;
    }
    write_text(c.output + ".csv", csv.str());
    json checks = json::array();
    for (const auto& r : rows)
        checks.push_back({{"check", r.label}, {"value", r.value}, {"tolerance", r.tolerance}, {"passed", r.passed}});
    write_meta(c, {{"checks", checks}, {"all_passed", all}});
    return all ? 0 : 1;
}

}  // namespace

RunConfig config_from_json(const json& in) {
    const json& j = in.contains("config") && in["config"].is_object() ? in["config"] : in;
    if (!j.is_object()) throw InputError("config", "config must be a JSON object");
    RunConfig c;
    if (j.contains("command")) c.command = j["command"].get<std::string>();
    if (j.contains("potential")) c.potential = io::potential_from_json(j["potential"]);
    if (j.contains("grid")) c.grid = io::grid_from_json(j["grid"]);
    if (j.contains("states")) {
        if (!j["states"].is_array()) throw InputError("config", "states must be an array");
        for (const auto& s : j["states"]) {
            if (!s.is_object() || !s.contains("omega") || !s.contains("alpha"))
                throw InputError("state", "each state needs omega and alpha");
            c.states.push_back({num_or(s, "omega", 0), num_or(s, "alpha", 0)});
        }
    }
    if (j.contains("k_grid")) {
        const json& k = j["k_grid"];
        c.k_grid.k_min = num_or(k, "k_min", c.k_grid.k_min);
        c.k_grid.k_max = num_or(k, "k_max", c.k_grid.k_max);
        c.k_grid.n = count_or(k, "n", c.k_grid.n);
        c.k_grid.exclusions = vec_or(k, "exclusions", c.k_grid.exclusions);
    }
    if (j.contains("time")) c.t_values = vec_or(j["time"], "t_values", c.t_values);
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        for (auto it = t.begin(); it != t.end(); ++it) {
            static const std::vector<std::string> known{"ode_rtol", "ode_atol", "max_spacing",
                                                        "tail_window", "exclusion_radius", "residue_delta"};
            if (std::find(known.begin(), known.end(), it.key()) == known.end())
                throw InputError("tolerances", "unknown tolerance '" + it.key() + "'");
        }
        auto& o = c.tolerances;
        o.ode_rtol = num_or(t, "ode_rtol", o.ode_rtol);
        o.ode_atol = num_or(t, "ode_atol", o.ode_atol);
        o.max_spacing = num_or(t, "max_spacing", o.max_spacing);
        o.tail_window = num_or(t, "tail_window", o.tail_window);
        o.exclusion_radius = num_or(t, "exclusion_radius", o.exclusion_radius);
        o.residue_delta = num_or(t, "residue_delta", o.residue_delta);
    }
    if (j.contains("output")) c.output = j["output"].get<std::string>();
    if (j.contains("example")) {
        c.rho = num_or(j["example"], "rho", c.rho);
        c.alpha = num_or(j["example"], "alpha", c.alpha);
    }
    return c;
}

json to_json(const RunConfig& c) {
    json states = json::array();
    for (const auto& s : c.states) states.push_back({{"omega", s.omega}, {"alpha", s.alpha}});
    const auto& o = c.tolerances;
    return {{"command", c.command},
            {"potential", io::to_json(c.potential)},
            {"grid", io::to_json(c.grid)},
            {"states", states},
            {"k_grid",
             {{"k_min", c.k_grid.k_min}, {"k_max", c.k_grid.k_max}, {"n", c.k_grid.n},
              {"exclusions", c.k_grid.exclusions}}},
            {"time", {{"t_values", c.t_values}}},
            {"tolerances",
             {{"ode_rtol", o.ode_rtol}, {"ode_atol", o.ode_atol}, {"max_spacing", o.max_spacing},
              {"tail_window", o.tail_window}, {"exclusion_radius", o.exclusion_radius},
              {"residue_delta", o.residue_delta}}},
            {"output", c.output},
            {"example", {{"rho", c.rho}, {"alpha", c.alpha}}}};
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    auto report = [&](const char* kind, const Error* e, const std::string& msg, int code) {
        json j{{"error", e ? e->code() : std::string(kind)}, {"kind", kind}, {"message", msg}, {"exit_code", code}};
        if (auto* ie = dynamic_cast<const IntegrationError*>(e)) j["x"] = ie->where();
        err << j.dump() << "\n";
        return code;
    };
    try {
        c.validate();
        if (c.command == "scatter") return cmd_scatter(c, out);
        if (c.command == "insert") return cmd_insert(c, out);
        if (c.command == "remove") return cmd_remove(c, out);
        if (c.command == "evolve") return cmd_evolve(c, out);
        return cmd_verify(c, out);
    } catch (const InputError& e) {
        return report("validation", &e, e.what(), 2);
    } catch (const NumericalError& e) {
        return report("numerical", &e, e.what(), 3);
    } catch (const json::exception& e) {
        return report("validation", nullptr, e.what(), 2);
    } catch (const std::exception& e) {
        return report("numerical", nullptr, e.what(), 3);
    }
}

}  // namespace ebs::cli
