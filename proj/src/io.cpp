#include "ebs/io.hpp"

#include <Eigen/Core>
#include <boost/version.hpp>
#include <fftw3.h>

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace ebs::io {

namespace {

const char* kLibraryVersion = "0.1.0";

json num(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

double get_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    if (!j[key].is_number()) throw InputError("config", std::string("field '") + key + "' must be a number");
    const double v = j[key].get<double>();
    if (!std::isfinite(v)) throw InputError("config", std::string("field '") + key + "' is not finite");
    return v;
}

double need_num(const json& j, const char* key) {
    if (!j.contains(key)) throw InputError("config", std::string("missing field '") + key + "'");
    return get_num(j, key, 0.0);
}

RealVec num_array(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array())
        throw InputError("config", std::string("field '") + key + "' must be an array");
    RealVec v;
    for (const auto& e : j[key]) {
        if (!e.is_number()) throw InputError("config", std::string("non-numeric entry in '") + key + "'");
        v.push_back(e.get<double>());
    }
    return v;
}

std::vector<std::pair<double, double>> pair_list(const json& j, const char* key) {
    std::vector<std::pair<double, double>> out;
    if (!j.contains(key)) return out;
    for (const auto& e : j[key]) {
        if (!e.is_array() || e.size() != 2)
            throw InputError("config", std::string("entries of '") + key + "' must be pairs");
        out.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
    return out;
}

void put_row(std::ostream& os, const RealVec& v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << fmt17(v[i]);
    }
    os << '\n';
}

}  // namespace

std::string fmt17(double v) {
    if (v == 0) v = 0;  // no "-0" in output
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

json to_json(const Grid& g) { return {{"x_min", g.x_min}, {"x_max", g.x_max}, {"n", g.n}}; }

Grid grid_from_json(const json& j) {
    if (!j.is_object()) throw InputError("config", "grid must be an object");
    const double n = need_num(j, "n");
    if (n < 2 || n != std::floor(n)) throw InputError("grid", "n must be an integer >= 2");
    return Grid(need_num(j, "x_min"), need_num(j, "x_max"), std::size_t(n));
}

json to_json(const PotentialSpec& s) {
    json j;
    j["kind"] = s.kind_name();
    switch (s.kind) {
        case PotentialKind::Zero: break;
        case PotentialKind::WvnExample:
        case PotentialKind::SymPlusOne: j["rho"] = s.rho; break;
        case PotentialKind::Soliton: j["kappa"] = s.kappa; break;
        case PotentialKind::Sampled:
            j["grid"] = to_json(s.sample_grid);
            j["samples"] = s.samples;
            break;
        case PotentialKind::Shifted:
            j["shift"] = s.shift;
            j["base"] = to_json(s.parts.at(0));
            break;
        case PotentialKind::Sum:
            j["terms"] = json::array();
            for (const auto& t : s.parts) j["terms"].push_back(to_json(t));
            break;
    }
    j["right_cutoff"] = num(s.right_cutoff);
    if (s.kind == PotentialKind::Sampled) j["left_cutoff"] = num(s.left_cutoff);
    j["tail_tol"] = s.tail_tol;
    return j;
}

PotentialSpec potential_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
        throw InputError("potential", "potential needs a string 'kind'");
    const std::string kind = j["kind"];
    PotentialSpec s;
    if (kind == "zero") {
        s = PotentialSpec::zero();
    } else if (kind == "wvn_example") {
        s = PotentialSpec::wvn_example(need_num(j, "rho"));
        const double c = get_num(j, "right_cutoff", 0.0);
        // The seed vanishes on x >= 0, so any nonnegative cutoff is exact.
        if (c < 0) throw InputError("potential", "wvn_example is nonzero on x < 0; right_cutoff must be >= 0");
        s.right_cutoff = c;
    } else if (kind == "sym_plus_one") {
        s = PotentialSpec::sym_plus_one(need_num(j, "rho"), get_num(j, "right_cutoff", 200.0));
    } else if (kind == "soliton") {
        s = PotentialSpec::soliton(need_num(j, "kappa"));
        if (j.contains("right_cutoff") && !j["right_cutoff"].is_null())
            s.right_cutoff = get_num(j, "right_cutoff", s.right_cutoff);
    } else if (kind == "sampled") {
        const Grid g = grid_from_json(j.at("grid"));
        s = PotentialSpec::sampled(g, num_array(j, "samples"), get_num(j, "right_cutoff", g.x_max),
                                   get_num(j, "left_cutoff", -std::numeric_limits<double>::infinity()));
    } else if (kind == "shifted") {
        if (!j.contains("base")) throw InputError("potential", "shifted needs 'base'");
        s = PotentialSpec::shifted(potential_from_json(j["base"]), need_num(j, "shift"));
    } else if (kind == "sum") {
        if (!j.contains("terms") || !j["terms"].is_array())
            throw InputError("potential", "sum needs a 'terms' array");
        std::vector<PotentialSpec> terms;
        for (const auto& t : j["terms"]) terms.push_back(potential_from_json(t));
        s = PotentialSpec::sum(std::move(terms));
    } else {
        throw InputError("potential", "unknown potential kind '" + kind + "'");
    }
    if (j.contains("tail_tol") && !j["tail_tol"].is_null()) {
        s.tail_tol = get_num(j, "tail_tol", s.tail_tol);
        if (s.tail_tol < 0) throw InputError("potential", "tail_tol must be nonnegative");
    }
    return s;
}

json to_json(const ScatteringData& d) {
    json j;
    j["k"] = d.k;
    RealVec re, im;
    auto split = [&](const CplxVec& v) {
        re.clear();
        im.clear();
        for (const cplx& z : v) {
            re.push_back(z.real());
            im.push_back(z.imag());
        }
    };
    split(d.R);
    j["R_re"] = re;
    j["R_im"] = im;
    if (d.T) {
        split(*d.T);
        j["T_re"] = re;
        j["T_im"] = im;
    }
    if (d.L) {
        split(*d.L);
        j["L_re"] = re;
        j["L_im"] = im;
    }
    j["bound"] = json::array();
    for (auto [a, b] : d.bound) j["bound"].push_back({a, b});
    j["embedded"] = json::array();
    for (auto [a, b] : d.embedded) j["embedded"].push_back({a, b});
    return j;
}

ScatteringData scattering_from_json(const json& j) {
    ScatteringData d;
    d.k = num_array(j, "k");
    auto join = [&](const char* re, const char* im) {
        const RealVec a = num_array(j, re), b = num_array(j, im);
        if (a.size() != d.k.size() || b.size() != d.k.size())
            throw InputError("scattering", "coefficient arrays must match k");
        CplxVec z(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) z[i] = {a[i], b[i]};
        return z;
    };
    d.R = join("R_re", "R_im");
    if (j.contains("T_re")) d.T = join("T_re", "T_im");
    if (j.contains("L_re")) d.L = join("L_re", "L_im");
    d.bound = pair_list(j, "bound");
    d.embedded = pair_list(j, "embedded");
    d.validate();
    return d;
}

WaveField read_wavefield_csv(std::istream& is, cplx k) {
    std::string line;
    if (!std::getline(is, line)) throw InputError("csv", "empty wave field file");
    RealVec xs;
    WaveField f;
    f.k = k;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double v[5];
        char comma;
        ss >> v[0];
        for (int c = 1; c < 5; ++c) ss >> comma >> v[c];
        if (!ss) throw InputError("csv", "malformed wave field row: " + line);
        xs.push_back(v[0]);
        f.u.emplace_back(v[1], v[2]);
        f.du.emplace_back(v[3], v[4]);
    }
    if (xs.size() < 2) throw InputError("csv", "wave field needs at least two rows");
    f.grid = Grid(xs.front(), xs.back(), xs.size());
    return f;
}

void write_scattering_csv(const ScatteringData& d, std::ostream& os) {
    os << "k,R_re,R_im" << (d.T ? ",T_re,T_im" : "") << (d.L ? ",L_re,L_im" : "") << '\n';
    for (std::size_t i = 0; i < d.k.size(); ++i) {
        RealVec row{d.k[i], d.R[i].real(), d.R[i].imag()};
        if (d.T) {
            row.push_back((*d.T)[i].real());
            row.push_back((*d.T)[i].imag());
        }
        if (d.L) {
            row.push_back((*d.L)[i].real());
            row.push_back((*d.L)[i].imag());
        }
        put_row(os, row);
    }
}

void write_transform_csv(const TransformResult& r, std::ostream& os) {
    os << "x,q_seed,q_new,log_det";
    for (std::size_t n = 0; n < r.y.size(); ++n) os << ",y_" << n + 1;
    os << '\n';
    const RealVec qs = r.requested(r.q_seed), qn = r.requested(r.q_new), ld = r.requested(r.log_det);
    std::vector<WaveField> ys;
    for (const auto& y : r.y) ys.push_back(r.requested(y));
    RealVec row;
    for (std::size_t i = 0; i < r.grid.n; ++i) {
        row = {r.grid.x(i), qs[i], qn[i], ld[i]};
        for (const auto& y : ys) row.push_back(y.u[i].real());
        put_row(os, row);
    }
}

json transform_sidecar(const TransformResult& r) {
    json j;
    j["seed"] = to_json(r.seed);
    j["grid"] = to_json(r.grid);
    j["work_grid"] = to_json(r.work);
    j["states"] = json::array();
    for (const auto& s : r.states)
        j["states"].push_back({{"omega", s.omega},
                               {"alpha", s.alpha},
                               {"R_at_omega", {s.R_at_omega.real(), s.R_at_omega.imag()}}});
    const auto& o = r.options;
    j["tolerances"] = {{"ode_rtol", o.ode.rtol},           {"ode_atol", o.ode.atol},
                       {"max_spacing", o.max_spacing},     {"left_extension", o.left_extension},
                       {"right_extension", o.right_extension}, {"tail_window", o.tail_window},
                       {"left_tail", o.left_tail},         {"phi_sign", o.sign}};
    j["tail_fits"] = json::array();
    for (const auto& f : r.gram.fits)
        j["tail_fits"].push_back({{"x_edge", f.x_edge},
                                  {"left", f.left},
                                  {"freqs", f.freqs},
                                  {"orders", f.orders},
                                  {"coeffs", f.coeffs},
                                  {"integral", f.integral},
                                  {"rms_residual", f.rms_residual},
                                  {"rms_data", f.rms_data}});
    j["tail_constant"] = r.gram.tail_constant;
    return j;
}

void write_evolve_csv(const std::vector<EvolveRow>& rows, std::ostream& os) {
    os << "x,t,q,q_plus\n";
    for (const auto& r : rows) put_row(os, {r.x, r.t, r.q, r.q_plus});
}

json versions() {
    char eig[32];
    std::snprintf(eig, sizeof eig, "%d.%d.%d", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                  EIGEN_MINOR_VERSION);
    char boost[32];
    std::snprintf(boost, sizeof boost, "%d.%d.%d", BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000,
                  BOOST_VERSION % 100);
    return {{"ebs", std::string(kLibraryVersion)},
            {"eigen", std::string(eig)},
            {"boost", std::string(boost)},
            {"fftw", std::string(fftw_version)},
            {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                  std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
            {"compiler", std::string(__VERSION__)}};
}

}  // namespace ebs::io
