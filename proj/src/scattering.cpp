#include "ebs/scattering.hpp"

#include "ebs/wvn_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace ebs {

void ScatteringData::validate(double tol) const {
    if (R.size() != k.size()) throw InputError("scattering", "R samples do not match k grid");
    for (std::size_t i = 0; i < k.size(); ++i) {
        if (std::abs(R[i]) > 1 + tol) throw InputError("scattering", "|R(k)| exceeds 1");
        for (std::size_t j = 0; j < k.size(); ++j)
            if (std::abs(k[j] + k[i]) < 1e-14 * std::max(1.0, std::abs(k[i])) &&
                std::abs(R[j] - std::conj(R[i])) > 1e-6)
                throw InputError("scattering", "R(-k) != conj R(k)");
    }
    for (std::size_t i = 1; i < bound.size(); ++i)
        if (!(bound[i].first < bound[i - 1].first))
            throw InputError("scattering", "bound state kappas must strictly decrease");
    for (std::size_t i = 1; i < embedded.size(); ++i)
        if (!(embedded[i].first > embedded[i - 1].first))
            throw InputError("scattering", "embedded omegas must strictly increase");
    for (const auto& b : bound)
        if (!(b.first > 0 && b.second > 0)) throw InputError("scattering", "bad bound state");
    for (const auto& e : embedded)
        if (!(e.first > 0 && e.second > 0)) throw InputError("scattering", "bad embedded state");
}

Grid default_scattering_grid(const PotentialSpec& spec, double x_lo, double x_hi, double h) {
    const double c = std::isfinite(spec.right_cutoff) ? spec.right_cutoff : x_hi;
    double lo = std::min(x_lo, c - 10.0);
    if (std::isfinite(spec.left_cutoff)) lo = std::min(lo, spec.left_cutoff);
    const double hi = std::max(x_hi, c + 1.0);
    return Grid::covering(lo, hi, h, x_lo);
}

namespace {

// Node where Wronskians are read: inside the potential's support, so the value
// depends on the integrated solutions and not only on the exact tail data.
std::size_t wronskian_node(const PotentialSpec& spec, const Grid& g) {
    const double c = std::isfinite(spec.right_cutoff) ? std::min(spec.right_cutoff, g.x_max)
                                                      : g.x_max;
    return g.nearest(0.5 * (g.x_min + c));
}

cplx w_at(const WaveField& f, const WaveField& g, std::size_t i) {
    return f.u[i] * g.du[i] - f.du[i] * g.u[i];
}

struct JostPair {
    WaveField psi, psim;
    cplx W;  // W(psi_-, psi)
    std::size_t node;
};

JostPair jost_pair(const PotentialSpec& spec, cplx k, const Grid& g, const OdeTolerances& tol) {
    JostPair jp;
    jp.psi = right_jost(spec, k, g, tol);
    try {
        jp.psim = left_jost(spec, k, g, tol);
    } catch (const InputError& e) {
        if (e.code() == "pole")
            throw NumericalError("degenerate_wronskian",
                                 "left solution is singular at this momentum");
        throw;
    }
    jp.node = wronskian_node(spec, g);
    jp.W = w_at(jp.psim, jp.psi, jp.node);
    const double scale = std::abs(jp.psim.u[jp.node] * jp.psi.du[jp.node]) +
                         std::abs(jp.psim.du[jp.node] * jp.psi.u[jp.node]);
    if (!(std::abs(jp.W) > 1e-12 * std::max(scale, 1e-300)))
        throw NumericalError("degenerate_wronskian", "W(psi_-, psi) vanishes at this momentum");
    return jp;
}

}  // namespace

WaveField left_weyl(const PotentialSpec& spec, double k, const Grid& grid, cplx R_value,
                    const OdeTolerances& tol) {
    if (std::abs(R_value) > 1 + 1e-8) throw InputError("reflection", "|R| must not exceed 1");
    const WaveField psi = right_jost(spec, k, grid, tol);
    WaveField phi = psi;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        phi.u[i] = std::conj(psi.u[i]) + R_value * psi.u[i];
        phi.du[i] = std::conj(psi.du[i]) + R_value * psi.du[i];
    }
    phi.k = -k;
    return phi;
}

WaveField left_weyl_analytic(const PotentialSpec& spec, cplx k, const Grid& grid,
                             const OdeTolerances& tol) {
    JostPair jp = jost_pair(spec, k, grid, tol);
    const cplx T = 2.0 * I1 * k / jp.W;
    for (auto& v : jp.psim.u) v *= T;
    for (auto& v : jp.psim.du) v *= T;
    return jp.psim;
}

cplx reflection_from_wronskians(const PotentialSpec& spec, double k, const Grid& grid,
                                const OdeTolerances& tol) {
    const JostPair jp = jost_pair(spec, k, grid, tol);
    const std::size_t i = jp.node;
    const cplx wc = jp.psim.u[i] * std::conj(jp.psi.du[i]) - jp.psim.du[i] * std::conj(jp.psi.u[i]);
    return -wc / jp.W;
}

cplx reflection_limit(const PotentialSpec& spec, double omega, double delta0,
                      const OdeTolerances& tol) {
    const Grid g = default_scattering_grid(spec, 0.0, 0.0);
    cplx s[3];
    for (int j = 0; j < 3; ++j) {
        const double d = delta0 / double(1 << j);
        s[j] = 0.5 * (reflection_from_wronskians(spec, omega + d, g, tol) +
                      reflection_from_wronskians(spec, omega - d, g, tol));
    }
    const cplx r0 = (4.0 * s[1] - s[0]) / 3.0, r1 = (4.0 * s[2] - s[1]) / 3.0;
    return (16.0 * r1 - r0) / 15.0;
}

cplx transmission_analytic(const PotentialSpec& spec, cplx k, const OdeTolerances& tol) {
    const Grid g = default_scattering_grid(spec, 0.0, 0.0);
    const JostPair jp = jost_pair(spec, k, g, tol);
    return 2.0 * I1 * k / jp.W;
}

cplx transmission(const PotentialSpec& spec, double k, const OdeTolerances& tol) {
    return transmission_analytic(spec, k, tol);
}

cplx greens_diagonal(const PotentialSpec& spec, cplx k, double x, const OdeTolerances& tol) {
    if (std::abs(k) == 0.0) throw InputError("k_zero", "Green's function needs k != 0");
    const Grid g = default_scattering_grid(spec, x, x);
    const JostPair jp = jost_pair(spec, k, g, tol);
    const std::size_t i = g.nearest(x);
    return -jp.psim.u[i] * jp.psi.u[i] / jp.W;
}

MFunctionSample m_functions(const PotentialSpec& spec, cplx lambda, double a,
                            const OdeTolerances& tol) {
    if (!(lambda.imag() > 0)) throw InputError("lambda", "m-functions need Im lambda > 0");
    cplx k = std::sqrt(lambda);
    if (k.imag() < 0) k = -k;
    const Grid g = default_scattering_grid(spec, a, a);
    const std::size_t i = g.nearest(a);
    const WaveField psi = right_jost(spec, k, g, tol);
    const WaveField psim = left_jost(spec, k, g, tol);
    auto check = [&](const WaveField& f, const char* which) {
        if (std::abs(f.u[i]) * std::max(1.0, std::abs(k)) <= 1e-13 * std::abs(f.du[i]))
            throw NumericalError("pole_at_sample",
                                 std::string("Weyl solution ") + which + " vanishes at a");
    };
    check(psi, "+");
    check(psim, "-");
    MFunctionSample m;
    m.lambda = lambda;
    m.m_plus = psi.du[i] / psi.u[i];
    m.m_minus = -psim.du[i] / psim.u[i];
    m.m_neumann = -1.0 / m.m_plus;
    return m;
}

RealVec make_k_grid(double k_min, double k_max, std::size_t n, const RealVec& exclude,
                    double radius) {
    if (!(k_min < k_max) || n < 2) throw InputError("k_grid", "need k_min < k_max and n >= 2");
    RealVec cuts = exclude;
    cuts.push_back(0.0);
    std::vector<std::pair<double, double>> segs{{k_min, k_max}};
    for (double c : cuts) {
        std::vector<std::pair<double, double>> next;
        for (auto [a, b] : segs) {
            if (c + radius <= a || c - radius >= b) {
                next.push_back({a, b});
                continue;
            }
            if (c - radius > a) next.push_back({a, c - radius});
            if (c + radius < b) next.push_back({c + radius, b});
        }
        segs = std::move(next);
    }
    double total = 0;
    for (auto [a, b] : segs) total += b - a;
    if (segs.empty() || total <= 0) throw InputError("k_grid", "exclusions cover the whole range");
    RealVec k;
    k.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = total * double(j) / double(n - 1);
        for (std::size_t m = 0; m < segs.size(); ++m) {
            const double len = segs[m].second - segs[m].first;
            if (s <= len || m + 1 == segs.size()) {
                k.push_back(segs[m].first + std::min(s, len));
                break;
            }
            s -= len;
        }
    }
    return k;
}

ScatteringData compute_scattering(const PotentialSpec& spec, const RealVec& k,
                                  const OdeTolerances& tol) {
    ScatteringData d;
    d.k = k;
    d.R.resize(k.size());
    CplxVec T(k.size()), L(k.size());
    const Grid g = default_scattering_grid(spec, 0.0, 0.0);
    parallel_for(k.size(), [&](std::size_t j) {
        const JostPair jp = jost_pair(spec, k[j], g, tol);
        const std::size_t i = jp.node;
        const cplx wc =
            jp.psim.u[i] * std::conj(jp.psi.du[i]) - jp.psim.du[i] * std::conj(jp.psi.u[i]);
        const cplx wl =
            jp.psi.u[i] * std::conj(jp.psim.du[i]) - jp.psi.du[i] * std::conj(jp.psim.u[i]);
        d.R[j] = -wc / jp.W;
        T[j] = 2.0 * I1 * k[j] / jp.W;
        L[j] = wl / jp.W;
    });
    d.T = std::move(T);
    d.L = std::move(L);
    if (spec.kind == PotentialKind::WvnExample) {
        const auto b = wvn::bound_state({spec.rho, 1.0});
        d.bound.push_back({b.kappa, b.c2});
    }
    return d;
}

ResidueResult residue_at(cplx omega, const std::function<CplxVec(cplx)>& family,
                         const ResidueOptions& opt) {
    const double d0 = opt.delta0;
    std::vector<CplxVec> S(3), D(3);
    for (int j = 0; j < 3; ++j) {
        const double d = d0 / double(1 << j);
        const CplxVec fp = family(omega + d), fm = family(omega - d);
        if (fp.size() != fm.size()) throw InputError("residue", "family changes size");
        S[j].resize(fp.size());
        D[j].resize(fp.size());
        for (std::size_t i = 0; i < fp.size(); ++i) {
            S[j][i] = 0.5 * d * (fp[i] - fm[i]);
            D[j][i] = 0.5 * d * (fp[i] + fm[i]);
        }
    }
    const std::size_t n = S[0].size();
    ResidueResult r;
    r.value.resize(n);
    double err = 0, big = 0, dbig0 = 0, dbig2 = 0, sbig = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx r10 = (4.0 * S[1][i] - S[0][i]) / 3.0;
        const cplx r11 = (4.0 * S[2][i] - S[1][i]) / 3.0;
        const cplx r2 = (16.0 * r11 - r10) / 15.0;
        r.value[i] = r2;
        err = std::max(err, std::abs(r2 - r11));
        big = std::max(big, std::abs(r2));
        sbig = std::max({sbig, std::abs(S[0][i]), std::abs(D[0][i])});
        dbig0 = std::max(dbig0, std::abs(D[0][i]));
        dbig2 = std::max(dbig2, std::abs(D[2][i]));
    }
    r.error = err;
    // (k-omega) f even part grows like 1/delta only for a pole of order >= 2.
    if (dbig2 > 2.0 * dbig0 && dbig2 > 1e-8 * std::max(1.0, sbig))
        throw NumericalError("higher_order_singularity",
                             "family has a pole of order >= 2 at omega");
    r.regular = big <= 1e-8 * std::max(1.0, sbig / d0);
    if (!r.regular && err > opt.rel_tol * big)
        throw NumericalError("nonconvergent_residue", "residue extrapolation did not converge");
    return r;
}

WaveField residue_at(cplx omega, const std::function<WaveField(cplx)>& family, double* error,
                     const ResidueOptions& opt) {
    WaveField proto;
    auto flat = [&](cplx k) {
        WaveField f = family(k);
        if (proto.size() == 0) proto = f;
        CplxVec v(f.u);
        v.insert(v.end(), f.du.begin(), f.du.end());
        return v;
    };
    const ResidueResult r = residue_at(omega, flat, opt);
    const std::size_t n = proto.size();
    proto.u.assign(r.value.begin(), r.value.begin() + long(n));
    proto.du.assign(r.value.begin() + long(n), r.value.end());
    proto.k = omega;
    if (error) *error = r.error;
    return proto;
}

PoleFit classify_pole(const std::function<cplx(double)>& f, const RealVec& eps) {
    const std::size_t n = eps.size();
    if (n < 2) throw InputError("pole_fit", "need at least two eps values");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double e : eps) {
        const double x = -std::log(e), y = std::log(std::abs(f(e)));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    PoleFit p;
    p.order = (double(n) * sxy - sx * sy) / (double(n) * sxx - sx * sx);
    p.C = std::exp((sy - p.order * sx) / double(n));
    p.kind = std::abs(p.order - 1) < 0.25 ? "simple_pole"
             : std::abs(p.order) < 0.25   ? "regular"
                                          : "other";
    return p;
}

}  // namespace ebs
