#include "ebs/wvn_oracle.hpp"

#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <functional>
#include <limits>

namespace ebs::wvn {

namespace {

// Representations below have removable singularities at k = 0, +-1; near those
// points evaluate through Cauchy's formula on a circle that avoids them.
cplx removable(const std::function<cplx(cplx)>& f, cplx k) {
    for (double c : {-1.0, 0.0, 1.0}) {
        if (std::abs(k - c) < 1e-2) {
            const int n = 32;
            const double r = 0.05;
            cplx acc = 0;
            for (int j = 0; j < n; ++j) {
                const cplx e = std::polar(1.0, 2 * pi * (j + 0.5) / n);
                const cplx z = c + r * e;
                acc += f(z) * (r * e) / (z - k);
            }
            return acc / double(n);
        }
    }
    return f(k);
}

}  // namespace

Jet tau(const Params& p, double x) {
    const double u = std::abs(x), s = x < 0 ? -1.0 : 1.0, su = std::sin(u);
    return {1 + p.rho * u - 0.5 * p.rho * std::sin(2 * u), s * 2 * p.rho * su * su,
            2 * p.rho * std::sin(2 * u)};
}

double q_seed(const Params& p, double x) {
    if (x >= 0) return 0.0;
    const Jet t = tau(p, x);
    const double a = t.d1 / t.v;
    return -2 * (t.d2 / t.v - a * a);
}

double q_plus1(const Params& p, double x) {
    const double a2 = p.alpha * p.alpha;
    const double c = x < 0 ? p.rho / (2 * a2) : 2 * a2 / p.rho;
    const Jet t = tau(p, x);
    const double f = 1 + c * t.v, g = c * t.d1 / f;
    return -2 * (c * t.d2 / f - g * g);
}

double q_sym(const Params& p, double x) {
    // 1 + rho * int_0^|x| sin^2 = (1 + tau) / 2
    const Jet t = tau(p, x);
    const double f = 1 + t.v, g = t.d1 / f;
    return -2 * (t.d2 / f - g * g);
}

Scatter scattering_closed(const Params& p, cplx k) {
    const cplx P = k * k * k - k, D = P + I1 * p.rho;
    const cplx R = -I1 * p.rho / D;
    return {P / D, R, R};
}

cplx reflection_dk(const Params& p, cplx k) {
    const cplx P = k * k * k - k, D = P + I1 * p.rho;
    return I1 * p.rho * (3.0 * k * k - 1.0) / (D * D);
}

CJet left_jost_closed(const Params& p, double x, cplx k) {
    if (std::abs(k - 1.0) < 1e-14 || std::abs(k + 1.0) < 1e-14)
        throw InputError("pole", "left Jost solution has a pole at k = +-1");
    if (x >= 0) {
        // plane waves matched to the data at 0: value 1, slope -ik + 2 rho/(k^2-1)
        const cplx d0 = -I1 * k + 2.0 * p.rho / (k * k - 1.0);
        const cplx b = 0.5 * (1.0 + d0 / (I1 * k)), a = 1.0 - b;
        const cplx em = std::exp(-I1 * k * x), ep = std::exp(I1 * k * x);
        return {a * em + b * ep, I1 * k * (b * ep - a * em)};
    }
    const Jet t = tau(p, x);
    const double sx = std::sin(x), cx = std::cos(x);
    const double g = p.rho * sx / t.v, dg = p.rho * (cx * t.v - sx * t.d1) / (t.v * t.v);
    const cplx e0 = std::exp(-I1 * k * x), ep = std::exp(-I1 * (k + 1.0) * x),
               em = std::exp(-I1 * (k - 1.0) * x);
    const cplx B = ep / (k + 1.0) - em / (k - 1.0);
    const cplx dB = -I1 * (ep - em);
    return {e0 - B * g, -I1 * k * e0 - dB * g - B * dg};
}

CJet psi_plus_closed(const Params& p, double x, cplx k) {
    if (x >= 0) {
        const cplx e = std::exp(I1 * k * x);
        return {e, I1 * k * e};
    }
    // T psi = psi_-(x,-k) + L psi_-(x,k)
    auto part = [&](cplx z, bool deriv) {
        const Scatter s = scattering_closed(p, z);
        const CJet a = left_jost_closed(p, x, -z), b = left_jost_closed(p, x, z);
        return deriv ? (a.d1 + s.L * b.d1) / s.T : (a.v + s.L * b.v) / s.T;
    };
    return {removable([&](cplx z) { return part(z, false); }, k),
            removable([&](cplx z) { return part(z, true); }, k)};
}

Jet phi_closed(const Params& p, double s) {
    if (s >= 0) return {2 * std::sin(s), 2 * std::cos(s), -2 * std::sin(s)};
    const Jet t = tau(p, s);
    const double v = 2 * std::sin(s) / t.v;
    const double d1 = 2 * (std::cos(s) * t.v - std::sin(s) * t.d1) / (t.v * t.v);
    return {v, d1, (q_seed(p, s) - 1.0) * v};
}

Jet I_closed(const Params& p, double x) {
    const Jet t = tau(p, x);
    const Jet f = phi_closed(p, x);
    const double v = x < 0 ? 2 / (p.rho * t.v) : 2 * t.v / p.rho;
    return {v, f.v * f.v, 2 * f.v * f.d1};
}

Jet y_closed(const Params& p, double x) {
    const double a = p.alpha, a2 = a * a;
    const Jet f = phi_closed(p, x), I = I_closed(p, x);
    const double D = 1 + a2 * I.v;
    const double v = a * f.v / D;
    return {v, a * f.d1 / D - a * f.v * a2 * I.d1 / (D * D), (q_plus1(p, x) - 1.0) * v};
}

cplx psi_plus1_closed(const Params& p, double x, cplx k) {
    if (std::abs(k - 1.0) < 1e-14 || std::abs(k + 1.0) < 1e-14)
        throw InputError("pole", "transformed Jost solution has a pole at k = +-1");
    if (x < 0) throw InputError("domain", "closed transformed Jost form is for x >= 0");
    const double a2 = p.alpha * p.alpha;
    const double w = a2 * phi_closed(p, x).v / (1 + a2 * I_closed(p, x).v);
    const cplx br = std::exp(I1 * x) / (k + 1.0) - std::exp(-I1 * x) / (k - 1.0);
    return std::exp(I1 * k * x) * (1.0 + br * w);
}

BoundState bound_state(const Params& p) {
    double kap = std::cbrt(p.rho);
    if (p.rho < 1) kap = p.rho;
    for (int it = 0; it < 60; ++it) {
        const double f = kap * kap * kap + kap - p.rho;
        const double step = f / (3 * kap * kap + 1);
        kap -= step;
        if (std::abs(step) < 1e-16 * kap) break;
    }
    return {kap, p.rho / (1 + 3 * kap * kap)};
}

ProfileValue positon_closed(double x, double t) {
    const double th = 2 * (x + 4 * t);
    const double tv = 1 + x + 12 * t - 0.5 * std::sin(th);
    const double t1 = 1 - std::cos(th), t2 = 2 * std::sin(th);
    if (std::abs(tv) < 1e-300) return {std::numeric_limits<double>::infinity(), true};
    const double g = t1 / tv;
    const double v = -2 * (t2 / tv - g * g);
    return {v, !std::isfinite(v)};
}

double soliton_closed(double x, double t) {
    const double c = std::cosh(x - 4 * t);
    return -2 / (c * c);
}

double positon_singularity(double t) {
    auto h = [t](double x) { return 1 + x + 12 * t - 0.5 * std::sin(2 * (x + 4 * t)); };
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(
        h, -2.0 - 12 * t, -12 * t, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace ebs::wvn
