#include "ebs/schrodinger.hpp"

#include "ebs/wvn_oracle.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>

namespace ebs {

Grid::Grid(double a, double b, std::size_t npts) : x_min(a), x_max(b), n(npts) {
    if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b) || npts < 2)
        throw InputError("grid", "grid needs finite x_min < x_max and at least 2 points");
}

Grid Grid::covering(double a, double b, double h, double anchor) {
    const long lo = long(std::floor((a - anchor) / h + 1e-9));
    const long hi = long(std::ceil((b - anchor) / h - 1e-9));
    return Grid(anchor + double(lo) * h, anchor + double(hi) * h, std::size_t(hi - lo + 1));
}

bool Grid::contains(double x) const {
    const double slack = 1e-12 * std::max({1.0, std::abs(x_min), std::abs(x_max)});
    return x >= x_min - slack && x <= x_max + slack;
}

std::size_t Grid::nearest(double x) const {
    if (n < 2) return 0;
    const double r = std::round((x - x_min) / spacing());
    return std::size_t(std::clamp(r, 0.0, double(n - 1)));
}

bool Grid::same_as(const Grid& o) const {
    const double tol = 1e-12 * std::max({1.0, std::abs(x_min), std::abs(x_max)});
    return n == o.n && std::abs(x_min - o.x_min) <= tol && std::abs(x_max - o.x_max) <= tol;
}

PotentialSpec PotentialSpec::zero() {
    PotentialSpec s;
    s.kind = PotentialKind::Zero;
    s.right_cutoff = -std::numeric_limits<double>::infinity();
    return s;
}

PotentialSpec PotentialSpec::wvn_example(double rho) {
    if (!(rho > 0)) throw InputError("potential", "rho must be positive");
    PotentialSpec s;
    s.kind = PotentialKind::WvnExample;
    s.rho = rho;
    s.right_cutoff = 0;
    return s;
}

PotentialSpec PotentialSpec::sym_plus_one(double rho, double right_cutoff) {
    if (!(rho > 0)) throw InputError("potential", "rho must be positive");
    PotentialSpec s;
    s.kind = PotentialKind::SymPlusOne;
    s.rho = rho;
    s.right_cutoff = right_cutoff;
    s.tail_tol = 8.0 / right_cutoff;
    return s;
}

PotentialSpec PotentialSpec::soliton(double kappa) {
    if (!(kappa > 0)) throw InputError("potential", "kappa must be positive");
    PotentialSpec s;
    s.kind = PotentialKind::Soliton;
    s.kappa = kappa;
    s.right_cutoff = 40.0 / kappa;
    s.tail_tol = 8 * kappa * kappa * std::exp(-80.0);
    return s;
}

PotentialSpec PotentialSpec::sampled(const Grid& g, RealVec values, double right_cutoff,
                                     double left_cutoff) {
    if (values.size() != g.n) throw InputError("potential", "sample count does not match grid");
    PotentialSpec s;
    s.kind = PotentialKind::Sampled;
    s.sample_grid = g;
    s.samples = std::move(values);
    s.right_cutoff = right_cutoff;
    s.left_cutoff = left_cutoff;
    return s;
}

PotentialSpec PotentialSpec::shifted(const PotentialSpec& base, double a) {
    PotentialSpec s;
    s.kind = PotentialKind::Shifted;
    s.shift = a;
    s.parts = {base};
    s.right_cutoff = base.right_cutoff + a;
    s.left_cutoff = base.left_cutoff + a;
    s.tail_tol = base.tail_tol;
    return s;
}

PotentialSpec PotentialSpec::sum(std::vector<PotentialSpec> terms) {
    PotentialSpec s;
    s.kind = PotentialKind::Sum;
    s.right_cutoff = -std::numeric_limits<double>::infinity();
    s.left_cutoff = std::numeric_limits<double>::infinity();
    for (const auto& t : terms) {
        s.right_cutoff = std::max(s.right_cutoff, t.right_cutoff);
        s.left_cutoff = std::min(s.left_cutoff, t.left_cutoff);
        s.tail_tol += t.tail_tol;
    }
    if (terms.empty()) s.left_cutoff = -std::numeric_limits<double>::infinity();
    s.parts = std::move(terms);
    return s;
}

RealVec PotentialSpec::breakpoints() const {
    RealVec b;
    switch (kind) {
        case PotentialKind::WvnExample:
        case PotentialKind::SymPlusOne: b.push_back(0.0); break;
        case PotentialKind::Shifted:
            for (double v : parts[0].breakpoints()) b.push_back(v + shift);
            break;
        case PotentialKind::Sum:
            for (const auto& p : parts)
                for (double v : p.breakpoints()) b.push_back(v);
            break;
        default: break;
    }
    if (std::isfinite(right_cutoff)) b.push_back(right_cutoff);
    if (std::isfinite(left_cutoff)) b.push_back(left_cutoff);
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
}

std::string PotentialSpec::kind_name() const {
    switch (kind) {
        case PotentialKind::Zero: return "zero";
        case PotentialKind::WvnExample: return "wvn_example";
        case PotentialKind::SymPlusOne: return "sym_plus_one";
        case PotentialKind::Soliton: return "soliton";
        case PotentialKind::Sampled: return "sampled";
        case PotentialKind::Shifted: return "shifted";
        case PotentialKind::Sum: return "sum";
    }
    return "unknown";
}

namespace {

double lagrange4(const Grid& g, const RealVec& v, double x) {
    const double h = g.spacing();
    const double s = (x - g.x_min) / h;
    long i0 = long(std::floor(s)) - 1;
    i0 = std::clamp(i0, 0L, long(g.n) - 4);
    const double t = s - double(i0);
    double acc = 0;
    for (int j = 0; j < 4; ++j) {
        double w = 1;
        for (int m = 0; m < 4; ++m)
            if (m != j) w *= (t - m) / double(j - m);
        acc += w * v[std::size_t(i0 + j)];
    }
    return acc;
}

}  // namespace

double eval_potential(const PotentialSpec& s, double x) {
    if (!std::isfinite(x)) throw InputError("out_of_domain", "potential evaluated at non-finite x");
    if (x > s.right_cutoff || x < s.left_cutoff) return 0.0;
    switch (s.kind) {
        case PotentialKind::Zero: return 0.0;
        case PotentialKind::WvnExample: return wvn::q_seed({s.rho, 1.0}, x);
        case PotentialKind::SymPlusOne: return wvn::q_sym({s.rho, 1.0}, x);
        case PotentialKind::Soliton: {
            const double c = std::cosh(s.kappa * x);
            return -2 * s.kappa * s.kappa / (c * c);
        }
        case PotentialKind::Sampled:
            if (!s.sample_grid.contains(x))
                throw InputError("out_of_domain", "sampled potential queried outside its samples");
            return lagrange4(s.sample_grid, s.samples, x);
        case PotentialKind::Shifted: return eval_potential(s.parts[0], x - s.shift);
        case PotentialKind::Sum: {
            double acc = 0;
            for (const auto& p : s.parts) acc += eval_potential(p, x);
            return acc;
        }
    }
    return 0.0;
}

PointValue interpolate(const WaveField& f, double x) {
    const Grid& g = f.grid;
    if (g.n == 1) return {f.u[0], f.du[0]};
    const double h = g.spacing();
    const double s = (x - g.x_min) / h;
    const double r = std::round(s);
    if (std::abs(s - r) < 1e-9 && r >= 0 && r <= double(g.n - 1)) {
        const auto i = std::size_t(r);
        return {f.u[i], f.du[i]};
    }
    if (g.n < 4) throw InputError("grid", "interpolation needs at least 4 nodes");
    long i0 = std::clamp(long(std::floor(s)) - 1, 0L, long(g.n) - 4);
    const double t = s - double(i0);
    PointValue out;
    for (int j = 0; j < 4; ++j) {
        double w = 1;
        for (int m = 0; m < 4; ++m)
            if (m != j) w *= (t - m) / double(j - m);
        out.v += w * f.u[std::size_t(i0 + j)];
        out.d += w * f.du[std::size_t(i0 + j)];
    }
    return out;
}

namespace {

using State = std::array<cplx, 2>;

struct Rhs {
    const PotentialSpec* spec;
    cplx k2;
    void operator()(const State& y, State& dy, double x) const {
        dy[0] = y[1];
        dy[1] = (eval_potential(*spec, x) - k2) * y[0];
    }
};

Grid sub_grid(const Grid& g, std::size_t i_lo, std::size_t count) {
    Grid s;
    s.n = count;
    s.x_min = g.x(i_lo);
    s.x_max = g.x(i_lo + count - 1);
    return s;
}

}  // namespace

WaveField integrate(const PotentialSpec& spec, cplx k, double x_from, double x_to, cplx u0,
                    cplx du0, const Grid& grid, const OdeTolerances& tol) {
    namespace ode = boost::numeric::odeint;
    if (!(std::isfinite(u0.real()) && std::isfinite(u0.imag()) && std::isfinite(du0.real()) &&
          std::isfinite(du0.imag())))
        throw InputError("init", "initial data must be finite");
    const double lo = std::min(x_from, x_to), hi = std::max(x_from, x_to);
    const double h = grid.spacing();
    const double eps = 1e-9;
    const long first = std::max(0L, long(std::ceil((lo - grid.x_min) / h - eps)));
    const long last = std::min(long(grid.n) - 1, long(std::floor((hi - grid.x_min) / h + eps)));

    WaveField out;
    out.k = k;
    if (last < first) {
        out.grid = Grid{};
        out.grid.n = 0;
        return out;
    }
    const std::size_t count = std::size_t(last - first + 1);
    out.grid = sub_grid(grid, std::size_t(first), count);
    out.u.assign(count, cplx{});
    out.du.assign(count, cplx{});

    // Events in travel order: nodes (index >= 0) and breakpoints (-1).
    struct Event {
        double x;
        long node;
    };
    std::vector<Event> ev;
    ev.reserve(count + 4);
    for (long i = first; i <= last; ++i) ev.push_back({grid.x(std::size_t(i)), i - first});
    for (double b : spec.breakpoints())
        if (b > lo && b < hi) ev.push_back({b, -1});
    const double dir = x_to >= x_from ? 1.0 : -1.0;
    std::sort(ev.begin(), ev.end(),
              [dir](const Event& a, const Event& b) { return dir * a.x < dir * b.x; });

    Rhs rhs{&spec, k * k};
    auto stepper = ode::make_controlled(tol.atol, tol.rtol,
                                        ode::runge_kutta_fehlberg78<State, double, State, double>());
    State y{u0, du0};
    double x = x_from;
    double dt = dir * std::min(0.05, std::max(hi - lo, 1e-3));
    for (const Event& e : ev) {
        const double slack = 1e-12 * std::max(1.0, std::abs(e.x));
        while (dir * (e.x - x) > slack) {
            double step = dt;
            bool clipped = false;
            if (dir * (x + step - e.x) > 0) {
                step = e.x - x;
                clipped = true;
            }
            const double before = step;
            ode::controlled_step_result r;
            try {
                r = stepper.try_step(rhs, y, x, step);
            } catch (const std::exception& ex) {
                throw IntegrationError(x, std::string("integrator failure: ") + ex.what());
            }
            if (r == ode::success) {
                if (!clipped || std::abs(step) > std::abs(dt)) dt = step;
            } else {
                dt = step;
                if (std::abs(step) < 1e-14 * std::max(1.0, std::abs(x)))
                    throw IntegrationError(x, "step size underflow");
            }
            (void)before;
            if (!(std::isfinite(std::abs(y[0])) && std::isfinite(std::abs(y[1]))))
                throw IntegrationError(x, "solution overflowed");
        }
        x = e.x;
        if (e.node >= 0) {
            out.u[std::size_t(e.node)] = y[0];
            out.du[std::size_t(e.node)] = y[1];
        }
    }
    return out;
}

WaveField right_jost(const PotentialSpec& spec, cplx k, const Grid& grid,
                     const OdeTolerances& tol) {
    if (std::abs(k) == 0.0) throw InputError("k_zero", "Jost normalization is degenerate at k = 0");
    if (k.imag() < 0) throw InputError("k_domain", "right Jost solution needs Im k >= 0");
    const double c = spec.right_cutoff;
    if (c > grid.x_max) throw InputError("cutoff", "right cutoff lies beyond the grid");
    WaveField out;
    out.grid = grid;
    out.k = k;
    out.u.resize(grid.n);
    out.du.resize(grid.n);
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        if (x >= c) {
            const cplx e = std::exp(I1 * k * x);
            out.u[i] = e;
            out.du[i] = I1 * k * e;
        }
    }
    if (c > grid.x_min) {
        const cplx e = std::exp(I1 * k * c);
        const WaveField left = integrate(spec, k, c, grid.x_min, e, I1 * k * e, grid, tol);
        const std::size_t off = grid.nearest(left.grid.x_min);
        for (std::size_t j = 0; j < left.size(); ++j) {
            if (grid.x(off + j) >= c) continue;
            out.u[off + j] = left.u[j];
            out.du[off + j] = left.du[j];
        }
    }
    return out;
}

bool has_left_jost(const PotentialSpec& spec) {
    switch (spec.kind) {
        case PotentialKind::Zero:
        case PotentialKind::WvnExample:
        case PotentialKind::Soliton: return true;
        case PotentialKind::Shifted:
            return has_left_jost(spec.parts[0]) || std::isfinite(spec.left_cutoff);
        default: return std::isfinite(spec.left_cutoff);
    }
}

namespace {

// Closed-form left Jost solution, when the potential has one.
bool left_jost_closed(const PotentialSpec& s, double x, cplx k, PointValue& pv) {
    switch (s.kind) {
        case PotentialKind::Zero: {
            const cplx e = std::exp(-I1 * k * x);
            pv = {e, -I1 * k * e};
            return true;
        }
        case PotentialKind::WvnExample: {
            const auto j = wvn::left_jost_closed({s.rho, 1.0}, x, k);
            pv = {j.v, j.d1};
            return true;
        }
        case PotentialKind::Soliton: {
            const double th = std::tanh(s.kappa * x), ch = std::cosh(s.kappa * x);
            const cplx e = std::exp(-I1 * k * x), den = k + I1 * s.kappa;
            const cplx a = k - I1 * s.kappa * th;
            pv = {e * a / den, e * (-I1 * k * a - I1 * s.kappa * s.kappa / (ch * ch)) / den};
            return true;
        }
        case PotentialKind::Shifted: {
            if (!left_jost_closed(s.parts[0], x - s.shift, k, pv)) return false;
            const cplx ph = std::exp(-I1 * k * s.shift);
            pv.v *= ph;
            pv.d *= ph;
            return true;
        }
        default: return false;
    }
}

}  // namespace

WaveField left_jost(const PotentialSpec& spec, cplx k, const Grid& grid,
                    const OdeTolerances& tol) {
    WaveField out;
    out.grid = grid;
    out.k = -k;
    out.u.resize(grid.n);
    out.du.resize(grid.n);
    PointValue pv;
    if (left_jost_closed(spec, grid.x(0), k, pv)) {
        for (std::size_t i = 0; i < grid.n; ++i) {
            left_jost_closed(spec, grid.x(i), k, pv);
            out.u[i] = pv.v;
            out.du[i] = pv.d;
        }
        return out;
    }
    const double c = spec.left_cutoff;
    if (!std::isfinite(c))
        throw InputError("no_left_solution",
                         "left Jost solution needs a closed form or a finite left cutoff");
    if (c < grid.x_min) throw InputError("cutoff", "left cutoff lies before the grid");
    for (std::size_t i = 0; i < grid.n; ++i) {
        const double x = grid.x(i);
        if (x <= c) {
            const cplx e = std::exp(-I1 * k * x);
            out.u[i] = e;
            out.du[i] = -I1 * k * e;
        }
    }
    if (c < grid.x_max) {
        const cplx e = std::exp(-I1 * k * c);
        const WaveField right = integrate(spec, k, c, grid.x_max, e, -I1 * k * e, grid, tol);
        const std::size_t off = grid.nearest(right.grid.x_min);
        for (std::size_t j = 0; j < right.size(); ++j) {
            if (grid.x(off + j) <= c) continue;
            out.u[off + j] = right.u[j];
            out.du[off + j] = right.du[j];
        }
    }
    return out;
}

std::pair<WaveField, WaveField> fundamental_pair(const PotentialSpec& spec, cplx lambda,
                                                 const Grid& grid, const OdeTolerances& tol) {
    if (!grid.contains(0.0)) throw InputError("grid", "fundamental pair needs 0 inside the grid");
    cplx k = std::sqrt(lambda);
    if (k.imag() < 0) k = -k;
    auto build = [&](cplx u0, cplx d0) {
        WaveField f;
        f.grid = grid;
        f.k = k;
        f.u.assign(grid.n, 0);
        f.du.assign(grid.n, 0);
        for (double end : {grid.x_min, grid.x_max}) {
            const WaveField part = integrate(spec, k, 0.0, end, u0, d0, grid, tol);
            const std::size_t off = grid.nearest(part.grid.x_min);
            for (std::size_t j = 0; j < part.size(); ++j) {
                f.u[off + j] = part.u[j];
                f.du[off + j] = part.du[j];
            }
        }
        return f;
    };
    return {build(1.0, 0.0), build(0.0, 1.0)};
}

namespace {

void check_pair(const WaveField& f, const WaveField& g) {
    if (!f.grid.same_as(g.grid) || f.u.size() != g.u.size())
        throw InputError("contract", "Wronskian of fields on different grids");
    const cplx e1 = f.energy(), e2 = g.energy();
    if (std::abs(e1 - e2) > 1e-10 * std::max(1.0, std::abs(e1)))
        throw InputError("contract", "Wronskian of fields at different energies");
}

}  // namespace

cplx wronskian(const WaveField& f, const WaveField& g, double x) {
    check_pair(f, g);
    if (!f.grid.contains(x)) throw InputError("out_of_domain", "Wronskian point outside the grid");
    const PointValue a = interpolate(f, x), b = interpolate(g, x);
    return a.v * b.d - a.d * b.v;
}

CplxVec wronskian_samples(const WaveField& f, const WaveField& g) {
    check_pair(f, g);
    CplxVec w(f.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = f.u[i] * g.du[i] - f.du[i] * g.u[i];
    return w;
}

WaveField conj(const WaveField& f) {
    WaveField c = f;
    for (auto& v : c.u) v = std::conj(v);
    for (auto& v : c.du) v = std::conj(v);
    c.k = -std::conj(f.k);
    return c;
}

void write_csv(const WaveField& f, std::ostream& os) {
    char buf[160];
    os << "x,re_u,im_u,re_du,im_du\n";
    for (std::size_t i = 0; i < f.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", f.grid.x(i),
                      f.u[i].real(), f.u[i].imag(), f.du[i].real(), f.du[i].imag());
        os << buf;
    }
}

}  // namespace ebs
