#include "ebs/kdv.hpp"

#include "ebs/quadrature.hpp"

#include <Eigen/Dense>
#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace ebs::kdv {

using lcplx = std::complex<long double>;

cplx reflection(const wvn::Params& p, cplx z) {
    if (p.rho == 0) return 0.0;
    return -I1 * p.rho / (z * (z * z - 1.0) + I1 * p.rho);
}

namespace {

cplx reflection_deriv(const wvn::Params& p, cplx z) {
    if (p.rho == 0) return 0.0;
    const cplx den = z * (z * z - 1.0) + I1 * p.rho;
    return I1 * p.rho * (3.0 * z * z - 1.0) / (den * den);
}

// Roots of z^3 - z + i rho, polished in extended precision.
std::array<lcplx, 3> cubic_roots(double rho) {
    Eigen::Matrix3cd C = Eigen::Matrix3cd::Zero();
    C(0, 1) = 1.0;
    C(1, 2) = 1.0;
    C(2, 0) = -I1 * rho;
    C(2, 1) = 1.0;
    const Eigen::ComplexEigenSolver<Eigen::Matrix3cd> es(C);
    std::array<lcplx, 3> r;
    const lcplx irho(0.0L, static_cast<long double>(rho));
    for (int i = 0; i < 3; ++i) {
        lcplx z(es.eigenvalues()(i).real(), es.eigenvalues()(i).imag());
        for (int it = 0; it < 8; ++it) z -= (z * z * z - z + irho) / (3.0L * z * z - 1.0L);
        r[std::size_t(i)] = z;
    }
    return r;
}

// Barycentric 8-point Lagrange on a uniform table.
struct Lagrange8 {
    static constexpr std::array<double, 8> w{1, -7, 21, -35, 35, -21, 7, -1};
};

double min_pole_distance(const wvn::Params& p, double b) {
    double d = 1e300;
    for (const lcplx& z : cubic_roots(p.rho)) d = std::min(d, std::abs(double(z.imag()) - b));
    return d;
}

}  // namespace

// F on a uniform xi grid: the lower table holds the continuous part
// (contour below i kappa) for xi <= 0, the upper one the full kernel
// (contour above i kappa) for xi > 0.
class KernelTable {
public:
    KernelTable(const wvn::Params& p, double t, const MarchenkoOptions& o) : h_(o.table_step) {
        lo_start_ = o.xi_min - 8 * h_;
        const double lo_end = 0.5;
        lower_ = build(p, t, o.lower_shift, lo_start_, lo_end, o.xi_min);
        up_start_ = -0.5;
        double up_end = 60.0;
        upper_ = build(p, t, o.upper_shift, up_start_, up_end, o.xi_min);
        // cut where the kernel has died out
        double peak = 0;
        for (std::size_t i = 0; i < lower_.F.size(); ++i) peak = std::max(peak, std::abs(lower_.F[i]));
        xi_hi_ = up_end - 1.0;
        for (std::size_t i = upper_.F.size(); i-- > 0;) {
            const double xi = up_start_ + double(i) * h_;
            if (std::abs(upper_.F[i]) > o.tail_tol * std::max(peak, 1.0) ||
                std::abs(upper_.Fp[i]) > o.tail_tol * std::max(peak, 1.0)) {
                xi_hi_ = std::min(up_end - 1.0, xi + 0.5);
                break;
            }
        }
    }

    double xi_hi() const { return xi_hi_; }

    // Continuous part (lower) or full kernel (upper) and derivative.
    std::pair<double, double> lower(double xi) const { return interp(lower_, lo_start_, xi); }
    std::pair<double, double> upper(double xi) const { return interp(upper_, up_start_, xi); }

private:
    struct Tab {
        RealVec F, Fp;
    };

    Tab build(const wvn::Params& p, double t, double b, double start, double end,
              double xi_min) const {
        const double d = min_pole_distance(p, b);
        const double du = std::min(0.1, 2 * pi * d / (40.0 + d * std::abs(xi_min)));
        const double U = std::min(4000.0, std::sqrt(42.0 / (24.0 * t * b)) + 2.0);
        const std::size_t nu = std::size_t(2 * U / du) + 1;
        CplxVec g(nu), gz(nu);
        RealVec u(nu);
        for (std::size_t j = 0; j < nu; ++j) {
            u[j] = -U + double(j) * du;
            const cplx z(u[j], b);
            g[j] = du / (2 * pi) * reflection(p, z) * std::exp(8.0 * I1 * z * z * z * t);
            gz[j] = g[j] * I1 * z;
        }
        const std::size_t n = std::size_t((end - start) / h_) + 1;
        Tab tab;
        tab.F.resize(n);
        tab.Fp.resize(n);
        parallel_for(n, [&](std::size_t m) {
            const double xi = start + double(m) * h_;
            cplx s = 0, sp = 0;
            for (std::size_t j = 0; j < nu; ++j) {
                const cplx e = std::polar(1.0, u[j] * xi);
                s += g[j] * e;
                sp += gz[j] * e;
            }
            const double damp = std::exp(-b * xi);
            tab.F[m] = damp * s.real();
            tab.Fp[m] = damp * sp.real();
        });
        return tab;
    }

    std::pair<double, double> interp(const Tab& tab, double start, double xi) const {
        const double r = (xi - start) / h_;
        long i0 = long(std::floor(r)) - 3;
        i0 = std::clamp(i0, 0L, long(tab.F.size()) - 8);
        double num = 0, nump = 0, den = 0;
        for (int j = 0; j < 8; ++j) {
            const double dx = r - double(i0 + j);
            if (std::abs(dx) < 1e-14) return {tab.F[std::size_t(i0 + j)], tab.Fp[std::size_t(i0 + j)]};
            const double c = Lagrange8::w[std::size_t(j)] / dx;
            num += c * tab.F[std::size_t(i0 + j)];
            nump += c * tab.Fp[std::size_t(i0 + j)];
            den += c;
        }
        return {num / den, nump / den};
    }

    double h_;
    double lo_start_ = 0, up_start_ = 0, xi_hi_ = 0;
    Tab lower_, upper_;
};

void HankelDiscretization::validate(double kappa) const {
    if (!(b > kappa)) throw InputError("contour", "contour must pass above the pole i kappa");
    if (!(eta > 0 && eta < b)) throw InputError("contour", "need 0 < eta < b");
    if (!(S > 0 && S_op > 0) || M < 10 || M_op < 10)
        throw InputError("contour", "truncations and sizes must be positive");
}

EvolvedState make_state(const wvn::Params& p, double t, const HankelDiscretization& disc,
                        const MarchenkoOptions& opt) {
    if (!(t >= 0) || !std::isfinite(t)) throw InputError("time", "t must be finite and >= 0");
    if (!(p.rho >= 0)) throw InputError("rho", "rho must be >= 0");
    EvolvedState s;
    s.t = t;
    s.params = p;
    s.opt = opt;
    if (p.rho > 0) {
        const auto bs = wvn::bound_state(p);
        s.kappa = bs.kappa;
        s.c2 = bs.c2;
    }
    s.disc = disc;
    if (s.disc.b == 0) s.disc.b = std::max(s.kappa, s.disc.eta) + 0.5;
    s.disc.validate(s.kappa);
    if (opt.lower_shift >= s.kappa && p.rho > 0)
        throw InputError("contour", "lower contour must stay below i kappa");
    if (t > 0 && p.rho > 0) s.table = std::make_shared<KernelTable>(p, t, opt);
    return s;
}

namespace {

template <class Real>
struct KernelEval {
    const EvolvedState& s;
    std::array<lcplx, 3> roots{};
    std::array<lcplx, 3> coef{};  // -i Res R at each root
    Real bound_amp = 0;

    explicit KernelEval(const EvolvedState& st) : s(st) {
        if (s.params.rho == 0) return;
        roots = cubic_roots(s.params.rho);
        const lcplx irho(0.0L, static_cast<long double>(s.params.rho));
        for (std::size_t i = 0; i < 3; ++i)
            coef[i] = lcplx(0, -1) * (-irho / (3.0L * roots[i] * roots[i] - 1.0L));
        bound_amp = Real(s.c2) * std::exp(Real(8) * Real(s.kappa) * Real(s.kappa) *
                                          Real(s.kappa) * Real(s.t));
    }

    // F(xi), F'(xi)
    // At t = 0 the kernel is cut at xi = 0; `continued` returns the analytic
    // continuation instead, which the product-integration rule needs on the
    // panel that straddles the cut.
    std::pair<Real, Real> operator()(Real xi, bool continued = false) const {
        if (s.params.rho == 0) return {0, 0};
        if (s.t == 0) {
            if (xi >= 0 && !continued) return {0, 0};
            lcplx f = 0, fp = 0;
            for (std::size_t i = 0; i < 3; ++i) {
                const lcplx e = coef[i] * std::exp(lcplx(0, 1) * roots[i] * (long double)xi);
                f += e;
                fp += e * lcplx(0, 1) * roots[i];
            }
            return {Real(f.real()), Real(fp.real())};
        }
        const KernelTable& T = *s.table;
        if (xi > 0) {
            if (double(xi) >= T.xi_hi()) return {0, 0};
            const auto v = T.upper(double(xi));
            return {Real(v.first), Real(v.second)};
        }
        const auto v = T.lower(double(xi));
        const Real b = bound_amp * std::exp(-Real(s.kappa) * xi);
        return {Real(v.first) + b, Real(v.second) - Real(s.kappa) * b};
    }
};

// int_{-1}^{s_k} l_j(s) ds for the Gauss-Legendre Lagrange basis.
Eigen::MatrixXd partial_weights(const quad::GaussRule& g) {
    const std::size_t p = g.x.size();
    Eigen::MatrixXd T(static_cast<long>(p), static_cast<long>(p));
    for (std::size_t k = 0; k < p; ++k) {
        const double half = 0.5 * (g.x[k] + 1.0);
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0;
            for (std::size_t m = 0; m < p; ++m) {
                const double sg = -1.0 + half * (g.x[m] + 1.0);
                double l = 1;
                for (std::size_t r = 0; r < p; ++r)
                    if (r != j) l *= (sg - g.x[r]) / (g.x[j] - g.x[r]);
                acc += half * g.w[m] * l;
            }
            T(long(k), long(j)) = acc;
        }
    }
    return T;
}

template <class Real>
MarchenkoSolution solve_impl(const EvolvedState& s, double x) {
    using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
    MarchenkoSolution out;
    out.x = x;
    out.extended_precision = sizeof(Real) > sizeof(double);
    const std::size_t p = s.opt.panel_order;
    const bool t0 = s.t == 0;
    double A = 0;
    if (s.params.rho == 0) A = 0;
    else if (t0) A = -2 * x;
    else A = s.table->xi_hi() - 2 * x;
    if (A <= 0) {
        out.trivial = true;
        return out;
    }
    std::size_t npan = std::max<std::size_t>(1, s.opt.min_nodes / p);
    if (!t0) {
        const double k_loc = std::sqrt(std::max(0.0, -2 * x) / (24 * s.t));
        const double k_eff = std::max({2.0, k_loc, std::cbrt(1.0 / (24 * s.t))});
        npan = std::max(npan, std::size_t(std::ceil(A * k_eff / s.opt.panel_resolution)));
    }
    const std::size_t M = npan * p;
    const quad::GaussRule g = quad::gauss_legendre(int(p));
    const double hw = A / double(npan) / 2;
    out.a.resize(M);
    out.w.resize(M);
    for (std::size_t j = 0; j < npan; ++j)
        for (std::size_t m = 0; m < p; ++m) {
            out.a[j * p + m] = (2 * double(j) + 1) * hw + hw * g.x[m];
            out.w[j * p + m] = hw * g.w[m];
        }
    // Weight matrix: plain at t > 0; at t = 0 the kernel vanishes for
    // a + c > A, which falls on a node by symmetry of the panels.
    Mat W(static_cast<long>(M), static_cast<long>(M));
    if (t0) {
        const Eigen::MatrixXd T = partial_weights(g);
        W.setZero();
        for (std::size_t i = 0; i < M; ++i) {
            const std::size_t k = M - 1 - i, pan = k / p, loc = k % p;
            for (std::size_t j = 0; j < pan * p; ++j) W(long(i), long(j)) = Real(out.w[j]);
            for (std::size_t j = 0; j < p; ++j)
                W(long(i), long(pan * p + j)) = Real(hw * T(long(loc), long(j)));
        }
    } else {
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < M; ++j) W(long(i), long(j)) = Real(out.w[j]);
    }
    const KernelEval<Real> F(s);
    const long Ml = static_cast<long>(M);
    Mat Amat(Ml, Ml), Ap(Ml, Ml);
    Vec f0(Ml), f1(Ml);
    const Real two_x = Real(2) * Real(x);
    for (std::size_t i = 0; i < M; ++i) {
        const auto fi = F(two_x + Real(out.a[i]));
        f0(long(i)) = fi.first;
        f1(long(i)) = fi.second;
        for (std::size_t j = 0; j < M; ++j) {
            const auto fij = F(two_x + Real(out.a[i]) + Real(out.a[j]), true);
            Amat(long(i), long(j)) = fij.first * W(long(i), long(j));
            Ap(long(i), long(j)) = Real(2) * fij.second * W(long(i), long(j));
        }
    }
    Amat += Mat::Identity(long(M), long(M));
    const Eigen::PartialPivLU<Mat> lu(Amat);
    Real ld = 0;
    int sign = 1;
    for (long i = 0; i < long(M); ++i) {
        const Real d = lu.matrixLU()(i, i);
        if (d < 0) sign = -sign;
        ld += std::log(std::abs(d));
    }
    if (lu.permutationP().determinant() < 0) sign = -sign;
    if (sign < 0)
        throw NumericalError("discretization_failure",
                             "det(I + Omega) <= 0; raise the node count");
    const Vec K = lu.solve(Vec(-f0));
    const Vec Kx = lu.solve(Vec(Real(-2) * f1 - Ap * K));
    const auto F00 = F(two_x);
    Real K0 = -F00.first, Kx0 = Real(-2) * F00.second;
    for (std::size_t j = 0; j < M; ++j) {
        const Real wj = Real(out.w[j]);
        K0 -= wj * K(long(j)) * f0(long(j));
        Kx0 -= wj * (Kx(long(j)) * f0(long(j)) + Real(2) * K(long(j)) * f1(long(j)));
    }
    out.K0 = double(K0);
    out.Kx0 = double(Kx0);
    out.log_det = double(ld);
    out.K.resize(M);
    out.Kx.resize(M);
    for (std::size_t j = 0; j < M; ++j) {
        out.K[j] = double(K(long(j)));
        out.Kx[j] = double(Kx(long(j)));
    }
    return out;
}

}  // namespace

std::pair<double, double> marchenko_kernel(const EvolvedState& s, double xi) {
    const KernelEval<long double> F(s);
    const auto v = F(xi);
    return {double(v.first), double(v.second)};
}

MarchenkoSolution solve_marchenko(const EvolvedState& s, double x) {
    if (!std::isfinite(x)) throw InputError("x", "x must be finite");
    if (2 * x < s.opt.xi_min + 1)
        throw InputError("out_of_domain", "x is below the tabulated kernel range");
    if (x < s.opt.long_double_below) return solve_impl<long double>(s, x);
    return solve_impl<double>(s, x);
}

double dyson_q(const EvolvedState& s, double x) { return -2 * solve_marchenko(s, x).Kx0; }

RealVec dyson_q(const EvolvedState& s, const RealVec& xs) {
    RealVec q(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { q[i] = dyson_q(s, xs[i]); });
    return q;
}

namespace {

// Truncated contour integral for Phi over [-S + ib, S + ib].
cplx phi_contour(const EvolvedState& s, double x, cplx arg, double S, std::size_t Mmin) {
    const double b = s.disc.b;
    // beyond |u| = U the factor e^{-24 t b u^2} is below 1e-19
    if (s.t > 0) S = std::min(S, std::sqrt(45.0 / (24 * s.t * b)));
    const double k_osc = std::max(1.0, 2 * std::abs(x) + 24 * s.t * S * S);
    const double width = std::min(1.0, 3.0 / k_osc);
    const std::size_t npan = std::max(Mmin / 10, std::size_t(std::ceil(2 * S / width)));
    const quad::GaussRule g = quad::gauss_legendre(10);
    const double hw = S / double(npan);
    cplx acc = 0;
    for (std::size_t j = 0; j < npan; ++j) {
        const double c = -S + (2 * double(j) + 1) * hw;
        for (std::size_t m = 0; m < 10; ++m) {
            const cplx z(c + hw * g.x[m], b);
            acc += hw * g.w[m] * reflection(s.params, z) *
                   std::exp(I1 * (8.0 * z * z * z * s.t + 2.0 * z * x)) / (z - arg);
        }
    }
    return acc;
}

cplx hankel_raw(const EvolvedState& s, double x, double S_op) {
    // Phi(s) oscillates like e^{2isx}; 6 radians per 10-point panel.
    const double k_osc = 2 * std::abs(x) + 1;
    const std::size_t npan = std::max<std::size_t>(
        s.disc.M_op / 10, std::size_t(std::ceil(2 * S_op * k_osc / 6)));
    const quad::GaussRule g = quad::gauss_legendre(10);
    const double hw = S_op / double(npan);
    const std::size_t M = npan * 10;
    CplxVec node(M), phi(M);
    RealVec w(M);
    for (std::size_t j = 0; j < npan; ++j)
        for (std::size_t m = 0; m < 10; ++m) {
            node[j * 10 + m] = cplx(-S_op + (2 * double(j) + 1) * hw + hw * g.x[m], s.disc.eta);
            w[j * 10 + m] = hw * g.w[m];
        }
    // contour nodes and R e^{i(...)} dz are shared by every Phi(s_j)
    double S = s.disc.S;
    if (s.t > 0) S = std::min(S, std::sqrt(45.0 / (24 * s.t * s.disc.b)));
    const double kc = std::max(1.0, 2 * std::abs(x) + 24 * s.t * S * S);
    const std::size_t cpan =
        std::max(s.disc.M / 10, std::size_t(std::ceil(2 * S / std::min(1.0, 3.0 / kc))));
    const double chw = S / double(cpan);
    CplxVec z(cpan * 10), cz(cpan * 10);
    for (std::size_t j = 0; j < cpan; ++j)
        for (std::size_t m = 0; m < 10; ++m) {
            const cplx zz(-S + (2 * double(j) + 1) * chw + chw * g.x[m], s.disc.b);
            z[j * 10 + m] = zz;
            cz[j * 10 + m] = chw * g.w[m] * reflection(s.params, zz) *
                             std::exp(I1 * (8.0 * zz * zz * zz * s.t + 2.0 * zz * x));
        }
    parallel_for(M, [&](std::size_t j) {
        cplx acc = 0;
        for (std::size_t m = 0; m < z.size(); ++m) acc += cz[m] / (z[m] - node[j]);
        phi[j] = acc;
    });
    const long Ml = static_cast<long>(M);
    Eigen::MatrixXcd H(Ml, Ml);
    for (std::size_t i = 0; i < M; ++i)
        for (std::size_t j = 0; j < M; ++j)
            H(long(i), long(j)) = -phi[j] * w[j] / (4 * pi * pi * (node[i] + node[j]));
    H += Eigen::MatrixXcd::Identity(Ml, Ml);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(H);
    cplx ld = 0;
    for (long i = 0; i < Ml; ++i) ld += std::log(lu.matrixLU()(i, i));
    return {ld.real(), std::remainder(ld.imag(), 2 * pi)};
}

}  // namespace

PhiSymbol phi_symbol(const EvolvedState& s, double x, cplx arg, double tol) {
    PhiSymbol out;
    if (s.params.rho == 0) {
        out.converged = true;
        return out;
    }
    if (!(arg.imag() < s.disc.b)) throw InputError("contour", "Phi needs Im s below the contour");
    const cplx v1 = phi_contour(s, x, arg, s.disc.S, s.disc.M);
    const cplx v2 = phi_contour(s, x, arg, 2 * s.disc.S, 2 * s.disc.M);
    out.value = v2;
    out.truncation_error = std::abs(v2 - v1);
    out.converged = out.truncation_error <= tol;
    return out;
}

cplx hankel_log_det_complex(const EvolvedState& s, double x) {
    if (s.params.rho == 0) return 0;
    // the operator truncation error is O(1/S_op): one Richardson step
    return 2.0 * hankel_raw(s, x, s.disc.S_op) - hankel_raw(s, x, 0.5 * s.disc.S_op);
}

double hankel_log_det(const EvolvedState& s, double x) { return hankel_log_det_complex(s, x).real(); }

JostEvolved jost_evolved(const MarchenkoSolution& m, cplx k) {
    const cplx e = std::exp(I1 * k * m.x);
    cplx S0 = 0, S0x = 0, S1 = 0, S1x = 0;  // int K e^{ika}, int Kx e^{ika}, with a factor
    for (std::size_t j = 0; j < m.K.size(); ++j) {
        const cplx ph = m.w[j] * std::exp(I1 * k * m.a[j]);
        S0 += m.K[j] * ph;
        S0x += m.Kx[j] * ph;
        S1 += I1 * m.a[j] * m.K[j] * ph;
        S1x += I1 * m.a[j] * m.Kx[j] * ph;
    }
    JostEvolved J;
    J.psi = e * (1.0 + S0);
    J.psi_x = I1 * k * J.psi + e * S0x;
    J.psi_k = I1 * m.x * J.psi + e * S1;
    J.psi_kx = I1 * J.psi + I1 * m.x * J.psi_x + I1 * k * e * S1 + e * S1x;
    return J;
}

JostEvolved jost_evolved(const EvolvedState& s, double x, cplx k) {
    if (k.imag() < 0) throw InputError("momentum", "Jost solution needs Im k >= 0");
    return jost_evolved(solve_marchenko(s, x), k);
}

namespace {

struct Generator {
    double f, fx, I;
    cplx root;  // R(omega, t)^{1/2}
};

cplx principal_root(cplx R) {
    double a = std::arg(R);
    if (a <= -pi + 1e-15) a = pi;
    return std::polar(std::sqrt(std::abs(R)), 0.5 * a);
}

cplx R_t(const EvolvedState& s, double k) {
    return reflection(s.params, k) * std::exp(8.0 * I1 * k * k * k * s.t);
}

Generator generator(const EvolvedState& s, const MarchenkoSolution& m, double omega) {
    const cplx R = R_t(s, omega);
    if (std::abs(std::abs(R) - 1.0) > 1e-8)
        throw InputError("not_resonant", "|R(omega)| must be 1 at an embedded state");
    const cplx Rk = (reflection_deriv(s.params, omega) +
                     24.0 * I1 * omega * omega * s.t * reflection(s.params, omega)) *
                    std::exp(8.0 * I1 * omega * omega * omega * s.t);
    const JostEvolved J = jost_evolved(m, omega);
    const double sigma = -1;
    Generator G;
    G.root = principal_root(R);
    G.f = sigma * 2 * (G.root * J.psi).real();
    G.fx = sigma * 2 * (G.root * J.psi_x).real();
    // d/dk W(f, phi_k) at omega, phi_k = psi(x,-k) + R(k,t) psi(x,k)
    const cplx dphi = std::conj(J.psi_k) + Rk * J.psi + R * J.psi_k;
    const cplx dphix = std::conj(J.psi_kx) + Rk * J.psi_x + R * J.psi_kx;
    const cplx dW = G.f * dphix - G.fx * dphi;
    G.I = (-dW / (2 * omega * sigma * G.root)).real();
    return G;
}

}  // namespace

EvolvedPlus q_plus_evolved(const EvolvedState& s, const EmbeddedStateSpec& st, double x) {
    st.validate();
    const MarchenkoSolution m = solve_marchenko(s, x);
    const Generator G = generator(s, m, st.omega);
    const double a2 = st.alpha * st.alpha;
    const double D = 1 + a2 * G.I;
    if (!(D > 0)) throw NumericalError("psd_violation", "1 + alpha^2 I <= 0");
    EvolvedPlus out;
    out.q = -2 * m.Kx0;
    out.f = G.f;
    out.f_x = G.fx;
    out.I = G.I;
    out.y = -st.alpha * G.f / D;
    const double d1 = a2 * G.f * G.f / D;
    out.q_plus = out.q - 2 * (2 * a2 * G.f * G.fx / D - d1 * d1);
    return out;
}

std::vector<EvolvedPlus> q_plus_evolved(const EvolvedState& s, const EmbeddedStateSpec& st,
                                        const RealVec& xs) {
    std::vector<EvolvedPlus> out(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) { out[i] = q_plus_evolved(s, st, xs[i]); });
    return out;
}

PoleFit evolved_green_pole(const EvolvedState& s, const EmbeddedStateSpec& st, double x,
                           const RealVec& eps) {
    st.validate();
    const MarchenkoSolution m = solve_marchenko(s, x);
    const Generator G = generator(s, m, st.omega);
    const double a = st.alpha, a2 = a * a;
    const double D = 1 + a2 * G.I;
    const double y = -a * G.f / D;
    const double dy = -a * G.fx / D + a * G.f * a2 * G.f * G.f / (D * D);
    return classify_pole(
        [&](double e) {
            const double k = st.omega + e;
            const JostEvolved J = jost_evolved(m, k);
            const cplx R = R_t(s, k);
            const cplx ph = std::conj(J.psi) + R * J.psi;
            const cplx phx = std::conj(J.psi_x) + R * J.psi_x;
            const double den = k * k - st.omega * st.omega;
            auto lift = [&](cplx u, cplx ux, cplx& v, cplx& vx) {
                const cplx W = u * G.fx - ux * G.f;
                v = u + a * y * W / den;
                vx = ux + a * dy * W / den + a * y * u * G.f;
            };
            cplx p1, p1x, f1, f1x;
            lift(J.psi, J.psi_x, p1, p1x);
            lift(ph, phx, f1, f1x);
            const cplx W = f1 * p1x - f1x * p1;
            return f1 * p1 / W;
        },
        eps);
}

double kdv_residual(const SpaceTimeField& f, int order, bool one_sided_time) {
    if (order != 2 && order != 4) throw InputError("order", "stencil order must be 2 or 4");
    const std::size_t nx = f.x.n, nt = f.t.size();
    if (f.u.size() != nx * nt) throw InputError("contract", "field size mismatch");
    if (nt < 2) throw InputError("contract", "need at least two time levels");
    const double hx = f.x.spacing(), ht = f.t[1] - f.t[0];
    const std::size_t rx = order == 4 ? 3 : 2;
    const std::size_t rt = order == 4 ? 2 : 1;
    double worst = 0;
    for (std::size_t it = 0; it < nt; ++it) {
        auto U = [&](long dt) { return [&, dt](std::size_t ix) { return f.at(std::size_t(long(it) + dt), ix); }; };
        double ut_scale = 0;
        std::vector<std::pair<long, double>> st;
        if (it >= rt && it + rt < nt) {
            if (order == 4) st = {{-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}};
            else st = {{-1, -0.5}, {1, 0.5}};
        } else if (!one_sided_time) {
            continue;
        } else if (it + 4 < nt) {
            st = {{0, -25.0 / 12}, {1, 4.0}, {2, -3.0}, {3, 4.0 / 3}, {4, -0.25}};
        } else if (it >= 4) {
            st = {{0, 25.0 / 12}, {-1, -4.0}, {-2, 3.0}, {-3, -4.0 / 3}, {-4, 0.25}};
        } else {
            continue;
        }
        ut_scale = 1.0 / ht;
        for (std::size_t ix = rx; ix + rx < nx; ++ix) {
            double ut = 0;
            for (const auto& [d, c] : st) ut += c * U(d)(ix);
            ut *= ut_scale;
            const auto u = [&](long d) { return f.at(it, std::size_t(long(ix) + d)); };
            double ux, uxxx;
            if (order == 4) {
                ux = (u(-2) - 8 * u(-1) + 8 * u(1) - u(2)) / (12 * hx);
                uxxx = (0.125 * u(-3) - u(-2) + 1.625 * u(-1) - 1.625 * u(1) + u(2) - 0.125 * u(3)) /
                       (hx * hx * hx);
            } else {
                ux = (u(1) - u(-1)) / (2 * hx);
                uxxx = (u(2) - 2 * u(1) + 2 * u(-1) - u(-2)) / (2 * hx * hx * hx);
            }
            worst = std::max(worst, std::abs(ut - 6 * u(0) * ux + uxxx));
        }
    }
    return worst;
}

SplitStepResult split_step_reference(const Grid& x, const RealVec& q0, double t_final,
                                     const SplitStepOptions& opt) {
    const std::size_t n = x.n;
    if (q0.size() != n) throw InputError("contract", "samples do not match the grid");
    if (n < 16 || n % 2) throw InputError("grid", "split-step needs an even number of points >= 16");
    if (!(t_final >= 0)) throw InputError("time", "t_final must be >= 0");
    const double h = x.spacing();
    const double L = h * double(n);
    const std::size_t nk = n / 2 + 1;
    RealVec k(nk);
    for (std::size_t j = 0; j < nk; ++j) k[j] = 2 * pi * double(j) / L;
    const double kmax = k.back();

    // taper towards the window edges
    RealVec u(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::min(x.x(i) - x.x_min, x.x_max - x.x(i));
        double w = 1;
        if (d < opt.taper_width) {
            const double s = std::max(0.0, d) / opt.taper_width;
            w = std::sin(0.5 * pi * s) * std::sin(0.5 * pi * s);
        }
        u[i] = q0[i] * w;
    }

    RealVec rbuf(n);
    std::vector<fftw_complex> cbuf(nk);
    fftw_plan fwd = fftw_plan_dft_r2c_1d(int(n), rbuf.data(), cbuf.data(), FFTW_ESTIMATE);
    fftw_plan bwd = fftw_plan_dft_c2r_1d(int(n), cbuf.data(), rbuf.data(), FFTW_ESTIMATE);
    auto to_k = [&](const RealVec& v) {
        rbuf = v;
        fftw_execute(fwd);
        CplxVec out(nk);
        for (std::size_t j = 0; j < nk; ++j) out[j] = cplx(cbuf[j][0], cbuf[j][1]);
        return out;
    };
    auto to_x = [&](const CplxVec& v) {
        for (std::size_t j = 0; j < nk; ++j) {
            cbuf[j][0] = v[j].real();
            cbuf[j][1] = v[j].imag();
        }
        fftw_execute(bwd);
        RealVec out(rbuf);
        for (auto& r : out) r /= double(n);
        return out;
    };
    // N(v) = 3 i k FFT(u^2), with 2/3 dealiasing
    auto nonlinear = [&](const CplxVec& vh) {
        RealVec uu = to_x(vh);
        for (auto& r : uu) r *= r;
        CplxVec nh = to_k(uu);
        for (std::size_t j = 0; j < nk; ++j)
            nh[j] = k[j] > 2.0 / 3.0 * kmax ? cplx(0) : 3.0 * I1 * k[j] * nh[j];
        return nh;
    };

    SplitStepResult res;
    CplxVec uh = to_k(u);
    double t = 0, dt = opt.dt;
    while (t < t_final - 1e-15) {
        double h_step = std::min(dt, t_final - t);
        double umax = 0;
        for (double r : to_x(uh)) umax = std::max(umax, std::abs(r));
        if (h_step * 6 * umax * kmax > opt.cfl * 2.8) {
            ++res.rejected;
            dt *= 0.5;
            if (dt < 1e-12) {
                fftw_destroy_plan(fwd);
                fftw_destroy_plan(bwd);
                throw NumericalError("cfl", "time step underflow in split-step evolution");
            }
            continue;
        }
        // integrating factor E(s) = exp(i k^3 s)
        CplxVec E(nk), E2(nk);
        for (std::size_t j = 0; j < nk; ++j) {
            E[j] = std::exp(I1 * k[j] * k[j] * k[j] * h_step);
            E2[j] = std::exp(I1 * k[j] * k[j] * k[j] * 0.5 * h_step);
        }
        const CplxVec k1 = nonlinear(uh);
        CplxVec tmp(nk);
        for (std::size_t j = 0; j < nk; ++j) tmp[j] = E2[j] * (uh[j] + 0.5 * h_step * k1[j]);
        const CplxVec k2 = nonlinear(tmp);
        for (std::size_t j = 0; j < nk; ++j) tmp[j] = E2[j] * uh[j] + 0.5 * h_step * k2[j];
        const CplxVec k3 = nonlinear(tmp);
        for (std::size_t j = 0; j < nk; ++j) tmp[j] = E[j] * uh[j] + h_step * E2[j] * k3[j];
        const CplxVec k4 = nonlinear(tmp);
        for (std::size_t j = 0; j < nk; ++j)
            uh[j] = E[j] * uh[j] +
                    h_step / 6 * (E[j] * k1[j] + 2.0 * E2[j] * (k2[j] + k3[j]) + k4[j]);
        t += h_step;
        ++res.steps;
    }
    res.u = to_x(uh);
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    return res;
}

}  // namespace ebs::kdv
