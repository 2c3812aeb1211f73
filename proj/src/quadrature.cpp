#include "ebs/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace ebs::quad {

cplx expint_n(int n, cplx z) {
    if (n < 1) throw InputError("expint", "order must be >= 1");
    if (std::abs(z) == 0.0) {
        if (n == 1) throw InputError("expint", "E_1(0) diverges");
        return 1.0 / double(n - 1);
    }
    if (std::abs(z) < 1.0) {
        // Upward recurrence from E_1 via its series; only used for small |z|.
        const double euler = 0.57721566490153286061;
        cplx sum = 0, term = 1;
        for (int k = 1; k < 200; ++k) {
            term *= -z / double(k);
            const cplx add = -term / double(k);
            sum += add;
            if (std::abs(add) < 1e-17 * std::abs(sum)) break;
        }
        cplx e = -euler - std::log(z) + sum;
        for (int m = 1; m < n; ++m) e = (std::exp(-z) - z * e) / double(m);
        return e;
    }
    // Modified Lentz evaluation of the continued fraction.
    const double tiny = 1e-300;
    cplx b = z + double(n), c = 1.0 / tiny, d = 1.0 / b, h = d;
    for (int i = 1; i < 100000; ++i) {
        const double a = -double(i) * double(n - 1 + i);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const cplx del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) return h * std::exp(-z);
    }
    throw NumericalError("expint", "continued fraction did not converge");
}

RealVec cumulative(const RealVec& f, const RealVec& df, double h) {
    RealVec c(f.size(), 0.0);
    for (std::size_t i = 1; i < f.size(); ++i)
        c[i] = c[i - 1] + 0.5 * h * (f[i - 1] + f[i]) + h * h / 12.0 * (df[i - 1] - df[i]);
    return c;
}

RealVec cumulative_reverse(const RealVec& f, const RealVec& df, double h) {
    RealVec c(f.size(), 0.0);
    for (std::size_t i = f.size() - 1; i-- > 0;)
        c[i] = c[i + 1] + 0.5 * h * (f[i] + f[i + 1]) + h * h / 12.0 * (df[i] - df[i + 1]);
    return c;
}

namespace {

// int over the tail of s^{-j} e^{i nu s}.
cplx tail_moment(int j, double nu, double edge, bool left) {
    const double X = std::abs(edge);
    if (nu == 0.0) {
        const double base = std::pow(X, 1 - j) / double(j - 1);
        return left ? (j % 2 ? -base : base) : base;
    }
    if (left) {
        // s = -u:  (-1)^j int_X^inf u^{-j} e^{-i nu u} du
        const cplx v = std::pow(X, 1 - j) * expint_n(j, I1 * nu * X);
        return j % 2 ? -v : v;
    }
    return std::pow(X, 1 - j) * expint_n(j, -I1 * nu * X);
}

}  // namespace

TailFit fit_tail(const RealVec& xs, const RealVec& fs, double x_edge, bool left,
                 const RealVec& freqs, const std::vector<int>& orders) {
    if (xs.size() != fs.size() || xs.empty()) throw InputError("tail", "bad fitting window");
    if ((left && x_edge >= 0) || (!left && x_edge <= 0))
        throw InputError("tail", "tail model needs the window away from the origin");
    TailFit t;
    t.x_edge = x_edge;
    t.left = left;
    t.orders = orders;
    for (double nu : freqs)
        if (nu > 1e-12) t.freqs.push_back(nu);
    const std::size_t per = 1 + 2 * t.freqs.size();
    const std::size_t ncol = per * orders.size();
    const std::size_t nrow = xs.size();
    if (nrow < 2 * ncol) throw InputError("tail", "fitting window too short");

    // Columns are scaled by |x_edge|^j so they are O(1) on the window.
    const double X = std::abs(x_edge);
    Eigen::MatrixXd A(nrow, ncol);
    Eigen::VectorXd b(nrow);
    double rms = 0;
    for (std::size_t r = 0; r < nrow; ++r) {
        const double s = xs[r];
        std::size_t col = 0;
        for (int j : orders) {
            const double p = std::pow(X / std::abs(s), j);
            A(r, col++) = p;
            for (double nu : t.freqs) {
                A(r, col++) = p * std::cos(nu * s);
                A(r, col++) = p * std::sin(nu * s);
            }
        }
        b(r) = fs[r];
        rms += fs[r] * fs[r];
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
    t.rms_data = std::sqrt(rms / double(nrow));
    t.rms_residual = std::sqrt((A * c - b).squaredNorm() / double(nrow));
    t.coeffs.assign(c.data(), c.data() + c.size());
    if (!(t.rms_residual <= 1e-3 * t.rms_data + 1e-300) && t.rms_data > 0)
        throw NumericalError("tail_divergence",
                             "integrand tail is not of the decaying oscillatory form");

    // Undo the column scaling; s^{-j} has unit coefficient X^j * c.
    // For the left tail |s|^{-j} = (-1)^j s^{-j}.
    double total = 0;
    std::size_t col = 0;
    for (int j : orders) {
        const double scale = std::pow(X, j) * (left && (j % 2) ? -1.0 : 1.0);
        total += scale * c(long(col++)) * tail_moment(j, 0.0, x_edge, left).real();
        for (double nu : t.freqs) {
            const cplx m = tail_moment(j, nu, x_edge, left);
            total += scale * c(long(col++)) * m.real();
            total += scale * c(long(col++)) * m.imag();
        }
    }
    t.integral = total;
    return t;
}

GaussRule gauss_legendre(int n) {
    GaussRule g;
    g.x.resize(std::size_t(n));
    g.w.resize(std::size_t(n));
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5)), pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1, p2 = 0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        double p1 = 1, p2 = 0;
        for (int j = 1; j <= n; ++j) {
            const double p3 = p2;
            p2 = p1;
            p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
        }
        pp = n * (z * p1 - p2) / (z * z - 1);
        g.x[std::size_t(i)] = -z;
        g.x[std::size_t(n - 1 - i)] = z;
        g.w[std::size_t(i)] = g.w[std::size_t(n - 1 - i)] = 2 / ((1 - z * z) * pp * pp);
    }
    return g;
}

}  // namespace ebs::quad
