#pragma once

// Quadrature pieces shared by the transformation and evolution code:
// cumulative integrals on uniform grids, analytic tails of oscillatory
// algebraically decaying integrands, Gauss-Legendre rules.

#include "ebs/common.hpp"

namespace ebs::quad {

// E_n(z) = int_1^inf e^{-zt} t^{-n} dt for Re z >= 0, z != 0 (continued fraction).
cplx expint_n(int n, cplx z);

// Running integral C_i = int_{x_0}^{x_i} f using values and derivatives
// (trapezoid with endpoint-derivative correction, fourth order).
RealVec cumulative(const RealVec& f, const RealVec& df, double h);
// C_i = int_{x_i}^{x_last} f.
RealVec cumulative_reverse(const RealVec& f, const RealVec& df, double h);

// Fitted model  sum_{j in orders} s^{-j} (a_j + sum_nu b_{j,nu} cos(nu s) + c_{j,nu} sin(nu s))
// for the far tail of an integrand, and its analytic integral to infinity.
struct TailFit {
    double x_edge = 0;       // where the numerical integral stops
    bool left = true;        // tail extends to -infinity (else +infinity)
    RealVec freqs;           // nonzero frequencies nu
    std::vector<int> orders; // powers j
    RealVec coeffs;
    double integral = 0;     // model integral over the tail
    double rms_residual = 0; // fit quality on the window
    double rms_data = 0;
};

// xs/fs: samples on the fitting window. Throws NumericalError("tail_divergence")
// if the model cannot describe the data.
TailFit fit_tail(const RealVec& xs, const RealVec& fs, double x_edge, bool left,
                 const RealVec& freqs, const std::vector<int>& orders = {2, 3, 4});

struct GaussRule {
    RealVec x, w;
};
GaussRule gauss_legendre(int n);  // on [-1, 1]

}  // namespace ebs::quad
