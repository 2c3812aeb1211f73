#pragma once

// Closed forms for the Wigner-von Neumann type seed
//   tau(x) = 1 + rho|x| - (rho/2) sin 2|x|,  q = -2 (log tau)'' on x<0, q = 0 on x>=0
// and everything derived from it: scattering data, Jost solutions, the inserted
// embedded state at omega = 1, and the positon/soliton profiles.
// All derivatives are taken by hand, never by differencing.

#include "ebs/common.hpp"

namespace ebs::wvn {

struct Params {
    double rho = 2.0;
    double alpha = 1.0;
};

// Value with first and second x-derivative.
struct Jet {
    double v = 0, d1 = 0, d2 = 0;
};

struct CJet {
    cplx v{}, d1{};
};

Jet tau(const Params& p, double x);
double q_seed(const Params& p, double x);
// Potential after inserting omega = 1 with norming constant alpha^2.
double q_plus1(const Params& p, double x);
// The even case rho = 2 alpha^2, written through the integral of sin^2.
double q_sym(const Params& p, double x);

struct Scatter {
    cplx T, R, L;
};
Scatter scattering_closed(const Params& p, cplx k);
// d/dk of R (= L); analytic.
cplx reflection_dk(const Params& p, cplx k);

// Left Jost solution e^{-ikx}(1 + o(1)) at -infinity; valid on the whole line
// (plane-wave continuation on x >= 0). Throws at k = +-1.
CJet left_jost_closed(const Params& p, double x, cplx k);
// Right Jost solution on the whole line; k = +-1 handled as a removable limit.
CJet psi_plus_closed(const Params& p, double x, cplx k);

// Square integrable solution at k = 1 (2 sin s on s >= 0) and its running L^2 mass.
Jet phi_closed(const Params& p, double s);
Jet I_closed(const Params& p, double x);
// Normalized eigenfunction of q_plus1, alpha phi / (1 + alpha^2 I).
Jet y_closed(const Params& p, double x);
// Right Jost solution of q_plus1, x >= 0 only. Throws at k = +-1.
cplx psi_plus1_closed(const Params& p, double x, cplx k);

// The single negative bound state -kappa^2 of the seed and its norming constant.
struct BoundState {
    double kappa, c2;
};
BoundState bound_state(const Params& p);

struct ProfileValue {
    double value;
    bool singular;
};
ProfileValue positon_closed(double x, double t);
double soliton_closed(double x, double t);
// The unique zero of 1 + x + 12t - sin(2(x+4t))/2.
double positon_singularity(double t);

}  // namespace ebs::wvn
