#pragma once

// KdV evolution of the example seed.
//
// q(x,t) comes from the Fredholm determinant of the Marchenko operator
//   (Omega_x f)(a) = int_0^inf F(2x + a + c) f(c) dc,
//   F(xi) = (1/2pi) int R(k) e^{8ik^3 t + ik xi} dk + c^2 e^{8 kappa^3 t - kappa xi},
// solved in position space. Its Fourier image is the Hankel operator on H^2
// with symbol Phi_{x,t}; phi_symbol and hankel_log_det expose that side for
// cross-checks. The embedded state is then added with the Darboux formula,
// with int phi^2 obtained from a k-derivative of a Wronskian (no tails).

#include "ebs/darboux.hpp"
#include "ebs/scattering.hpp"
#include "ebs/wvn_oracle.hpp"

#include <memory>

namespace ebs::kdv {

// R(z) = -i rho / (z (z^2 - 1) + i rho); identically zero for rho = 0.
cplx reflection(const wvn::Params& p, cplx z);

// Contour and operator quadrature for the Hankel side.
struct HankelDiscretization {
    double b = 0;        // Im z of the Phi contour, above the pole i kappa
    double S = 200;      // contour truncation [-S + ib, S + ib]
    std::size_t M = 4000;
    double eta = 0.5;    // operator variable lives on Im s = eta
    double S_op = 60;
    std::size_t M_op = 200;

    void validate(double kappa) const;
};

struct MarchenkoOptions {
    std::size_t panel_order = 10;
    std::size_t min_nodes = 200;     // t = 0 uses exactly this many
    double panel_resolution = 3.0;   // k_eff * panel width at t > 0
    double lower_shift = 0.3;        // contour for xi <= 0, below i kappa
    double upper_shift = 2.0;        // contour for xi > 0, above i kappa
    double table_step = 5e-3;
    double xi_min = -34;             // supports x >= xi_min / 2
    double tail_tol = 1e-14;         // F is cut where it drops below this
    double long_double_below = -8;   // x below this solves in extended precision
};

class KernelTable;

struct EvolvedState {
    double t = 0;
    wvn::Params params;
    double kappa = 0, c2 = 0;  // bound state -kappa^2 (0 for the free seed)
    HankelDiscretization disc;
    MarchenkoOptions opt;
    std::shared_ptr<const KernelTable> table;  // t > 0 only
};

// t >= 0. Validates the discretization against the located pole.
EvolvedState make_state(const wvn::Params& p, double t, const HankelDiscretization& disc = {},
                        const MarchenkoOptions& opt = {});

// F and F' at time t (t > 0 tabulated, t = 0 closed form).
std::pair<double, double> marchenko_kernel(const EvolvedState& s, double xi);

struct PhiSymbol {
    cplx value;
    double truncation_error = 0;  // |Phi(S) - Phi(2S)|
    bool converged = false;
};
// Phi_{x,t}(s) = int_{Im z = b} R(z) e^{i(8 z^3 t + 2 z x)} / (z - s) dz.
PhiSymbol phi_symbol(const EvolvedState& s, double x, cplx arg, double tol = 1e-8);

struct MarchenkoSolution {
    double x = 0;
    double K0 = 0, Kx0 = 0;  // Ktilde(x, 0) = K(x, x) and its x-derivative
    double log_det = 0;
    RealVec a, w, K, Kx;     // nodes, weights, Ktilde(x, a), d/dx Ktilde(x, a)
    bool extended_precision = false;
    bool trivial = false;    // operator negligible: K = 0
};
MarchenkoSolution solve_marchenko(const EvolvedState& s, double x);

// q(x,t) = -2 d/dx K(x,x) = -2 (log det(I + Omega_x))''.
double dyson_q(const EvolvedState& s, double x);
RealVec dyson_q(const EvolvedState& s, const RealVec& xs);

// log det(I + H(x,t)) from a Nystrom discretization of the Hankel operator
// with the operator variable on Im s = eta; Richardson over S_op/2, S_op.
double hankel_log_det(const EvolvedState& s, double x);
// Same with the phase: Im is arg det, which vanishes for a real potential.
cplx hankel_log_det_complex(const EvolvedState& s, double x);

struct JostEvolved {
    cplx psi, psi_x, psi_k, psi_kx;
};
JostEvolved jost_evolved(const MarchenkoSolution& m, cplx k);
JostEvolved jost_evolved(const EvolvedState& s, double x, cplx k);

struct EvolvedPlus {
    double q = 0, q_plus = 0;
    double f = 0, f_x = 0;  // generator 2 Im[e^{4it} psi(x,t,1)] for sign -1
    double I = 0;           // int_{-inf}^x f^2
    double y = 0;
};
// One embedded state (omega with |R(omega)| = 1) inserted at time t.
EvolvedPlus q_plus_evolved(const EvolvedState& s, const EmbeddedStateSpec& st, double x);
std::vector<EvolvedPlus> q_plus_evolved(const EvolvedState& s, const EmbeddedStateSpec& st,
                                        const RealVec& xs);

// eps-sweep of the diagonal Green's function of q_{+1}(., t) at k = omega + eps.
PoleFit evolved_green_pole(const EvolvedState& s, const EmbeddedStateSpec& st, double x,
                           const RealVec& eps = {1e-2, 1e-3, 1e-4});

// u sampled at times t_j (uniform step) on a uniform x grid, row-major in t.
struct SpaceTimeField {
    Grid x;
    RealVec t;
    RealVec u;
    double at(std::size_t it, std::size_t ix) const { return u[it * x.n + ix]; }
};

// Max over interior points of |u_t - 6 u u_x + u_xxx|, centered stencils of
// the given order (2 or 4). With one_sided_time, the first and last time rows
// use one-sided stencils so that a slab can start at t = 0.
double kdv_residual(const SpaceTimeField& u, int order = 4, bool one_sided_time = false);

struct SplitStepOptions {
    double dt = 1e-4;
    double taper_width = 10;
    double cfl = 0.5;
};
struct SplitStepResult {
    RealVec u;
    std::size_t steps = 0, rejected = 0;
};
// Integrating-factor RK4 pseudospectral KdV on the periodic window x.
SplitStepResult split_step_reference(const Grid& x, const RealVec& q0, double t_final,
                                     const SplitStepOptions& opt = {});

}  // namespace ebs::kdv
