#pragma once

// Insertion and removal of embedded eigenvalues by the binary Darboux
// transformation
//   q_new = q - 2 (log det(I + G(x)))'',  G_mn = a_m a_n int_{-inf}^x phi_m phi_n,
// plus the transformed Jost solutions and pole diagnostics.

#include "ebs/quadrature.hpp"
#include "ebs/scattering.hpp"

#include <optional>

namespace ebs {

struct EmbeddedStateSpec {
    double omega = 1;
    double alpha = 1;
    cplx R_at_omega{-1, 0};

    void validate() const;
};
void validate_states(const std::vector<EmbeddedStateSpec>& states);

struct TransformOptions {
    // Working grid = requested grid widened by these amounts, with spacing
    // no coarser than max_spacing (requested nodes stay nodes).
    double left_extension = 400;
    double right_extension = 200;
    double max_spacing = 1e-2;
    double tail_window = 20;
    // false: integrals start at the working grid's left end (synthetic data).
    bool left_tail = true;
    // Overall sign of the generating functions phi_n.
    int sign = -1;
    OdeTolerances ode{1e-13, 1e-15};
    bool check_preconditions = true;
};

// phi(x) = sign * 2 Re[R^{1/2} psi(x, omega)], principal square root.
WaveField phi_n(const PotentialSpec& spec, const EmbeddedStateSpec& state, const Grid& grid,
                int sign = -1, const OdeTolerances& tol = {1e-13, 1e-15});

struct GramField {
    Grid grid;
    std::size_t N = 0;
    RealVec entries;        // N*N per node, row-major
    RealVec tail_constant;  // N*N, integral over (-inf, x_min]
    std::vector<quad::TailFit> fits;

    const double* at(std::size_t i) const { return entries.data() + i * N * N; }
};

GramField gram_plus(const std::vector<WaveField>& phis, const RealVec& alphas, const Grid& grid,
                    bool left_tail = true, double tail_window = 20, const RealVec& omegas = {});

struct TransformResult {
    PotentialSpec seed;
    std::vector<EmbeddedStateSpec> states;
    TransformOptions options;
    Grid grid;            // requested
    Grid work;            // extended working grid
    std::size_t offset = 0, stride = 1;  // requested node i = work node offset + i*stride

    RealVec q_seed, q_new, log_det, dlog_det;  // on the working grid
    std::vector<WaveField> y, phi;             // real fields on the working grid
    GramField gram;

    RealVec requested(const RealVec& v) const;
    WaveField requested(const WaveField& f) const;
    std::size_t work_index(std::size_t i) const { return offset + i * stride; }
};

TransformResult insert_embedded(const PotentialSpec& spec,
                                const std::vector<EmbeddedStateSpec>& states, const Grid& grid,
                                const TransformOptions& opt = {});
TransformResult chain_insert(const PotentialSpec& spec,
                             const std::vector<EmbeddedStateSpec>& states, const Grid& grid,
                             const TransformOptions& opt = {});

// Transformed pair on `region` (a sub-grid of the working grid; default: the
// requested grid). psi branch throws at k = omega_n; phi is regularized there.
std::pair<WaveField, WaveField> transformed_solutions(const TransformResult& r, cplx k,
                                                      std::optional<Grid> region = std::nullopt);

// L^2 norm squared of a real field on the working grid, both tails included.
double l2_norm_sq(const WaveField& f, const RealVec& omegas, double tail_window = 20);

// Same for y_n of a transform; the left tail comes from the Gram matrix at
// the working grid's start instead of a fit.
double eigenfunction_norm_sq(const TransformResult& r, std::size_t n);

struct RemovalOptions {
    double tail_window = 20;
    double orthonormality_tol = 1e-6;
};

struct RemovalResult {
    Grid grid;
    RealVec q_new, log_det;
    double orthonormality_error = 0;
};

// q_{-N} = q - 2 (log det P)'', P_mn(x) = int_x^inf y_m y_n, for orthonormal y_n.
RemovalResult remove_embedded(const RealVec& q, const std::vector<WaveField>& ys,
                              const RealVec& omegas, const Grid& grid,
                              const RemovalOptions& opt = {});
RemovalResult remove_embedded(const TransformResult& r, const RemovalOptions& opt = {});

struct PoleReport {
    double max_deviation = 0;  // relative, over the checked region
    double tolerance = 1e-4;
    bool passed = false;
};

// Res_{i kappa} phi_new = i c^2 psi_new(., i kappa) on the requested grid, on kappa |x| <= 10.
PoleReport check_isolated_pole_preservation(const TransformResult& r, double kappa, double c2,
                                            double tolerance = 1e-4);
// Res_{omega_n} psi_new = (i alpha_n^2 / R(omega_n)) phi_new(., omega_n).
PoleReport check_embedded_pole_condition(const TransformResult& r, std::size_t n,
                                         double tolerance = 1e-4);

struct TailDiscrepancy {
    double A = 0, delta = 0;
};
// Least-squares fit of d(x) ~ (A/x) sin(2 omega x + delta).
TailDiscrepancy fit_tail_discrepancy(const RealVec& x, const RealVec& d, double omega = 1);

// int f over [x_0, x_last], with the right-end oscillation of period `period`
// averaged out (mean of the running integral over the last period).
double oscillation_averaged_integral(const RealVec& f, const Grid& g, double period);

}  // namespace ebs
