#pragma once

// Reflection/transmission, Weyl solutions, diagonal Green's function,
// m-functions and residue extraction at real poles.

#include "ebs/schrodinger.hpp"

#include <functional>
#include <optional>
#include <utility>

namespace ebs {

struct ScatteringData {
    RealVec k;
    CplxVec R;
    std::optional<CplxVec> T, L;
    std::vector<std::pair<double, double>> bound;     // (kappa, c^2)
    std::vector<std::pair<double, double>> embedded;  // (omega, alpha^2)

    // |R| <= 1, R(-k) = conj R(k), ordering of kappa and omega. Throws InputError.
    void validate(double tol = 1e-8) const;
};

struct MFunctionSample {
    cplx lambda, m_plus, m_minus, m_neumann;
};

// Grid used when a caller does not supply one: covers the potential's support
// near the right cutoff plus the requested points.
Grid default_scattering_grid(const PotentialSpec& spec, double x_lo, double x_hi,
                             double h = 1e-2);

// phi = conj(psi) + R psi for real k.
WaveField left_weyl(const PotentialSpec& spec, double k, const Grid& grid, cplx R_value,
                    const OdeTolerances& tol = {});
// phi = T(k) psi_-(x,k); analytic in k, agrees with left_weyl on the real axis.
WaveField left_weyl_analytic(const PotentialSpec& spec, cplx k, const Grid& grid,
                             const OdeTolerances& tol = {});

cplx reflection_from_wronskians(const PotentialSpec& spec, double k, const Grid& grid,
                                const OdeTolerances& tol = {});
// R at a momentum where the left solution is singular (e.g. a resonance):
// symmetric limit over omega +- delta with Richardson extrapolation.
cplx reflection_limit(const PotentialSpec& spec, double omega, double delta0 = 1e-2,
                      const OdeTolerances& tol = {});
cplx transmission(const PotentialSpec& spec, double k, const OdeTolerances& tol = {});
// Same as above for complex momenta in the closed upper half plane.
cplx transmission_analytic(const PotentialSpec& spec, cplx k, const OdeTolerances& tol = {});

cplx greens_diagonal(const PotentialSpec& spec, cplx k, double x, const OdeTolerances& tol = {});

MFunctionSample m_functions(const PotentialSpec& spec, cplx lambda, double a,
                            const OdeTolerances& tol = {});

// k-grid on [k_min, k_max] minus 0 and balls of `radius` around `exclude`,
// with n points spread uniformly over what remains.
RealVec make_k_grid(double k_min, double k_max, std::size_t n, const RealVec& exclude,
                    double radius = 1e-3);

ScatteringData compute_scattering(const PotentialSpec& spec, const RealVec& k,
                                  const OdeTolerances& tol = {});

struct ResidueResult {
    CplxVec value;
    double error = 0;
    bool regular = false;  // residue vanishes: the family is analytic at omega
};

struct ResidueOptions {
    double delta0 = 1e-2;
    double rel_tol = 1e-6;
};

// lim (k - omega) f(k) from symmetric samples at omega +- delta,
// delta in {d0, d0/2, d0/4}, Richardson-extrapolated in delta^2.
ResidueResult residue_at(cplx omega, const std::function<CplxVec(cplx)>& family,
                         const ResidueOptions& opt = {});
WaveField residue_at(cplx omega, const std::function<WaveField(cplx)>& family,
                     double* error = nullptr, const ResidueOptions& opt = {});

struct PoleFit {
    double order = 0;  // fitted p in |f| ~ C / eps^p
    double C = 0;
    std::string kind;  // "simple_pole", "regular", "other"
};

PoleFit classify_pole(const std::function<cplx(double)>& f,
                      const RealVec& eps = {1e-2, 1e-3, 1e-4});

}  // namespace ebs
