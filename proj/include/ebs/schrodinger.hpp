#pragma once

// Potentials on the line, uniform grids, and solutions of -u'' + q u = k^2 u.

#include "ebs/common.hpp"

#include <iosfwd>
#include <limits>
#include <utility>

namespace ebs {

struct Grid {
    double x_min = 0, x_max = 1;
    std::size_t n = 2;

    Grid() = default;
    Grid(double a, double b, std::size_t npts);
    // Grid with the given spacing covering [a, b] outward, anchored so that
    // `anchor` is a node. Used to extend a grid without changing its spacing.
    static Grid covering(double a, double b, double h, double anchor);

    double spacing() const { return (x_max - x_min) / double(n - 1); }
    double x(std::size_t i) const { return x_min + double(i) * spacing(); }
    bool contains(double x) const;
    // Index of the node nearest to x (clamped).
    std::size_t nearest(double x) const;
    bool same_as(const Grid& o) const;
};

enum class PotentialKind { Zero, WvnExample, SymPlusOne, Soliton, Sampled, Shifted, Sum };

struct PotentialSpec {
    PotentialKind kind = PotentialKind::Zero;
    double rho = 0;    // WvnExample, SymPlusOne
    double kappa = 0;  // Soliton: -2 kappa^2 sech^2(kappa x)
    double shift = 0;  // Shifted: q(x - shift)
    Grid sample_grid;  // Sampled
    RealVec samples;
    std::vector<PotentialSpec> parts;  // Shifted (one part), Sum
    // Beyond right_cutoff the potential is zero (or declared zero within tail_tol).
    double right_cutoff = 0;
    // Below left_cutoff the potential is zero; -inf if it has a genuine left tail.
    double left_cutoff = -std::numeric_limits<double>::infinity();
    double tail_tol = 0;

    static PotentialSpec zero();
    static PotentialSpec wvn_example(double rho);
    // Declared cutoff is a truncation: the tail decays only like 1/x.
    static PotentialSpec sym_plus_one(double rho, double right_cutoff = 200);
    static PotentialSpec soliton(double kappa);
    static PotentialSpec sampled(const Grid& g, RealVec values, double right_cutoff,
                                 double left_cutoff = -std::numeric_limits<double>::infinity());
    static PotentialSpec shifted(const PotentialSpec& base, double a);
    static PotentialSpec sum(std::vector<PotentialSpec> terms);

    // Points where q or q' may jump; the integrator never steps across them.
    RealVec breakpoints() const;
    std::string kind_name() const;
};

double eval_potential(const PotentialSpec& spec, double x);

struct OdeTolerances {
    double rtol = 1e-10;
    double atol = 1e-12;
};

// A solution sampled on a uniform grid together with its x-derivative.
struct WaveField {
    Grid grid;
    CplxVec u, du;
    cplx k{};

    cplx energy() const { return k * k; }
    std::size_t size() const { return u.size(); }
};

struct PointValue {
    cplx v{}, d{};
};

// Cubic local interpolation of value and derivative at an off-grid x.
PointValue interpolate(const WaveField& f, double x);

// Solution with data (u0, du0) at x_from, sampled at the nodes of `grid` lying
// between x_from and x_to (either direction).
WaveField integrate(const PotentialSpec& spec, cplx k, double x_from, double x_to, cplx u0,
                    cplx du0, const Grid& grid, const OdeTolerances& tol = {});

// psi(x,k) = e^{ikx} exactly at and beyond the right cutoff, integrated leftward.
WaveField right_jost(const PotentialSpec& spec, cplx k, const Grid& grid,
                     const OdeTolerances& tol = {});

// Solution asymptotic to e^{-ikx} at -infinity. Closed forms where known,
// otherwise needs a finite left_cutoff.
WaveField left_jost(const PotentialSpec& spec, cplx k, const Grid& grid,
                    const OdeTolerances& tol = {});
bool has_left_jost(const PotentialSpec& spec);

// c(0)=1, c'(0)=0, s(0)=0, s'(0)=1 at energy lambda.
std::pair<WaveField, WaveField> fundamental_pair(const PotentialSpec& spec, cplx lambda,
                                                 const Grid& grid, const OdeTolerances& tol = {});

cplx wronskian(const WaveField& f, const WaveField& g, double x);
CplxVec wronskian_samples(const WaveField& f, const WaveField& g);

WaveField conj(const WaveField& f);

void write_csv(const WaveField& f, std::ostream& os);

}  // namespace ebs
