#include "doctest.h"

#include "ebs/darboux.hpp"
#include "ebs/wvn_oracle.hpp"

#include <cmath>
#include <random>

using namespace ebs;

// Randomized invariants, fixed seed so failures reproduce.

namespace {

std::mt19937_64& rng() {
    static std::mt19937_64 g(20261017);
    return g;
}

double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

const Grid kGrid(-12, 12, 2401);

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("transform invariants at random (rho, alpha)") {
    for (int trial = 0; trial < 6; ++trial) {
        const double rho = uniform(0.3, 4), alpha = uniform(0.3, 2);
        CAPTURE(rho);
        CAPTURE(alpha);
        const TransformResult r =
            insert_embedded(PotentialSpec::wvn_example(rho), {{1.0, alpha, {-1, 0}}}, kGrid);
        const Grid& w = r.work;
        const double h = w.spacing();

        // Jacobi: (log det)' is tr((I+G)^{-1} G'), compared with differences of log det
        double jac = 0, scale = 0;
        for (std::size_t i = 1; i + 1 < w.n; ++i) {
            const double fd = (r.log_det[i + 1] - r.log_det[i - 1]) / (2 * h);
            jac = std::max(jac, std::abs(fd - r.dlog_det[i]));
            scale = std::max(scale, std::abs(r.dlog_det[i]));
        }
        CHECK(jac < 1e-4 * scale);

        // det(I+G) >= 1 and nondecreasing
        bool mono = r.log_det[0] >= -1e-12;
        for (std::size_t i = 1; i < w.n; ++i) mono = mono && r.log_det[i] >= r.log_det[i - 1] - 1e-12;
        CHECK(mono);

        // -y'' + q_new y = y, grid L2 norms. Five-point y'': the three-point
        // stencil alone errs by ~h^2 q^2 y / 12, above 1e-4 once rho > 2.
        const WaveField& y = r.y[0];
        double res = 0, ny = 0;
        for (std::size_t i = 2; i + 2 < w.n; ++i) {
            const double ypp = (-y.u[i + 2] + 16.0 * y.u[i + 1] - 30.0 * y.u[i] + 16.0 * y.u[i - 1] - y.u[i - 2]).real() / (12 * h * h);
            const double e = -ypp + (r.q_new[i] - 1.0) * y.u[i].real();
            res += h * e * e;
            ny += h * std::norm(y.u[i]);
        }
        CHECK(std::sqrt(res) < 1e-4 * std::sqrt(ny));

        CHECK(std::abs(std::sqrt(eigenfunction_norm_sq(r, 0)) - 1) < 1e-6);
    }
}

TEST_CASE("asymmetry grows with |rho - 2 alpha^2|") {
    const double rho = uniform(1, 3);
    const double a0 = std::sqrt(rho / 2);
    CAPTURE(rho);
    auto odd = [&](double alpha) {
        const TransformResult r =
            insert_embedded(PotentialSpec::wvn_example(rho), {{1.0, alpha, {-1, 0}}}, kGrid);
        const RealVec q = r.requested(r.q_new);
        double m = 0;
        for (std::size_t i = 0; i < kGrid.n; ++i) m = std::max(m, std::abs(q[i] - q[kGrid.n - 1 - i]));
        return m;
    };
    CHECK(odd(a0) < 1e-6);
    double prev = odd(a0);
    for (double f : {1.1, 1.3, 1.7}) {
        const double v = odd(a0 * f);
        CHECK(v > prev);
        prev = v;
    }
    prev = odd(a0);
    for (double f : {0.9, 0.7, 0.5}) {
        const double v = odd(a0 * f);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("scattering invariants at random k") {
    for (int trial = 0; trial < 4; ++trial) {
        const double rho = uniform(0.2, 4);
        const auto spec = PotentialSpec::wvn_example(rho);
        RealVec k;
        for (int j = 0; j < 8; ++j) {
            double v = uniform(0.15, 4);
            if (std::abs(v - 1) < 1e-2) v += 0.05;
            k.push_back(v);
        }
        std::sort(k.begin(), k.end());
        const ScatteringData d = compute_scattering(spec, k);
        for (std::size_t i = 0; i < k.size(); ++i) {
            CAPTURE(rho);
            CAPTURE(k[i]);
            const double R = std::abs(d.R[i]), T = std::abs((*d.T)[i]);
            CHECK(R <= 1 + 1e-12);
            CHECK(std::abs(R * R + T * T - 1) < 1e-8);
        }
        // W(psi_-, psi) does not depend on x
        const double kk = uniform(0.3, 3);
        const Grid g(-15, 5, 2001);
        const WaveField psi = right_jost(spec, kk, g);
        const WaveField phi = left_weyl(spec, kk, g, wvn::scattering_closed({rho, 1}, kk).R);
        const CplxVec W = wronskian_samples(phi, psi);
        double spread = 0;
        for (const cplx& v : W) spread = std::max(spread, std::abs(v - W[W.size() / 2]));
        CHECK(spread < 1e-8 * std::abs(W[W.size() / 2]));
    }
}

}  // TEST_SUITE
