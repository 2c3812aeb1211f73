#include "doctest.h"

#include "ebs/schrodinger.hpp"
#include "ebs/wvn_oracle.hpp"

#include <cmath>
#include <sstream>

using namespace ebs;
using doctest::Approx;

TEST_SUITE("schrodinger") {

TEST_CASE("grid") {
    const Grid g(-1, 1, 5);
    CHECK(g.spacing() == 0.5);
    CHECK(g.x(3) == 0.5);
    CHECK(g.nearest(0.26) == 3);
    CHECK_THROWS_AS(Grid(1, 0, 5), InputError);
    CHECK_THROWS_AS(Grid(0, 1, 1), InputError);
    const Grid c = Grid::covering(-0.93, 0.41, 0.1, 0.0);
    CHECK(c.x_min == Approx(-1.0));
    CHECK(c.x_max == Approx(0.5));
    CHECK(c.spacing() == Approx(0.1));
}

TEST_CASE("eval_potential") {
    CHECK(eval_potential(PotentialSpec::zero(), 3.7) == 0.0);
    const auto w = PotentialSpec::wvn_example(2);
    CHECK(eval_potential(w, 1.0) == 0.0);
    CHECK(eval_potential(w, -1.3) == Approx(wvn::q_seed({2, 1}, -1.3)).epsilon(1e-15));
    // continuous at 0
    CHECK(std::abs(eval_potential(w, -1e-7)) < 1e-5);
    double far = 0, near = 0;
    for (double x = -1000; x > -1010; x -= 0.01) far = std::max(far, std::abs(eval_potential(w, x) + 4 * std::sin(2 * x) / x));
    for (double x = -10; x > -20; x -= 0.01) near = std::max(near, std::abs(eval_potential(w, x) + 4 * std::sin(2 * x) / x));
    CHECK(far < near);
    CHECK(far < 1e-4);
    const Grid g(0, 1, 11);
    RealVec v(11);
    for (std::size_t i = 0; i < 11; ++i) v[i] = g.x(i) * g.x(i);
    const auto s = PotentialSpec::sampled(g, v, 1.0);
    CHECK(eval_potential(s, 0.55) == Approx(0.3025).epsilon(1e-12));
    CHECK(eval_potential(s, 1.5) == 0.0);  // past the cutoff
    CHECK_THROWS_AS(eval_potential(PotentialSpec::sampled(g, v, 2.0), 1.5), InputError);
    CHECK(eval_potential(PotentialSpec::shifted(w, 2.0), 1.0) == Approx(eval_potential(w, -1.0)));
    CHECK(eval_potential(PotentialSpec::sum({w, PotentialSpec::soliton(1)}), -0.4) ==
          Approx(eval_potential(w, -0.4) - 2 / std::pow(std::cosh(0.4), 2)));
}

TEST_CASE("integrate: plane waves") {
    const auto z = PotentialSpec::zero();
    const Grid g(0, pi, 101);
    const WaveField f = integrate(z, 1.0, 0, pi, 1.0, I1, g);
    CHECK(std::abs(f.u.back() + 1.0) < 1e-9);
    CHECK(std::abs(f.du.back() + I1) < 1e-9);
    const Grid g5(0, 5, 51);
    const WaveField e = integrate(z, I1, 0, 5, 1.0, -1.0, g5);
    CHECK(std::abs(e.u.back() - std::exp(-5.0)) < 1e-10);
    // backwards
    const WaveField b = integrate(z, 1.0, pi, 0, -1.0, -I1, g);
    CHECK(std::abs(b.u.front() - 1.0) < 1e-9);
}

TEST_CASE("integrate: matches the closed-form right Jost solution") {
    const wvn::Params p{2, 1};
    const auto w = PotentialSpec::wvn_example(2);
    const Grid g(-20, 0, 2001);
    const WaveField f = integrate(w, 1.5, 0, -20, 1.0, I1 * 1.5, g, {1e-12, 1e-14});
    double err = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        err = std::max(err, std::abs(f.u[i] - wvn::psi_plus_closed(p, f.grid.x(i), 1.5).v));
    CHECK(err < 1e-6);
}

TEST_CASE("right_jost") {
    const Grid g(-5, 5, 201);
    const WaveField z = right_jost(PotentialSpec::zero(), 2.0, g);
    for (std::size_t i = 0; i < g.n; ++i) CHECK(std::abs(z.u[i] - std::exp(2.0 * I1 * g.x(i))) < 1e-9);
    const auto w = PotentialSpec::wvn_example(2);
    const WaveField f = right_jost(w, 0.8, g);
    for (std::size_t i = 0; i < g.n; ++i)
        if (g.x(i) >= 0) CHECK(f.u[i] == std::exp(0.8 * I1 * g.x(i)));  // bit-for-bit
    const WaveField f1 = right_jost(w, 1.0, g);
    CHECK(std::abs(f1.u[0] - wvn::psi_plus_closed({2, 1}, -5, 1.0).v) < 1e-6);
    CHECK_THROWS_AS(right_jost(w, 0.0, g), InputError);
    CHECK_THROWS_AS(right_jost(w, 1.0, Grid(-5, -1, 11)), InputError);
}

TEST_CASE("fundamental pair") {
    const Grid g(-3, 3, 301);
    auto [c, s] = fundamental_pair(PotentialSpec::zero(), 4.0, g);
    for (std::size_t i = 0; i < g.n; i += 17) {
        CHECK(std::abs(c.u[i] - std::cos(2 * g.x(i))) < 1e-9);
        CHECK(std::abs(s.u[i] - std::sin(2 * g.x(i)) / 2) < 1e-9);
    }
    auto [c2, s2] = fundamental_pair(PotentialSpec::wvn_example(2), 1.0, g);
    double wdev = 0, im = 0;
    for (std::size_t i = 0; i < g.n; ++i) {
        wdev = std::max(wdev, std::abs(wronskian(c2, s2, g.x(i)) - 1.0));
        im = std::max(im, std::abs(c2.u[i].imag()));
    }
    CHECK(wdev < 1e-8);
    CHECK(im == 0.0);
    CHECK_THROWS_AS(fundamental_pair(PotentialSpec::zero(), 1.0, Grid(1, 2, 11)), InputError);
}

TEST_CASE("wronskian") {
    const Grid g(-10, 5, 1501);
    const auto w = PotentialSpec::wvn_example(2);
    for (double k : {0.5, 2.0}) {
        const WaveField psi = right_jost(w, k, g);
        const CplxVec W = wronskian_samples(conj(psi), psi);
        for (const cplx& v : W) CHECK(std::abs(v - 2.0 * I1 * k) < 1e-6 * (1 + 2 * k));
        CHECK(std::abs(wronskian(psi, psi, -3.3)) < 1e-12);
    }
    const WaveField a = right_jost(w, 0.5, g), b = right_jost(w, 0.6, g);
    CHECK_THROWS_AS(wronskian(a, right_jost(w, 0.5, Grid(-10, 5, 301)), 0.0), InputError);
    (void)b;
}

TEST_CASE("wave field CSV") {
    const Grid g(0, 1, 3);
    const WaveField z = right_jost(PotentialSpec::zero(), 1.0, g);
    std::ostringstream os;
    write_csv(z, os);
    CHECK(os.str().rfind("x,re_u,im_u,re_du,im_du\n0,1,0,0,1\n", 0) == 0);
}

}  // TEST_SUITE
