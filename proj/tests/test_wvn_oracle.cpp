// Frozen reference values computed independently at 30 digits
// (numerical second log-derivatives of the tau functions).

#include "doctest.h"

#include "ebs/wvn_oracle.hpp"

#include <cmath>

using namespace ebs;
using doctest::Approx;

TEST_SUITE("wvn_oracle") {

TEST_CASE("tau") {
    const wvn::Params p{2, 1};
    CHECK(wvn::tau(p, 0).v == 1.0);
    CHECK(wvn::tau(p, pi).v == Approx(1 + 2 * pi).epsilon(1e-15));
    CHECK(wvn::tau(p, -1.3).v == Approx(3.0844986281785358).epsilon(1e-15));
    for (double x : {0.1, 0.7, 2.5, 13.0}) CHECK(wvn::tau(p, x).v == wvn::tau(p, -x).v);
    for (double x = -30; x <= 30; x += 0.37) CHECK(wvn::tau(p, x).v >= 1.0);
}

TEST_CASE("potentials against frozen values") {
    CHECK(wvn::q_seed({2, 1}, -1.3) == Approx(1.5622844919372598).epsilon(1e-13));
    CHECK(wvn::q_seed({0.5, 1}, -7.25) == Approx(-0.37819524439761338).epsilon(1e-13));
    CHECK(wvn::q_seed({2, 1}, 5) == 0.0);
    CHECK(wvn::q_plus1({2, 1}, -1.3) == Approx(0.64375031463286587).epsilon(1e-13));
    CHECK(wvn::q_plus1({2, 1}, 0.7) == Approx(-2.3196541999214233).epsilon(1e-13));
    CHECK(wvn::q_plus1({2, 0.5}, -2.1) == Approx(1.5475797310419391).epsilon(1e-13));
    CHECK(wvn::q_plus1({2, 0.5}, 3.3) == Approx(-0.22063026604640295).epsilon(1e-13));
    CHECK(wvn::q_sym({2, 1}, 2.5) == Approx(1.0286795144550897).epsilon(1e-13));
}

TEST_CASE("symmetric case is q_sym") {
    for (double rho : {0.5, 2.0, 3.0}) {
        const wvn::Params p{rho, std::sqrt(rho / 2)};
        for (double x = -12; x <= 12; x += 0.31) CHECK(wvn::q_plus1(p, x) == Approx(wvn::q_sym(p, x)).epsilon(1e-12));
    }
}

TEST_CASE("large-x asymptotics") {
    const wvn::Params p{2, 1};
    for (double x : {-100.0, 100.0}) CHECK(std::abs(wvn::q_plus1(p, x) + 4 * std::sin(2 * x) / x) < 5e-2);
    CHECK(std::abs(wvn::q_seed(p, -100) + 4 * std::sin(-200.0) / -100) < 5e-2);
    // the seed tail approaches -4 sin(2x)/x
    CHECK(std::abs(wvn::q_seed(p, -1000.3) + 4 * std::sin(2 * -1000.3) / -1000.3) <
          std::abs(wvn::q_seed(p, -10.3) + 4 * std::sin(2 * -10.3) / -10.3));
}

TEST_CASE("scattering closed form") {
    const wvn::Params p{2, 1};
    const auto s = wvn::scattering_closed(p, 1.7);
    CHECK(s.R.real() == Approx(-0.27926390781386698).epsilon(1e-14));
    CHECK(s.R.imag() == Approx(-0.4486374679029773).epsilon(1e-14));
    CHECK(s.T.real() == Approx(0.72073609218613302).epsilon(1e-14));
    CHECK(s.T.imag() == Approx(-0.4486374679029773).epsilon(1e-14));
    const auto at1 = wvn::scattering_closed(p, 1.0);
    CHECK(std::abs(at1.T) == 0.0);
    CHECK(std::abs(at1.R + 1.0) < 1e-15);
    CHECK(std::abs(wvn::scattering_closed(p, 0.0).R + 1.0) < 1e-15);
    for (double k = 0.05; k < 4; k += 0.11)
        CHECK(std::norm(wvn::scattering_closed(p, k).R) + std::norm(wvn::scattering_closed(p, k).T) ==
              Approx(1.0).epsilon(1e-14));
    // analytic derivative of R
    const double h = 1e-5;
    const cplx fd = (wvn::scattering_closed(p, 1.3 + h).R - wvn::scattering_closed(p, 1.3 - h).R) / (2 * h);
    CHECK(std::abs(fd - wvn::reflection_dk(p, 1.3)) < 1e-8);
}

TEST_CASE("Jost solutions") {
    const wvn::Params p{2, 1};
    const cplx l = wvn::left_jost_closed(p, -1, 2.0).v;
    CHECK(l.real() == Approx(-1.116707541034669).epsilon(1e-13));
    CHECK(l.imag() == Approx(0.26980845363087459).epsilon(1e-13));
    CHECK(std::abs(wvn::left_jost_closed(p, -1e-9, 2.0).v - 1.0) < 1e-8);
    CHECK_THROWS_AS(wvn::left_jost_closed(p, -1, 1.0), InputError);
    const auto ps = wvn::psi_plus_closed(p, -1.5, 1.5);
    CHECK(ps.v.real() == Approx(-1.6502353950327392).epsilon(1e-12));
    CHECK(ps.v.imag() == Approx(0.044919129852521773).epsilon(1e-12));
    CHECK(ps.d1.real() == Approx(1.6654300544328188).epsilon(1e-11));
    CHECK(ps.d1.imag() == Approx(-0.95429395928337689).epsilon(1e-11));
    // imaginary part of the left solution at k = 1 is -phi0 = -sin s / tau
    for (double s : {-0.5, -3.0, -9.0}) {
        const cplx v = 0.5 * (wvn::left_jost_closed(p, s, 1.0 + 1e-6).v + wvn::left_jost_closed(p, s, 1.0 - 1e-6).v);
        CHECK(v.imag() == Approx(-std::sin(s) / wvn::tau(p, s).v).epsilon(1e-6));
    }
    // removable limit at k = 1
    const cplx a = wvn::psi_plus_closed(p, -2, 1.0).v, b = wvn::psi_plus_closed(p, -2, 1.0 + 1e-7).v;
    CHECK(std::abs(a - b) < 1e-5);
}

TEST_CASE("embedded state closed forms") {
    const wvn::Params p{2, 1};
    CHECK(wvn::y_closed(p, -3).v == Approx(-0.034089364905183454).epsilon(1e-13));
    CHECK(wvn::y_closed({1, 0.5}, 2).v == Approx(0.33812926368121508).epsilon(1e-13));
    CHECK(wvn::I_closed(p, -3).v == Approx(0.13737366691699631).epsilon(1e-13));
    CHECK(wvn::y_closed(p, 0).v == 0.0);
    for (double rho : {0.5, 2.0}) {
        const wvn::Params q{rho, 1};
        CHECK(wvn::I_closed(q, -1e-14).v == Approx(2 / rho));
        CHECK(wvn::I_closed(q, 0).v == Approx(2 / rho));
        double prev = 0;
        for (double x = -40; x < 40; x += 0.05) {
            const double v = wvn::I_closed(q, x).v;
            CHECK(v > prev);
            prev = v;
        }
    }
    const cplx z = wvn::psi_plus1_closed(p, 1.2, 2.0);
    CHECK(z.real() == Approx(-1.0683536451742024).epsilon(1e-13));
    CHECK(z.imag() == Approx(0.13516567616707694).epsilon(1e-13));
    CHECK_THROWS_AS(wvn::psi_plus1_closed(p, 1.0, 1.0), InputError);
    // large imaginary k: e^{ikx}(1 + O(1/k))
    auto rel = [&](double kap) {
        return std::abs(wvn::psi_plus1_closed(p, 0.8, cplx(0, kap)) / std::exp(-kap * 0.8) - 1.0);
    };
    CHECK(rel(100) < 0.1);
    CHECK(rel(400) < 0.5 * rel(100));
}

TEST_CASE("bound state of the seed") {
    const auto b = wvn::bound_state({2, 1});
    CHECK(b.kappa == Approx(1.0).epsilon(1e-15));
    CHECK(b.c2 == Approx(0.5).epsilon(1e-15));
    const auto c = wvn::bound_state({0.5, 1});
    CHECK(c.kappa == Approx(0.42385379906978327).epsilon(1e-14));
    CHECK(c.c2 == Approx(0.32489555133624902).epsilon(1e-14));
}

TEST_CASE("positon and soliton profiles") {
    CHECK(wvn::positon_closed(0.5, 0.1).value == Approx(-1.1451781318027023).epsilon(1e-12));
    CHECK(wvn::soliton_closed(0.3, 0.2) == Approx(-1.5728954659318548).epsilon(1e-14));
    for (double x : {-2.0, 0.0, 1.5}) CHECK(wvn::soliton_closed(x, 0) == Approx(-2 / std::pow(std::cosh(x), 2)));
    CHECK(wvn::positon_singularity(0) == Approx(-1.2770979764185215).epsilon(1e-13));
    CHECK(wvn::positon_singularity(0.1) == Approx(-2.0859052176095087).epsilon(1e-13));
    const double xs = wvn::positon_singularity(0);
    CHECK(xs >= -2.0);
    CHECK(xs <= 0.0);
    CHECK(std::abs(wvn::positon_closed(xs + 1e-3, 0).value) > 1e5);
    for (double x : {-100.0, 100.0}) CHECK(std::abs(wvn::positon_closed(x, 1).value + 4 * std::sin(2 * (x + 4)) / x) < 5e-2);
}

}  // TEST_SUITE
