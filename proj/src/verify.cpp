// Closed-form example checks behind `verify-example`.

#include "ebs/cli.hpp"
#include "ebs/kdv.hpp"
#include "ebs/wvn_oracle.hpp"

#include <algorithm>
#include <cmath>

namespace ebs::cli {

namespace {

CheckRow below(std::string label, double v, double tol) { return {std::move(label), v, tol, v <= tol}; }

}  // namespace

std::vector<CheckRow> verify_example(double rho, double alpha) {
    std::vector<CheckRow> rows;
    const wvn::Params p{rho, alpha};
    const PotentialSpec spec = PotentialSpec::wvn_example(rho);
    const cplx R1 = wvn::scattering_closed(p, 1.0).R;

    {
        const RealVec k = make_k_grid(0.2, 3.0, 200, {1.0}, 1e-3);
        const ScatteringData d = compute_scattering(spec, k);
        double err = 0;
        for (std::size_t i = 0; i < k.size(); ++i) {
            const auto s = wvn::scattering_closed(p, k[i]);
            err = std::max({err, std::abs(s.R - d.R[i]), std::abs(s.T - (*d.T)[i])});
        }
        rows.push_back(below("scattering_R_T_closed_form", err, 1e-6));
    }
    {
        double closed = 0;
        for (double k : {1.0, -1.0}) closed = std::max(closed, std::abs(std::abs(wvn::scattering_closed(p, k).R) - 1));
        rows.push_back(below("full_reflection_closed", closed, 1e-8));
        double num = 0;
        for (double k : {1.0, -1.0}) num = std::max(num, std::abs(std::abs(reflection_limit(spec, k)) - 1));
        rows.push_back(below("full_reflection_numerical", num, 1e-6));
        const double partial = std::max(std::abs(wvn::scattering_closed(p, 0.5).R),
                                        std::abs(wvn::scattering_closed(p, 2.0).R));
        rows.push_back({"partial_reflection_off_resonance", partial, 1.0, partial < 1.0});
    }

    const Grid grid(-20, 20, 4001);
    const EmbeddedStateSpec st{1.0, alpha, R1};
    const TransformResult r = insert_embedded(spec, {st}, grid);
    {
        const WaveField phi = r.requested(r.phi[0]);
        double err = 0;
        for (std::size_t i = 0; i < grid.n; ++i)
            err = std::max(err, std::abs(phi.u[i].real() - wvn::phi_closed(p, grid.x(i)).v));
        rows.push_back(below("generator_phi", err, 1e-6));
        const double g0 = r.gram.at(r.work_index(grid.nearest(0.0)))[0];
        rows.push_back(below("gram_at_origin", std::abs(g0 - alpha * alpha * 2 / rho), 1e-6));
    }
    {
        const RealVec qn = r.requested(r.q_new);
        double err = 0;
        for (std::size_t i = 0; i < grid.n; ++i) err = std::max(err, std::abs(qn[i] - wvn::q_plus1(p, grid.x(i))));
        rows.push_back(below("inserted_potential", err, 1e-6));
        // The linear system fixes y with the opposite overall sign.
        const WaveField y = r.requested(r.y[0]);
        double ey = 0;
        for (std::size_t i = 0; i < grid.n; ++i)
            ey = std::max(ey, std::abs(y.u[i].real() + wvn::y_closed(p, grid.x(i)).v));
        rows.push_back(below("eigenfunction", ey, 1e-6));
        rows.push_back(below("eigenfunction_norm", std::abs(std::sqrt(eigenfunction_norm_sq(r, 0)) - 1), 1e-6));
    }
    {
        const Grid right(0, 20, 2001);
        const WaveField psi = transformed_solutions(r, 2.0, right).second;
        double err = 0;
        for (std::size_t i = 0; i < right.n; ++i)
            err = std::max(err, std::abs(psi.u[i] - wvn::psi_plus1_closed(p, right.x(i), 2.0)));
        rows.push_back(below("transformed_jost", err, 1e-6));
        // Small bracket: the working grid reaches |x| ~ 400, where the phase
        // of the samples moves by delta * |x|.
        double rerr = 0;
        const WaveField res = residue_at(
            1.0, [&](cplx k) { return transformed_solutions(r, k, r.work).second; }, &rerr,
            ResidueOptions{1e-4, 1e-6});
        rows.push_back(below("norming_residue", std::abs(std::sqrt(l2_norm_sq(res, {1.0})) - std::abs(alpha)), 1e-4));
        const PoleReport pr = check_embedded_pole_condition(r, 0);
        rows.push_back(below("embedded_pole_condition", pr.max_deviation, pr.tolerance));
    }
    {
        const RemovalResult rm = remove_embedded(r);
        rows.push_back(below("removal_round_trip", [&] {
            const RealVec a = r.requested(rm.q_new), b = r.requested(r.q_seed);
            double m = 0;
            for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
            return m;
        }(), 1e-6));
    }
    {
        const double a_sym = std::sqrt(rho / 2);
        const TransformResult rs = insert_embedded(spec, {{1.0, a_sym, R1}}, grid);
        const RealVec qn = rs.requested(rs.q_new);
        double err = 0, odd = 0;
        for (std::size_t i = 0; i < grid.n; ++i) {
            err = std::max(err, std::abs(qn[i] - wvn::q_sym({rho, a_sym}, grid.x(i))));
            odd = std::max(odd, std::abs(qn[i] - qn[grid.n - 1 - i]));
        }
        rows.push_back(below("symmetric_potential", err, 1e-6));
        rows.push_back(below("symmetric_potential_even", odd, 1e-6));
        const RealVec back = rs.requested(remove_embedded(rs).q_new);
        double eb = 0;
        for (std::size_t i = 0; i < grid.n; ++i) eb = std::max(eb, std::abs(back[i] - wvn::q_seed(p, grid.x(i))));
        rows.push_back(below("symmetric_removal_gives_seed", eb, 1e-6));
    }
    {
        const Grid wide(-200, 200, 40001);
        const TransformResult rw = insert_embedded(spec, {st}, wide);
        const RealVec qn = rw.requested(rw.q_new), qs = rw.requested(rw.q_seed);
        RealVec xs, d, f1(wide.n), f2(wide.n);
        for (std::size_t i = 0; i < wide.n; ++i) {
            const double x = wide.x(i);
            if (x >= 20) {
                xs.push_back(x);
                d.push_back(qs[i] - qn[i]);
            }
            f1[i] = qn[i] - qs[i];
            f2[i] = qn[i] * qn[i] - qs[i] * qs[i];
        }
        const TailDiscrepancy td = fit_tail_discrepancy(xs, d, 1.0);
        rows.push_back(below("tail_amplitude_rel_error", std::abs(td.A - 4) / 4, 0.1));
        rows.push_back(below("tail_phase", std::abs(td.delta), 0.1));
        rows.push_back(below("conservation_mass", std::abs(oscillation_averaged_integral(f1, wide, pi)), 5e-2));
        rows.push_back(below("conservation_energy", std::abs(oscillation_averaged_integral(f2, wide, pi)), 5e-2));
    }
    {
        const kdv::EvolvedState s0 = kdv::make_state(p, 0);
        RealVec xs;
        for (double x = -15; x <= 15; x += 1) xs.push_back(x);
        const RealVec q = kdv::dyson_q(s0, xs);
        double err = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) err = std::max(err, std::abs(q[i] - wvn::q_seed(p, xs[i])));
        rows.push_back(below("dyson_initial_profile", err, 1e-3));
        const RealVec xe{-5, -2, -0.5, 0.5, 2, 5};
        const auto ev = kdv::q_plus_evolved(s0, st, xe);
        double e2 = 0;
        for (std::size_t i = 0; i < xe.size(); ++i) e2 = std::max(e2, std::abs(ev[i].q_plus - wvn::q_plus1(p, xe[i])));
        rows.push_back(below("evolved_insertion_initial", e2, 2e-3));
        for (double t : {0.0, 0.02}) {
            const kdv::EvolvedState s = t == 0 ? s0 : kdv::make_state(p, t);
            const PoleFit pf = kdv::evolved_green_pole(s, st, 0.3);
            rows.push_back({t == 0 ? "embedded_pole_t0" : "embedded_pole_t0.02", std::abs(pf.order - 1),
                            0.1, pf.kind == "simple_pole"});
        }
    }
    return rows;
}

}  // namespace ebs::cli
