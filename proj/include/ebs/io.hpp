#pragma once

// JSON and CSV forms of the library types. Numbers are written with 17
// significant digits so that files round-trip and reruns are byte-identical.

#include "ebs/darboux.hpp"
#include "ebs/scattering.hpp"

#include "json.hpp"

#include <iosfwd>

namespace ebs::io {

using json = nlohmann::json;

std::string fmt17(double v);

// {"kind": "wvn_example", "rho": 2.0, "right_cutoff": 0.0}; infinite cutoffs are null.
json to_json(const PotentialSpec& spec);
PotentialSpec potential_from_json(const json& j);

// {"k", "R_re", "R_im", "bound": [[kappa, c2]], "embedded": [[omega, alpha2]]},
// plus T_re/T_im and L_re/L_im when present.
json to_json(const ScatteringData& d);
ScatteringData scattering_from_json(const json& j);

json to_json(const Grid& g);
Grid grid_from_json(const json& j);

// WaveField CSV is schrodinger's write_csv; this reads it back.
WaveField read_wavefield_csv(std::istream& is, cplx k = {});

void write_scattering_csv(const ScatteringData& d, std::ostream& os);

// x, q_seed, q_new, log_det, y_1..y_N on the requested grid.
void write_transform_csv(const TransformResult& r, std::ostream& os);
// States, tolerances and tail-fit parameters of a transform.
json transform_sidecar(const TransformResult& r);

struct EvolveRow {
    double x, t, q, q_plus;
};
void write_evolve_csv(const std::vector<EvolveRow>& rows, std::ostream& os);

// Library and dependency versions for sidecars.
json versions();

}  // namespace ebs::io
