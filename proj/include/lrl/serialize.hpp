#pragma once

#include <string>

#include <json.hpp>

#include "lrl/algebra.hpp"
#include "lrl/brackets.hpp"
#include "lrl/dynamics.hpp"
#include "lrl/lrl_vector.hpp"
#include "lrl/models.hpp"

namespace lrl {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip decimal representation (%.17g trimmed by strtod check).
std::string fmt17(double x);

// --- model and state I/O -------------------------------------------------------
//
// Model files are JSON objects with a mandatory "schema": 1 and a "model" tag:
//   kepler   {mu, kappa}
//   micz     {m, kappa, alpha}
//   relcoulomb {m, kappa}
//   pn       {m1, m2, kappa, c} + one of {interaction: "em"|"gravity", alpha}
//   power    {mu, a, n}           U = a r^n
//   coulomb_inverse_square {mu, kappa, beta}   U = kappa/r - beta/r^2
// Unknown keys are rejected.

CentralModel parse_model(const ordered_json& j);
CentralModel load_model(const std::string& path);
ordered_json model_to_json(const CentralModel& model);

// "x,y,z,px,py,pz" with optional spaces.
PhaseState parse_state_csv(const std::string& text);

// --- result serialization --------------------------------------------------------

ordered_json to_json(const Vec3& v);
ordered_json to_json(const LrlResult& res);
ordered_json to_json(const DriftReport& rep);
ordered_json to_json(const BracketResidual& res);
ordered_json to_json(const CanonicalPair& pair);

// --- CSV output ------------------------------------------------------------------

std::string trajectory_csv(const Trajectory& traj);
std::string w_route_csv(const WRouteSeries& series);

// Writes through a temporary file plus rename so readers never observe a
// partially written file.
void atomic_write(const std::string& path, const std::string& content);

}  // namespace lrl
