#pragma once

#include <functional>
#include <vector>

#include "lrl/brackets.hpp"
#include "lrl/dynamics.hpp"
#include "lrl/models.hpp"

namespace lrl {

struct RminResult {
    double r_m = 0.0;
    bool degenerate = false;   // double root: circular orbit
};

// Smallest positive root of H(r, p_r = 0, ell) = energy, located by a
// logarithmic grid scan around scale_hint and refined to machine precision.
// A grazing double root is reported as degenerate. Throws NoTurningPoint.
RminResult find_rmin(const CentralModel& model, double energy, double ell,
                     double scale_hint = 1.0);

// LRL magnitude K(E, l) = -l (dH/dr)/(dH/dl) at the perihelion. Returns 0 for
// a degenerate (circular) root.
double lrl_magnitude(const CentralModel& model, double energy, double ell,
                     double scale_hint = 1.0);

// Coefficient c(E, l) in {K^i, K^j} = c eps^ijk l^k, computed as
// -d(K^2)/d(l^2) at fixed E by central differences with the perihelion
// re-solved at each probe. Throws NonDifferentiableMagnitude when one-sided
// slopes disagree.
double self_pb_coefficient(const CentralModel& model, double energy, double ell,
                           double scale_hint = 1.0);

// Radial momentum magnitude p_r(rho; E, l) >= 0 on the orbit shell.
double radial_momentum_at(const CentralModel& model, double rho, double energy, double ell);

// Azimuth advance from the perihelion r_m to radius r along the orbit branch,
// integral of (dH/dl)/(dH/dp_r) / 1 over rho with a square-root-resolving
// substitution and fixed-order quadrature (smooth in all parameters).
double azimuth_from_perihelion(const CentralModel& model, double r, double energy, double ell,
                               double r_m);

// The constructed LRL vector as a covariant phase-space function:
// K(E, l^2) rotated back from the current azimuth to the adjacent perihelion
// of the state's own orbit. An internal vector; away from turning points it is
// smooth and constant along trajectories. Canonical models only.
VectorObservable lrl_observable(const CentralModel& model);

// The same magnitude attached to a fixed laboratory reference direction:
// reconstructs the constant vector K(E, l^2) u_ref on planar states. This is
// the realization described by the closed-form bracket below.
VectorObservable lrl_fixed_frame_observable(const CentralModel& model, const Vec3& u_ref);

struct LrlResult {
    double energy = 0.0;
    double ell = 0.0;
    double r_m = 0.0;
    double k_mag = 0.0;
    double self_pb_coeff = 0.0;
    Vec3 u_o;                    // unit direction toward the reference perihelion
    Vec3 k_vec;                  // k_mag * u_o
    Vec3 ell_vec;
    bool circular_degenerate = false;
    std::vector<TurningEvent> perihelia;    // all perihelia encountered
    bool multi_perihelion() const { return perihelia.size() > 1; }
};

struct PerihelionOptions {
    double t_max = 400.0;
    std::size_t n_perihelia = 1;
    IntegrateOptions integrate{1e-12, 1e-14};
};

// Route 1: integrate forward to the first perihelion, take u_o as its radial
// direction and attach the (E, l) magnitude. Additional perihelia are
// collected when requested (precessing orbits give rotated copies).
LrlResult lrl_vector_via_perihelion(const CentralModel& model, const PhaseState& s0,
                                    const PerihelionOptions& options = {});

struct WRouteSeries {
    std::vector<double> t;
    std::vector<double> theta;       // azimuth from the reference perihelion
    std::vector<Vec3> w;
    std::vector<Vec3> k;             // p x l - mu r U'(r) rvec + W
    Vec3 k_ref;                      // value at the reference perihelion
    double max_drift_rel = 0.0;
};

// Route 2: accumulate the correction W along the trajectory from a reference
// perihelion, dW/dt = p_r [r U(r)]'' rvec with W = 0 at the reference. W is
// integrated as extra state so it inherits the trajectory accuracy. Newtonian
// central models only.
WRouteSeries lrl_vector_w_route(const CentralModel& model, const Trajectory& traj,
                                const TurningEvent& reference);

// Closed forms for the two exactly solvable Newtonian cases.
Vec3 classical_kepler_lrl(const PhaseState& s, double mu, double kappa);
Vec3 micz_lrl(const PhaseState& s, double m, double kappa, double alpha);

// Closed-form Poisson bracket {f, K} of a scalar observable with the
// fixed-frame LRL realization anchored at u_ref:
//   [dK/dE {f,H} + dK/d(l^2) {f,l^2}] u_ref
//   - K sin(theta)/l^3 [(r df/drvec + p_r df/dpvec) . lvec] lvec.
// Validated componentwise against the finite-difference engine.
Vec3 pb_with_lrl(const CentralModel& model, const Observable& f, const PhaseState& s,
                 const Vec3& u_ref, const BracketConfig& cfg);

// Assembly of a dressed internal vector f u_o + g (l x u_o) + h l. Extension
// point: coefficient semantics are left to the caller.
Vec3 dressed_vector(double f, double g, double h, const Vec3& u_o, const Vec3& ell_vec);

}  // namespace lrl
