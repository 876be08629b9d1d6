#pragma once

#include "lrl/models.hpp"
#include "lrl/vec3.hpp"

namespace lrl {

// --- relativistic Coulomb (c = 1) ---------------------------------------------
//
// The interaction shifts the centrifugal coefficient from l^2 to l^2 - kappa^2,
// which splits the orbits into three regimes.

enum class CoulombRegime { Ordinary, Critical, Propeller };

CoulombRegime classify(const RelCoulomb& m, double ell);

// K(E, l) = sqrt((E^2 - m^2) l^2 + m^2 kappa^2). Throws UnboundOrInvalid when
// the square is negative (no orbit shell).
double relcoulomb_kmag(const RelCoulomb& m, double energy, double ell);

// Perihelion radius (l^2 - kappa^2)/(K - kappa E), the rationalized root of
// p_r = 0 valid for bound and unbound ordinary orbits and for the outer
// propeller branch alike. Throws NoTurningPoint when no closest approach
// exists (critical spiral, plunging propeller).
double relcoulomb_rmin(const RelCoulomb& m, double energy, double ell);

// {K^i, K^j} coefficient, -(E^2 - m^2).
double relcoulomb_self_pb(const RelCoulomb& m, double energy);

// Apsidal angle 2 pi / sqrt(1 - kappa^2/l^2) of the precessing conic
// (ordinary regime only).
double relcoulomb_apsidal(const RelCoulomb& m, double ell);

// Circular-orbit bound l_max(E) = m |kappa| / sqrt(m^2 - E^2), 0 < E < m.
double relcoulomb_ellmax(const RelCoulomb& m, double energy);

// Casimir C1(E) = m^2 kappa^2 / |E^2 - m^2| and algebra sign
// eta = -sign(E^2 - m^2).
double relcoulomb_c1(const RelCoulomb& m, double energy);
int relcoulomb_eta(const RelCoulomb& m, double energy);

// Orbit radius at azimuth theta. theta is measured from the perihelion in the
// ordinary and propeller regimes and from the aphelion in the critical one.
double relcoulomb_orbit_r(const RelCoulomb& m, double energy, double ell, double theta);

// Azimuth of the point (r, sign of p_r) measured as above, inverting the
// orbit solution of the matching regime.
double relcoulomb_theta(const RelCoulomb& m, double r, double pr_sign, double energy,
                        double ell);

// Constant LRL vector K U(-theta) rhat, regime-dispatched through
// relcoulomb_theta.
Vec3 relcoulomb_lrl(const RelCoulomb& m, const PhaseState& s);

// The rotating-frame vector sqrt(1 - kappa^2/l^2) p x l
// + ((l^2 - kappa^2 - l sqrt(l^2 - kappa^2))/r + kappa E) rhat (ordinary
// regime). Constant in the co-precessing frame; rotating it back by
// psi = (1 - sqrt(1 - kappa^2/l^2)) theta reproduces relcoulomb_lrl.
Vec3 relcoulomb_lrl_rotating(const RelCoulomb& m, const PhaseState& s);

// --- post-Newtonian two-body system -------------------------------------------
//
// Orbit coefficients of (1 - delta)^-2 (du/dtheta)^2 + (u - u_o)^2 = B^2 in
// the variable u = 1/r - kappa/(2 M c^2 r^2), with theta = 0 at a perihelion.

struct PnCoefficients {
    double u_o = 0.0;
    double b2 = 0.0;
    double b = 0.0;
    double delta = 0.0;
    double eps = 0.0;    // kappa / (2 M c^2), the u(r) quadratic coefficient
};

PnCoefficients pn_coefficients(const PostNewtonian& m, double energy, double ell);

double pn_orbit_u(const PostNewtonian& m, double energy, double ell, double theta);
double pn_orbit_r(const PostNewtonian& m, double energy, double ell, double theta);
double pn_pr(const PostNewtonian& m, double energy, double ell, double theta);

// K = (1 - delta)^2 l^2 B.
double pn_kmag(const PostNewtonian& m, double energy, double ell);

// The expanded square [l^2 - (2a+3) mu kappa^2/(3 M c^2)] 2 mu E
// + (1 - 3 mu/M) E^2 l^2/c^2 + mu^2 kappa^2, kept as an independent route to
// K^2 (agrees with pn_kmag^2 to the order retained).
double pn_ksq_expanded(const PostNewtonian& m, double energy, double ell);

// {K^i, K^j} coefficient, -[2 mu E + (1 - 3 mu/M) E^2/c^2].
double pn_self_pb(const PostNewtonian& m, double energy);

// Azimuth from the adjacent perihelion, inverting the orbit solution.
double pn_theta(const PostNewtonian& m, const PhaseState& s);

// The rotating-frame vector (1 - delta) p x l + {...} rvec that is constant in
// the co-precessing (r, (1 - delta) theta) frame.
Vec3 pn_lrl_rotating(const PostNewtonian& m, const PhaseState& s);

// Constant LRL vector U(-delta theta) applied to the rotating-frame vector.
Vec3 pn_lrl(const PostNewtonian& m, const PhaseState& s);

// First-order form (1 - delta theta lhat x) of the back rotation; differs from
// pn_lrl at O(delta^2 theta^2).
Vec3 pn_lrl_linearized(const PostNewtonian& m, const PhaseState& s);

}  // namespace lrl
