#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <variant>

#include "lrl/errors.hpp"
#include "lrl/vec3.hpp"

namespace lrl {

// Cartesian phase-space point. For the monopole-modified Coulomb model the
// momentum is the kinetic one, p = m v; for every other model it is canonical.
struct PhaseState {
    Vec3 r;
    Vec3 p;
    double t = 0.0;
};

// In-plane coordinates (r, theta, p_r, p_theta). p_theta is the conserved
// angular momentum magnitude; for the monopole model that is the magnitude of
// the full conserved vector, monopole contribution included.
struct PolarState {
    double r = 0.0;
    double theta = 0.0;
    double p_r = 0.0;
    double p_theta = 0.0;
};

// H = p^2 / (2 mu) + kappa / r. kappa < 0 is attractive.
struct KeplerCoulomb {
    double mu = 1.0;
    double kappa = -1.0;
};

// Charge-monopole Coulomb system: force (alpha/r^3) v x r - U'(r) rhat with
// U = kappa/r + alpha^2/(2 m r^2). The conserved angular momentum is
// m r x v - alpha rhat; its radial Hamiltonian collapses to the Kepler form.
struct Micz {
    double m = 1.0;
    double kappa = -1.0;
    double alpha = 0.5;
};

// H = sqrt(p^2 + m^2) + kappa / r, in units with c = 1.
struct RelCoulomb {
    double m = 1.0;
    double kappa = -1.0;
};

// First-order two-body Hamiltonian in the centre-of-mass frame,
//   H = p^2/(2 mu) - p^4/(8 nu^3 c^2) + kappa/r
//     + kappa/(2 m1 m2 c^2 r) [(2 + a) p_r^2 + (1 + a) p_theta^2 / r^2]
//     + a kappa^2/(6 M c^2 r^2),
// with 1/nu^3 = 1/m1^3 + 1/m2^3. a = 0 is the electromagnetic case,
// a = 3 M / mu the gravitational one.
struct PostNewtonian {
    double m1 = 1.0;
    double m2 = 1.0;
    double kappa = -1.0;
    double alpha_pn = 0.0;
    double c = 100.0;

    double total_mass() const { return m1 + m2; }
    double reduced_mass() const { return m1 * m2 / (m1 + m2); }
    double inv_nu3() const { return 1.0 / (m1 * m1 * m1) + 1.0 / (m2 * m2 * m2); }

    static PostNewtonian electromagnetic(double m1, double m2, double kappa, double c);
    static PostNewtonian gravitational(double m1, double m2, double kappa, double c);
    static PostNewtonian with_alpha(double m1, double m2, double kappa, double alpha_pn, double c);
};

// H = p^2 / (2 mu) + U(r) for a user-supplied central potential. Derivative
// handles are optional; absent ones fall back to central differences with
// step fd_step * max(1, |r|).
struct CustomCentral {
    double mu = 1.0;
    std::function<double(double)> u;
    std::function<double(double)> du;
    std::function<double(double)> d2u;
    double fd_step = 1e-6;
    std::string label = "custom";
};

using CentralModel = std::variant<KeplerCoulomb, Micz, RelCoulomb, PostNewtonian, CustomCentral>;

std::string model_name(const CentralModel& model);

// --- polar-form operations ------------------------------------------------

double hamiltonian(const CentralModel& model, const PolarState& s);

struct PolarGradients {
    double d_r = 0.0;      // dH/dr at fixed (p_r, p_theta)
    double d_pr = 0.0;     // dH/dp_r
    double d_ell = 0.0;    // dH/dp_theta
};

PolarGradients gradients(const CentralModel& model, const PolarState& s);

struct PotentialTerms {
    double u = 0.0;
    double du = 0.0;
    double d2u = 0.0;
    bool has_d2 = true;
};

// Central-potential decomposition (U, U', U''). Throws NoPotentialDecomposition
// for the relativistic and post-Newtonian models, whose momentum-dependent
// interaction has no such split.
PotentialTerms potential(const CentralModel& model, double r);

// --- Cartesian operations ---------------------------------------------------

double hamiltonian(const CentralModel& model, const PhaseState& s);

struct PhaseDerivative {
    Vec3 dr;
    Vec3 dp;
};

// Equations of motion: canonical Hamilton equations, except for the monopole
// model whose velocity-dependent force is applied directly.
PhaseDerivative equations_of_motion(const CentralModel& model, const PhaseState& s);

// The conserved angular momentum vector: r x p, plus the -alpha rhat monopole
// term for Micz.
Vec3 conserved_angular_momentum(const CentralModel& model, const PhaseState& s);

// Coefficient of the field term in the Poisson structure (0 for canonical
// models, alpha for Micz).
double monopole_coupling(const CentralModel& model);

// Newtonian central-potential view (mu, U) where the generic perihelion
// machinery applies: KeplerCoulomb and CustomCentral.
struct NewtonianForm {
    double mu;
    std::function<PotentialTerms(double)> potential;
};

std::optional<NewtonianForm> newtonian_form(const CentralModel& model);

// --- plane coordinates -------------------------------------------------------

struct PlaneBasis {
    Vec3 ell_hat;   // normal of the orbital plane
    Vec3 u_ref;     // in-plane direction of theta = 0
};

// Planar polar coordinates of a state with ell = r x p. The optional reference
// fixes theta = 0; by default it is the state's own radial direction.
std::pair<PolarState, PlaneBasis> to_polar(const PhaseState& s, std::optional<Vec3> reference = {});

PhaseState from_polar(const PolarState& s, const PlaneBasis& basis, double t = 0.0);

}  // namespace lrl
