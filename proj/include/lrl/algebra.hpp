#pragma once

#include "lrl/models.hpp"
#include "lrl/vec3.hpp"

namespace lrl {

// Canonically normalized pair (A, l) closing an o(4) (eta = +1) or o(3,1)
// (eta = -1) algebra: {l^i, l^j} = eps^ijk l^k, {l^i, A^j} = eps^ijk A^k,
// {A^i, A^j} = eta eps^ijk l^k. Casimirs C1 = eta A^2 + l^2 and C2 = A . l.
struct CanonicalPair {
    Vec3 a;
    Vec3 ell;
    int eta = 1;
    double c1 = 0.0;
    double c2 = 0.0;
    double projected_out = 0.0;   // |A . lhat| removed by the planar projection
};

// A = K / sqrt(|c|) with c the self-bracket coefficient, eta = sign(c), and
// the component of A along l projected out (zero for planar orbits up to
// rounding). Throws ZeroCoefficient when |c| vanishes.
CanonicalPair canonicalize(const Vec3& k_vec, const Vec3& ell_vec, double self_pb_coeff);

// Largest angular momentum of a bound orbit at the given energy: the circular
// orbit value, found by solving dH/dr = 0 together with H = E. Throws
// NoBoundStates when the energy supports no circular orbit.
double ell_max(const CentralModel& model, double energy, double scale_hint = 1.0);

// Finite algebra transform generated by n . A through parameter chi: a
// rotation mixing (A, l) for eta = +1, the hyperbolic analogue for eta = -1.
// Exact, and exactly Casimir-preserving up to rounding.
CanonicalPair lrl_transform(const CanonicalPair& pair, const Vec3& axis, double chi);

// Perihelion state of the orbit the transformed pair describes: same energy
// shell (C1 is a function of E alone), angular momentum |pair.ell|, perihelion
// direction along A. Throws UnreachableAngularMomentum past the circular
// limit.
PhaseState realize_transformed_orbit(const CentralModel& model, double energy,
                                     const CanonicalPair& pair, double scale_hint = 1.0);

}  // namespace lrl
