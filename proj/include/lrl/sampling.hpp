#pragma once

#include <cstdint>
#include <vector>

#include "lrl/models.hpp"

namespace lrl {

// Deterministic uniform doubles from a fixed-width generator; avoids the
// implementation-defined std::uniform_real_distribution so sampled states are
// identical across toolchains.
struct Rng {
    explicit Rng(std::uint32_t seed) : state(seed) {}
    std::uint32_t next_u32();
    double uniform(double lo, double hi);
    std::uint64_t state;
};

struct BoundStateSpec {
    double e_lo = 0.0;
    double e_hi = 0.0;
    double ell_lo_frac = 0.35;   // fraction of the circular-orbit ell_max(E)
    double ell_hi_frac = 0.90;
    double x_lo = 0.25;          // radial phase between perihelion and outer bound
    double x_hi = 0.75;
    std::size_t count = 24;
    std::uint32_t seed = 20240811;
    bool random_plane = true;    // false keeps the orbit in the xy plane
};

// Mid-branch bound states with exact (E, l) drawn from the spec's windows:
// radius placed strictly between the turning points, momentum reconstructed
// from the shell condition, orbit plane randomized. Canonical models only.
std::vector<PhaseState> sample_bound_states(const CentralModel& model,
                                            const BoundStateSpec& spec);

// Outermost bound for the radial coordinate: the aphelion when the orbit is
// bound, otherwise cap * r_m.
double outer_turning(const CentralModel& model, double energy, double ell, double r_m,
                     double cap = 12.0);

// Bound states of the charge-monopole system (kinetic momentum, arbitrary
// plane) by rejection sampling on the energy.
std::vector<PhaseState> sample_monopole_states(const Micz& m, std::size_t count,
                                               std::uint32_t seed = 20240811);

}  // namespace lrl
