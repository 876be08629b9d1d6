#include "lrl/sampling.hpp"

#include <cmath>

#include "lrl/algebra.hpp"
#include "lrl/errors.hpp"
#include "lrl/lrl_vector.hpp"

namespace lrl {

std::uint32_t Rng::next_u32() {
    // xorshift64*, truncated; fixed-width arithmetic keeps streams portable.
    state ^= state >> 12;
    state ^= state << 25;
    state ^= state >> 27;
    return static_cast<std::uint32_t>((state * 0x2545F4914F6CDD1DULL) >> 32);
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * (next_u32() * (1.0 / 4294967296.0));
}

double outer_turning(const CentralModel& model, double energy, double ell, double r_m,
                     double cap) {
    auto gap = [&](double r) {
        return hamiltonian(model, PolarState{r, 0.0, 0.0, ell}) - energy;
    };
    double a = r_m * (1.0 + 1e-9);
    double b = r_m * 1.05;
    while (b < cap * r_m) {
        if (gap(b) > 0.0) {
            for (int it = 0; it < 200; ++it) {
                double mid = 0.5 * (a + b);
                (gap(mid) > 0.0 ? b : a) = mid;
                if (b - a < 1e-13 * b) break;
            }
            return 0.5 * (a + b);
        }
        a = b;
        b *= 1.3;
    }
    return cap * r_m;
}

std::vector<PhaseState> sample_bound_states(const CentralModel& model,
                                            const BoundStateSpec& spec) {
    if (std::holds_alternative<Micz>(model))
        fail(Err::ModelUnsupported, "sample_bound_states: monopole states need the kinetic-momentum frame");

    Rng rng(spec.seed);
    std::vector<PhaseState> out;
    out.reserve(spec.count);
    while (out.size() < spec.count) {
        double energy = rng.uniform(spec.e_lo, spec.e_hi);
        double lmax = ell_max(model, energy);
        double ell = lmax * rng.uniform(spec.ell_lo_frac, spec.ell_hi_frac);
        auto rm = find_rmin(model, energy, ell);
        if (rm.degenerate) continue;
        double r_out = outer_turning(model, energy, ell, rm.r_m);
        double r = rm.r_m + (r_out - rm.r_m) * rng.uniform(spec.x_lo, spec.x_hi);
        double p_r = radial_momentum_at(model, r, energy, ell);
        if (rng.uniform(0.0, 1.0) < 0.5) p_r = -p_r;

        Vec3 ell_hat{0.0, 0.0, 1.0};
        if (spec.random_plane) {
            double z = rng.uniform(-1.0, 1.0);
            double phi = rng.uniform(0.0, 2.0 * M_PI);
            double s = std::sqrt(std::max(0.0, 1.0 - z * z));
            ell_hat = Vec3{s * std::cos(phi), s * std::sin(phi), z};
        }
        Vec3 seed_dir = std::abs(ell_hat.z) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
        Vec3 u = normalized(cross(ell_hat, seed_dir));
        u = rotate_about(ell_hat, rng.uniform(0.0, 2.0 * M_PI), u);
        Vec3 v = cross(ell_hat, u);

        PhaseState s;
        s.r = r * u;
        s.p = p_r * u + (ell / r) * v;
        out.push_back(s);
    }
    return out;
}

std::vector<PhaseState> sample_monopole_states(const Micz& m, std::size_t count,
                                               std::uint32_t seed) {
    Rng rng(seed);
    const double e_cap = -0.02 * m.m * m.kappa * m.kappa;
    std::vector<PhaseState> out;
    out.reserve(count);
    while (out.size() < count) {
        double r = rng.uniform(0.8, 1.8);
        double z = rng.uniform(-1.0, 1.0);
        double phi = rng.uniform(0.0, 2.0 * M_PI);
        double sz = std::sqrt(std::max(0.0, 1.0 - z * z));
        Vec3 u{sz * std::cos(phi), sz * std::sin(phi), z};
        Vec3 seed_dir = std::abs(u.z) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
        Vec3 t = rotate_about(u, rng.uniform(0.0, 2.0 * M_PI), normalized(cross(u, seed_dir)));

        PhaseState s;
        s.r = r * u;
        s.p = m.m * (rng.uniform(-0.35, 0.35) * u + rng.uniform(0.35, 0.8) * t);
        if (hamiltonian(CentralModel{m}, s) < e_cap) out.push_back(s);
    }
    return out;
}

}  // namespace lrl
