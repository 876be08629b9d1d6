#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "lrl/dynamics.hpp"
#include "lrl/models.hpp"
#include "lrl/sampling.hpp"

namespace testsupport {

// State in the xy plane with the radius along +x: r = (r, 0, 0),
// p = (p_r, ell / r, 0).
inline lrl::PhaseState plane_state(double r, double p_r, double ell) {
    lrl::PhaseState s;
    s.r = {r, 0.0, 0.0};
    s.p = {p_r, ell / r, 0.0};
    return s;
}

// U = a r^4.
inline lrl::CustomCentral quartic_well(double mu = 1.0, double a = 1.0) {
    lrl::CustomCentral m;
    m.mu = mu;
    m.u = [a](double r) { return a * r * r * r * r; };
    m.du = [a](double r) { return 4.0 * a * r * r * r; };
    m.d2u = [a](double r) { return 12.0 * a * r * r; };
    m.label = "quartic";
    return m;
}

// U = kappa / r - beta / r^2, same convention as the JSON model of that name.
inline lrl::CustomCentral coulomb_inverse_square(double mu, double kappa, double beta) {
    lrl::CustomCentral m;
    m.mu = mu;
    m.u = [kappa, beta](double r) { return kappa / r - beta / (r * r); };
    m.du = [kappa, beta](double r) { return -kappa / (r * r) + 2.0 * beta / (r * r * r); };
    m.d2u = [kappa, beta](double r) {
        return 2.0 * kappa / (r * r * r) - 6.0 * beta / (r * r * r * r);
    };
    m.label = "coulomb_inverse_square";
    return m;
}

inline double rel_diff(double x, double y) {
    return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
}

// Piecewise comparison of a pointwise-reconstructed vector along a planar
// trajectory (conserved l along +z). The principal branch makes the vector
// constant between aphelia and lets it jump by the full apsidal angle across
// each one. Samples near the apsides are excluded from the constancy measure;
// the branch reconstruction loses accuracy where p_r crosses zero.
struct SegmentDrift {
    double within = 0.0;   // worst in-segment deviation, relative to |K|
    double jump = 0.0;     // worst deviation of a jump from the apsidal rotation
    std::size_t segments = 0;
};

template <class KFn>
SegmentDrift segment_drift(const lrl::Trajectory& traj, KFn&& kfn, double apsidal_full) {
    using lrl::Vec3;
    double pr_max = 0.0;
    for (const lrl::TrajectorySample& s : traj.samples)
        pr_max = std::max(pr_max, std::abs(s.p_r));
    std::vector<std::size_t> bounds{0};
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        if (traj.samples[i - 1].p_r > 0.0 && traj.samples[i].p_r <= 0.0) bounds.push_back(i);
    }
    bounds.push_back(traj.samples.size());

    SegmentDrift out;
    out.segments = bounds.size() - 1;
    Vec3 prev_ref;
    double k_scale = 0.0;
    for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        Vec3 ref;
        double best = -1.0;
        for (std::size_t i = bounds[seg]; i < bounds[seg + 1]; ++i) {
            if (std::abs(traj.samples[i].p_r) > best) {
                best = std::abs(traj.samples[i].p_r);
                ref = kfn(traj.samples[i].state);
            }
        }
        k_scale = std::max(k_scale, norm(ref));
        for (std::size_t i = bounds[seg]; i < bounds[seg + 1]; ++i) {
            if (std::abs(traj.samples[i].p_r) < 0.01 * pr_max) continue;
            out.within = std::max(out.within, norm(kfn(traj.samples[i].state) - ref));
        }
        if (seg > 0) {
            const Vec3 expected =
                rotate_about(Vec3{0.0, 0.0, 1.0}, apsidal_full, normalized(prev_ref));
            out.jump = std::max(out.jump, norm(normalized(ref) - expected));
        }
        prev_ref = ref;
    }
    out.within /= std::max(k_scale, 1e-300);
    return out;
}

}  // namespace testsupport
