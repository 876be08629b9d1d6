#include "lrl/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrl/lrl_vector.hpp"
#include "lrl/rootfind.hpp"

namespace lrl {

namespace {

void refresh_casimirs(CanonicalPair& p) {
    p.c1 = p.eta * p.a.norm2() + p.ell.norm2();
    p.c2 = dot(p.a, p.ell);
}

// Circular-orbit angular momentum squared at radius r: root of dH/dr = 0.
double circular_l2(const CentralModel& model, double r) {
    const auto slope = [&](double l2) {
        return gradients(model, PolarState{r, 0.0, 0.0, std::sqrt(l2)}).d_r;
    };
    const double f0 = slope(0.0);
    if (f0 <= 0.0) fail(Err::NoBoundStates, "circular_l2: no attraction to balance at r");
    double hi = std::max(r * r, 1e-6);
    double fhi = slope(hi);
    int guard = 0;
    while (fhi > 0.0 && guard++ < 80) {
        hi *= 4.0;
        fhi = slope(hi);
    }
    if (fhi > 0.0) fail(Err::NoBoundStates, "circular_l2: centrifugal term never balances");
    return brent(slope, 0.0, hi, f0, fhi, 0.0, 1e-15, 200);
}

double circular_energy(const CentralModel& model, double r) {
    return hamiltonian(model, PolarState{r, 0.0, 0.0, std::sqrt(circular_l2(model, r))});
}

}  // namespace

CanonicalPair canonicalize(const Vec3& k_vec, const Vec3& ell_vec, double self_pb_coeff) {
    const double scale = std::max(k_vec.norm2(), ell_vec.norm2());
    if (std::abs(self_pb_coeff) < 1e-14 * std::max(scale, 1e-12)) {
        fail(Err::ZeroCoefficient,
             "canonicalize: self-bracket coefficient vanishes (algebra degenerates)");
    }
    CanonicalPair out;
    out.eta = self_pb_coeff > 0.0 ? 1 : -1;
    out.ell = ell_vec;
    out.a = k_vec / std::sqrt(std::abs(self_pb_coeff));
    const double ell = ell_vec.norm();
    if (ell > 0.0) {
        const Vec3 ell_hat = ell_vec / ell;
        const double along = dot(out.a, ell_hat);
        out.projected_out = std::abs(along);
        out.a = out.a - along * ell_hat;
    }
    refresh_casimirs(out);
    return out;
}

double ell_max(const CentralModel& model, double energy, double scale_hint) {
    if (!(scale_hint > 0.0) || !std::isfinite(scale_hint)) scale_hint = 1.0;
    const double r_lo = 1e-4 * scale_hint;
    const double r_hi = 1e4 * scale_hint;
    constexpr int n = 128;
    const double ratio = std::pow(r_hi / r_lo, 1.0 / n);

    const auto gap = [&](double r) -> double {
        try {
            return circular_energy(model, r) - energy;
        } catch (const Error&) {
            return std::numeric_limits<double>::quiet_NaN();
        }
    };

    double r_prev = r_lo;
    double g_prev = gap(r_prev);
    for (int i = 1; i <= n; ++i) {
        const double r = r_lo * std::pow(ratio, i);
        const double g = gap(r);
        if (std::isfinite(g_prev) && std::isfinite(g) &&
            ((g_prev < 0.0 && g >= 0.0) || (g_prev > 0.0 && g <= 0.0))) {
            const double r_c = brent(gap, r_prev, r, g_prev, g, 0.0, 1e-14, 200);
            return std::sqrt(circular_l2(model, r_c));
        }
        r_prev = r;
        g_prev = g;
    }
    fail(Err::NoBoundStates, model_name(model) + ": no circular orbit at E=" +
                                 std::to_string(energy));
}

CanonicalPair lrl_transform(const CanonicalPair& pair, const Vec3& axis, double chi) {
    if (std::abs(axis.norm() - 1.0) > 1e-9) {
        fail(Err::NonUnitDirection, "lrl_transform: axis must be a unit vector");
    }
    const Vec3 n = axis;
    const Vec3 l0 = pair.ell;
    const Vec3 a0 = pair.a;
    CanonicalPair out = pair;
    if (pair.eta > 0) {
        const double c = std::cos(chi), s = std::sin(chi);
        out.ell = c * l0 + (1.0 - c) * dot(l0, n) * n + s * cross(n, a0);
        out.a = c * a0 + (1.0 - c) * dot(a0, n) * n + s * cross(n, l0);
    } else {
        const double c = std::cosh(chi), s = std::sinh(chi);
        out.ell = c * l0 + (1.0 - c) * dot(l0, n) * n + s * cross(n, a0);
        out.a = c * a0 + (1.0 - c) * dot(a0, n) * n - s * cross(n, l0);
    }
    refresh_casimirs(out);
    return out;
}

PhaseState realize_transformed_orbit(const CentralModel& model, double energy,
                                     const CanonicalPair& pair, double scale_hint) {
    const double ell = pair.ell.norm();
    if (ell <= 0.0) fail(Err::ZeroAngularMomentum, "realize_transformed_orbit: |l| = 0");
    const double a_mag = pair.a.norm();
    if (a_mag <= 0.0) {
        fail(Err::ZeroCoefficient, "realize_transformed_orbit: A = 0 leaves the perihelion free");
    }
    const double lmax = ell_max(model, energy, scale_hint);
    if (ell > lmax * (1.0 + 1e-9)) {
        fail(Err::UnreachableAngularMomentum,
             "realize_transformed_orbit: |l| above the circular-orbit limit");
    }
    const Vec3 ell_hat = pair.ell / ell;
    Vec3 u = pair.a - dot(pair.a, ell_hat) * ell_hat;
    const double un = u.norm();
    if (un < 1e-12 * a_mag) {
        fail(Err::NonUnitDirection, "realize_transformed_orbit: A parallel to l");
    }
    u = u / un;
    const double r_m = find_rmin(model, energy, std::min(ell, lmax), scale_hint).r_m;
    PhaseState s;
    s.r = r_m * u;
    s.p = (ell / r_m) * cross(ell_hat, u);
    s.t = 0.0;
    return s;
}

}  // namespace lrl
