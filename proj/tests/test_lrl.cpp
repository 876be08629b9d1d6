#include <cmath>
#include <vector>

#include "doctest.h"
#include "lrl/brackets.hpp"
#include "lrl/dynamics.hpp"
#include "lrl/errors.hpp"
#include "lrl/lrl_vector.hpp"
#include "lrl/models.hpp"
#include "lrl/sampling.hpp"
#include "support.hpp"

using namespace lrl;
using testsupport::plane_state;

TEST_SUITE("lrl") {

TEST_CASE("kepler magnitude at a hand-checked point") {
    // mu = 1, kappa = -1, E = -0.28, l = 1.2: perihelion at exactly 1,
    // K = sqrt(2 mu E l^2 + mu^2 kappa^2) = 0.44, coefficient -2 mu E = 0.56.
    const CentralModel m{KeplerCoulomb{1.0, -1.0}};
    const RminResult rm = find_rmin(m, -0.28, 1.2);
    CHECK(!rm.degenerate);
    CHECK(rm.r_m == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(lrl_magnitude(m, -0.28, 1.2, rm.r_m) == doctest::Approx(0.44).epsilon(1e-12));
    CHECK(self_pb_coefficient(m, -0.28, 1.2, rm.r_m) == doctest::Approx(0.56).epsilon(1e-7));
}

TEST_CASE("constructed observable equals the classical vector") {
    const KeplerCoulomb kc{1.0, -1.0};
    const CentralModel m{kc};
    const VectorObservable k = lrl_observable(m);
    BoundStateSpec spec;
    spec.e_lo = -0.45;
    spec.e_hi = -0.12;
    spec.count = 16;
    for (const PhaseState& s : sample_bound_states(m, spec)) {
        const Vec3 built = k.eval(s);
        const Vec3 closed = classical_kepler_lrl(s, kc.mu, kc.kappa);
        CHECK(norm(built - closed) < 1e-8 * std::max(1.0, norm(closed)));
    }
}

TEST_CASE("perihelion route on the hand-checked orbit") {
    const CentralModel m{KeplerCoulomb{}};
    const LrlResult res = lrl_vector_via_perihelion(m, plane_state(1.0, 0.0, 1.2));
    CHECK(res.energy == doctest::Approx(-0.28).epsilon(1e-12));
    CHECK(res.ell == doctest::Approx(1.2).epsilon(1e-12));
    CHECK(res.k_mag == doctest::Approx(0.44).epsilon(1e-10));
    CHECK(!res.circular_degenerate);
    CHECK(norm(res.k_vec - Vec3{0.44, 0.0, 0.0}) < 1e-9);
    CHECK(norm(res.ell_vec - Vec3{0.0, 0.0, 1.2}) < 1e-12);
    REQUIRE(!res.perihelia.empty());
    CHECK(std::abs(res.perihelia.front().r - 1.0) < 1e-9);
}

TEST_CASE("perihelion route agrees with the closed vector off the plane") {
    const KeplerCoulomb kc{1.0, -1.0};
    const CentralModel m{kc};
    BoundStateSpec spec;
    spec.e_lo = -0.40;
    spec.e_hi = -0.15;
    spec.count = 6;
    spec.seed = 77;
    for (const PhaseState& s : sample_bound_states(m, spec)) {
        const LrlResult res = lrl_vector_via_perihelion(m, s);
        const Vec3 closed = classical_kepler_lrl(s, kc.mu, kc.kappa);
        CHECK(norm(res.k_vec - closed) < 1e-8);
        CHECK(std::abs(dot(res.u_o, normalized(res.ell_vec))) < 1e-9);
    }
}

TEST_CASE("successive perihelia of a precessing orbit are rotated copies") {
    const double mu = 1.0, ell = 1.1, beta = 0.04;
    const CentralModel m{testsupport::coulomb_inverse_square(mu, -1.0, beta)};
    PerihelionOptions opt;
    opt.n_perihelia = 3;
    opt.t_max = 120.0;
    const LrlResult res = lrl_vector_via_perihelion(m, plane_state(1.4, 0.0, ell), opt);
    REQUIRE(res.perihelia.size() == 3);
    CHECK(res.multi_perihelion());
    const double step = 2.0 * M_PI * ell / std::sqrt(ell * ell - 2.0 * mu * beta);
    for (std::size_t i = 1; i < res.perihelia.size(); ++i) {
        const double dtheta = res.perihelia[i].theta - res.perihelia[i - 1].theta;
        CHECK(std::abs(dtheta - step) < 1e-7);
    }
}

TEST_CASE("circular orbits are flagged degenerate") {
    const CentralModel m{KeplerCoulomb{}};
    CHECK(find_rmin(m, -0.5, 1.0).degenerate);
    const LrlResult res = lrl_vector_via_perihelion(m, plane_state(1.0, 0.0, 1.0));
    CHECK(res.circular_degenerate);
    CHECK(std::abs(res.k_mag) < 1e-5);
}

TEST_CASE("w vanishes identically on kepler orbits") {
    const CentralModel m{KeplerCoulomb{}};
    const Trajectory traj = integrate(m, plane_state(1.0, 0.0, 1.2), 0.0, 60.0,
                                      IntegrateOptions{1e-12, 1e-14});
    const auto events = find_turning_points(traj);
    REQUIRE(!events.empty());
    const WRouteSeries w = lrl_vector_w_route(m, traj, events.front());
    CHECK(w.max_drift_rel < 1e-10);
    double w_max = 0.0;
    for (const Vec3& v : w.w) w_max = std::max(w_max, norm(v));
    CHECK(w_max < 1e-10 * norm(w.k_ref));
}

TEST_CASE("w route and perihelion route agree away from 1/r") {
    const CentralModel m{testsupport::quartic_well()};
    const PhaseState s0 = plane_state(1.0, 0.1, 0.8);
    const Trajectory traj = integrate(m, s0, 0.0, 30.0, IntegrateOptions{1e-12, 1e-14});
    const auto events = find_turning_points(traj);
    REQUIRE(events.size() >= 2);
    std::size_t first_peri = 0;
    while (events[first_peri].kind != TurningKind::Perihelion) ++first_peri;
    const WRouteSeries w = lrl_vector_w_route(m, traj, events[first_peri]);
    CHECK(w.max_drift_rel < 1e-8);

    const LrlResult res = lrl_vector_via_perihelion(m, s0);
    CHECK(norm(w.k_ref - res.k_vec) < 1e-8 * std::max(1.0, norm(res.k_vec)));
}

TEST_CASE("w grows quadratically out of the reference perihelion") {
    const CentralModel m{testsupport::quartic_well()};
    const Trajectory traj = integrate(m, plane_state(1.0, 0.1, 0.8), 0.0, 30.0,
                                      IntegrateOptions{1e-12, 1e-14});
    const auto events = find_turning_points(traj);
    REQUIRE(!events.empty());
    std::size_t first_peri = 0;
    while (events[first_peri].kind != TurningKind::Perihelion) ++first_peri;
    const WRouteSeries w = lrl_vector_w_route(m, traj, events[first_peri]);

    // Fit |W| ~ theta^p over a decade of small positive theta. The series
    // angle wraps at pi, so stop at the first exit from the window to keep
    // later revolutions (where W is no longer small) out of the fit.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < w.theta.size(); ++i) {
        const double th = w.theta[i];
        if (th > 3e-1) break;
        if (th < 3e-2) continue;
        const double wn = norm(w.w[i]);
        if (wn <= 0.0) continue;
        const double lx = std::log(th), ly = std::log(wn);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    REQUIRE(n >= 8);
    const double slope = (static_cast<double>(n) * sxy - sx * sy) /
                         (static_cast<double>(n) * sxx - sx * sx);
    CHECK(slope >= 1.9);
    CHECK(slope <= 2.5);
}

TEST_CASE("monopole closed vector is conserved with the advertised invariants") {
    const Micz mm{1.0, -1.0, 0.5};
    const CentralModel m{mm};
    for (const PhaseState& s0 : sample_monopole_states(mm, 4)) {
        const Trajectory traj = integrate(m, s0, 0.0, 40.0, IntegrateOptions{1e-12, 1e-14});
        REQUIRE(traj.status == TrajectoryStatus::Ok);
        const Vec3 l0 = conserved_angular_momentum(m, traj.samples.front().state);
        const Vec3 k0 = micz_lrl(traj.samples.front().state, mm.m, mm.kappa, mm.alpha);
        const double e0 = traj.samples.front().energy;
        const double ksq_expected = 2.0 * mm.m * e0 * (norm2(l0) - mm.alpha * mm.alpha) +
                                    mm.m * mm.m * mm.kappa * mm.kappa;
        CHECK(testsupport::rel_diff(norm2(k0), ksq_expected) < 1e-10);
        CHECK(std::abs(dot(k0, l0) + mm.m * mm.alpha * mm.kappa) < 1e-10);
        for (const TrajectorySample& smp : traj.samples) {
            const Vec3 kv = micz_lrl(smp.state, mm.m, mm.kappa, mm.alpha);
            CHECK(norm(kv - k0) < 1e-9 * std::max(1.0, norm(k0)));
            CHECK(norm(conserved_angular_momentum(m, smp.state) - l0) < 1e-9);
        }
    }
}

TEST_CASE("monopole model is rejected by the radial magnitude machinery") {
    const CentralModel m{Micz{1.0, -1.0, 0.5}};
    CHECK_THROWS_AS(lrl_magnitude(m, -0.3, 1.1, 1.0), Error);
    CHECK_THROWS_AS(lrl_observable(m), Error);
    BoundStateSpec spec;
    spec.e_lo = -0.4;
    spec.e_hi = -0.2;
    CHECK_THROWS_AS(sample_bound_states(m, spec), Error);
}

TEST_CASE("closed bracket with the fixed-frame vector matches finite differences") {
    const CentralModel m{KeplerCoulomb{}};
    const BracketConfig cfg = bracket_config_for(m, FdScheme::Central4);
    const Vec3 u_ref{1.0, 0.0, 0.0};
    const VectorObservable k = lrl_fixed_frame_observable(m, u_ref);
    const std::vector<Observable> fs = {
        {"l_z", [](const PhaseState& s) { return cross(s.r, s.p).z; }},
        {"r.p", [](const PhaseState& s) { return dot(s.r, s.p); }},
        energy_observable(m),
    };
    const std::vector<PhaseState> states = {plane_state(1.3, 0.2, 0.9),
                                            plane_state(1.5, -0.3, 0.8),
                                            plane_state(1.8, 0.05, 1.0)};
    for (const Observable& f : fs) {
        for (const PhaseState& s : states) {
            const Vec3 closed = pb_with_lrl(m, f, s, u_ref, cfg);
            const Vec3 numeric = bracket(f, k, s, cfg);
            CHECK(norm(closed - numeric) < 1e-6 * std::max(1.0, norm(numeric)));
        }
    }
}

TEST_CASE("dressed vector assembles in the orthogonal frame") {
    const Vec3 u{1.0, 0.0, 0.0};
    const Vec3 l{0.0, 0.0, 2.0};
    const Vec3 v = dressed_vector(0.3, 0.5, -0.2, u, l);
    CHECK(norm(v - Vec3{0.3, 1.0, -0.4}) < 1e-15);
}

}  // TEST_SUITE
