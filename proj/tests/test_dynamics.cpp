#include <cmath>

#include "doctest.h"
#include "lrl/closedform.hpp"
#include "lrl/dynamics.hpp"
#include "lrl/lrl_vector.hpp"
#include "lrl/models.hpp"
#include "lrl/sampling.hpp"
#include "support.hpp"

using namespace lrl;
using testsupport::plane_state;

TEST_SUITE("dynamics") {

TEST_CASE("energy and angular momentum stay put on a kepler orbit") {
    const CentralModel m{KeplerCoulomb{}};
    const Trajectory traj = integrate(m, plane_state(1.0, 0.0, 1.2), 0.0, 100.0);
    REQUIRE(traj.status == TrajectoryStatus::Ok);
    for (const DriftReport& d : conservation_report(traj)) {
        CHECK(d.max_rel < 1e-9);
    }
}

TEST_CASE("integration is time reversible") {
    const CentralModel m{KeplerCoulomb{}};
    const PhaseState s0 = plane_state(1.7, 0.2, 0.9);
    const double T = 37.0;
    PhaseState half = advance(m, s0, 0.0, T);
    half.p *= -1.0;
    PhaseState back = advance(m, half, 0.0, T);
    back.p *= -1.0;
    CHECK(norm(back.r - s0.r) < 1e-6);
    CHECK(norm(back.p - s0.p) < 1e-6);
}

TEST_CASE("advance matches the trajectory endpoint") {
    const CentralModel m{KeplerCoulomb{}};
    const PhaseState s0 = plane_state(1.0, 0.0, 1.2);
    const Trajectory traj = integrate(m, s0, 0.0, 25.0);
    const PhaseState end = advance(m, s0, 0.0, 25.0);
    CHECK(norm(end.r - traj.samples.back().state.r) < 1e-9);
    CHECK(norm(end.p - traj.samples.back().state.p) < 1e-9);
}

TEST_CASE("turning points sit on the radial shell boundaries") {
    const CentralModel m{KeplerCoulomb{}};
    const double energy = -0.28, ell = 1.2;
    const PhaseState s0 = plane_state(1.3, radial_momentum_at(m, 1.3, energy, ell), ell);
    const Trajectory traj = integrate(m, s0, 0.0, 60.0);
    const double r_min = find_rmin(m, energy, ell).r_m;
    const double r_max = outer_turning(m, energy, ell, r_min);
    std::size_t peri = 0, apo = 0;
    for (const TurningEvent& ev : find_turning_points(traj)) {
        if (ev.kind == TurningKind::Perihelion) {
            CHECK(std::abs(ev.r - r_min) < 1e-8);
            ++peri;
        } else if (ev.kind == TurningKind::Aphelion) {
            CHECK(std::abs(ev.r - r_max) < 1e-8);
            ++apo;
        }
    }
    CHECK(peri >= 3);
    CHECK(apo >= 3);
}

TEST_CASE("near-circular orbits report no turning points") {
    const CentralModel m{KeplerCoulomb{}};
    const Trajectory traj = integrate(m, plane_state(1.0, 0.0, 1.0), 0.0, 30.0);
    CHECK(find_turning_points(traj).empty());
}

TEST_CASE("kepler apsidal angle is a full turn") {
    const CentralModel m{KeplerCoulomb{}};
    const Trajectory traj = integrate(m, plane_state(1.0, 0.0, 1.2), 0.0, 120.0);
    const ApsidalAngle aps = apsidal_angle(traj);
    CHECK(aps.cycles >= 5);
    CHECK(std::abs(aps.mean - 2.0 * M_PI) < 1e-6);
    CHECK(aps.stddev < 1e-6);
}

TEST_CASE("an inverse-square addition rotates the apsides") {
    const double mu = 1.0, kappa = -1.0, ell = 1.1;
    for (const double beta : {0.04, -0.05}) {
        const CentralModel m{testsupport::coulomb_inverse_square(mu, kappa, beta)};
        const PhaseState s0 = plane_state(1.4, 0.0, ell);
        const Trajectory traj = integrate(m, s0, 0.0, 160.0);
        const ApsidalAngle aps = apsidal_angle(traj);
        // l_eff^2 = l^2 - 2 mu beta for U = kappa/r - beta/r^2.
        const double expected = 2.0 * M_PI * ell / std::sqrt(ell * ell - 2.0 * mu * beta);
        CHECK(aps.cycles >= 3);
        CHECK(std::abs(aps.mean - expected) < 1e-6);
    }
}

TEST_CASE("relativistic coulomb apsidal angle matches its closed form") {
    const RelCoulomb rc{1.0, -1.0};
    const CentralModel m{rc};
    const PhaseState s0 = plane_state(2.0, 0.0, 1.4);
    const Trajectory traj = integrate(m, s0, 0.0, 200.0);
    const ApsidalAngle aps = apsidal_angle(traj);
    CHECK(aps.cycles >= 3);
    CHECK(std::abs(aps.mean - relcoulomb_apsidal(rc, 1.4)) < 1e-6);
}

TEST_CASE("too short a window refuses an apsidal estimate") {
    const CentralModel m{KeplerCoulomb{}};
    const Trajectory traj = integrate(m, plane_state(1.0, 0.0, 1.2), 0.0, 2.0);
    CHECK_THROWS_AS(apsidal_angle(traj), Error);
}

TEST_CASE("plunge is reported, not thrown") {
    // Below l = |kappa| the relativistic attraction wins over the centrifugal
    // barrier and the orbit spirals in; the integrator must hand back the
    // partial trajectory, truncated where energy conservation degrades.
    const CentralModel m{RelCoulomb{1.0, -1.0}};
    const Trajectory traj = integrate(m, plane_state(0.25, 0.0, 2.4 * 0.25), 0.0, 20.0);
    CHECK(traj.status == TrajectoryStatus::ConservationFailure);
    CHECK(traj.t_end() < 20.0);
    CHECK(traj.samples.size() > 10);
    CHECK(traj.samples.back().r < 0.05);

    // With the energy guard off, the same plunge stalls the step controller.
    IntegrateOptions loose;
    loose.energy_tol = 1e9;
    const Trajectory raw = integrate(m, plane_state(0.25, 0.0, 2.4 * 0.25), 0.0, 20.0, loose);
    CHECK(raw.status == TrajectoryStatus::StepFailure);
    CHECK(raw.t_end() < 20.0);
}

TEST_CASE("conservation report accepts custom observables") {
    const CentralModel m{KeplerCoulomb{}};
    const Trajectory traj = integrate(m, plane_state(1.0, 0.0, 1.2), 0.0, 40.0);
    const std::vector<LabeledObservable> obs = {
        {"l_z", [](const PhaseState& s) { return cross(s.r, s.p).z; }},
        {"k_x", [](const PhaseState& s) { return classical_kepler_lrl(s, 1.0, -1.0).x; }},
    };
    const auto reports = conservation_report(traj, obs);
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].max_rel < 1e-9);
    CHECK(reports[1].max_rel < 1e-9);
    CHECK(reports[1].label == "k_x");
}

}  // TEST_SUITE
