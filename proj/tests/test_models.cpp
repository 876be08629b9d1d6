#include <cmath>
#include <vector>

#include "doctest.h"
#include "lrl/errors.hpp"
#include "lrl/models.hpp"
#include "lrl/sampling.hpp"
#include "support.hpp"

using namespace lrl;
using testsupport::plane_state;

namespace {

std::vector<CentralModel> canonical_models() {
    return {
        KeplerCoulomb{1.0, -1.0},
        RelCoulomb{1.0, -1.0},
        PostNewtonian::electromagnetic(1.0, 3.0, -1.0, 100.0),
        PostNewtonian::gravitational(1.0, 3.0, -1.0, 100.0),
        CentralModel{testsupport::quartic_well()},
        CentralModel{testsupport::coulomb_inverse_square(1.0, -1.0, 0.1)},
    };
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("polar and cartesian hamiltonians agree") {
    Rng rng(7);
    for (const CentralModel& m : canonical_models()) {
        for (int i = 0; i < 10; ++i) {
            const double r = rng.uniform(0.8, 3.0);
            const double pr = rng.uniform(-0.4, 0.4);
            const double ell = rng.uniform(0.5, 1.5);
            const PhaseState s = plane_state(r, pr, ell);
            const double hc = hamiltonian(m, s);
            const double hp = hamiltonian(m, PolarState{r, 0.0, pr, ell});
            CHECK(std::abs(hc - hp) < 1e-12 * std::max(1.0, std::abs(hc)));
        }
    }
}

TEST_CASE("monopole hamiltonian uses the full conserved momentum") {
    const Micz mm{1.0, -1.0, 0.5};
    const CentralModel m{mm};
    Rng rng(11);
    for (int i = 0; i < 10; ++i) {
        PhaseState s;
        s.r = {rng.uniform(0.8, 2.0), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        s.p = {rng.uniform(-0.5, 0.5), rng.uniform(0.4, 0.9), rng.uniform(-0.3, 0.3)};
        const Vec3 lv = conserved_angular_momentum(m, s);
        const double r = norm(s.r);
        const double pr = dot(s.p, s.r) / r;
        const double hp = hamiltonian(m, PolarState{r, 0.0, pr, norm(lv)});
        CHECK(std::abs(hamiltonian(m, s) - hp) < 1e-12);
        // The monopole term pins the radial direction onto a cone around l.
        CHECK(std::abs(dot(lv, s.r / r) + mm.alpha) < 1e-12);
    }
}

TEST_CASE("gradients match finite differences of the polar hamiltonian") {
    const double h = 1e-6;
    for (const CentralModel& m : canonical_models()) {
        const PolarState s{1.4, 0.3, 0.2, 0.9};
        const PolarGradients g = gradients(m, s);
        auto fd = [&](auto bump) {
            PolarState a = s, b = s;
            bump(a, +h);
            bump(b, -h);
            return (hamiltonian(m, a) - hamiltonian(m, b)) / (2.0 * h);
        };
        CHECK(std::abs(g.d_r - fd([](PolarState& q, double d) { q.r += d; })) < 1e-8);
        CHECK(std::abs(g.d_pr - fd([](PolarState& q, double d) { q.p_r += d; })) < 1e-8);
        CHECK(std::abs(g.d_ell - fd([](PolarState& q, double d) { q.p_theta += d; })) < 1e-8);
    }
}

TEST_CASE("equations of motion are the canonical flow") {
    const double h = 1e-6;
    Rng rng(23);
    for (const CentralModel& m : canonical_models()) {
        PhaseState s;
        s.r = {rng.uniform(0.9, 1.6), rng.uniform(-0.4, 0.4), rng.uniform(-0.4, 0.4)};
        s.p = {rng.uniform(-0.3, 0.3), rng.uniform(0.4, 0.8), rng.uniform(-0.3, 0.3)};
        const PhaseDerivative d = equations_of_motion(m, s);
        auto bump = [&](int k, bool momentum, double step) {
            PhaseState q = s;
            (momentum ? q.p : q.r)[k] += step;
            return hamiltonian(m, q);
        };
        for (int k = 0; k < 3; ++k) {
            const double dHdp = (bump(k, true, h) - bump(k, true, -h)) / (2.0 * h);
            const double dHdr = (bump(k, false, h) - bump(k, false, -h)) / (2.0 * h);
            CHECK(std::abs(d.dr[k] - dHdp) < 1e-8);
            CHECK(std::abs(d.dp[k] + dHdr) < 1e-8);
        }
    }
}

TEST_CASE("potential decomposition reassembles the hamiltonian") {
    const std::vector<CentralModel> newtonian = {
        KeplerCoulomb{1.3, -0.8},
        CentralModel{testsupport::quartic_well(1.1, 0.7)},
        CentralModel{testsupport::coulomb_inverse_square(1.0, -1.0, 0.08)},
    };
    for (const CentralModel& m : newtonian) {
        const auto nf = newtonian_form(m);
        REQUIRE(nf.has_value());
        const double r = 1.7, pr = 0.25, ell = 1.1;
        const PotentialTerms u = potential(m, r);
        const double expected = (pr * pr + ell * ell / (r * r)) / (2.0 * nf->mu) + u.u;
        CHECK(std::abs(hamiltonian(m, PolarState{r, 0.0, pr, ell}) - expected) < 1e-13);
        const double h = 1e-6;
        CHECK(std::abs(u.du - (potential(m, r + h).u - potential(m, r - h).u) / (2.0 * h)) <
              1e-7);
    }
    CHECK_THROWS_AS(potential(CentralModel{RelCoulomb{}}, 1.0), Error);
    CHECK_THROWS_AS(potential(CentralModel{PostNewtonian{}}, 1.0), Error);
    CHECK(!newtonian_form(CentralModel{RelCoulomb{}}).has_value());
    CHECK(!newtonian_form(CentralModel{PostNewtonian{}}).has_value());
    CHECK(!newtonian_form(CentralModel{Micz{}}).has_value());
}

TEST_CASE("polar round trip") {
    Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        PhaseState s;
        s.r = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), rng.uniform(0.3, 2.0)};
        s.p = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        if (norm(cross(s.r, s.p)) < 1e-3) continue;
        const auto [polar, basis] = to_polar(s);
        const PhaseState back = from_polar(polar, basis, s.t);
        CHECK(norm(back.r - s.r) < 1e-13 * std::max(1.0, norm(s.r)));
        CHECK(norm(back.p - s.p) < 1e-13 * std::max(1.0, norm(s.p)));
        CHECK(polar.p_theta == doctest::Approx(norm(cross(s.r, s.p))).epsilon(1e-12));
        // With the state's own direction as reference the azimuth vanishes.
        CHECK(std::abs(polar.theta) < 1e-12);
    }
}

TEST_CASE("polar reference direction sets the azimuth") {
    const PhaseState s = plane_state(2.0, 0.1, 1.0);
    const auto [polar, basis] = to_polar(s, Vec3{0.0, 1.0, 0.0});
    CHECK(polar.theta == doctest::Approx(-M_PI / 2).epsilon(1e-12));
    CHECK(norm(from_polar(polar, basis).r - s.r) < 1e-13);
}

TEST_CASE("post-newtonian parameter helpers") {
    const PostNewtonian em = PostNewtonian::electromagnetic(1.0, 3.0, -1.0, 50.0);
    CHECK(em.alpha_pn == 0.0);
    CHECK(em.total_mass() == doctest::Approx(4.0));
    CHECK(em.reduced_mass() == doctest::Approx(0.75));
    CHECK(em.inv_nu3() == doctest::Approx(1.0 + 1.0 / 27.0));
    const PostNewtonian gr = PostNewtonian::gravitational(1.0, 3.0, -1.0, 50.0);
    CHECK(gr.alpha_pn == doctest::Approx(3.0 * 4.0 / 0.75));
    const PostNewtonian w = PostNewtonian::with_alpha(1.0, 3.0, -1.0, 2.5, 50.0);
    CHECK(w.alpha_pn == 2.5);
}

TEST_CASE("monopole coupling is zero for canonical models") {
    CHECK(monopole_coupling(CentralModel{KeplerCoulomb{}}) == 0.0);
    CHECK(monopole_coupling(CentralModel{Micz{1.0, -1.0, 0.5}}) == 0.5);
}

}  // TEST_SUITE
