// End-to-end checks of the library contract, one line per criterion. Each
// criterion pins its tolerances and a runtime budget; the process exits
// nonzero if any line fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lrl/algebra.hpp"
#include "lrl/brackets.hpp"
#include "lrl/closedform.hpp"
#include "lrl/dynamics.hpp"
#include "lrl/errors.hpp"
#include "lrl/lrl_vector.hpp"
#include "lrl/models.hpp"
#include "lrl/sampling.hpp"
#include "support.hpp"

using namespace lrl;
using testsupport::plane_state;
using testsupport::rel_diff;
using testsupport::segment_drift;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const char* what, double value, double tol, bool is_floor = false) {
        const char* op = is_floor ? (ok ? " >= " : " < ") : (ok ? " <= " : " > ");
        char buf[128];
        std::snprintf(buf, sizeof(buf), "%s %.2e%s%.0e", what, value, op, tol);
        if (!detail.empty()) detail += ", ";
        detail += buf;
        pass = pass && ok;
    }
    void bound(const char* what, double value, double tol) { require(value <= tol, what, value, tol); }
    void floor_at(const char* what, double value, double tol) {
        require(value >= tol, what, value, tol, true);
    }
    void note(const std::string& text) {
        if (!detail.empty()) detail += ", ";
        detail += text;
    }
};

double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// --- 1: closure on the kepler problem ---------------------------------------

Outcome kepler_closure() {
    Outcome out;
    const KeplerCoulomb kc{1.0, -1.0};
    const CentralModel m{kc};
    BoundStateSpec spec;
    spec.e_lo = -0.45;
    spec.e_hi = -0.12;
    spec.count = 50;
    const auto states = sample_bound_states(m, spec);

    double worst_dk = 0.0;
    for (const PhaseState& s : states) {
        const LrlResult res = lrl_vector_via_perihelion(m, s);
        const Vec3 closed = classical_kepler_lrl(s, kc.mu, kc.kappa);
        for (int i = 0; i < 3; ++i)
            worst_dk = std::max(worst_dk, std::abs(res.k_vec[i] - closed[i]));
    }
    out.bound("vector vs closed form", worst_dk, 1e-7);

    const VectorObservable k = lrl_observable(m);
    const BracketConfig cfg = bracket_config_for(m);
    const auto lambdas = self_bracket_lambdas(k, states, cfg);
    double worst_pb = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const Vec3 expected =
            (-2.0 * kc.mu * hamiltonian(m, states[i])) * cross(states[i].r, states[i].p);
        worst_pb = std::max(worst_pb, norm(lambdas[i] - expected) / norm(expected));
    }
    out.bound("self-bracket coefficient", worst_pb, 1e-4);
    return out;
}

// --- 2: the self-bracket identity across model families ----------------------

Outcome self_bracket_universality() {
    Outcome out;

    auto ksq_numeric = [](const CentralModel& m) {
        return [&m](double e, double l2) {
            const double l = std::sqrt(l2);
            const double k = lrl_magnitude(m, e, l, find_rmin(m, e, l).r_m);
            return k * k;
        };
    };

    {
        const CentralModel m{KeplerCoulomb{1.0, -1.0}};
        BoundStateSpec spec;
        spec.e_lo = -0.45;
        spec.e_hi = -0.12;
        spec.count = 12;
        const auto states = sample_bound_states(m, spec);
        const double r = verify_prop2(m, lrl_observable(m), ksq_numeric(m), states,
                                      bracket_config_for(m))
                             .max_rel();
        out.bound("kepler", r, 1e-4);
    }
    {
        const Micz mm{1.0, -1.0, 0.5};
        const CentralModel m{mm};
        const auto states = sample_monopole_states(mm, 12);
        const VectorObservable k{"monopole lrl", [mm](const PhaseState& s) {
                                     return micz_lrl(s, mm.m, mm.kappa, mm.alpha);
                                 }};
        auto ksq = [mm](double e, double l2) {
            return 2.0 * mm.m * e * (l2 - mm.alpha * mm.alpha) +
                   mm.m * mm.m * mm.kappa * mm.kappa;
        };
        const double r =
            verify_prop2(m, k, ksq, states, bracket_config_for(m)).max_rel();
        out.bound("monopole", r, 1e-4);
    }
    {
        const CentralModel m{testsupport::quartic_well()};
        BoundStateSpec spec;
        spec.e_lo = 1.0;
        spec.e_hi = 2.2;
        spec.count = 10;
        const auto states = sample_bound_states(m, spec);
        const double r = verify_prop2(m, lrl_observable(m), ksq_numeric(m), states,
                                      bracket_config_for(m))
                             .max_rel();
        out.bound("r^4 well", r, 1e-4);
    }
    {
        // Repulsive coulomb plus inverse-square on scattering states, the
        // inverse-square strength tied to each state's angular momentum.
        Rng rng(407);
        double worst = 0.0, worst_coeff = 0.0;
        for (int i = 0; i < 10; ++i) {
            const double mu = 1.0;
            const double ell = rng.uniform(0.6, 1.4);
            const double beta_model = -0.05 * ell * ell / (2.0 * mu);
            const CentralModel m{testsupport::coulomb_inverse_square(mu, 1.0, beta_model)};
            const PhaseState s =
                plane_state(rng.uniform(1.5, 3.0), rng.uniform(-0.6, 0.6), ell);
            const std::vector<PhaseState> one{s};
            const BracketConfig cfg = bracket_config_for(m);
            worst = std::max(
                worst,
                verify_prop2(m, lrl_observable(m), ksq_numeric(m), one, cfg).max_rel());
            const Vec3 lambda = self_bracket_lambdas(lrl_observable(m), one, cfg)[0];
            const Vec3 lv = cross(s.r, s.p);
            const double coeff = dot(lambda, lv) / norm2(lv);
            worst_coeff =
                std::max(worst_coeff, rel_diff(coeff, -2.0 * mu * hamiltonian(m, s)));
        }
        out.bound("1/r + 1/r^2 family", worst, 1e-4);
        out.bound("its coefficient vs -2 mu E", worst_coeff, 1e-5);
    }
    return out;
}

// --- 3: w-route constancy on non-kepler orbits --------------------------------

Outcome w_route_constancy() {
    Outcome out;
    struct Case {
        const char* name;
        CentralModel model;
        PhaseState s0;
        double t_max;
    };
    const double mu = 1.0, ell = 1.1;
    const std::vector<Case> cases = {
        {"r^4", CentralModel{testsupport::quartic_well()}, plane_state(1.0, 0.1, 0.8), 45.0},
        {"coulomb + 1/r^2",
         CentralModel{testsupport::coulomb_inverse_square(mu, -1.0,
                                                          -0.05 * ell * ell / (2.0 * mu))},
         plane_state(1.4, 0.0, ell), 130.0},
    };
    for (const Case& c : cases) {
        const Trajectory traj =
            integrate(c.model, c.s0, 0.0, c.t_max, IntegrateOptions{1e-12, 1e-14});
        const auto events = find_turning_points(traj);
        std::size_t n_peri = 0, first = events.size();
        for (std::size_t i = 0; i < events.size(); ++i) {
            if (events[i].kind == TurningKind::Perihelion) {
                if (first == events.size()) first = i;
                ++n_peri;
            }
        }
        if (n_peri < 11) {
            out.pass = false;
            out.note(std::string(c.name) + ": fewer than 10 radial periods covered");
            continue;
        }
        const WRouteSeries w = lrl_vector_w_route(c.model, traj, events[first]);
        out.bound((std::string(c.name) + " drift").c_str(), w.max_drift_rel, 1e-6);

        // The series angle wraps at pi; fit only the initial pass out of the
        // reference perihelion, where the quadratic law applies.
        std::vector<double> th, wn;
        for (std::size_t i = 0; i < w.theta.size(); ++i) {
            if (w.theta[i] > 3e-1) break;
            if (w.theta[i] > 3e-2 && norm(w.w[i]) > 0.0) {
                th.push_back(w.theta[i]);
                wn.push_back(norm(w.w[i]));
            }
        }
        const double p = log_slope(th, wn);
        out.floor_at((std::string(c.name) + " |W| exponent").c_str(), p, 1.9);
    }
    return out;
}

// --- 4: relativistic coulomb closed forms --------------------------------------

Outcome relativistic_coulomb() {
    Outcome out;
    const RelCoulomb rc{1.0, -1.0};
    const CentralModel m{rc};
    const double ell = 1.4;
    const double e_probe = hamiltonian(m, plane_state(2.0, 0.0, ell));
    const double r_m = relcoulomb_rmin(rc, e_probe, ell);
    const PhaseState s0 = plane_state(r_m, 0.0, ell);
    const double energy = hamiltonian(m, s0);

    const double apsidal_cf = relcoulomb_apsidal(rc, ell);
    const Trajectory traj = integrate(m, s0, 0.0, 170.0, IntegrateOptions{1e-12, 1e-14});
    std::size_t n_peri = 0;
    for (const auto& ev : find_turning_points(traj))
        if (ev.kind == TurningKind::Perihelion) ++n_peri;
    if (n_peri < 6) {
        out.pass = false;
        out.note("fewer than 5 radial periods covered");
        return out;
    }
    double worst_dr = 0.0;
    for (const TrajectorySample& s : traj.samples) {
        if (s.theta > 5.0 * apsidal_cf) break;
        worst_dr = std::max(worst_dr,
                            std::abs(s.r - relcoulomb_orbit_r(rc, energy, ell, s.theta)));
    }
    out.bound("orbit radius", worst_dr, 1e-6);
    out.bound("apsidal angle", std::abs(apsidal_angle(traj).mean - apsidal_cf), 1e-4);
    out.bound("magnitude",
              rel_diff(lrl_magnitude(m, energy, ell, find_rmin(m, energy, ell).r_m),
                       relcoulomb_kmag(rc, energy, ell)),
              1e-10);
    out.bound("self-bracket coefficient",
              rel_diff(self_pb_coefficient(m, energy, ell, r_m),
                       -(energy * energy - 1.0)),
              1e-4);
    return out;
}

// --- 5: post-newtonian order of accuracy ---------------------------------------

Outcome post_newtonian() {
    Outcome out;
    const std::vector<double> cs = {50.0, 100.0, 200.0, 400.0};
    std::vector<double> defects;
    for (const double c : cs) {
        const PostNewtonian pm = PostNewtonian::electromagnetic(1.0, 3.0, -1.0, c);
        const CentralModel m{pm};
        const PhaseState s0 = plane_state(1.0, 0.0, 0.9);
        const double e = hamiltonian(m, s0);
        const Trajectory traj = integrate(m, s0, 0.0, 120.0, IntegrateOptions{1e-12, 1e-14});
        const double delta = pn_coefficients(pm, e, 0.9).delta;
        const auto d = segment_drift(
            traj, [&](const PhaseState& s) { return pn_lrl(pm, s); },
            2.0 * M_PI / (1.0 - delta));
        defects.push_back(std::max(d.within, d.jump));
    }
    const double exponent = -log_slope(cs, defects);
    out.floor_at("constancy defect exponent", exponent, 3.5);

    {
        const PostNewtonian pm = PostNewtonian::electromagnetic(1.0, 3.0, -1.0, 100.0);
        const CentralModel m{pm};
        const PhaseState s0 = plane_state(1.0, 0.0, 0.9);
        const double e = hamiltonian(m, s0);
        const double r_m = find_rmin(m, e, 0.9).r_m;
        out.bound("coefficient at c = 100",
                  rel_diff(self_pb_coefficient(m, e, 0.9, r_m), pn_self_pb(pm, e)), 1e-5);
    }

    const PostNewtonian pm = PostNewtonian::electromagnetic(1.0, 3.0, -1.0, 1e4);
    const CentralModel m{pm};
    const double mu = pm.reduced_mass();
    BoundStateSpec spec;
    spec.e_lo = -0.45 * mu;
    spec.e_hi = -0.12 * mu;
    spec.count = 6;
    const auto states = sample_bound_states(m, spec);
    double worst_dk = 0.0, worst_pb = 0.0;
    const auto lambdas =
        self_bracket_lambdas(lrl_observable(m), states, bracket_config_for(m));
    for (std::size_t i = 0; i < states.size(); ++i) {
        const PhaseState& s = states[i];
        const LrlResult res = lrl_vector_via_perihelion(m, s);
        const Vec3 closed = classical_kepler_lrl(s, mu, pm.kappa);
        for (int k = 0; k < 3; ++k)
            worst_dk = std::max(worst_dk, std::abs(res.k_vec[k] - closed[k]));
        const Vec3 expected = (-2.0 * mu * hamiltonian(m, s)) * cross(s.r, s.p);
        worst_pb = std::max(worst_pb, norm(lambdas[i] - expected) / norm(expected));
    }
    out.bound("kepler vector recovered at c = 1e4", worst_dk, 1e-4);
    out.bound("kepler coefficient recovered", worst_pb, 1e-4);
    return out;
}

// --- 6: the (A, l) algebra -------------------------------------------------------

Outcome algebra_pairs() {
    Outcome out;
    const KeplerCoulomb kc{1.0, -1.0};
    const CentralModel m{kc};
    BoundStateSpec spec;
    spec.e_lo = -0.45;
    spec.e_hi = -0.12;
    spec.count = 20;
    const auto states = sample_bound_states(m, spec);
    const BracketConfig cfg = bracket_config_for(m);

    const VectorObservable a_obs{"A", [kc, &m](const PhaseState& s) {
                                     const double e = hamiltonian(m, s);
                                     return classical_kepler_lrl(s, kc.mu, kc.kappa) /
                                            std::sqrt(-2.0 * kc.mu * e);
                                 }};
    out.bound("bracket of l with A", verify_rotational(m, a_obs, states, cfg).max_rel(),
              1e-4);

    const auto lambdas = self_bracket_lambdas(a_obs, states, cfg);
    double worst_aa = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const Vec3 lv = cross(states[i].r, states[i].p);
        worst_aa = std::max(worst_aa, norm(lambdas[i] - lv) / norm(lv));
    }
    out.bound("bracket of A with A", worst_aa, 1e-4);

    Rng rng(1311);
    double worst_casimir = 0.0, worst_ladder = 0.0, worst_dir = 0.0;
    std::size_t realized = 0;
    for (const PhaseState& s : states) {
        const double e = hamiltonian(m, s);
        const CanonicalPair pair = canonicalize(classical_kepler_lrl(s, kc.mu, kc.kappa),
                                                cross(s.r, s.p), -2.0 * kc.mu * e);
        Vec3 axis{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
        axis = normalized(axis);
        const double chi = rng.uniform(0.25, 1.1);
        const CanonicalPair moved = lrl_transform(pair, axis, chi);
        worst_casimir = std::max({worst_casimir, std::abs(moved.c1 - pair.c1),
                                  std::abs(moved.c2 - pair.c2)});

        const double lmax = ell_max(m, e, norm(s.r));
        const double lm = norm(moved.ell);
        if (lm > 0.25 * lmax && lm < 0.995 * lmax && norm(moved.a) > 1e-6) {
            const PhaseState re = realize_transformed_orbit(m, e, moved, norm(s.r));
            const Vec3 k2 = classical_kepler_lrl(re, kc.mu, kc.kappa);
            worst_dir = std::max(worst_dir, norm(normalized(k2) - normalized(moved.a)));
            ++realized;
        }
    }
    for (const double e : {-0.45, -0.28, -0.12}) {
        const double lmax = ell_max(m, e);
        CanonicalPair circ;
        circ.ell = Vec3{0.0, 0.0, lmax};
        circ.eta = 1;
        circ.c1 = lmax * lmax;
        for (const double chi : {0.3, 0.7, 1.1}) {
            const CanonicalPair t = lrl_transform(circ, Vec3{1.0, 0.0, 0.0}, chi);
            worst_ladder = std::max(
                worst_ladder,
                std::abs(norm(t.a) - std::sqrt(lmax * lmax - norm2(t.ell))));
        }
    }
    out.bound("casimir preservation", worst_casimir, 1e-10);
    out.bound("circular-start ladder", worst_ladder, 1e-8);
    if (realized == 0) {
        out.pass = false;
        out.note("no transformed orbit satisfied the realization guard");
    } else {
        out.bound("realized direction", worst_dir, 1e-6);
    }
    return out;
}

// --- 7: the charge-monopole system ----------------------------------------------

Outcome monopole_invariants() {
    Outcome out;
    const Micz mm{1.0, -1.0, 0.5};
    const CentralModel m{mm};
    double worst_l = 0.0, worst_kl = 0.0, worst_ksq = 0.0;
    for (const PhaseState& s0 : sample_monopole_states(mm, 8)) {
        const Trajectory traj = integrate(m, s0, 0.0, 60.0, IntegrateOptions{1e-12, 1e-14});
        if (traj.status != TrajectoryStatus::Ok) {
            out.pass = false;
            out.note("monopole trajectory lost");
            continue;
        }
        const Vec3 l0 = conserved_angular_momentum(m, traj.samples.front().state);
        const double e0 = traj.samples.front().energy;
        const double ksq_expected = 2.0 * mm.m * e0 * (norm2(l0) - mm.alpha * mm.alpha) +
                                    mm.m * mm.m * mm.kappa * mm.kappa;
        const double kl_expected = -mm.m * mm.alpha * mm.kappa;
        for (const TrajectorySample& smp : traj.samples) {
            const Vec3 lv = conserved_angular_momentum(m, smp.state);
            const Vec3 kv = micz_lrl(smp.state, mm.m, mm.kappa, mm.alpha);
            worst_l = std::max(worst_l, norm(lv - l0) / norm(l0));
            worst_kl = std::max(worst_kl, std::abs(dot(kv, lv) - kl_expected) /
                                              std::abs(kl_expected));
            worst_ksq = std::max(worst_ksq, rel_diff(norm2(kv), ksq_expected));
        }
    }
    out.bound("l conservation", worst_l, 1e-7);
    out.bound("K . l", worst_kl, 1e-7);
    out.bound("K^2", worst_ksq, 1e-7);
    return out;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Entry> entries = {
        {"kepler closure", kepler_closure, 30.0},
        {"self-bracket universality", self_bracket_universality, 120.0},
        {"w-route constancy", w_route_constancy, 60.0},
        {"relativistic coulomb", relativistic_coulomb, 60.0},
        {"post-newtonian order", post_newtonian, 180.0},
        {"algebra pairs", algebra_pairs, 30.0},
        {"monopole invariants", monopole_invariants, 30.0},
    };

    bool all = true;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = entries[i].run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.note(std::string("exception: ") + e.what());
        }
        const double sec =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (sec >= entries[i].budget_s) {
            out.pass = false;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "over budget %.0f s", entries[i].budget_s);
            out.note(buf);
        }
        std::printf("criterion %zu  %-28s %s  %6.1f s  (%s)\n", i + 1, entries[i].name,
                    out.pass ? "PASS" : "FAIL", sec, out.detail.c_str());
        all = all && out.pass;
    }
    return all ? 0 : 1;
}
