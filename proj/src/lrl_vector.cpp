#include "lrl/lrl_vector.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <utility>
#include <variant>
#include <vector>

#include "lrl/quadrature.hpp"
#include "lrl/rootfind.hpp"

namespace lrl {

namespace {

double shell_gap(const CentralModel& model, double r, double energy, double ell) {
    return hamiltonian(model, PolarState{r, 0.0, 0.0, ell}) - energy;
}

double shell_gap_slope(const CentralModel& model, double r, double ell) {
    return gradients(model, PolarState{r, 0.0, 0.0, ell}).d_r;
}

// Newton steps on the already-bracketed root; keeps the residual at rounding
// level so the perihelion responds smoothly to (E, l) perturbations.
double polish_root(const CentralModel& model, double r, double energy, double ell,
                   double lo, double hi) {
    for (int it = 0; it < 3; ++it) {
        const double g = shell_gap(model, r, energy, ell);
        const double dg = shell_gap_slope(model, r, ell);
        if (dg == 0.0) break;
        double next = r - g / dg;
        if (!(next > lo && next < hi)) break;
        r = next;
    }
    return r;
}

const GaussRule& azimuth_rule() {
    static const GaussRule rule = gauss_legendre(48);
    return rule;
}

}  // namespace

RminResult find_rmin(const CentralModel& model, double energy, double ell, double scale_hint) {
    if (!(scale_hint > 0.0) || !std::isfinite(scale_hint)) scale_hint = 1.0;
    const double r_lo = 1e-6 * scale_hint;
    const double r_hi = 1e3 * scale_hint;
    constexpr int n = 256;
    const double ratio = std::pow(r_hi / r_lo, 1.0 / n);

    // Only falling crossings of the shell gap H(r,0,l) - E qualify: they bound
    // an allowed region from below, i.e. they are perihelia. Rising crossings
    // are outer turning points, and models whose small-r expansion dives back
    // under E (the post-Newtonian terms do) would otherwise hand out the
    // artifact region instead of the physical shell.
    std::vector<double> perihelia;
    double r_prev = r_lo;
    double g_prev = shell_gap(model, r_prev, energy, ell);
    double g_best = std::abs(g_prev);
    double r_best = r_prev;
    int i_best = 0;

    for (int i = 1; i <= n; ++i) {
        const double r = r_lo * std::pow(ratio, i);
        const double g = shell_gap(model, r, energy, ell);
        if (std::isfinite(g_prev) && std::isfinite(g) && g_prev > 0.0 && g <= 0.0) {
            double root = brent([&](double x) { return shell_gap(model, x, energy, ell); },
                                r_prev, r, g_prev, g, 0.0, 1e-15, 200);
            root = polish_root(model, root, energy, ell, r_prev, r);
            perihelia.push_back(root);
        }
        if (std::isfinite(g) && std::abs(g) < g_best) {
            g_best = std::abs(g);
            r_best = r;
            i_best = i;
        }
        r_prev = r;
        g_prev = g;
    }

    if (!perihelia.empty()) {
        // Several shells: take the one the hint radius belongs to, falling
        // back to the innermost shell above the hint.
        double pick = perihelia.front();
        for (const double p : perihelia) {
            if (p <= scale_hint * (1.0 + 1e-12)) pick = p;
        }
        return {pick, false};
    }

    // No sign change: either the energy grazes the effective-potential minimum
    // (circular orbit, double root) or the shell is empty in range.
    const double tol = 1e-9 * std::max(1.0, std::abs(energy));
    if (i_best > 0 && i_best < n) {
        const double a = r_lo * std::pow(ratio, i_best - 1);
        const double b = r_lo * std::pow(ratio, i_best + 1);
        const double da = shell_gap_slope(model, a, ell);
        const double db = shell_gap_slope(model, b, ell);
        if (da < 0.0 && db > 0.0) {
            const double r_star = brent([&](double x) { return shell_gap_slope(model, x, ell); },
                                        a, b, da, db, 0.0, 1e-15, 200);
            if (std::abs(shell_gap(model, r_star, energy, ell)) <= tol) return {r_star, true};
        } else if (g_best <= tol) {
            return {r_best, true};
        }
    }
    fail(Err::NoTurningPoint, model_name(model) + ": no radial turning point for E=" +
                                  std::to_string(energy) + ", l=" + std::to_string(ell));
}

double lrl_magnitude(const CentralModel& model, double energy, double ell, double scale_hint) {
    if (std::holds_alternative<Micz>(model)) {
        fail(Err::ModelUnsupported,
             "lrl_magnitude: the monopole model is not planar; use its closed form");
    }
    const RminResult rm = find_rmin(model, energy, ell, scale_hint);
    if (rm.degenerate) return 0.0;
    const PolarGradients g = gradients(model, PolarState{rm.r_m, 0.0, 0.0, ell});
    if (g.d_ell == 0.0) fail(Err::ZeroAngularMomentum, "lrl_magnitude: dH/dl = 0 at perihelion");
    return -ell * g.d_r / g.d_ell;
}

double self_pb_coefficient(const CentralModel& model, double energy, double ell,
                           double scale_hint) {
    const double l2 = ell * ell;
    const double h = 1e-6 * std::max(l2, 1e-12);
    const auto ksq = [&](double l2p) {
        const double k = lrl_magnitude(model, energy, std::sqrt(l2p), scale_hint);
        return k * k;
    };
    const double k0 = ksq(l2);
    const double kp = ksq(l2 + h);
    const double km = ksq(l2 - h);
    const double fwd = (kp - k0) / h;
    const double bwd = (k0 - km) / h;
    const double scale = std::max({std::abs(fwd), std::abs(bwd), 1e-9});
    if (std::abs(fwd - bwd) > 0.02 * scale) {
        fail(Err::NonDifferentiableMagnitude,
             "self_pb_coefficient: one-sided d(K^2)/d(l^2) slopes disagree at l=" +
                 std::to_string(ell));
    }
    return -(kp - km) / (2.0 * h);
}

double radial_momentum_at(const CentralModel& model, double rho, double energy, double ell) {
    if (rho <= 0.0) fail(Err::NonPositiveRadius, "radial_momentum_at: rho <= 0");
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KeplerCoulomb>) {
                const double pr2 = 2.0 * m.mu * (energy - m.kappa / rho) - ell * ell / (rho * rho);
                return std::sqrt(std::max(pr2, 0.0));
            } else if constexpr (std::is_same_v<T, Micz>) {
                const double pr2 = 2.0 * m.m * (energy - m.kappa / rho) - ell * ell / (rho * rho);
                return std::sqrt(std::max(pr2, 0.0));
            } else if constexpr (std::is_same_v<T, RelCoulomb>) {
                const double w = energy - m.kappa / rho;
                const double pr2 = w * w - m.m * m.m - ell * ell / (rho * rho);
                return std::sqrt(std::max(pr2, 0.0));
            } else if constexpr (std::is_same_v<T, CustomCentral>) {
                const double pr2 =
                    2.0 * m.mu * (energy - potential(model, rho).u) - ell * ell / (rho * rho);
                return std::sqrt(std::max(pr2, 0.0));
            } else {
                // Momentum-dependent interaction: invert H(rho, p_r, l) = E.
                const auto gap = [&](double p) {
                    return hamiltonian(model, PolarState{rho, 0.0, p, ell}) - energy;
                };
                const double g0 = gap(0.0);
                if (g0 >= 0.0) return 0.0;
                double hi = std::sqrt(std::max(2.0 * m.reduced_mass() * (-g0), 1e-12)) + 1.0;
                double ghi = gap(hi);
                int guard = 0;
                while (ghi < 0.0 && guard++ < 40) {
                    hi *= 2.0;
                    ghi = gap(hi);
                }
                if (ghi < 0.0) {
                    fail(Err::EvaluationFailure, "radial_momentum_at: no p_r bracket");
                }
                return brent(gap, 0.0, hi, g0, ghi, 0.0, 1e-15, 200);
            }
        },
        model);
}

double azimuth_from_perihelion(const CentralModel& model, double r, double energy, double ell,
                               double r_m) {
    if (std::holds_alternative<Micz>(model)) {
        fail(Err::ModelUnsupported,
             "azimuth_from_perihelion: the monopole model is not planar");
    }
    const double span = r - r_m;
    if (span < 0.0) {
        if (span > -1e-9 * r_m) return 0.0;
        fail(Err::OutsideDomain, "azimuth_from_perihelion: r below the perihelion");
    }
    if (span == 0.0) return 0.0;

    // rho = r_m + span x^2 resolves the square-root turning-point singularity;
    // the integrand is then analytic in x and fixed-order panels keep the
    // result smooth in (r, E, l) for differentiation.
    const auto integrand = [&](double x) {
        const double rho = r_m + span * x * x;
        const double p_r = radial_momentum_at(model, rho, energy, ell);
        if (p_r == 0.0) return 0.0;  // only reachable at rounding level next to x = 0
        const PolarGradients g = gradients(model, PolarState{rho, 0.0, p_r, ell});
        const double value = g.d_ell / g.d_pr * 2.0 * span * x;
        if (!std::isfinite(value)) {
            fail(Err::QuadratureBlowup, "azimuth_from_perihelion: integrand not finite");
        }
        return value;
    };
    return integrate_fixed(integrand, 0.0, 1.0, azimuth_rule(), 4);
}

VectorObservable lrl_observable(const CentralModel& model) {
    if (std::holds_alternative<Micz>(model)) {
        fail(Err::ModelUnsupported, "lrl_observable: the monopole model is not planar");
    }
    VectorObservable k;
    k.label = "K[" + model_name(model) + "]";
    k.eval = [model](const PhaseState& s) -> Vec3 {
        const double r = s.r.norm();
        if (r <= 0.0) fail(Err::NonPositiveRadius, "lrl_observable: |r| = 0");
        const Vec3 ell_vec = cross(s.r, s.p);
        const double ell = ell_vec.norm();
        if (ell <= 1e-12 * r * s.p.norm()) {
            fail(Err::ZeroAngularMomentum, "lrl_observable: radial state");
        }
        const double energy = hamiltonian(model, s);
        const RminResult rm = find_rmin(model, energy, ell, r);
        if (rm.degenerate) return Vec3{0.0, 0.0, 0.0};
        const PolarGradients g = gradients(model, PolarState{rm.r_m, 0.0, 0.0, ell});
        const double k_mag = -ell * g.d_r / g.d_ell;
        const double phi = azimuth_from_perihelion(model, r, energy, ell, rm.r_m);
        const double p_r = dot(s.r, s.p) / r;
        const double theta_rad = p_r >= 0.0 ? phi : -phi;
        const Vec3 u_o = rotate_about(ell_vec / ell, -theta_rad, s.r / r);
        return k_mag * u_o;
    };
    return k;
}

VectorObservable lrl_fixed_frame_observable(const CentralModel& model, const Vec3& u_ref) {
    if (std::holds_alternative<Micz>(model)) {
        fail(Err::ModelUnsupported, "lrl_fixed_frame_observable: the monopole model is not planar");
    }
    if (std::abs(u_ref.norm() - 1.0) > 1e-9) {
        fail(Err::NonUnitDirection, "lrl_fixed_frame_observable: u_ref must be a unit vector");
    }
    VectorObservable k;
    k.label = "K_fixed[" + model_name(model) + "]";
    k.eval = [model, u_ref](const PhaseState& s) -> Vec3 {
        const double r = s.r.norm();
        if (r <= 0.0) fail(Err::NonPositiveRadius, "lrl_fixed_frame_observable: |r| = 0");
        const Vec3 ell_vec = cross(s.r, s.p);
        const double ell = ell_vec.norm();
        if (ell <= 1e-12 * r * s.p.norm()) {
            fail(Err::ZeroAngularMomentum, "lrl_fixed_frame_observable: radial state");
        }
        const Vec3 ell_hat = ell_vec / ell;
        Vec3 u = u_ref - dot(u_ref, ell_hat) * ell_hat;
        const double un = u.norm();
        if (un < 1e-9) {
            fail(Err::NonUnitDirection,
                 "lrl_fixed_frame_observable: u_ref parallel to the orbit normal");
        }
        const double energy = hamiltonian(model, s);
        const double k_mag = lrl_magnitude(model, energy, ell, r);
        return (k_mag / un) * u;
    };
    return k;
}

LrlResult lrl_vector_via_perihelion(const CentralModel& model, const PhaseState& s0,
                                    const PerihelionOptions& options) {
    const double r0 = s0.r.norm();
    if (r0 <= 0.0) fail(Err::NonPositiveRadius, "lrl_vector_via_perihelion: |r| = 0");
    LrlResult out;
    out.energy = hamiltonian(model, s0);
    out.ell_vec = conserved_angular_momentum(model, s0);
    out.ell = out.ell_vec.norm();
    if (out.ell <= 1e-12 * r0 * s0.p.norm()) {
        fail(Err::ZeroAngularMomentum, "lrl_vector_via_perihelion: radial state");
    }

    const RminResult rm = find_rmin(model, out.energy, out.ell, r0);
    out.r_m = rm.r_m;
    if (rm.degenerate) {
        out.circular_degenerate = true;
        out.k_mag = 0.0;
        out.self_pb_coeff = 0.0;
        out.u_o = s0.r / r0;
        out.k_vec = Vec3{0.0, 0.0, 0.0};
        return out;
    }

    const std::size_t wanted = std::max<std::size_t>(options.n_perihelia, 1);

    // The initial state may itself sit on a perihelion.
    const double p_scale = std::max(s0.p.norm(), 1e-12);
    const double pr0 = dot(s0.r, s0.p) / r0;
    if (std::abs(pr0) <= 1e-10 * p_scale && radial_momentum_rate(model, s0) > 0.0) {
        TurningEvent ev;
        ev.t = s0.t;
        ev.r = r0;
        ev.theta = 0.0;
        ev.p_r = pr0;
        ev.dpr_dt = radial_momentum_rate(model, s0);
        ev.kind = TurningKind::Perihelion;
        ev.state = s0;
        out.perihelia.push_back(ev);
    }

    PhaseState s = s0;
    double t = s0.t;
    double theta_base = 0.0;
    const double t_end = s0.t + options.t_max;
    const double chunk = std::min(options.t_max, 50.0);
    while (out.perihelia.size() < wanted && t < t_end) {
        const double t1 = std::min(t + chunk, t_end);
        Trajectory traj = integrate(model, s, t, t1, options.integrate);
        if (traj.status != TrajectoryStatus::Ok) {
            fail(Err::StepFailure, "lrl_vector_via_perihelion: integration step collapse");
        }
        for (TurningEvent ev : find_turning_points(traj)) {
            if (ev.kind != TurningKind::Perihelion) continue;
            if (!out.perihelia.empty() && ev.t <= out.perihelia.back().t + 1e-12) continue;
            ev.theta += theta_base;
            out.perihelia.push_back(ev);
            if (out.perihelia.size() >= wanted) break;
        }
        theta_base += traj.samples.back().theta;
        s = traj.samples.back().state;
        t = traj.samples.back().t;
    }
    if (out.perihelia.empty()) {
        fail(Err::NoPerihelionFound, "lrl_vector_via_perihelion: no perihelion within t_max");
    }

    const TurningEvent& first = out.perihelia.front();
    out.u_o = first.state.r / first.state.r.norm();
    out.k_mag = lrl_magnitude(model, out.energy, out.ell, r0);
    out.k_vec = out.k_mag * out.u_o;
    out.self_pb_coeff = self_pb_coefficient(model, out.energy, out.ell, r0);
    return out;
}

WRouteSeries lrl_vector_w_route(const CentralModel& model, const Trajectory& traj,
                                const TurningEvent& reference) {
    const auto nf = newtonian_form(model);
    if (!nf) {
        fail(Err::ModelUnsupported,
             "lrl_vector_w_route: needs a Newtonian central-potential model");
    }
    if (traj.samples.empty()) fail(Err::EmptyStateSample, "lrl_vector_w_route: empty trajectory");
    const double mu = nf->mu;

    const auto assemble = [&](const Vec3& r, const Vec3& p, const Vec3& w) {
        const double rn = r.norm();
        const PotentialTerms pt = nf->potential(rn);
        return cross(p, cross(r, p)) - mu * rn * pt.du * r + w;
    };

    const OdeRhs rhs = [&](double, std::span<const double> y, std::span<double> dy) {
        const Vec3 r{y[0], y[1], y[2]};
        const Vec3 p{y[3], y[4], y[5]};
        const PhaseState s{r, p, 0.0};
        const PhaseDerivative d = equations_of_motion(model, s);
        const double rn = r.norm();
        const PotentialTerms pt = nf->potential(rn);
        const double p_r = dot(r, p) / rn;
        const double ru_dd = 2.0 * pt.du + rn * pt.d2u;
        const Vec3 dw = p_r * ru_dd * r;
        dy[0] = d.dr.x; dy[1] = d.dr.y; dy[2] = d.dr.z;
        dy[3] = d.dp.x; dy[4] = d.dp.y; dy[5] = d.dp.z;
        dy[6] = dw.x;   dy[7] = dw.y;   dy[8] = dw.z;
    };

    WRouteSeries out;
    out.k_ref = assemble(reference.state.r, reference.state.p, Vec3{0.0, 0.0, 0.0});
    const double k_scale = std::max(out.k_ref.norm(), 1e-12);

    const Vec3 ell_vec = cross(reference.state.r, reference.state.p);
    const Vec3 ell_hat = ell_vec / ell_vec.norm();
    const Vec3 u_o = reference.state.r / reference.state.r.norm();

    const std::array<double, 9> y0 = {reference.state.r.x, reference.state.r.y,
                                      reference.state.r.z, reference.state.p.x,
                                      reference.state.p.y, reference.state.p.z,
                                      0.0, 0.0, 0.0};
    const double t_end = traj.samples.back().t;

    const OdeResult res = integrate_ode(rhs, y0, reference.t, t_end, traj.options);
    if (res.status != TrajectoryStatus::Ok) {
        fail(Err::StepFailure, "lrl_vector_w_route: integration step collapse");
    }
    for (std::size_t i = 0; i < res.t.size(); ++i) {
        const std::vector<double>& y = res.y[i];
        const Vec3 r{y[0], y[1], y[2]};
        const Vec3 p{y[3], y[4], y[5]};
        const Vec3 w{y[6], y[7], y[8]};
        if (w.norm() > 1e9 * k_scale) {
            fail(Err::QuadratureBlowup, "lrl_vector_w_route: correction term diverges");
        }
        const Vec3 k = assemble(r, p, w);
        out.t.push_back(res.t[i]);
        out.theta.push_back(signed_angle(u_o, r / r.norm(), ell_hat));
        out.w.push_back(w);
        out.k.push_back(k);
        out.max_drift_rel = std::max(out.max_drift_rel, (k - out.k_ref).norm() / k_scale);
    }
    return out;
}

Vec3 classical_kepler_lrl(const PhaseState& s, double mu, double kappa) {
    const double r = s.r.norm();
    if (r <= 0.0) fail(Err::NonPositiveRadius, "classical_kepler_lrl: |r| = 0");
    return cross(s.p, cross(s.r, s.p)) + (mu * kappa / r) * s.r;
}

Vec3 micz_lrl(const PhaseState& s, double m, double kappa, double alpha) {
    const double r = s.r.norm();
    if (r <= 0.0) fail(Err::NonPositiveRadius, "micz_lrl: |r| = 0");
    const Vec3 ell_vec = cross(s.r, s.p) - (alpha / r) * s.r;
    return cross(s.p, ell_vec) + (m * kappa / r) * s.r;
}

Vec3 pb_with_lrl(const CentralModel& model, const Observable& f, const PhaseState& s,
                 const Vec3& u_ref, const BracketConfig& cfg) {
    const double r = s.r.norm();
    const Vec3 ell_vec = cross(s.r, s.p);
    const double ell = ell_vec.norm();
    if (ell <= 0.0) fail(Err::ZeroAngularMomentum, "pb_with_lrl: radial state");
    const Vec3 ell_hat = ell_vec / ell;

    Vec3 u = u_ref - dot(u_ref, ell_hat) * ell_hat;
    const double un = u.norm();
    if (un < 1e-9) fail(Err::NonUnitDirection, "pb_with_lrl: u_ref parallel to the orbit normal");
    u = u / un;

    const double energy = hamiltonian(model, s);
    const double theta = signed_angle(u, s.r / r, ell_hat);

    const auto kmag = [&](double e, double l) { return lrl_magnitude(model, e, l, r); };
    const double k0 = kmag(energy, ell);
    const double he = 1e-6 * std::max(1.0, std::abs(energy));
    const double dk_de = (kmag(energy + he, ell) - kmag(energy - he, ell)) / (2.0 * he);
    const double l2 = ell * ell;
    const double hl = 1e-6 * l2;
    const double dk_dl2 =
        (kmag(energy, std::sqrt(l2 + hl)) - kmag(energy, std::sqrt(l2 - hl))) / (2.0 * hl);

    const double f_h = bracket(f, energy_observable(model), s, cfg);
    Observable l2_obs{"l2", [](const PhaseState& q) { return cross(q.r, q.p).norm2(); }};
    const double f_l2 = bracket(f, l2_obs, s, cfg);

    const std::array<double, 6> df = fd_gradient(f, s, cfg);
    const Vec3 df_dr{df[0], df[1], df[2]};
    const Vec3 df_dp{df[3], df[4], df[5]};
    const double p_r = dot(s.r, s.p) / r;
    const double radial_dot = r * dot(df_dr, ell_vec) + p_r * dot(df_dp, ell_vec);

    return (dk_de * f_h + dk_dl2 * f_l2) * u -
           (k0 * std::sin(theta) / (ell * ell * ell)) * radial_dot * ell_vec;
}

Vec3 dressed_vector(double f, double g, double h, const Vec3& u_o, const Vec3& ell_vec) {
    return f * u_o + g * cross(ell_vec, u_o) + h * ell_vec;
}

}  // namespace lrl
