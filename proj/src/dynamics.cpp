#include "lrl/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "lrl/rootfind.hpp"

namespace lrl {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

OdeResult integrate_ode(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
                        const IntegrateOptions& opt) {
    const std::size_t n = y0.size();
    OdeResult out;
    out.t.push_back(t0);
    out.y.emplace_back(y0.begin(), y0.end());
    if (t1 == t0) return out;

    const double dir = (t1 > t0) ? 1.0 : -1.0;
    std::vector<double> y(y0.begin(), y0.end());
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y5(n);

    auto eval = [&](double t, const std::vector<double>& yy, std::vector<double>& k) {
        rhs(t, yy, k);
        ++out.stats.rhs_evaluations;
    };

    double t = t0;
    eval(t, y, k1);

    double h = opt.h_init;
    if (h == 0.0) {
        // crude initial step from the first derivative scale
        double ynorm = 0.0, dnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            ynorm = std::max(ynorm, std::abs(y[i]));
            dnorm = std::max(dnorm, std::abs(k1[i]));
        }
        h = (dnorm > 0.0) ? 0.01 * std::max(ynorm, 1.0) / dnorm : 1e-4;
        h = std::min(h, std::abs(t1 - t0));
    }
    h = std::abs(h) * dir;

    bool fsal_valid = true;
    while (out.stats.accepted < opt.max_steps) {
        if (dir * (t - t1) >= 0.0) break;
        if (dir * (t + h - t1) > 0.0) h = t1 - t;

        const double h_min = opt.h_min_rel * std::max(1.0, std::abs(t));
        if (std::abs(h) < h_min) {
            out.status = TrajectoryStatus::StepFailure;
            break;
        }

        if (!fsal_valid) eval(t, y, k1);

        bool bad = false;
        auto stage = [&](std::vector<double>& k, double ci, auto&&... terms) {
            for (std::size_t i = 0; i < n; ++i)
                ytmp[i] = y[i] + h * (... + (terms.first * terms.second[i]));
            if (!all_finite(ytmp)) { bad = true; return; }
            eval(t + ci * h, ytmp, k);
            bad = bad || !all_finite(k);
        };

        using P = std::pair<double, const std::vector<double>&>;
        stage(k2, c2, P{a21, k1});
        if (!bad) stage(k3, c3, P{a31, k1}, P{a32, k2});
        if (!bad) stage(k4, c4, P{a41, k1}, P{a42, k2}, P{a43, k3});
        if (!bad) stage(k5, c5, P{a51, k1}, P{a52, k2}, P{a53, k3}, P{a54, k4});
        if (!bad) stage(k6, 1.0, P{a61, k1}, P{a62, k2}, P{a63, k3}, P{a64, k4}, P{a65, k5});
        if (!bad) {
            for (std::size_t i = 0; i < n; ++i)
                y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            if (!all_finite(y5)) bad = true;
        }
        if (!bad) {
            eval(t + h, y5, k7);
            bad = !all_finite(k7);
        }

        if (bad) {
            h *= 0.25;
            ++out.stats.rejected;
            fsal_valid = false;
            continue;
        }

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double ei = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i]
                                   + e7 * k7[i]);
            const double sc = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(y5[i]));
            err = std::max(err, std::abs(ei) / sc);
        }

        if (err <= 1.0) {
            t += h;
            y.swap(y5);
            k1.swap(k7);   // first-same-as-last
            fsal_valid = true;
            out.t.push_back(t);
            out.y.emplace_back(y);
            ++out.stats.accepted;
            const double grow = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(grow, 0.2, 5.0);
        } else {
            ++out.stats.rejected;
            h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
            fsal_valid = true;   // k1 still matches (t, y)
        }
    }

    if (out.status == TrajectoryStatus::Ok && dir * (t - t1) < 0.0)
        out.status = TrajectoryStatus::StepFailure;   // ran out of steps
    return out;
}

namespace {

OdeRhs model_rhs(const CentralModel& model) {
    return [&model](double, std::span<const double> y, std::span<double> dy) {
        PhaseState s;
        s.r = {y[0], y[1], y[2]};
        s.p = {y[3], y[4], y[5]};
        const PhaseDerivative d = equations_of_motion(model, s);
        dy[0] = d.dr.x; dy[1] = d.dr.y; dy[2] = d.dr.z;
        dy[3] = d.dp.x; dy[4] = d.dp.y; dy[5] = d.dp.z;
    };
}

PhaseState state_from(const std::vector<double>& y, double t) {
    PhaseState s;
    s.r = {y[0], y[1], y[2]};
    s.p = {y[3], y[4], y[5]};
    s.t = t;
    return s;
}

}  // namespace

double radial_momentum_rate(const CentralModel& model, const PhaseState& s) {
    const PhaseDerivative d = equations_of_motion(model, s);
    const double r = norm(s.r);
    const double rdot = dot(s.r, d.dr) / r;
    return (dot(d.dr, s.p) + dot(s.r, d.dp)) / r - dot(s.r, s.p) * rdot / (r * r);
}

const char* status_name(TrajectoryStatus status) {
    switch (status) {
        case TrajectoryStatus::Ok: return "Ok";
        case TrajectoryStatus::StepFailure: return "StepFailure";
        case TrajectoryStatus::ConservationFailure: return "ConservationFailure";
    }
    return "Unknown";
}

Trajectory integrate(const CentralModel& model, const PhaseState& s0, double t0, double t1,
                     const IntegrateOptions& options) {
    const std::array<double, 6> y0 = {s0.r.x, s0.r.y, s0.r.z, s0.p.x, s0.p.y, s0.p.z};
    OdeResult ode = integrate_ode(model_rhs(model), y0, t0, t1, options);

    Trajectory traj;
    traj.model = model;
    traj.stats = ode.stats;
    traj.status = ode.status;
    traj.options = options;
    traj.samples.reserve(ode.t.size());

    const Vec3 ell0 = conserved_angular_momentum(model, state_from(ode.y.front(), t0));
    const double l0 = norm(ell0);
    const Vec3 lhat = (l0 > 0.0) ? ell0 / l0 : Vec3{0.0, 0.0, 1.0};

    const double e0 = hamiltonian(model, state_from(ode.y.front(), t0));
    const double e_scale = std::max(1.0, std::abs(e0));

    double theta = 0.0;
    Vec3 prev_plane;
    for (std::size_t i = 0; i < ode.t.size(); ++i) {
        TrajectorySample smp;
        smp.t = ode.t[i];
        smp.state = state_from(ode.y[i], ode.t[i]);
        smp.r = norm(smp.state.r);
        smp.p_r = dot(smp.state.r, smp.state.p) / smp.r;
        smp.energy = hamiltonian(model, smp.state);
        smp.ell = conserved_angular_momentum(model, smp.state);

        if (std::abs(smp.energy - e0) > options.energy_tol * e_scale) {
            // Local error control cannot bound the global error through a
            // near-singular passage; everything past this point would be a
            // solution of some other initial condition.
            traj.status = TrajectoryStatus::ConservationFailure;
            break;
        }

        Vec3 plane = smp.state.r - lhat * dot(smp.state.r, lhat);
        const double pn = norm(plane);
        if (pn > 0.0) plane = plane / pn;
        if (i > 0 && pn > 0.0) theta += signed_angle(prev_plane, plane, lhat);
        smp.theta = theta;
        if (pn > 0.0) prev_plane = plane;

        traj.samples.push_back(std::move(smp));
    }
    return traj;
}

PhaseState advance(const CentralModel& model, const PhaseState& s, double t0, double t1,
                   const IntegrateOptions& options) {
    if (t1 == t0) {
        PhaseState out = s;
        out.t = t1;
        return out;
    }
    const std::array<double, 6> y0 = {s.r.x, s.r.y, s.r.z, s.p.x, s.p.y, s.p.z};
    OdeResult ode = integrate_ode(model_rhs(model), y0, t0, t1, options);
    if (ode.status != TrajectoryStatus::Ok)
        fail(Err::StepFailure, "advance: integration failed before reaching target time");
    return state_from(ode.y.back(), ode.t.back());
}

std::vector<TurningEvent> find_turning_points(const Trajectory& traj) {
    std::vector<TurningEvent> events;
    if (traj.samples.size() < 2) return events;

    double p_scale = 0.0;
    for (const auto& s : traj.samples) p_scale = std::max(p_scale, norm(s.state.p));
    const double zero_band = 1e-12 * std::max(p_scale, 1e-12);
    const double near_circular_band = 1e-12 * std::max(p_scale, 1e-12);

    const Vec3 ell0 = conserved_angular_momentum(traj.model, traj.samples.front().state);
    const Vec3 lhat = normalized(ell0);

    IntegrateOptions refine_opt = traj.options;
    refine_opt.h_init = 0.0;

    for (std::size_t i = 0; i + 1 < traj.samples.size(); ++i) {
        const auto& a = traj.samples[i];
        const auto& b = traj.samples[i + 1];
        const bool crosses = (a.p_r <= 0.0) != (b.p_r <= 0.0);
        if (!crosses) continue;
        if (std::abs(a.p_r) < zero_band && std::abs(b.p_r) < zero_band) continue;  // circular noise

        auto pr_at = [&](double t) {
            const PhaseState st = advance(traj.model, a.state, a.t, t, refine_opt);
            return dot(st.r, st.p) / norm(st.r);
        };
        const double t_star = brent(pr_at, a.t, b.t, a.p_r, b.p_r,
                                    1e-14 * std::max(1.0, std::abs(b.t)), 1e-15);

        TurningEvent ev;
        ev.state = advance(traj.model, a.state, a.t, t_star, refine_opt);
        ev.t = t_star;
        ev.r = norm(ev.state.r);
        ev.p_r = dot(ev.state.r, ev.state.p) / ev.r;
        ev.dpr_dt = radial_momentum_rate(traj.model, ev.state);

        const Vec3 pa = a.state.r - lhat * dot(a.state.r, lhat);
        const Vec3 pe = ev.state.r - lhat * dot(ev.state.r, lhat);
        ev.theta = a.theta + signed_angle(normalized(pa), normalized(pe), lhat);

        if (std::abs(ev.dpr_dt) < near_circular_band)
            ev.kind = TurningKind::NearCircular;
        else
            ev.kind = (ev.dpr_dt > 0.0) ? TurningKind::Perihelion : TurningKind::Aphelion;
        events.push_back(std::move(ev));
    }
    return events;
}

ApsidalAngle apsidal_angle(const Trajectory& traj) {
    const auto events = find_turning_points(traj);
    std::vector<double> thetas;
    for (const auto& ev : events)
        if (ev.kind == TurningKind::Perihelion) thetas.push_back(ev.theta);
    if (thetas.size() < 2)
        fail(Err::InsufficientTurningPoints,
             "apsidal angle needs at least two perihelia, found " + std::to_string(thetas.size()));

    ApsidalAngle out;
    out.cycles = thetas.size() - 1;
    double sum = 0.0;
    for (std::size_t i = 1; i < thetas.size(); ++i) sum += thetas[i] - thetas[i - 1];
    out.mean = sum / static_cast<double>(out.cycles);
    double var = 0.0;
    for (std::size_t i = 1; i < thetas.size(); ++i) {
        const double d = (thetas[i] - thetas[i - 1]) - out.mean;
        var += d * d;
    }
    out.stddev = (out.cycles > 1) ? std::sqrt(var / static_cast<double>(out.cycles - 1)) : 0.0;
    return out;
}

std::vector<DriftReport> conservation_report(const Trajectory& traj,
                                             std::span<const LabeledObservable> observables) {
    if (traj.samples.empty()) fail(Err::EmptyStateSample, "conservation report on empty trajectory");
    std::vector<DriftReport> out;
    out.reserve(observables.size());
    for (const auto& obs : observables) {
        DriftReport rep;
        rep.label = obs.label;
        rep.reference = obs.eval(traj.samples.front().state);
        double sq = 0.0;
        for (const auto& s : traj.samples) {
            const double d = obs.eval(s.state) - rep.reference;
            rep.max_abs = std::max(rep.max_abs, std::abs(d));
            sq += d * d;
        }
        rep.rms_abs = std::sqrt(sq / static_cast<double>(traj.samples.size()));
        rep.max_rel = rep.max_abs / std::max(std::abs(rep.reference), 1e-300);
        out.push_back(std::move(rep));
    }
    return out;
}

std::vector<DriftReport> conservation_report(const Trajectory& traj) {
    const CentralModel& model = traj.model;
    std::vector<LabeledObservable> obs;
    obs.push_back({"energy", [&model](const PhaseState& s) { return hamiltonian(model, s); }});
    obs.push_back({"ell_x", [&model](const PhaseState& s) { return conserved_angular_momentum(model, s).x; }});
    obs.push_back({"ell_y", [&model](const PhaseState& s) { return conserved_angular_momentum(model, s).y; }});
    obs.push_back({"ell_z", [&model](const PhaseState& s) { return conserved_angular_momentum(model, s).z; }});
    return conservation_report(traj, obs);
}

}  // namespace lrl
