#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lrl/models.hpp"

namespace lrl {

struct IntegrateOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_init = 0.0;            // 0 = choose automatically
    double h_min_rel = 1e-14;       // minimum step as fraction of max(1, |t|)
    std::size_t max_steps = 4000000;
    double energy_tol = 1e-6;       // relative energy drift that aborts sampling
};

struct IntegratorStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::size_t rhs_evaluations = 0;
};

// StepFailure: the step controller stalled below the minimum step size.
// ConservationFailure: the sampled energy drifted past options.energy_tol,
// which happens when the exact solution passes arbitrarily close to the
// singularity (plunging orbits) and no step size can follow it.
enum class TrajectoryStatus { Ok, StepFailure, ConservationFailure };

const char* status_name(TrajectoryStatus status);

struct TrajectorySample {
    double t = 0.0;
    PhaseState state;
    double r = 0.0;
    double theta = 0.0;   // unwrapped azimuth about the conserved l direction
    double p_r = 0.0;
    double energy = 0.0;
    Vec3 ell;             // conserved angular momentum vector
};

struct Trajectory {
    CentralModel model;
    std::vector<TrajectorySample> samples;
    IntegratorStats stats;
    TrajectoryStatus status = TrajectoryStatus::Ok;
    IntegrateOptions options;

    double t_begin() const { return samples.front().t; }
    double t_end() const { return samples.back().t; }
};

// Adaptive embedded Runge-Kutta 5(4) integration of the model's equations of
// motion. Samples are recorded at every accepted step. On unrecoverable step
// collapse, or once the energy drift exceeds options.energy_tol, the partial
// trajectory is returned with a non-Ok status.
Trajectory integrate(const CentralModel& model, const PhaseState& s0, double t0, double t1,
                     const IntegrateOptions& options = {});

// Re-integrates a single state to time t (used for event refinement).
PhaseState advance(const CentralModel& model, const PhaseState& s, double t0, double t1,
                   const IntegrateOptions& options = {});

// d(p_r)/dt along the flow, from the equations of motion.
double radial_momentum_rate(const CentralModel& model, const PhaseState& s);

enum class TurningKind { Perihelion, Aphelion, NearCircular };

struct TurningEvent {
    double t = 0.0;
    double r = 0.0;
    double theta = 0.0;
    double p_r = 0.0;
    double dpr_dt = 0.0;
    TurningKind kind = TurningKind::Perihelion;
    PhaseState state;
};

// Zero crossings of p_r, refined by root finding over local re-integration.
// A noise-level |p_r| band is ignored so circular orbits report no events.
std::vector<TurningEvent> find_turning_points(const Trajectory& traj);

struct ApsidalAngle {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t cycles = 0;
};

// Mean azimuth advance between successive perihelia. Throws
// InsufficientTurningPoints when fewer than two perihelia are present.
ApsidalAngle apsidal_angle(const Trajectory& traj);

struct LabeledObservable {
    std::string label;
    std::function<double(const PhaseState&)> eval;
};

struct DriftReport {
    std::string label;
    double reference = 0.0;
    double max_abs = 0.0;
    double rms_abs = 0.0;
    double max_rel = 0.0;   // relative to max(|reference|, 1e-300)
};

std::vector<DriftReport> conservation_report(const Trajectory& traj,
                                             std::span<const LabeledObservable> observables);

// Energy and angular momentum drift report for the model's own invariants.
std::vector<DriftReport> conservation_report(const Trajectory& traj);

// --- low-level stepper (exposed for the augmented systems) --------------------

using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

struct OdeResult {
    std::vector<double> t;
    std::vector<std::vector<double>> y;
    IntegratorStats stats;
    TrajectoryStatus status = TrajectoryStatus::Ok;
};

OdeResult integrate_ode(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
                        const IntegrateOptions& options);

}  // namespace lrl
