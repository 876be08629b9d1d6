#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lrl/algebra.hpp"
#include "lrl/closedform.hpp"
#include "lrl/dynamics.hpp"
#include "lrl/errors.hpp"
#include "lrl/lrl_vector.hpp"
#include "lrl/models.hpp"
#include "lrl/parallel.hpp"
#include "lrl/sampling.hpp"
#include "lrl/serialize.hpp"

namespace {

using namespace lrl;

constexpr double kPi = 3.14159265358979323846;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void emit(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    atomic_write(path, content);
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

CentralModel load_or_default(const std::string& path) {
    if (path.empty()) return KeplerCoulomb{};
    return load_model(path);
}

std::vector<PhaseState> load_sweep(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Err::InvalidConfig, "cannot open sweep file " + path);
    std::vector<PhaseState> states;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        states.push_back(parse_state_csv(line));
    }
    if (states.empty()) fail(Err::InvalidConfig, "sweep file " + path + " holds no states");
    return states;
}

Exec policy_for(int workers) {
    set_threads(workers);
    return workers > 1 ? Exec::OpenMP : Exec::Serial;
}

PhaseState plane_state(double r, double theta, double p_r, double ell) {
    const Vec3 r_hat{std::cos(theta), std::sin(theta), 0.0};
    const Vec3 t_hat{-std::sin(theta), std::cos(theta), 0.0};
    return PhaseState{r * r_hat, p_r * r_hat + (ell / r) * t_hat, 0.0};
}

Vec3 random_unit(Rng& rng) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * kPi);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return Vec3{s * std::cos(phi), s * std::sin(phi), z};
}

// Least-squares slope of log(value) against log(scale); returns the decay
// exponent p for value ~ scale^-p.
double fitted_exponent(const std::vector<double>& scale, const std::vector<double>& value) {
    const std::size_t n = scale.size();
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = std::log(scale[i]);
        const double y = std::log(std::max(value[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double dn = static_cast<double>(n);
    return -(dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

// --- closed-form dispatch -------------------------------------------------------

std::optional<VectorObservable> closed_lrl(const CentralModel& model) {
    using Ret = std::optional<VectorObservable>;
    return std::visit(
        overloaded{
            [](const KeplerCoulomb& m) -> Ret {
                return VectorObservable{
                    "kepler_lrl",
                    [m](const PhaseState& s) { return classical_kepler_lrl(s, m.mu, m.kappa); }};
            },
            [](const Micz& m) -> Ret {
                return VectorObservable{"micz_lrl", [m](const PhaseState& s) {
                                            return micz_lrl(s, m.m, m.kappa, m.alpha);
                                        }};
            },
            [](const RelCoulomb& m) -> Ret {
                return VectorObservable{
                    "relcoulomb_lrl", [m](const PhaseState& s) { return relcoulomb_lrl(m, s); }};
            },
            [](const PostNewtonian& m) -> Ret {
                return VectorObservable{"pn_lrl",
                                        [m](const PhaseState& s) { return pn_lrl(m, s); }};
            },
            [](const CustomCentral&) -> Ret { return std::nullopt; }},
        model);
}

std::function<double(double, double)> closed_ksq(const CentralModel& model) {
    using Fn = std::function<double(double, double)>;
    return std::visit(
        overloaded{
            [](const KeplerCoulomb& m) -> Fn {
                return [m](double e, double l2) {
                    return 2.0 * m.mu * e * l2 + m.mu * m.mu * m.kappa * m.kappa;
                };
            },
            [](const Micz& m) -> Fn {
                return [m](double e, double l2) {
                    return 2.0 * m.m * e * (l2 - m.alpha * m.alpha) + m.m * m.m * m.kappa * m.kappa;
                };
            },
            [](const RelCoulomb& m) -> Fn {
                return [m](double e, double l2) {
                    return (e * e - m.m * m.m) * l2 + m.m * m.m * m.kappa * m.kappa;
                };
            },
            [](const PostNewtonian& m) -> Fn {
                return [m](double e, double l2) {
                    const double k = pn_kmag(m, e, std::sqrt(l2));
                    return k * k;
                };
            },
            [](const CustomCentral&) -> Fn { return {}; }},
        model);
}

// Self-bracket coefficient as a function of E alone; set for the models whose
// coefficient is independent of l^2 (those close an exact algebra).
std::function<double(double)> closed_self_pb(const CentralModel& model) {
    using Fn = std::function<double(double)>;
    return std::visit(overloaded{[](const KeplerCoulomb& m) -> Fn {
                                     return [m](double e) { return -2.0 * m.mu * e; };
                                 },
                                 [](const RelCoulomb& m) -> Fn {
                                     return [m](double e) { return -(e * e - m.m * m.m); };
                                 },
                                 [](const auto&) -> Fn { return {}; }},
                      model);
}

// --- verify ---------------------------------------------------------------------

struct VerifyOpts {
    std::string model_path;
    std::string state_csv;
    std::string sweep_path;
    std::string out_path;
    std::string scheme = "central4";
    double fd_step = 1e-3;
    int workers = 1;
    int states = 24;
    unsigned seed = 20240811;
    bool negative_controls = false;
};

struct Suite {
    std::string name;
    double residual = 0.0;  // relative to the observable's scale
    double threshold = 0.0;
    bool expect_below = true;
    bool pass = false;
    std::size_t states = 0;
};

Suite make_suite(const std::string& name, double residual, double threshold, std::size_t n,
                 bool expect_below = true) {
    Suite s;
    s.name = name;
    s.residual = residual;
    s.threshold = threshold;
    s.expect_below = expect_below;
    s.pass = expect_below ? residual < threshold : residual > threshold;
    s.states = n;
    return s;
}

ordered_json suite_json(const Suite& s) {
    ordered_json j;
    j["name"] = s.name;
    j["residual_rel"] = s.residual;
    j["threshold"] = s.threshold;
    j["expect"] = s.expect_below ? "below" : "above";
    j["pass"] = s.pass;
    j["states"] = s.states;
    return j;
}

void clamp_energy_window(const CentralModel& model, BoundStateSpec& spec) {
    std::visit(overloaded{[&](const KeplerCoulomb& m) {
                              spec.e_hi = std::min(spec.e_hi, -0.02 * m.mu * m.kappa * m.kappa);
                          },
                          [&](const RelCoulomb& m) {
                              spec.e_hi = std::min(spec.e_hi, 0.985 * m.m);
                              spec.e_lo = std::max(spec.e_lo, 0.2 * m.m);
                          },
                          [&](const PostNewtonian& m) {
                              const double s = m.reduced_mass() * m.kappa * m.kappa;
                              spec.e_hi = std::min(spec.e_hi, -0.02 * s);
                          },
                          [](const auto&) {}},
               model);
}

BoundStateSpec verify_spec(const CentralModel& model, const VerifyOpts& o) {
    BoundStateSpec spec;
    spec.count = static_cast<std::size_t>(o.states);
    spec.seed = o.seed;
    if (!o.state_csv.empty()) {
        const PhaseState s = parse_state_csv(o.state_csv);
        const double e = hamiltonian(model, s);
        spec.e_lo = e - 0.15 * std::abs(e);
        spec.e_hi = e + 0.15 * std::abs(e);
        clamp_energy_window(model, spec);
        const double l = norm(conserved_angular_momentum(model, s));
        const double frac = l / ell_max(model, e, std::max(norm(s.r), 1e-6));
        spec.ell_lo_frac = std::clamp(frac - 0.15, 0.10, 0.90);
        spec.ell_hi_frac = std::clamp(frac + 0.10, spec.ell_lo_frac + 0.02, 0.95);
        return spec;
    }
    std::visit(overloaded{[&](const KeplerCoulomb& m) {
                              const double s = m.mu * m.kappa * m.kappa;
                              spec.e_lo = -0.45 * s;
                              spec.e_hi = -0.12 * s;
                          },
                          [&](const RelCoulomb& m) {
                              spec.e_lo = 0.85 * m.m;
                              spec.e_hi = 0.97 * m.m;
                              spec.ell_lo_frac = 0.60;  // keeps l above the propeller window
                              spec.ell_hi_frac = 0.92;
                          },
                          [&](const PostNewtonian& m) {
                              const double s = m.reduced_mass() * m.kappa * m.kappa;
                              spec.e_lo = -0.40 * s;
                              spec.e_hi = -0.10 * s;
                              spec.ell_lo_frac = 0.40;
                          },
                          [&](const Micz&) {},
                          [&](const CustomCentral&) {
                              fail(Err::InvalidConfig,
                                   "custom potential: set the energy window with --state or --sweep");
                          }},
               model);
    return spec;
}

void identity_suites(const CentralModel& model, std::span<const PhaseState> states,
                     const BracketConfig& cfg, Exec pol, std::vector<Suite>& suites) {
    if (const auto closed = closed_lrl(model)) {
        const BracketResidual rot = verify_rotational(model, *closed, states, cfg, pol);
        suites.push_back(make_suite("rotation_closed_form", rot.max_rel(), 1e-6, states.size()));
        const BracketResidual self =
            verify_prop2(model, *closed, closed_ksq(model), states, cfg, pol);
        suites.push_back(
            make_suite("self_bracket_closed_form", self.max_rel(), 1e-6, states.size()));
    }
    if (!std::holds_alternative<Micz>(model)) {
        const VectorObservable k = lrl_observable(model);
        const BracketResidual rot = verify_rotational(model, k, states, cfg, pol);
        suites.push_back(make_suite("rotation_constructed", rot.max_rel(), 1e-4, states.size()));
        const auto ksq = [&model](double e, double l2) {
            const double km = lrl_magnitude(model, e, std::sqrt(l2));
            return km * km;
        };
        const BracketResidual self = verify_prop2(model, k, ksq, states, cfg, pol);
        suites.push_back(
            make_suite("self_bracket_constructed", self.max_rel(), 1e-4, states.size()));
    }
}

// o(4) structure checks for the models whose self-bracket coefficient depends
// on the energy alone: normalized brackets, Casimir preservation, the
// circular-orbit ladder, and orbit realization round trips.
void algebra_suites(const CentralModel& model, std::span<const PhaseState> states,
                    const BracketConfig& cfg, Exec pol, unsigned seed,
                    std::vector<Suite>& suites) {
    const VectorObservable k_closed = *closed_lrl(model);
    const auto coeff = closed_self_pb(model);
    // Orbits below this angular momentum have no turning point (the
    // relativistic Coulomb attraction defeats the centrifugal barrier), so
    // transformed pairs that land under it cannot be realized.
    const double ell_floor = std::visit(
        overloaded{[](const RelCoulomb& m) { return 1.05 * std::abs(m.kappa); },
                   [](const auto&) { return 0.0; }},
        model);

    const VectorObservable a_obs{
        "A", [&, k_closed](const PhaseState& s) {
            const double e = hamiltonian(model, s);
            return k_closed.eval(s) / std::sqrt(std::abs(coeff(e)));
        }};

    const BracketResidual pbael = verify_rotational(model, a_obs, states, cfg, pol);
    suites.push_back(make_suite("algebra_bracket_l_A", pbael.max_rel(), 1e-4, states.size()));

    const std::vector<Vec3> lambdas = self_bracket_lambdas(a_obs, states, cfg, pol);
    double worst_aa = 0.0, scale_aa = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const Vec3 lv = conserved_angular_momentum(model, states[i]);
        worst_aa = std::max(worst_aa, norm(lambdas[i] - lv));
        scale_aa = std::max(scale_aa, norm(lv));
    }
    suites.push_back(make_suite("algebra_bracket_A_A", worst_aa / scale_aa, 1e-4, states.size()));

    Rng rng(seed ^ 0x9E3779B9u);
    double worst_shell = 0.0, worst_casimir = 0.0, worst_rt = 0.0, worst_dir = 0.0;
    std::size_t realized = 0;
    for (const PhaseState& s : states) {
        const double e = hamiltonian(model, s);
        const CanonicalPair pair =
            canonicalize(k_closed.eval(s), conserved_angular_momentum(model, s), coeff(e));
        const double lmax = ell_max(model, e, std::max(norm(s.r), 1e-6));
        worst_shell = std::max(worst_shell, std::abs(pair.c1 - lmax * lmax) / (lmax * lmax));

        const Vec3 axis = random_unit(rng);
        const double chi = rng.uniform(0.25, 1.1);
        const CanonicalPair moved = lrl_transform(pair, axis, chi);
        const double cscale = std::max(pair.c1, 1e-300);
        worst_casimir = std::max({worst_casimir, std::abs(moved.c1 - pair.c1) / cscale,
                                  std::abs(moved.c2 - pair.c2) / cscale});

        const CanonicalPair back = lrl_transform(moved, axis, -chi);
        worst_rt = std::max(worst_rt, (norm(back.a - pair.a) + norm(back.ell - pair.ell)) /
                                          std::sqrt(cscale));

        const double lmoved = norm(moved.ell);
        if (lmoved > std::max(0.25 * lmax, ell_floor) && lmoved < 0.995 * lmax &&
            norm(moved.a) > 1e-6 * std::sqrt(cscale)) {
            const PhaseState realizedState =
                realize_transformed_orbit(model, e, moved, std::max(norm(s.r), 1e-6));
            const Vec3 k2 = k_closed.eval(realizedState);
            worst_dir = std::max(worst_dir, norm(normalized(k2) - normalized(moved.a)));
            ++realized;
        }
    }
    suites.push_back(make_suite("casimir_energy_shell", worst_shell, 1e-8, states.size()));
    suites.push_back(make_suite("casimir_transform_drift", worst_casimir, 1e-10, states.size()));
    suites.push_back(make_suite("transform_roundtrip", worst_rt, 1e-12, states.size()));
    suites.push_back(make_suite("realized_orbit_direction", worst_dir, 1e-6, realized));

    double worst_ladder = 0.0;
    const std::size_t n_energy = std::min<std::size_t>(states.size(), 3);
    for (std::size_t i = 0; i < n_energy; ++i) {
        const double e = hamiltonian(model, states[i]);
        const double lmax = ell_max(model, e, std::max(norm(states[i].r), 1e-6));
        CanonicalPair circ;
        circ.a = Vec3{0.0, 0.0, 0.0};
        circ.ell = Vec3{0.0, 0.0, lmax};
        circ.eta = 1;
        circ.c1 = lmax * lmax;
        circ.c2 = 0.0;
        for (const double chi : {0.3, 0.7, 1.1}) {
            const CanonicalPair t = lrl_transform(circ, Vec3{1.0, 0.0, 0.0}, chi);
            const double target = std::sqrt(std::max(0.0, lmax * lmax - norm2(t.ell)));
            worst_ladder = std::max(worst_ladder, std::abs(norm(t.a) - target) / lmax);
        }
    }
    suites.push_back(make_suite("circular_start_ladder", worst_ladder, 1e-8, n_energy));
}

void micz_suites(const Micz& mm, const CentralModel& model,
                 std::span<const PhaseState> states, const BracketConfig& cfg, Exec pol,
                 std::vector<Suite>& suites) {
    const std::size_t n = states.size();
    std::vector<double> ell_drift(n), cone(n), k_drift(n), kdotl(n), ksq(n);
    for_each_index(n, pol, [&](std::size_t i) {
        const PhaseState& s0 = states[i];
        const double e0 = hamiltonian(model, s0);
        const Vec3 l0 = conserved_angular_momentum(model, s0);
        const double ln = norm(l0);
        const Vec3 k0 = micz_lrl(s0, mm.m, mm.kappa, mm.alpha);
        const double kscale = std::max(norm(k0), 1e-300);
        const double ksq_expected =
            2.0 * mm.m * e0 * (ln * ln - mm.alpha * mm.alpha) + mm.m * mm.m * mm.kappa * mm.kappa;
        const double kl_expected = -mm.m * mm.alpha * mm.kappa;

        const Trajectory traj = integrate(model, s0, 0.0, 60.0, IntegrateOptions{1e-12, 1e-14});
        double del = 0.0, dcone = 0.0, dk = 0.0, dkl = 0.0, dksq = 0.0;
        for (const TrajectorySample& smp : traj.samples) {
            const Vec3 lv = smp.ell;
            del = std::max(del, norm(lv - l0) / ln);
            dcone = std::max(dcone, std::abs(dot(smp.state.r / smp.r, lv / norm(lv)) +
                                             mm.alpha / norm(lv)));
            const Vec3 kv = micz_lrl(smp.state, mm.m, mm.kappa, mm.alpha);
            dk = std::max(dk, norm(kv - k0) / kscale);
            dkl = std::max(dkl, std::abs(dot(kv, lv) - kl_expected) / std::abs(kl_expected));
            dksq = std::max(dksq, std::abs(norm2(kv) - ksq_expected) / std::abs(ksq_expected));
        }
        ell_drift[i] = del;
        cone[i] = dcone;
        k_drift[i] = dk;
        kdotl[i] = dkl;
        ksq[i] = dksq;
    });
    const auto worst = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end());
    };
    suites.push_back(make_suite("monopole_ell_conservation", worst(ell_drift), 1e-8, n));
    suites.push_back(make_suite("monopole_cone_invariant", worst(cone), 1e-8, n));
    suites.push_back(make_suite("monopole_k_constancy", worst(k_drift), 1e-8, n));
    suites.push_back(make_suite("monopole_k_dot_ell", worst(kdotl), 1e-12, n));
    suites.push_back(make_suite("monopole_k_squared", worst(ksq), 1e-8, n));

    identity_suites(model, states, cfg, pol, suites);
}

// Observables that must FAIL the identities: a component permutation is not a
// vector under rotations, and an inflated magnitude handle breaks the
// self-bracket match.
void control_suites(const CentralModel& model, std::span<const PhaseState> states,
                    const BracketConfig& cfg, Exec pol, std::vector<Suite>& suites) {
    const VectorObservable permuted{
        "permuted_position", [](const PhaseState& s) { return Vec3{s.r.y, s.r.z, s.r.x}; }};
    const BracketResidual rot = verify_rotational(model, permuted, states, cfg, pol);
    suites.push_back(
        make_suite("control_rotation_permuted", rot.max_rel(), 0.1, states.size(), false));

    VectorObservable base;
    std::function<double(double, double)> ksq = closed_ksq(model);
    if (const auto closed = closed_lrl(model)) {
        base = *closed;
    } else {
        base = lrl_observable(model);
        ksq = [&model](double e, double l2) {
            const double km = lrl_magnitude(model, e, std::sqrt(l2));
            return km * km;
        };
    }
    const auto inflated = [ksq](double e, double l2) { return 1.07 * ksq(e, l2); };
    const BracketResidual self = verify_prop2(model, base, inflated, states, cfg, pol);
    suites.push_back(
        make_suite("control_inflated_magnitude", self.max_rel(), 1e-3, states.size(), false));
}

int cmd_verify(const VerifyOpts& o) {
    const CentralModel model = load_or_default(o.model_path);
    const Exec pol = policy_for(o.workers);
    BracketConfig cfg = bracket_config_for(
        model, o.scheme == "central2" ? FdScheme::Central2 : FdScheme::Central4);
    cfg.step = o.fd_step;

    std::vector<PhaseState> states;
    if (!o.sweep_path.empty()) {
        states = load_sweep(o.sweep_path);
    } else if (const auto* mm = std::get_if<Micz>(&model)) {
        states = sample_monopole_states(*mm, static_cast<std::size_t>(o.states), o.seed);
    } else {
        states = sample_bound_states(model, verify_spec(model, o));
    }

    std::vector<Suite> suites;
    if (const auto* mm = std::get_if<Micz>(&model)) {
        micz_suites(*mm, model, states, cfg, pol, suites);
    } else {
        identity_suites(model, states, cfg, pol, suites);
        if (closed_self_pb(model)) algebra_suites(model, states, cfg, pol, o.seed, suites);
    }
    if (o.negative_controls) control_suites(model, states, cfg, pol, suites);

    bool all_pass = true;
    ordered_json arr = ordered_json::array();
    for (const Suite& s : suites) {
        all_pass = all_pass && s.pass;
        arr.push_back(suite_json(s));
    }

    ordered_json j;
    j["schema"] = 1;
    j["command"] = "verify";
    j["model"] = model_to_json(model);
    j["states"] = states.size();
    j["seed"] = o.seed;
    j["workers"] = o.workers;
    j["fd"] = ordered_json{{"scheme", o.scheme}, {"step", o.fd_step}};
    j["suites"] = arr;
    j["all_pass"] = all_pass;
    emit(o.out_path, dump(j));

    if (!all_pass) {
        std::cerr << "verify: at least one suite is out of tolerance\n";
        return 3;
    }
    return 0;
}

// --- simulate -------------------------------------------------------------------

struct SimulateOpts {
    std::string model_path;
    std::string state_csv;
    std::string out_path;
    std::string report_path;
    double tmax = 100.0;
    double tol = 1e-10;
};

int cmd_simulate(const SimulateOpts& o) {
    const CentralModel model = load_or_default(o.model_path);
    const PhaseState s0 = parse_state_csv(o.state_csv);
    IntegrateOptions io;
    io.rel_tol = o.tol;
    io.abs_tol = o.tol * 1e-2;

    const Trajectory traj = integrate(model, s0, 0.0, o.tmax, io);
    emit(o.out_path, trajectory_csv(traj));

    ordered_json j;
    j["schema"] = 1;
    j["command"] = "simulate";
    j["model"] = model_to_json(model);
    j["t_requested"] = o.tmax;
    j["t_reached"] = traj.t_end();
    j["status"] = status_name(traj.status);
    j["samples"] = traj.samples.size();
    j["stats"] = ordered_json{{"accepted", traj.stats.accepted},
                              {"rejected", traj.stats.rejected},
                              {"rhs_evaluations", traj.stats.rhs_evaluations}};
    ordered_json cons = ordered_json::array();
    for (const DriftReport& rep : conservation_report(traj)) cons.push_back(to_json(rep));
    j["conservation"] = cons;
    emit(o.report_path, dump(j));

    if (traj.status != TrajectoryStatus::Ok) {
        std::cerr << "numerical failure: " << status_name(traj.status) << " at t = "
                  << traj.t_end() << "\n";
        return 3;
    }
    return 0;
}

// --- lrl ------------------------------------------------------------------------

struct LrlOpts {
    std::string model_path;
    std::string state_csv;
    std::string sweep_path;
    std::string out_path;
    std::string series_path;
    std::string route = "perihelion";
    double tmax = 400.0;
    double tol = 1e-12;
    std::size_t n_peri = 1;
    int workers = 1;
};

ordered_json lrl_one(const CentralModel& model, const PhaseState& s0, const LrlOpts& o,
                     bool allow_series) {
    if (const auto* mm = std::get_if<Micz>(&model)) {
        if (o.route != "perihelion") {
            fail(Err::ModelUnsupported, "lrl: the monopole model has no W route");
        }
        const double e = hamiltonian(model, s0);
        const Vec3 lv = conserved_angular_momentum(model, s0);
        const Vec3 kv = micz_lrl(s0, mm->m, mm->kappa, mm->alpha);
        ordered_json j;
        j["E"] = e;
        j["l"] = norm(lv);
        j["r_m"] = find_rmin(model, e, norm(lv), std::max(norm(s0.r), 1e-6)).r_m;
        j["K"] = norm(kv);
        j["self_pb_coeff"] = -2.0 * mm->m * e;
        j["u_o"] = to_json(normalized(kv));
        j["K_vec"] = to_json(kv);
        j["l_vec"] = to_json(lv);
        j["circular_degenerate"] = false;
        j["perihelia"] = ordered_json::array();
        j["note"] = "monopole closed form";
        return j;
    }

    PerihelionOptions po;
    po.t_max = o.tmax;
    po.n_perihelia = o.n_peri;
    po.integrate = IntegrateOptions{o.tol, o.tol * 1e-2};
    const LrlResult res = lrl_vector_via_perihelion(model, s0, po);
    ordered_json j = to_json(res);
    if (res.circular_degenerate) {
        j["note"] = "CircularDegenerate";
        return j;
    }

    if (o.route == "w" || o.route == "both") {
        const Trajectory traj = integrate(model, s0, s0.t, s0.t + o.tmax, po.integrate);
        const WRouteSeries series = lrl_vector_w_route(model, traj, res.perihelia.front());
        ordered_json w;
        w["K_ref"] = to_json(series.k_ref);
        w["max_drift_rel"] = series.max_drift_rel;
        w["samples"] = series.t.size();
        j["w_route"] = w;
        if (o.route == "both") {
            double diff = 0.0;
            for (int i = 0; i < 3; ++i) {
                diff = std::max(diff, std::abs(series.k_ref[i] - res.k_vec[i]));
            }
            const double scale = std::max(norm(res.k_vec), 1e-300);
            ordered_json agree;
            agree["max_component_diff"] = diff;
            agree["scale"] = scale;
            agree["rel"] = diff / scale;
            j["route_agreement"] = agree;
        }
        if (allow_series && !o.series_path.empty()) emit(o.series_path, w_route_csv(series));
    }
    return j;
}

int cmd_lrl(const LrlOpts& o) {
    const CentralModel model = load_or_default(o.model_path);
    const Exec pol = policy_for(o.workers);

    ordered_json j;
    j["schema"] = 1;
    j["command"] = "lrl";
    j["model"] = model_to_json(model);
    j["route"] = o.route;
    if (!o.sweep_path.empty()) {
        if (!o.series_path.empty()) fail(Err::InvalidConfig, "lrl: --series needs a single --state");
        const std::vector<PhaseState> states = load_sweep(o.sweep_path);
        std::vector<ordered_json> items(states.size());
        for_each_index(states.size(), pol,
                       [&](std::size_t i) { items[i] = lrl_one(model, states[i], o, false); });
        ordered_json arr = ordered_json::array();
        for (ordered_json& item : items) arr.push_back(std::move(item));
        j["results"] = arr;
    } else {
        if (o.state_csv.empty()) fail(Err::InvalidConfig, "lrl: provide --state or --sweep");
        j["result"] = lrl_one(model, parse_state_csv(o.state_csv), o, true);
    }
    emit(o.out_path, dump(j));
    return 0;
}

// --- closedform -----------------------------------------------------------------

struct ClosedformOpts {
    std::string model_path;
    std::string state_csv;
    std::string out_path;
    std::string report_path;
    std::string regime;
    std::vector<double> c_scan;
    double thetamax = 0.0;
    double tmax = 500.0;
    double tol = 1e-12;
    int samples = 512;
    int workers = 1;
};

std::string orbit_csv(const std::vector<std::array<double, 6>>& rows) {
    std::string out = "theta,r,p_r,Kx,Ky,Kz\n";
    for (const auto& row : rows) {
        out += fmt17(row[0]);
        for (int i = 1; i < 6; ++i) {
            out += ',';
            out += fmt17(row[i]);
        }
        out += '\n';
    }
    return out;
}

struct CheckList {
    ordered_json items = ordered_json::array();
    bool all_pass = true;

    void add(const std::string& name, double value, double threshold) {
        const bool pass = value < threshold;
        all_pass = all_pass && pass;
        ordered_json j;
        j["name"] = name;
        j["value"] = value;
        j["threshold"] = threshold;
        j["pass"] = pass;
        items.push_back(j);
    }
};

// The closed-form vector reconstructs the azimuth from (r, sign p_r), which is
// single-valued only between aphelion passages; there it jumps by exactly the
// apsidal angle. Constancy is therefore measured per branch segment, and the
// jump between consecutive segments is compared against a rotation by the
// apsidal angle about l_hat. Samples with |p_r| under a floor are skipped in
// the drift: dtheta/dr diverges at the apsides and amplifies integrator noise.
struct ConstancyReport {
    double within = 0.0;
    double jump = 0.0;
    double mag = 0.0;
    std::size_t segments = 0;
};

ConstancyReport branch_constancy(const Trajectory& traj,
                                 const std::function<Vec3(const PhaseState&)>& kfn,
                                 const Vec3& l_hat, double apsidal_full,
                                 const std::function<bool(const TrajectorySample&)>& keep,
                                 double pr_floor_frac = 0.01) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        if (keep(traj.samples[i])) idx.push_back(i);
    }
    ConstancyReport rep;
    if (idx.empty()) return rep;

    std::vector<Vec3> kv(idx.size());
    double pr_max = 0.0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        kv[j] = kfn(traj.samples[idx[j]].state);
        pr_max = std::max(pr_max, std::abs(traj.samples[idx[j]].p_r));
    }
    const double k0 = std::max(norm(kv.front()), 1e-300);
    const double floor = pr_floor_frac * pr_max;

    std::vector<std::size_t> seg_begin{0};
    for (std::size_t j = 1; j < idx.size(); ++j) {
        if (traj.samples[idx[j - 1]].p_r > 0.0 && traj.samples[idx[j]].p_r <= 0.0) {
            seg_begin.push_back(j);
        }
    }
    seg_begin.push_back(idx.size());
    rep.segments = seg_begin.size() - 1;

    std::vector<Vec3> refs;
    for (std::size_t s = 0; s + 1 < seg_begin.size(); ++s) {
        std::size_t ref = seg_begin[s];
        for (std::size_t j = seg_begin[s]; j < seg_begin[s + 1]; ++j) {
            if (std::abs(traj.samples[idx[j]].p_r) > std::abs(traj.samples[idx[ref]].p_r)) {
                ref = j;
            }
        }
        refs.push_back(kv[ref]);
        for (std::size_t j = seg_begin[s]; j < seg_begin[s + 1]; ++j) {
            rep.mag = std::max(rep.mag, std::abs(norm(kv[j]) - k0) / k0);
            if (std::abs(traj.samples[idx[j]].p_r) < floor) continue;
            rep.within = std::max(rep.within, norm(kv[j] - kv[ref]) / k0);
        }
    }
    for (std::size_t s = 0; s + 1 < refs.size(); ++s) {
        const Vec3 expected = rotate_about(l_hat, apsidal_full, normalized(refs[s]));
        rep.jump = std::max(rep.jump, norm(normalized(refs[s + 1]) - expected));
    }
    return rep;
}

int closedform_relcoulomb(const RelCoulomb& mm, const CentralModel& model,
                          const ClosedformOpts& o) {
    const PhaseState s0 = parse_state_csv(o.state_csv);
    const double energy = hamiltonian(model, s0);
    const double ell_state = norm(conserved_angular_momentum(model, s0));
    const CoulombRegime regime = classify(mm, ell_state);
    const std::string rname = regime == CoulombRegime::Ordinary    ? "ordinary"
                              : regime == CoulombRegime::Critical ? "critical"
                                                                   : "propeller";
    if (!o.regime.empty() && o.regime != rname) {
        std::cerr << "regime mismatch: l = " << ell_state << " with |kappa| = "
                  << std::abs(mm.kappa) << " is the " << rname << " regime, not " << o.regime
                  << "\n";
        return 2;
    }
    const double ell = regime == CoulombRegime::Critical ? std::abs(mm.kappa) : ell_state;
    const double kap = mm.kappa;

    ordered_json rep;
    rep["schema"] = 1;
    rep["command"] = "closedform";
    rep["model"] = model_to_json(model);
    rep["regime"] = rname;
    rep["E"] = energy;
    rep["l"] = ell_state;

    const double k_cf = relcoulomb_kmag(mm, energy, ell);
    const double k_eff = regime == CoulombRegime::Critical ? kap * energy : k_cf;

    // Closed-form arc span. The arc solves the squared radial equation
    // (E - kappa/r)^2 = m^2 + p_r^2 + l^2/r^2; it can be integrated here only
    // when it lies on the positive square root, the branch this Hamiltonian
    // realizes. The sub-critical attractive arc sits on the negative root
    // (E - kappa/r < 0 along it), where every positive-root orbit plunges.
    double lo = 0.0, hi = o.thetamax;
    bool have_branch = true;
    bool integrable = true;
    if (regime == CoulombRegime::Ordinary) {
        if (hi <= 0.0) hi = 2.0 * relcoulomb_apsidal(mm, ell);
    } else if (regime == CoulombRegime::Critical) {
        if (!(energy > 0.0 && energy < mm.m)) {
            have_branch = false;
            integrable = false;
            rep["note"] = "no apsis at l = |kappa| outside 0 < E < m: the orbit plunges";
            hi = lo;
        } else if (hi <= 0.0) {
            hi = 6.0 * kPi;
        }
    } else {
        const double dl = std::sqrt(kap * kap / (ell * ell) - 1.0);
        const double arg = energy * kap / k_cf;
        if (arg <= 1.0) {
            have_branch = false;
            integrable = false;
            rep["note"] = "no turning point at this (E, l): the orbit plunges";
            hi = lo;
        } else {
            const double theta_star = std::acosh(arg) / dl;
            const double span = hi > 0.0 ? std::min(hi, 1.94 * theta_star) : 1.94 * theta_star;
            lo = -span / 2.0;
            hi = span / 2.0;
            const double r_m = relcoulomb_rmin(mm, energy, ell);
            rep["r_m"] = r_m;
            rep["theta_asymptote"] = theta_star;
            integrable = energy - kap / r_m > 0.0;
            if (!integrable) {
                rep["note"] =
                    "outer branch on the negative root of (E - kappa/r)^2: checked against "
                    "the orbit equation, not against integration";
            }
        }
    }

    const auto pr_closed = [&](double theta) {
        switch (regime) {
            case CoulombRegime::Ordinary: {
                const double gamma = std::sqrt(1.0 - kap * kap / (ell * ell));
                return ell * k_cf * gamma * std::sin(gamma * theta) / (ell * ell - kap * kap);
            }
            case CoulombRegime::Critical:
                return -energy * theta;
            case CoulombRegime::Propeller: {
                const double dl = std::sqrt(kap * kap / (ell * ell) - 1.0);
                return ell * k_cf * dl * std::sinh(dl * theta) / (kap * kap - ell * ell);
            }
        }
        return 0.0;
    };
    const auto k_sweep = [&](double r, double p_r, double theta) {
        const Vec3 r_hat{std::cos(theta), std::sin(theta), 0.0};
        const double theta_rec = relcoulomb_theta(mm, r, p_r, energy, ell);
        return k_eff * rotate_about(Vec3{0.0, 0.0, 1.0}, -theta_rec, r_hat);
    };

    std::vector<std::array<double, 6>> rows;
    const int n = std::max(o.samples, 2);
    for (int i = 0; i < n && hi > lo; ++i) {
        const double theta = lo + (hi - lo) * i / (n - 1);
        double r;
        try {
            r = relcoulomb_orbit_r(mm, energy, ell, theta);
        } catch (const Error&) {
            continue;
        }
        const double p_r = pr_closed(theta);
        const Vec3 kv = k_sweep(r, p_r, theta);
        rows.push_back(std::array<double, 6>{theta, r, p_r, kv.x, kv.y, kv.z});
    }
    emit(o.out_path, orbit_csv(rows));

    CheckList checks;

    // The rows must satisfy the squared radial equation rewritten for the
    // orbit, (p_r/l)^2 + (1 - kappa^2/l^2)/r^2 + 2 kappa E/(l^2 r), equal to
    // (E^2 - m^2)/l^2. Checked scale-free, term against term.
    if (!rows.empty()) {
        double worst = 0.0;
        for (const auto& row : rows) {
            const double u = 1.0 / row[1];
            const double t1 = row[2] * row[2] / (ell * ell);
            const double t2 = (1.0 - kap * kap / (ell * ell)) * u * u;
            const double t3 = 2.0 * kap * energy * u / (ell * ell);
            const double t4 = (energy * energy - mm.m * mm.m) / (ell * ell);
            const double scale =
                std::abs(t1) + std::abs(t2) + std::abs(t3) + std::abs(t4) + 1e-300;
            worst = std::max(worst, std::abs(t1 + t2 + t3 - t4) / scale);
        }
        checks.add("orbit_equation_residual", worst, 1e-10);
    }

    IntegrateOptions io;
    io.rel_tol = o.tol;
    io.abs_tol = o.tol * 1e-2;
    const auto k_of = [&](const PhaseState& st) { return relcoulomb_lrl(mm, st); };

    if (have_branch && !integrable) {
        // No trajectory realizes the arc; verify instead that the azimuth
        // reconstruction from (r, sign p_r) sends every row back to the same
        // constant vector.
        double worst = 0.0;
        const Vec3 k_expected{k_eff, 0.0, 0.0};
        for (const auto& row : rows) {
            const Vec3 kv{row[3], row[4], row[5]};
            worst = std::max(worst, norm(kv - k_expected) / std::abs(k_eff));
        }
        checks.add("k_reconstruction_const", worst, 1e-7);
    } else if (integrable && regime == CoulombRegime::Critical) {
        const double r0 = relcoulomb_orbit_r(mm, energy, ell, 0.0);
        const PhaseState start = plane_state(r0, 0.0, 0.0, ell);
        const Trajectory traj = integrate(model, start, 0.0, o.tmax, io);
        rep["collapse"] = traj.status != TrajectoryStatus::Ok;
        rep["t_last"] = traj.t_end();
        double dr = 0.0;
        std::size_t compared = 0;
        for (const TrajectorySample& smp : traj.samples) {
            if (smp.r < r0 / 20.0) continue;
            double r_cf;
            try {
                r_cf = relcoulomb_orbit_r(mm, energy, ell, smp.theta);
            } catch (const Error&) {
                continue;
            }
            dr = std::max(dr, std::abs(r_cf - smp.r) / r_cf);
            ++compared;
        }
        rep["compared_samples"] = compared;
        const Vec3 l_hat = normalized(conserved_angular_momentum(model, start));
        const ConstancyReport cr = branch_constancy(
            traj, k_of, l_hat, 0.0,
            [&](const TrajectorySample& smp) { return smp.r >= r0 / 20.0; });
        rep["k_segments"] = cr.segments;
        checks.add("orbit_r_max_rel_diff", dr, 1e-6);
        checks.add("k_constancy_segment_rel", cr.within, 1e-6);
        checks.add("kmag_constancy_rel", cr.mag, 1e-8);
    } else if (integrable) {
        const double r_m = find_rmin(model, energy, ell, std::max(norm(s0.r), 1e-6)).r_m;
        const PhaseState start = plane_state(r_m, 0.0, 0.0, ell);
        const Trajectory traj = integrate(model, start, 0.0, o.tmax, io);
        rep["trajectory_status"] = status_name(traj.status);
        double dr_abs = 0.0, dr_rel = 0.0;
        std::size_t compared = 0;
        for (const TrajectorySample& smp : traj.samples) {
            double r_cf;
            try {
                r_cf = relcoulomb_orbit_r(mm, energy, ell, smp.theta);
            } catch (const Error&) {
                continue;
            }
            dr_abs = std::max(dr_abs, std::abs(r_cf - smp.r));
            dr_rel = std::max(dr_rel, std::abs(r_cf - smp.r) / r_cf);
            ++compared;
        }
        rep["compared_samples"] = compared;
        const Vec3 l_hat = normalized(conserved_angular_momentum(model, start));
        const bool precessing = regime == CoulombRegime::Ordinary;
        const ConstancyReport cr = branch_constancy(
            traj, k_of, l_hat, precessing ? relcoulomb_apsidal(mm, ell) : 0.0,
            [](const TrajectorySample&) { return true; });
        rep["k_segments"] = cr.segments;
        if (precessing) {
            checks.add("orbit_r_max_abs_diff", dr_abs, 1e-6);
        } else {
            checks.add("orbit_r_max_rel_diff", dr_rel, 1e-6);
        }
        checks.add("k_constancy_segment_rel", cr.within, 1e-6);
        if (precessing && cr.segments > 1) checks.add("k_branch_jump_dir", cr.jump, 1e-6);
        checks.add("kmag_constancy_rel", cr.mag, 1e-8);
        checks.add("kmag_rel_diff",
                   std::abs(lrl_magnitude(model, energy, ell, r_m) - k_cf) / k_cf, 1e-10);
        const double pb_cf = relcoulomb_self_pb(mm, energy);
        checks.add("self_pb_rel_diff",
                   std::abs(self_pb_coefficient(model, energy, ell, r_m) - pb_cf) /
                       std::abs(pb_cf),
                   1e-4);
        if (precessing) {
            try {
                const ApsidalAngle aps = apsidal_angle(traj);
                rep["apsidal_cycles"] = aps.cycles;
                checks.add("apsidal_angle_abs_diff",
                           std::abs(aps.mean - relcoulomb_apsidal(mm, ell)), 1e-4);
            } catch (const Error&) {
                rep["apsidal_note"] = "fewer than two perihelia in the window";
            }
        }
    }

    rep["checks"] = checks.items;
    rep["all_pass"] = checks.all_pass;
    emit(o.report_path, dump(rep));
    if (!checks.all_pass) {
        std::cerr << "closedform: at least one comparison is out of tolerance\n";
        return 3;
    }
    return 0;
}

int closedform_pn(const PostNewtonian& pm, const CentralModel& model, const ClosedformOpts& o) {
    const PhaseState s0 = parse_state_csv(o.state_csv);
    const double energy = hamiltonian(model, s0);
    const double ell = norm(conserved_angular_momentum(model, s0));
    const PnCoefficients pc = pn_coefficients(pm, energy, ell);
    const double c4 = std::pow(pm.c, 4);

    ordered_json rep;
    rep["schema"] = 1;
    rep["command"] = "closedform";
    rep["model"] = model_to_json(model);
    rep["E"] = energy;
    rep["l"] = ell;
    rep["delta"] = pc.delta;
    rep["u_o"] = pc.u_o;
    rep["B"] = pc.b;

    const double apsidal_cf = 2.0 * kPi / (1.0 - pc.delta);
    double span = o.thetamax > 0.0 ? o.thetamax : 2.0 * apsidal_cf;
    std::vector<std::array<double, 6>> rows;
    const int n = std::max(o.samples, 2);
    for (int i = 0; i < n; ++i) {
        const double theta = span * i / (n - 1);
        double r;
        try {
            r = pn_orbit_r(pm, energy, ell, theta);
        } catch (const Error&) {
            continue;
        }
        const double p_r = pn_pr(pm, energy, ell, theta);
        const PhaseState st = plane_state(r, theta, p_r, ell);
        const Vec3 kv = pn_lrl(pm, st);
        rows.push_back(std::array<double, 6>{theta, r, p_r, kv.x, kv.y, kv.z});
    }
    emit(o.out_path, orbit_csv(rows));

    CheckList checks;
    IntegrateOptions io;
    io.rel_tol = o.tol;
    io.abs_tol = o.tol * 1e-2;

    const double r_m = find_rmin(model, energy, ell, std::max(norm(s0.r), 1e-6)).r_m;
    const PhaseState start = plane_state(r_m, 0.0, 0.0, ell);
    const Trajectory traj = integrate(model, start, 0.0, o.tmax, io);
    double dr_rel = 0.0;
    for (const TrajectorySample& smp : traj.samples) {
        double r_cf;
        try {
            r_cf = pn_orbit_r(pm, energy, ell, smp.theta);
        } catch (const Error&) {
            continue;
        }
        dr_rel = std::max(dr_rel, std::abs(r_cf - smp.r) / r_cf);
    }
    const Vec3 l_hat = normalized(conserved_angular_momentum(model, start));
    const ConstancyReport cr =
        branch_constancy(traj, [&](const PhaseState& st) { return pn_lrl(pm, st); }, l_hat,
                         apsidal_cf, [](const TrajectorySample&) { return true; });
    rep["k_segments"] = cr.segments;
    // All comparisons against closed forms truncated at 1/c^2 carry an
    // intrinsic 1/c^4 defect. Measured coefficients for moderately
    // relativistic bound shells reach ~1.2e3 for the gravitational
    // interaction (whose 5*alpha*mu/3M term is identically 5), so 1e4/c^4
    // leaves close to an order of headroom, floored by integrator noise.
    const double tol_c4 = std::max(1e-8, 1e4 / c4);
    checks.add("orbit_r_max_rel_diff", dr_rel, tol_c4);
    checks.add("k_constancy_segment_rel", cr.within, tol_c4);
    if (cr.segments > 1) checks.add("k_branch_jump_dir", cr.jump, tol_c4);
    checks.add("kmag_constancy_rel", cr.mag, tol_c4);
    try {
        const ApsidalAngle aps = apsidal_angle(traj);
        rep["apsidal_cycles"] = aps.cycles;
        checks.add("apsidal_rel_diff", std::abs(aps.mean - apsidal_cf) / apsidal_cf, tol_c4);
    } catch (const Error&) {
        rep["apsidal_note"] = "fewer than two perihelia in the window";
    }
    const double kmag_cf = pn_kmag(pm, energy, ell);
    checks.add("kmag_rel_diff",
               std::abs(lrl_magnitude(model, energy, ell, r_m) - kmag_cf) / kmag_cf,
               std::max(1e-8, 1e5 / c4));
    checks.add("ksq_route_rel_diff",
               std::abs(kmag_cf * kmag_cf - pn_ksq_expanded(pm, energy, ell)) /
                   std::abs(pn_ksq_expanded(pm, energy, ell)),
               std::max(1e-12, 1e5 / c4));
    const double pb_cf = pn_self_pb(pm, energy);
    checks.add("self_pb_rel_diff",
               std::abs(self_pb_coefficient(model, energy, ell, r_m) - pb_cf) / std::abs(pb_cf),
               std::max(1e-6, 1e4 / c4));

    if (!o.c_scan.empty()) {
        const Exec pol = policy_for(o.workers);
        std::vector<double> defects(o.c_scan.size());
        for_each_index(o.c_scan.size(), pol, [&](std::size_t i) {
            PostNewtonian pm2 = pm;
            pm2.c = o.c_scan[i];
            const CentralModel m2{pm2};
            const double e2 = hamiltonian(m2, s0);
            const double l2 = norm(conserved_angular_momentum(m2, s0));
            const double rm2 = find_rmin(m2, e2, l2, std::max(norm(s0.r), 1e-6)).r_m;
            const PhaseState st = plane_state(rm2, 0.0, 0.0, l2);
            IntegrateOptions io2;
            io2.rel_tol = std::min(o.tol, 1e-12);
            io2.abs_tol = io2.rel_tol * 1e-2;
            const Trajectory t2 = integrate(m2, st, 0.0, std::min(o.tmax, 150.0), io2);
            const double aps2 = 2.0 * kPi / (1.0 - pn_coefficients(pm2, e2, l2).delta);
            const ConstancyReport c2 = branch_constancy(
                t2, [&](const PhaseState& ps) { return pn_lrl(pm2, ps); },
                normalized(conserved_angular_momentum(m2, st)), aps2,
                [](const TrajectorySample&) { return true; });
            defects[i] = std::max(c2.within, c2.jump);
        });
        const double exponent = fitted_exponent(o.c_scan, defects);
        ordered_json scan;
        scan["c"] = o.c_scan;
        scan["defect_rel"] = defects;
        scan["fitted_exponent"] = exponent;
        scan["threshold"] = 3.5;
        scan["pass"] = exponent >= 3.5;
        rep["c_scan"] = scan;
        if (exponent < 3.5) checks.all_pass = false;
    }

    rep["checks"] = checks.items;
    rep["all_pass"] = checks.all_pass;
    emit(o.report_path, dump(rep));
    if (!checks.all_pass) {
        std::cerr << "closedform: at least one comparison is out of tolerance\n";
        return 3;
    }
    return 0;
}

int cmd_closedform(const ClosedformOpts& o) {
    if (o.model_path.empty()) fail(Err::InvalidConfig, "closedform: --model is required");
    if (o.state_csv.empty()) fail(Err::InvalidConfig, "closedform: --state is required");
    const CentralModel model = load_model(o.model_path);
    if (const auto* mm = std::get_if<RelCoulomb>(&model)) {
        return closedform_relcoulomb(*mm, model, o);
    }
    if (const auto* pm = std::get_if<PostNewtonian>(&model)) {
        return closedform_pn(*pm, model, o);
    }
    fail(Err::InvalidConfig, "closedform: closed forms cover the relcoulomb and pn models");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"constant-vector toolkit for rotationally symmetric two-body systems"};
    app.require_subcommand(1);
    int rc = 0;

    SimulateOpts so;
    auto* sim = app.add_subcommand("simulate", "integrate a trajectory and report conservation");
    sim->add_option("--model", so.model_path, "model JSON file (default: kepler mu=1 kappa=-1)");
    sim->add_option("--state", so.state_csv, "initial state x,y,z,px,py,pz")->required();
    sim->add_option("--tmax", so.tmax, "integration time span");
    sim->add_option("--tol", so.tol, "integrator relative tolerance");
    sim->add_option("--out", so.out_path, "trajectory CSV path (default: stdout)");
    sim->add_option("--report", so.report_path, "conservation report JSON path (default: stdout)");
    sim->callback([&]() { rc = cmd_simulate(so); });

    LrlOpts lo;
    auto* lrlc = app.add_subcommand("lrl", "construct the constant vector for a state");
    lrlc->add_option("--model", lo.model_path, "model JSON file (default: kepler mu=1 kappa=-1)");
    lrlc->add_option("--state", lo.state_csv, "state x,y,z,px,py,pz");
    lrlc->add_option("--sweep", lo.sweep_path, "file of states, one CSV line each");
    lrlc->add_option("--route", lo.route, "construction route")
        ->check(CLI::IsMember({"perihelion", "w", "both"}));
    lrlc->add_option("--tmax", lo.tmax, "search/integration time span");
    lrlc->add_option("--tol", lo.tol, "integrator relative tolerance");
    lrlc->add_option("--n-perihelia", lo.n_peri, "number of perihelia to collect");
    lrlc->add_option("--workers", lo.workers, "worker threads for sweeps");
    lrlc->add_option("--out", lo.out_path, "result JSON path (default: stdout)");
    lrlc->add_option("--series", lo.series_path, "W-route time series CSV path");
    lrlc->callback([&]() { rc = cmd_lrl(lo); });

    VerifyOpts vo;
    auto* ver = app.add_subcommand("verify", "run bracket and algebra residual suites");
    ver->add_option("--model", vo.model_path, "model JSON file (default: kepler mu=1 kappa=-1)");
    ver->add_option("--state", vo.state_csv, "center the sampling window on this state");
    ver->add_option("--sweep", vo.sweep_path, "verify exactly these states");
    ver->add_option("--states", vo.states, "number of sampled states");
    ver->add_option("--seed", vo.seed, "sampling seed");
    ver->add_option("--fd-step", vo.fd_step, "bracket finite-difference relative step");
    ver->add_option("--fd-scheme", vo.scheme, "finite-difference scheme")
        ->check(CLI::IsMember({"central2", "central4"}));
    ver->add_option("--workers", vo.workers, "worker threads");
    ver->add_flag("--negative-controls", vo.negative_controls,
                  "include observables that must fail the identities");
    ver->add_option("--out", vo.out_path, "report JSON path (default: stdout)");
    ver->callback([&]() { rc = cmd_verify(vo); });

    ClosedformOpts co;
    auto* cf = app.add_subcommand("closedform", "compare closed-form orbits against integration");
    cf->add_option("--model", co.model_path, "model JSON file (relcoulomb or pn)")->required();
    cf->add_option("--state", co.state_csv, "state x,y,z,px,py,pz fixing (E, l)")->required();
    cf->add_option("--regime", co.regime, "expected orbit regime")
        ->check(CLI::IsMember({"ordinary", "critical", "propeller"}));
    cf->add_option("--thetamax", co.thetamax, "azimuth span of the closed-form sweep");
    cf->add_option("--samples", co.samples, "rows in the closed-form sweep");
    cf->add_option("--tmax", co.tmax, "comparison integration time span");
    cf->add_option("--tol", co.tol, "integrator relative tolerance");
    cf->add_option("--c-scan", co.c_scan, "pn only: constancy defect scan over c values")
        ->delimiter(',');
    cf->add_option("--workers", co.workers, "worker threads for the c scan");
    cf->add_option("--out", co.out_path, "orbit sweep CSV path (default: stdout)");
    cf->add_option("--report", co.report_path, "summary JSON path (default: stdout)");
    cf->callback([&]() { rc = cmd_closedform(co); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const lrl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lrl::is_validation_error(e.code()) ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
