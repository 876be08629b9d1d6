#include "lrl/models.hpp"

#include <cmath>

namespace lrl {

namespace {

void require_positive_radius(double r) {
    if (!(r > 0.0)) fail(Err::NonPositiveRadius, "radius must be positive, got " + std::to_string(r));
}

PotentialTerms custom_potential(const CustomCentral& m, double r) {
    PotentialTerms out;
    out.u = m.u(r);
    const double h = m.fd_step * std::max(1.0, std::abs(r));
    if (m.du) {
        out.du = m.du(r);
    } else {
        out.du = (m.u(r + h) - m.u(r - h)) / (2.0 * h);
    }
    out.has_d2 = static_cast<bool>(m.d2u);
    if (m.d2u) {
        out.d2u = m.d2u(r);
    } else if (m.du) {
        out.d2u = (m.du(r + h) - m.du(r - h)) / (2.0 * h);
    } else {
        out.d2u = (m.u(r + h) - 2.0 * m.u(r) + m.u(r - h)) / (h * h);
    }
    return out;
}

}  // namespace

PostNewtonian PostNewtonian::electromagnetic(double m1, double m2, double kappa, double c) {
    return with_alpha(m1, m2, kappa, 0.0, c);
}

PostNewtonian PostNewtonian::gravitational(double m1, double m2, double kappa, double c) {
    const double mu = m1 * m2 / (m1 + m2);
    return with_alpha(m1, m2, kappa, 3.0 * (m1 + m2) / mu, c);
}

PostNewtonian PostNewtonian::with_alpha(double m1, double m2, double kappa, double alpha_pn, double c) {
    if (!(m1 > 0.0) || !(m2 > 0.0)) fail(Err::InvalidConfig, "post-Newtonian masses must be positive");
    if (!(c > 0.0)) fail(Err::InvalidConfig, "speed of light must be positive");
    PostNewtonian m;
    m.m1 = m1;
    m.m2 = m2;
    m.kappa = kappa;
    m.alpha_pn = alpha_pn;
    m.c = c;
    return m;
}

std::string model_name(const CentralModel& model) {
    return std::visit(
        [](const auto& m) -> std::string {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KeplerCoulomb>) return "kepler";
            else if constexpr (std::is_same_v<T, Micz>) return "micz";
            else if constexpr (std::is_same_v<T, RelCoulomb>) return "relcoulomb";
            else if constexpr (std::is_same_v<T, PostNewtonian>) return "pn";
            else return m.label;
        },
        model);
}

// --- polar form -------------------------------------------------------------

double hamiltonian(const CentralModel& model, const PolarState& s) {
    require_positive_radius(s.r);
    const double r = s.r, pr = s.p_r, l = s.p_theta;
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KeplerCoulomb>) {
                return 0.5 * (pr * pr + l * l / (r * r)) / m.mu + m.kappa / r;
            } else if constexpr (std::is_same_v<T, Micz>) {
                // (l^2 - alpha^2) centrifugal term plus U cancels back to
                // the Kepler form in the conserved l.
                return 0.5 * (pr * pr + l * l / (r * r)) / m.m + m.kappa / r;
            } else if constexpr (std::is_same_v<T, RelCoulomb>) {
                return std::sqrt(pr * pr + l * l / (r * r) + m.m * m.m) + m.kappa / r;
            } else if constexpr (std::is_same_v<T, PostNewtonian>) {
                const double mu = m.reduced_mass();
                const double c2 = m.c * m.c;
                const double p2 = pr * pr + l * l / (r * r);
                const double cross = m.kappa / (2.0 * m.m1 * m.m2 * c2);
                return 0.5 * p2 / mu - p2 * p2 * m.inv_nu3() / (8.0 * c2) + m.kappa / r
                     + cross * ((1.0 + m.alpha_pn) * p2 + pr * pr) / r
                     + m.alpha_pn * m.kappa * m.kappa / (6.0 * m.total_mass() * c2 * r * r);
            } else {
                return 0.5 * (pr * pr + l * l / (r * r)) / m.mu + m.u(r);
            }
        },
        model);
}

PolarGradients gradients(const CentralModel& model, const PolarState& s) {
    require_positive_radius(s.r);
    const double r = s.r, pr = s.p_r, l = s.p_theta;
    return std::visit(
        [&](const auto& m) -> PolarGradients {
            using T = std::decay_t<decltype(m)>;
            PolarGradients g;
            if constexpr (std::is_same_v<T, KeplerCoulomb> || std::is_same_v<T, Micz>) {
                const double mass = [&] {
                    if constexpr (std::is_same_v<T, KeplerCoulomb>) return m.mu;
                    else return m.m;
                }();
                g.d_r = -l * l / (mass * r * r * r) - m.kappa / (r * r);
                g.d_pr = pr / mass;
                g.d_ell = l / (mass * r * r);
            } else if constexpr (std::is_same_v<T, RelCoulomb>) {
                const double root = std::sqrt(pr * pr + l * l / (r * r) + m.m * m.m);
                g.d_r = -l * l / (r * r * r * root) - m.kappa / (r * r);
                g.d_pr = pr / root;
                g.d_ell = l / (r * r * root);
            } else if constexpr (std::is_same_v<T, PostNewtonian>) {
                const double mu = m.reduced_mass();
                const double c2 = m.c * m.c;
                const double p2 = pr * pr + l * l / (r * r);
                const double cross = m.kappa / (2.0 * m.m1 * m.m2 * c2);
                const double dH_dp2 = 0.5 / mu - p2 * m.inv_nu3() / (4.0 * c2)
                                    + cross * (1.0 + m.alpha_pn) / r;
                // p2 depends on r and l; the explicit r-derivative covers the
                // interaction terms at fixed (p2, pr).
                const double dp2_dr = -2.0 * l * l / (r * r * r);
                g.d_r = dH_dp2 * dp2_dr - m.kappa / (r * r)
                      - cross * ((1.0 + m.alpha_pn) * p2 + pr * pr) / (r * r)
                      - m.alpha_pn * m.kappa * m.kappa / (3.0 * m.total_mass() * c2 * r * r * r);
                g.d_pr = 2.0 * pr * (dH_dp2 + cross / r);
                g.d_ell = dH_dp2 * 2.0 * l / (r * r);
            } else {
                const PotentialTerms u = custom_potential(m, r);
                g.d_r = -l * l / (m.mu * r * r * r) + u.du;
                g.d_pr = pr / m.mu;
                g.d_ell = l / (m.mu * r * r);
            }
            return g;
        },
        model);
}

PotentialTerms potential(const CentralModel& model, double r) {
    require_positive_radius(r);
    return std::visit(
        [&](const auto& m) -> PotentialTerms {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KeplerCoulomb>) {
                return {m.kappa / r, -m.kappa / (r * r), 2.0 * m.kappa / (r * r * r), true};
            } else if constexpr (std::is_same_v<T, Micz>) {
                const double a2m = m.alpha * m.alpha / m.m;
                return {m.kappa / r + 0.5 * a2m / (r * r),
                        -m.kappa / (r * r) - a2m / (r * r * r),
                        2.0 * m.kappa / (r * r * r) + 3.0 * a2m / (r * r * r * r), true};
            } else if constexpr (std::is_same_v<T, CustomCentral>) {
                return custom_potential(m, r);
            } else {
                fail(Err::NoPotentialDecomposition,
                     "model '" + model_name(CentralModel(m)) + "' has momentum-dependent interaction");
            }
        },
        model);
}

// --- Cartesian form -----------------------------------------------------------

double hamiltonian(const CentralModel& model, const PhaseState& s) {
    const double r = norm(s.r);
    require_positive_radius(r);
    const double p2 = norm2(s.p);
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, KeplerCoulomb>) {
                return 0.5 * p2 / m.mu + m.kappa / r;
            } else if constexpr (std::is_same_v<T, Micz>) {
                const double a2m = m.alpha * m.alpha / m.m;
                return 0.5 * p2 / m.m + m.kappa / r + 0.5 * a2m / (r * r);
            } else if constexpr (std::is_same_v<T, RelCoulomb>) {
                return std::sqrt(p2 + m.m * m.m) + m.kappa / r;
            } else if constexpr (std::is_same_v<T, PostNewtonian>) {
                const double mu = m.reduced_mass();
                const double c2 = m.c * m.c;
                const double rp = dot(s.r, s.p);
                const double pr2 = rp * rp / (r * r);
                const double cross = m.kappa / (2.0 * m.m1 * m.m2 * c2);
                return 0.5 * p2 / mu - p2 * p2 * m.inv_nu3() / (8.0 * c2) + m.kappa / r
                     + cross * ((1.0 + m.alpha_pn) * p2 + pr2) / r
                     + m.alpha_pn * m.kappa * m.kappa / (6.0 * m.total_mass() * c2 * r * r);
            } else {
                return 0.5 * p2 / m.mu + m.u(r);
            }
        },
        model);
}

PhaseDerivative equations_of_motion(const CentralModel& model, const PhaseState& s) {
    const double r = norm(s.r);
    require_positive_radius(r);
    const Vec3 rhat = s.r / r;
    return std::visit(
        [&](const auto& m) -> PhaseDerivative {
            using T = std::decay_t<decltype(m)>;
            PhaseDerivative d;
            if constexpr (std::is_same_v<T, KeplerCoulomb>) {
                d.dr = s.p / m.mu;
                d.dp = rhat * (m.kappa / (r * r));
            } else if constexpr (std::is_same_v<T, Micz>) {
                const double a2m = m.alpha * m.alpha / m.m;
                const double du = -m.kappa / (r * r) - a2m / (r * r * r);
                d.dr = s.p / m.m;
                d.dp = cross(s.p, s.r) * (m.alpha / (m.m * r * r * r)) - rhat * du;
            } else if constexpr (std::is_same_v<T, RelCoulomb>) {
                const double root = std::sqrt(norm2(s.p) + m.m * m.m);
                d.dr = s.p / root;
                d.dp = rhat * (m.kappa / (r * r));
            } else if constexpr (std::is_same_v<T, PostNewtonian>) {
                const double mu = m.reduced_mass();
                const double c2 = m.c * m.c;
                const double p2 = norm2(s.p);
                const double rp = dot(s.r, s.p);
                const double cross_c = m.kappa / (2.0 * m.m1 * m.m2 * c2);
                const double dH_dp2 = 0.5 / mu - p2 * m.inv_nu3() / (4.0 * c2)
                                    + cross_c * (1.0 + m.alpha_pn) / r;
                const double dH_drp = m.kappa * rp / (m.m1 * m.m2 * c2 * r * r * r);
                const double dH_dr = -m.kappa / (r * r)
                                   - cross_c * ((1.0 + m.alpha_pn) * p2 + 3.0 * rp * rp / (r * r)) / (r * r)
                                   - m.alpha_pn * m.kappa * m.kappa / (3.0 * m.total_mass() * c2 * r * r * r);
                d.dr = s.p * (2.0 * dH_dp2) + s.r * dH_drp;
                d.dp = -(rhat * dH_dr + s.p * dH_drp);
            } else {
                const PotentialTerms u = custom_potential(m, r);
                d.dr = s.p / m.mu;
                d.dp = rhat * (-u.du);
            }
            return d;
        },
        model);
}

Vec3 conserved_angular_momentum(const CentralModel& model, const PhaseState& s) {
    Vec3 l = cross(s.r, s.p);
    if (const auto* micz = std::get_if<Micz>(&model)) {
        const double r = norm(s.r);
        require_positive_radius(r);
        l -= s.r * (micz->alpha / r);
    }
    return l;
}

double monopole_coupling(const CentralModel& model) {
    if (const auto* micz = std::get_if<Micz>(&model)) return micz->alpha;
    return 0.0;
}

std::optional<NewtonianForm> newtonian_form(const CentralModel& model) {
    if (const auto* kc = std::get_if<KeplerCoulomb>(&model)) {
        const double kappa = kc->kappa;
        return NewtonianForm{kc->mu, [kappa](double r) -> PotentialTerms {
                                 return {kappa / r, -kappa / (r * r), 2.0 * kappa / (r * r * r), true};
                             }};
    }
    if (const auto* cc = std::get_if<CustomCentral>(&model)) {
        CustomCentral copy = *cc;
        return NewtonianForm{cc->mu, [copy](double r) { return custom_potential(copy, r); }};
    }
    return std::nullopt;
}

// --- plane coordinates ---------------------------------------------------------

std::pair<PolarState, PlaneBasis> to_polar(const PhaseState& s, std::optional<Vec3> reference) {
    const double r = norm(s.r);
    require_positive_radius(r);
    const Vec3 ell = cross(s.r, s.p);
    const double l = norm(ell);
    if (!(l > 0.0)) fail(Err::ZeroAngularMomentum, "state has r x p = 0");

    PlaneBasis basis;
    basis.ell_hat = ell / l;
    if (reference) {
        Vec3 u = *reference - basis.ell_hat * dot(*reference, basis.ell_hat);
        const double un = norm(u);
        if (!(un > 1e-14)) fail(Err::NonUnitDirection, "theta reference is parallel to ell");
        basis.u_ref = u / un;
    } else {
        basis.u_ref = s.r / r;
    }

    PolarState polar;
    polar.r = r;
    polar.theta = signed_angle(basis.u_ref, s.r / r, basis.ell_hat);
    polar.p_r = dot(s.r, s.p) / r;
    polar.p_theta = l;
    return {polar, basis};
}

PhaseState from_polar(const PolarState& s, const PlaneBasis& basis, double t) {
    require_positive_radius(s.r);
    const Vec3 rhat = rotate_about(basis.ell_hat, s.theta, basis.u_ref);
    const Vec3 that = cross(basis.ell_hat, rhat);
    PhaseState out;
    out.r = rhat * s.r;
    out.p = rhat * s.p_r + that * (s.p_theta / s.r);
    out.t = t;
    return out;
}

const char* to_string(Err e) {
    switch (e) {
        case Err::InvalidConfig: return "InvalidConfig";
        case Err::NonPositiveRadius: return "NonPositiveRadius";
        case Err::ZeroAngularMomentum: return "ZeroAngularMomentum";
        case Err::NonUnitDirection: return "NonUnitDirection";
        case Err::RegimeUnsupported: return "RegimeUnsupported";
        case Err::ModelUnsupported: return "ModelUnsupported";
        case Err::OutsideDomain: return "OutsideDomain";
        case Err::UnboundOrInvalid: return "UnboundOrInvalid";
        case Err::UnreachableAngularMomentum: return "UnreachableAngularMomentum";
        case Err::NoBoundStates: return "NoBoundStates";
        case Err::DerivativeUnavailable: return "DerivativeUnavailable";
        case Err::NoPotentialDecomposition: return "NoPotentialDecomposition";
        case Err::EvaluationFailure: return "EvaluationFailure";
        case Err::EmptyStateSample: return "EmptyStateSample";
        case Err::StepFailure: return "StepFailure";
        case Err::NoTurningPoint: return "NoTurningPoint";
        case Err::InsufficientTurningPoints: return "InsufficientTurningPoints";
        case Err::NoPerihelionFound: return "NoPerihelionFound";
        case Err::QuadratureBlowup: return "QuadratureBlowup";
        case Err::NonDifferentiableMagnitude: return "NonDifferentiableMagnitude";
        case Err::ZeroCoefficient: return "ZeroCoefficient";
        case Err::NoPositiveRoot: return "NoPositiveRoot";
    }
    return "UnknownError";
}

bool is_validation_error(Err e) {
    switch (e) {
        case Err::InvalidConfig:
        case Err::NonPositiveRadius:
        case Err::ZeroAngularMomentum:
        case Err::NonUnitDirection:
        case Err::RegimeUnsupported:
        case Err::ModelUnsupported:
        case Err::OutsideDomain:
        case Err::UnboundOrInvalid:
        case Err::UnreachableAngularMomentum:
        case Err::NoBoundStates:
            return true;
        default:
            return false;
    }
}

}  // namespace lrl
