#include "lrl/closedform.hpp"

#include <algorithm>
#include <cmath>

#include "lrl/errors.hpp"

namespace lrl {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

struct PlaneFrame {
    double r = 0.0;
    double p_r = 0.0;
    double ell = 0.0;
    Vec3 r_hat;
    Vec3 ell_hat;
    Vec3 ell_vec;
};

PlaneFrame plane_frame(const PhaseState& s) {
    PlaneFrame f;
    f.r = s.r.norm();
    if (f.r <= 0.0) fail(Err::NonPositiveRadius, "closed form: |r| = 0");
    f.ell_vec = cross(s.r, s.p);
    f.ell = f.ell_vec.norm();
    if (f.ell <= 0.0) fail(Err::ZeroAngularMomentum, "closed form: radial state");
    f.r_hat = s.r / f.r;
    f.ell_hat = f.ell_vec / f.ell;
    f.p_r = dot(f.r_hat, s.p);
    return f;
}

}  // namespace

CoulombRegime classify(const RelCoulomb& m, double ell) {
    const double ak = std::abs(m.kappa);
    if (std::abs(ell - ak) <= 1e-9 * ak) return CoulombRegime::Critical;
    return ell > ak ? CoulombRegime::Ordinary : CoulombRegime::Propeller;
}

double relcoulomb_kmag(const RelCoulomb& m, double energy, double ell) {
    const double k2 =
        (energy * energy - m.m * m.m) * ell * ell + m.m * m.m * m.kappa * m.kappa;
    if (k2 < 0.0) fail(Err::UnboundOrInvalid, "relcoulomb_kmag: K^2 < 0, no orbit shell");
    return std::sqrt(k2);
}

double relcoulomb_rmin(const RelCoulomb& m, double energy, double ell) {
    if (classify(m, ell) == CoulombRegime::Critical) {
        fail(Err::NoTurningPoint, "relcoulomb_rmin: critical orbits have no perihelion");
    }
    const double k = relcoulomb_kmag(m, energy, ell);
    const double denom = k - m.kappa * energy;
    const double r_m = (ell * ell - m.kappa * m.kappa) / denom;
    if (!(r_m > 0.0) || !std::isfinite(r_m)) {
        fail(Err::NoTurningPoint, "relcoulomb_rmin: no closest approach on this branch");
    }
    return r_m;
}

double relcoulomb_self_pb(const RelCoulomb& m, double energy) {
    return -(energy * energy - m.m * m.m);
}

double relcoulomb_apsidal(const RelCoulomb& m, double ell) {
    if (classify(m, ell) != CoulombRegime::Ordinary) {
        fail(Err::RegimeUnsupported, "relcoulomb_apsidal: precessing conics only");
    }
    return 2.0 * kPi / std::sqrt(1.0 - m.kappa * m.kappa / (ell * ell));
}

double relcoulomb_ellmax(const RelCoulomb& m, double energy) {
    if (!(energy > 0.0 && energy < m.m)) {
        fail(Err::NoBoundStates, "relcoulomb_ellmax: circular orbits need 0 < E < m");
    }
    return m.m * std::abs(m.kappa) / std::sqrt(m.m * m.m - energy * energy);
}

double relcoulomb_c1(const RelCoulomb& m, double energy) {
    const double d = std::abs(energy * energy - m.m * m.m);
    if (d == 0.0) fail(Err::ZeroCoefficient, "relcoulomb_c1: |E| = m degenerates the algebra");
    return m.m * m.m * m.kappa * m.kappa / d;
}

int relcoulomb_eta(const RelCoulomb& m, double energy) {
    const double d = energy * energy - m.m * m.m;
    if (d == 0.0) fail(Err::ZeroCoefficient, "relcoulomb_eta: |E| = m degenerates the algebra");
    return d < 0.0 ? 1 : -1;
}

double relcoulomb_orbit_r(const RelCoulomb& m, double energy, double ell, double theta) {
    const double kap = m.kappa;
    switch (classify(m, ell)) {
        case CoulombRegime::Ordinary: {
            const double k = relcoulomb_kmag(m, energy, ell);
            const double gamma = std::sqrt(1.0 - kap * kap / (ell * ell));
            const double inv_r =
                (k * std::cos(gamma * theta) - energy * kap) / (ell * ell - kap * kap);
            if (!(inv_r > 0.0)) {
                fail(Err::OutsideDomain, "relcoulomb_orbit_r: azimuth beyond the asymptote");
            }
            return 1.0 / inv_r;
        }
        case CoulombRegime::Critical: {
            const double denom =
                energy * energy - m.m * m.m - energy * energy * theta * theta;
            const double r = 2.0 * kap * energy / denom;
            if (!(r > 0.0) || !std::isfinite(r)) {
                fail(Err::OutsideDomain, "relcoulomb_orbit_r: azimuth off the critical orbit");
            }
            return r;
        }
        case CoulombRegime::Propeller: {
            const double k = relcoulomb_kmag(m, energy, ell);
            const double dl = std::sqrt(kap * kap / (ell * ell) - 1.0);
            const double denom = energy * kap - k * std::cosh(dl * theta);
            const double r = (kap * kap - ell * ell) / denom;
            if (!(r > 0.0) || !std::isfinite(r)) {
                fail(Err::OutsideDomain, "relcoulomb_orbit_r: azimuth off the outer branch");
            }
            return r;
        }
    }
    fail(Err::RegimeUnsupported, "relcoulomb_orbit_r: unreachable");
}

double relcoulomb_theta(const RelCoulomb& m, double r, double pr_sign, double energy,
                        double ell) {
    if (r <= 0.0) fail(Err::NonPositiveRadius, "relcoulomb_theta: r <= 0");
    const double kap = m.kappa;
    const double sgn = pr_sign >= 0.0 ? 1.0 : -1.0;
    switch (classify(m, ell)) {
        case CoulombRegime::Ordinary: {
            const double k = relcoulomb_kmag(m, energy, ell);
            const double gamma = std::sqrt(1.0 - kap * kap / (ell * ell));
            const double c = clamp_unit(((ell * ell - kap * kap) / r + kap * energy) / k);
            return sgn * std::acos(c) / gamma;
        }
        case CoulombRegime::Critical: {
            // p_r = -E theta along the critical orbit, theta measured from the apsis.
            const double pr2 =
                energy * energy - m.m * m.m - 2.0 * kap * energy / r;
            return -sgn * std::sqrt(std::max(pr2, 0.0)) / energy;
        }
        case CoulombRegime::Propeller: {
            const double k = relcoulomb_kmag(m, energy, ell);
            const double dl = std::sqrt(kap * kap / (ell * ell) - 1.0);
            const double arg = std::max((energy * kap - (kap * kap - ell * ell) / r) / k, 1.0);
            return sgn * std::acosh(arg) / dl;
        }
    }
    fail(Err::RegimeUnsupported, "relcoulomb_theta: unreachable");
}

Vec3 relcoulomb_lrl(const RelCoulomb& m, const PhaseState& s) {
    const PlaneFrame f = plane_frame(s);
    const double energy = hamiltonian(CentralModel{m}, s);
    const double k = relcoulomb_kmag(m, energy, f.ell);
    double k_eff = k;
    if (classify(m, f.ell) == CoulombRegime::Critical) k_eff = m.kappa * energy;
    const double theta = relcoulomb_theta(m, f.r, f.p_r, energy, f.ell);
    return k_eff * rotate_about(f.ell_hat, -theta, f.r_hat);
}

Vec3 relcoulomb_lrl_rotating(const RelCoulomb& m, const PhaseState& s) {
    const PlaneFrame f = plane_frame(s);
    if (classify(m, f.ell) != CoulombRegime::Ordinary) {
        fail(Err::RegimeUnsupported, "relcoulomb_lrl_rotating: precessing conics only");
    }
    const double energy = hamiltonian(CentralModel{m}, s);
    const double l2k2 = f.ell * f.ell - m.kappa * m.kappa;
    const double gamma = std::sqrt(1.0 - m.kappa * m.kappa / (f.ell * f.ell));
    return gamma * cross(s.p, f.ell_vec) +
           ((l2k2 - f.ell * std::sqrt(l2k2)) / f.r + m.kappa * energy) * f.r_hat;
}

PnCoefficients pn_coefficients(const PostNewtonian& m, double energy, double ell) {
    const double mu = m.reduced_mass();
    const double mo = m.total_mass();
    const double c2 = m.c * m.c;
    const double l2 = ell * ell;
    const double k = m.kappa;
    const double a = m.alpha_pn;
    const double k2l2c2 = k * k / (l2 * c2);

    PnCoefficients out;
    out.delta = (1.0 + 5.0 * a * mu / (3.0 * mo)) * k2l2c2 / 2.0;
    out.u_o = -(1.0 + (1.0 + 5.0 * a * mu / (3.0 * mo)) * k2l2c2) * mu * k / l2 -
              (1.0 - (1.0 - a) * mu / mo) * k * energy / (l2 * c2);
    out.b2 = (1.0 + (2.0 + (8.0 * a - 3.0) * mu / (3.0 * mo)) * k2l2c2) * 2.0 * mu * energy / l2 +
             (1.0 - 3.0 * mu / mo) * energy * energy / (l2 * c2) +
             (1.0 + (1.0 + 5.0 * a * mu / (3.0 * mo)) * 2.0 * k2l2c2) * (mu * k / l2) *
                 (mu * k / l2);
    if (out.b2 < 0.0) {
        fail(Err::UnboundOrInvalid, "pn_coefficients: B^2 < 0, no orbit at this (E, l)");
    }
    out.b = std::sqrt(out.b2);
    out.eps = k / (2.0 * mo * c2);
    return out;
}

double pn_orbit_u(const PostNewtonian& m, double energy, double ell, double theta) {
    const PnCoefficients c = pn_coefficients(m, energy, ell);
    return c.u_o + c.b * std::cos((1.0 - c.delta) * theta);
}

double pn_orbit_r(const PostNewtonian& m, double energy, double ell, double theta) {
    const PnCoefficients c = pn_coefficients(m, energy, ell);
    const double u = c.u_o + c.b * std::cos((1.0 - c.delta) * theta);
    if (!(u > 0.0)) fail(Err::OutsideDomain, "pn_orbit_r: azimuth beyond the asymptote");
    // u = 1/r - eps/r^2: the root continuous with 1/r = u at eps = 0.
    const double disc = 1.0 - 4.0 * c.eps * u;
    if (disc < 0.0) fail(Err::OutsideDomain, "pn_orbit_r: u outside the coordinate map");
    const double inv_r = c.eps != 0.0 ? (1.0 - std::sqrt(disc)) / (2.0 * c.eps)
                                      : u;
    if (!(inv_r > 0.0)) fail(Err::OutsideDomain, "pn_orbit_r: u outside the coordinate map");
    return 1.0 / inv_r;
}

double pn_pr(const PostNewtonian& m, double energy, double ell, double theta) {
    const PnCoefficients c = pn_coefficients(m, energy, ell);
    return (1.0 - c.delta) * ell * c.b * std::sin((1.0 - c.delta) * theta);
}

double pn_kmag(const PostNewtonian& m, double energy, double ell) {
    const PnCoefficients c = pn_coefficients(m, energy, ell);
    const double d = 1.0 - c.delta;
    return d * d * ell * ell * c.b;
}

double pn_ksq_expanded(const PostNewtonian& m, double energy, double ell) {
    const double mu = m.reduced_mass();
    const double mo = m.total_mass();
    const double c2 = m.c * m.c;
    const double l2 = ell * ell;
    const double k = m.kappa;
    const double a = m.alpha_pn;
    return (l2 - (2.0 * a + 3.0) * mu * k * k / (3.0 * mo * c2)) * 2.0 * mu * energy +
           (1.0 - 3.0 * mu / mo) * energy * energy * l2 / c2 + mu * mu * k * k;
}

double pn_self_pb(const PostNewtonian& m, double energy) {
    const double mu = m.reduced_mass();
    return -(2.0 * mu * energy +
             (1.0 - 3.0 * mu / m.total_mass()) * energy * energy / (m.c * m.c));
}

double pn_theta(const PostNewtonian& m, const PhaseState& s) {
    const PlaneFrame f = plane_frame(s);
    const double energy = hamiltonian(CentralModel{m}, s);
    const PnCoefficients c = pn_coefficients(m, energy, f.ell);
    const double u = 1.0 / f.r - c.eps / (f.r * f.r);
    const double arg = clamp_unit((u - c.u_o) / c.b);
    const double theta = std::acos(arg) / (1.0 - c.delta);
    return f.p_r >= 0.0 ? theta : -theta;
}

Vec3 pn_lrl_rotating(const PostNewtonian& m, const PhaseState& s) {
    const PlaneFrame f = plane_frame(s);
    const double energy = hamiltonian(CentralModel{m}, s);
    const PnCoefficients c = pn_coefficients(m, energy, f.ell);
    const double mu = m.reduced_mass();
    const double mo = m.total_mass();
    const double c2 = m.c * m.c;
    const double k = m.kappa;
    const double a = m.alpha_pn;
    const double radial =
        (1.0 + (1.0 / mu - (1.0 - a) / mo) * energy / c2) * mu * k / f.r -
        (1.0 + 5.0 * a * mu / (3.0 * mo)) * k * k / (2.0 * c2 * f.r * f.r) -
        k * f.ell * f.ell / (2.0 * mo * c2 * f.r * f.r * f.r);
    return (1.0 - c.delta) * cross(s.p, f.ell_vec) + radial * s.r;
}

Vec3 pn_lrl(const PostNewtonian& m, const PhaseState& s) {
    const PlaneFrame f = plane_frame(s);
    const double energy = hamiltonian(CentralModel{m}, s);
    const PnCoefficients c = pn_coefficients(m, energy, f.ell);
    const double theta = pn_theta(m, s);
    return rotate_about(f.ell_hat, -c.delta * theta, pn_lrl_rotating(m, s));
}

Vec3 pn_lrl_linearized(const PostNewtonian& m, const PhaseState& s) {
    const PlaneFrame f = plane_frame(s);
    const double energy = hamiltonian(CentralModel{m}, s);
    const PnCoefficients c = pn_coefficients(m, energy, f.ell);
    const double theta = pn_theta(m, s);
    const Vec3 kp = pn_lrl_rotating(m, s);
    return kp - c.delta * theta * cross(f.ell_hat, kp);
}

}  // namespace lrl
