#include "lrl/brackets.hpp"

#include <cmath>

#include "lrl/errors.hpp"

namespace lrl {

namespace {

double checked(double v, const std::string& label) {
    if (!std::isfinite(v)) fail(Err::EvaluationFailure, "observable '" + label + "' is not finite");
    return v;
}

Vec3 checked(const Vec3& v, const std::string& label) {
    if (!finite(v)) fail(Err::EvaluationFailure, "observable '" + label + "' is not finite");
    return v;
}

double component_step(double base, double value) { return base * std::max(1.0, std::abs(value)); }

double* state_component(PhaseState& s, int i) {
    switch (i) {
        case 0: return &s.r.x;
        case 1: return &s.r.y;
        case 2: return &s.r.z;
        case 3: return &s.p.x;
        case 4: return &s.p.y;
        default: return &s.p.z;
    }
}

// Jacobian with rows = observable components, columns = phase-space directions.
template <int N, class Eval>
std::array<std::array<double, 6>, N> fd_jacobian(const Eval& eval, const PhaseState& s,
                                                 const BracketConfig& cfg) {
    std::array<std::array<double, 6>, N> jac{};
    PhaseState work = s;
    for (int c = 0; c < 6; ++c) {
        double* x = state_component(work, c);
        const double x0 = *x;
        const double h = component_step(cfg.step, x0);
        if (cfg.scheme == FdScheme::Central2) {
            *x = x0 + h;
            const auto fp = eval(work);
            *x = x0 - h;
            const auto fm = eval(work);
            for (int k = 0; k < N; ++k) jac[k][c] = (fp[k] - fm[k]) / (2.0 * h);
        } else {
            *x = x0 + h;
            const auto f1 = eval(work);
            *x = x0 + 2.0 * h;
            const auto f2 = eval(work);
            *x = x0 - h;
            const auto fm1 = eval(work);
            *x = x0 - 2.0 * h;
            const auto fm2 = eval(work);
            for (int k = 0; k < N; ++k)
                jac[k][c] = (8.0 * (f1[k] - fm1[k]) - (f2[k] - fm2[k])) / (12.0 * h);
        }
        *x = x0;
    }
    return jac;
}

struct Scalar1 {
    double v;
    double operator[](int) const { return v; }
};

struct VecView {
    Vec3 v;
    double operator[](int k) const { return v[k]; }
};

// Canonical part plus the magnetic field term of the monopole structure.
double combine(const std::array<double, 6>& df, const std::array<double, 6>& dg,
               const PhaseState& s, const BracketConfig& cfg) {
    double out = 0.0;
    for (int i = 0; i < 3; ++i) out += df[i] * dg[i + 3] - df[i + 3] * dg[i];
    if (cfg.monopole_alpha != 0.0) {
        const Vec3 fp{df[3], df[4], df[5]};
        const Vec3 gp{dg[3], dg[4], dg[5]};
        const double r = norm(s.r);
        const Vec3 field = s.r * (cfg.monopole_alpha / (r * r * r));
        out += dot(field, cross(fp, gp));
    }
    return out;
}

}  // namespace

BracketConfig bracket_config_for(const CentralModel& model, FdScheme scheme) {
    BracketConfig cfg;
    cfg.scheme = scheme;
    cfg.monopole_alpha = monopole_coupling(model);
    return cfg;
}

std::array<double, 6> fd_gradient(const Observable& f, const PhaseState& s,
                                  const BracketConfig& cfg) {
    auto eval = [&](const PhaseState& st) { return Scalar1{checked(f.eval(st), f.label)}; };
    const auto jac = fd_jacobian<1>(eval, s, cfg);
    return jac[0];
}

double bracket(const Observable& f, const Observable& g, const PhaseState& s,
               const BracketConfig& cfg) {
    const auto df = fd_gradient(f, s, cfg);
    const auto dg = fd_gradient(g, s, cfg);
    return combine(df, dg, s, cfg);
}

Vec3 bracket(const Observable& f, const VectorObservable& k, const PhaseState& s,
             const BracketConfig& cfg) {
    const auto df = fd_gradient(f, s, cfg);
    auto eval = [&](const PhaseState& st) { return VecView{checked(k.eval(st), k.label)}; };
    const auto jk = fd_jacobian<3>(eval, s, cfg);
    Vec3 out;
    for (int i = 0; i < 3; ++i) out[i] = combine(df, jk[i], s, cfg);
    return out;
}

SelfBracket vector_self_bracket(const VectorObservable& k, const PhaseState& s,
                                const BracketConfig& cfg) {
    auto eval = [&](const PhaseState& st) { return VecView{checked(k.eval(st), k.label)}; };
    const auto jk = fd_jacobian<3>(eval, s, cfg);

    SelfBracket out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.matrix[i][j] = combine(jk[i], jk[j], s, cfg);

    out.lambda = {out.matrix[1][2], out.matrix[2][0], out.matrix[0][1]};
    double defect = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) defect = std::max(defect, std::abs(out.matrix[i][j] + out.matrix[j][i]));
    out.antisymmetry_defect = defect;
    return out;
}

std::vector<Vec3> self_bracket_lambdas(const VectorObservable& k,
                                       std::span<const PhaseState> states,
                                       const BracketConfig& cfg, Exec policy) {
    std::vector<Vec3> lambdas(states.size());
    for_each_index(states.size(), policy,
                   [&](std::size_t i) { lambdas[i] = vector_self_bracket(k, states[i], cfg).lambda; });
    return lambdas;
}

VectorObservable angular_momentum_observable(const CentralModel& model) {
    return {"ell", [model](const PhaseState& s) { return conserved_angular_momentum(model, s); }};
}

Observable energy_observable(const CentralModel& model) {
    return {"energy", [model](const PhaseState& s) { return hamiltonian(model, s); }};
}

Observable component(const VectorObservable& k, int i) {
    auto eval = k.eval;
    return {k.label + "_" + std::to_string(i),
            [eval, i](const PhaseState& s) { return eval(s)[i]; }};
}

BracketResidual verify_rotational(const CentralModel& model, const VectorObservable& k,
                                  std::span<const PhaseState> states, const BracketConfig& cfg,
                                  Exec policy) {
    if (states.empty()) fail(Err::EmptyStateSample, "verify_rotational needs at least one state");

    const VectorObservable ell = angular_momentum_observable(model);
    std::vector<double> residual(states.size());
    std::vector<double> scale(states.size());

    for_each_index(states.size(), policy, [&](std::size_t idx) {
        const PhaseState& s = states[idx];
        const Vec3 kv = checked(k.eval(s), k.label);
        auto evk = [&](const PhaseState& st) { return VecView{checked(k.eval(st), k.label)}; };
        auto evl = [&](const PhaseState& st) { return VecView{checked(ell.eval(st), ell.label)}; };
        const auto jk = fd_jacobian<3>(evk, s, cfg);
        const auto jl = fd_jacobian<3>(evl, s, cfg);
        double worst = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const double value = combine(jk[i], jl[j], s, cfg);   // {k^i, l^j}
                // expected eps^ijk k^k
                double expect = 0.0;
                if (i == 0 && j == 1) expect = kv.z;
                else if (i == 1 && j == 0) expect = -kv.z;
                else if (i == 1 && j == 2) expect = kv.x;
                else if (i == 2 && j == 1) expect = -kv.x;
                else if (i == 2 && j == 0) expect = kv.y;
                else if (i == 0 && j == 2) expect = -kv.y;
                worst = std::max(worst, std::abs(value - expect));
            }
        }
        residual[idx] = worst;
        scale[idx] = std::max(norm(kv), 1e-300);
    });

    BracketResidual out;
    out.states_tested = states.size();
    double sq = 0.0, smax = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        out.max_abs = std::max(out.max_abs, residual[i]);
        sq += residual[i] * residual[i];
        smax = std::max(smax, scale[i]);
    }
    out.rms = std::sqrt(sq / static_cast<double>(states.size()));
    out.scale = smax;
    return out;
}

BracketResidual verify_prop2(const CentralModel& model, const VectorObservable& k,
                             const std::function<double(double, double)>& ksq,
                             std::span<const PhaseState> states, const BracketConfig& cfg,
                             Exec policy) {
    if (states.empty()) fail(Err::EmptyStateSample, "verify_prop2 needs at least one state");

    std::vector<double> residual(states.size());
    std::vector<double> scale(states.size());

    for_each_index(states.size(), policy, [&](std::size_t idx) {
        const PhaseState& s = states[idx];
        const double energy = hamiltonian(model, s);
        const Vec3 ell = conserved_angular_momentum(model, s);
        const double l2 = norm2(ell);

        const double dl2 = 1e-6 * std::max(l2, 1.0);
        const double dF = (ksq(energy, l2 + dl2) - ksq(energy, l2 - dl2)) / (2.0 * dl2);
        const Vec3 expected = ell * (-dF);

        const Vec3 lambda = vector_self_bracket(k, s, cfg).lambda;
        residual[idx] = norm(lambda - expected);
        scale[idx] = std::max(norm(expected), 1e-300);
    });

    BracketResidual out;
    out.states_tested = states.size();
    double sq = 0.0, smax = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        out.max_abs = std::max(out.max_abs, residual[i]);
        sq += residual[i] * residual[i];
        smax = std::max(smax, scale[i]);
    }
    out.rms = std::sqrt(sq / static_cast<double>(states.size()));
    out.scale = smax;
    return out;
}

}  // namespace lrl
