#pragma once

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "lrl/models.hpp"
#include "lrl/parallel.hpp"
#include "lrl/vec3.hpp"

namespace lrl {

struct Observable {
    std::string label;
    std::function<double(const PhaseState&)> eval;
};

struct VectorObservable {
    std::string label;
    std::function<Vec3(const PhaseState&)> eval;
};

enum class FdScheme { Central2, Central4 };

struct BracketConfig {
    double step = 1e-5;                  // relative step, scaled per component
    FdScheme scheme = FdScheme::Central2;
    double monopole_alpha = 0.0;         // field term coefficient ({p_i, p_j} != 0)
};

// Config matching the model's Poisson structure (monopole term for Micz).
BracketConfig bracket_config_for(const CentralModel& model, FdScheme scheme = FdScheme::Central2);

// Phase-space gradient of a scalar observable by central differences,
// components ordered (d/dr_x, d/dr_y, d/dr_z, d/dp_x, d/dp_y, d/dp_z).
std::array<double, 6> fd_gradient(const Observable& f, const PhaseState& s, const BracketConfig& cfg);

// Numerical Poisson bracket {f, g} at s. Canonical part plus, when
// monopole_alpha != 0, the magnetic term alpha rhat/r^2 . (grad_p f x grad_p g).
double bracket(const Observable& f, const Observable& g, const PhaseState& s,
               const BracketConfig& cfg);

// Componentwise {f, k^i}.
Vec3 bracket(const Observable& f, const VectorObservable& k, const PhaseState& s,
             const BracketConfig& cfg);

struct SelfBracket {
    std::array<std::array<double, 3>, 3> matrix{};  // matrix[i][j] = {k^i, k^j}
    Vec3 lambda;                                    // lambda^k = 1/2 eps^kij matrix[i][j]
    double antisymmetry_defect = 0.0;
};

// The 3x3 self-bracket matrix of a vector observable and the axial vector it
// encodes.
SelfBracket vector_self_bracket(const VectorObservable& k, const PhaseState& s,
                                const BracketConfig& cfg);

struct BracketResidual {
    double max_abs = 0.0;
    double rms = 0.0;
    std::size_t states_tested = 0;
    double scale = 1.0;         // typical magnitude used for relative residuals
    double max_rel() const { return max_abs / scale; }
};

// Residual of the vector rotation identity {k^i, l^j} = eps^ijk k^k over a
// state sample, where l is the model's conserved angular momentum.
BracketResidual verify_rotational(const CentralModel& model, const VectorObservable& k,
                                  std::span<const PhaseState> states, const BracketConfig& cfg,
                                  Exec policy = Exec::Serial);

// Residual of the self-bracket identity {k^i, k^j} = -dF/d(l^2) eps^ijk l^k
// for k with k^2 = F(E, l^2). The handle is differentiated by central
// differences in l^2 at fixed E.
BracketResidual verify_prop2(const CentralModel& model, const VectorObservable& k,
                             const std::function<double(double energy, double ell_sq)>& ksq,
                             std::span<const PhaseState> states, const BracketConfig& cfg,
                             Exec policy = Exec::Serial);

// Extracted axial vectors lambda(s) for each state (parallel kernel used by
// the residual sweeps and the benchmark).
std::vector<Vec3> self_bracket_lambdas(const VectorObservable& k,
                                       std::span<const PhaseState> states,
                                       const BracketConfig& cfg, Exec policy = Exec::Serial);

// Angular momentum as a vector observable of the model.
VectorObservable angular_momentum_observable(const CentralModel& model);

// Energy as an observable of the model.
Observable energy_observable(const CentralModel& model);

Observable component(const VectorObservable& k, int i);

}  // namespace lrl
