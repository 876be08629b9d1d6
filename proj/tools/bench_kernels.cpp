#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "lrl/brackets.hpp"
#include "lrl/lrl_vector.hpp"
#include "lrl/models.hpp"
#include "lrl/parallel.hpp"
#include "lrl/sampling.hpp"

namespace {

using namespace lrl;

double seconds_for(int repeat, const std::function<void()>& body) {
    double best = 1e300;
    for (int i = 0; i < repeat; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        body();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

bool identical(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::memcmp(&a[i], &b[i], sizeof(Vec3)) != 0) return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    std::size_t n_states = 256;
    int repeat = 3;
    if (argc > 1) n_states = static_cast<std::size_t>(std::atoll(argv[1]));
    if (argc > 2) repeat = std::atoi(argv[2]);

    const KeplerCoulomb kepler;
    const CentralModel model{kepler};

    BoundStateSpec spec;
    spec.e_lo = -0.45;
    spec.e_hi = -0.12;
    spec.count = n_states;
    const std::vector<PhaseState> states = sample_bound_states(model, spec);

    const VectorObservable closed{"kepler_lrl", [&](const PhaseState& s) {
                                      return classical_kepler_lrl(s, kepler.mu, kepler.kappa);
                                  }};
    const VectorObservable constructed = lrl_observable(model);
    const BracketConfig cfg = bracket_config_for(model);

    std::printf("states: %zu   repeats: %d   threads available: %d\n\n", states.size(), repeat,
                max_threads());
    std::printf("%-34s %10s %10s %8s\n", "kernel", "serial[s]", "openmp[s]", "speedup");

    bool ok = true;
    const auto bench_lambda = [&](const char* name, const VectorObservable& obs) {
        std::vector<Vec3> serial, parallel;
        const double ts = seconds_for(repeat, [&]() {
            serial = self_bracket_lambdas(obs, states, cfg, Exec::Serial);
        });
        const double tp = seconds_for(repeat, [&]() {
            parallel = self_bracket_lambdas(obs, states, cfg, Exec::OpenMP);
        });
        ok = ok && identical(serial, parallel);
        std::printf("%-34s %10.4f %10.4f %7.2fx\n", name, ts, tp, ts / tp);
    };
    const auto bench_residual = [&](const char* name, const VectorObservable& obs) {
        BracketResidual rs{}, rp{};
        const double ts = seconds_for(repeat, [&]() {
            rs = verify_rotational(model, obs, states, cfg, Exec::Serial);
        });
        const double tp = seconds_for(repeat, [&]() {
            rp = verify_rotational(model, obs, states, cfg, Exec::OpenMP);
        });
        ok = ok && std::memcmp(&rs.max_abs, &rp.max_abs, sizeof(double)) == 0 &&
             std::memcmp(&rs.rms, &rp.rms, sizeof(double)) == 0;
        std::printf("%-34s %10.4f %10.4f %7.2fx\n", name, ts, tp, ts / tp);
    };

    bench_lambda("self_bracket closed form", closed);
    bench_lambda("self_bracket constructed", constructed);
    bench_residual("rotation residual closed form", closed);
    bench_residual("rotation residual constructed", constructed);

    std::printf("\nserial and parallel results bitwise identical: %s\n", ok ? "yes" : "NO");
    return ok ? 0 : 1;
}
