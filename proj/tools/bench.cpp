// Timing comparison of the OpenMP kernels against their serial references:
// resonance-shell enumeration, antichain reduction, golden-rule matrix
// assembly and the spectral transforms of the field stepper.

#include <chrono>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kgflow/fgr.hpp"
#include "kgflow/kgsim.hpp"
#include "kgflow/pipeline.hpp"
#include "kgflow/resonance.hpp"

using namespace kgflow;
using Clock = std::chrono::steady_clock;

namespace {

template <typename F>
double time_ms(F&& fn, int repeats = 3) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void row(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-34s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel variants run serially\n");
#endif
    std::printf("%-34s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    // resonance enumeration, n = 4 at order 9
    FrequencySpec freq;
    freq.m = 1.0;
    freq.omegas = {0.45, 0.33, 0.21, 0.13};
    std::vector<ResonancePair> lambda;
    row("enumerate_lambda n=4 order=9",
        time_ms([&] { lambda = enumerate_lambda_serial(freq, 9); }),
        time_ms([&] { lambda = enumerate_lambda(freq, 9); }));

    row("minimal_set on |Lambda|",
        time_ms([&] { (void)minimal_set_serial(lambda); }),
        time_ms([&] { (void)minimal_set(lambda); }));

    // golden-rule assembly on a degenerate pair (large basis)
    FrequencySpec dfreq;
    dfreq.m = 1.0;
    dfreq.omegas = {0.45, 0.25};
    dfreq.multiplicities = {3, 2};
    ResonancePair pair{{2, 1}, {0, 0}};
    const auto basis = expand_pair_basis(pair, dfreq);
    std::mt19937 rng(7);
    const ContinuumOperator op = uniform_continuum(1.0, 2.0, 480, 480);
    const CouplingMap couplings = synthetic_couplings(basis, op.dim(), rng);
    row("build_matrices 12x12 @480 levels",
        time_ms([&] { (void)build_matrices_serial(pair, couplings, op, dfreq); }),
        time_ms([&] { (void)build_matrices(pair, couplings, op, dfreq); }));

    // spectral transforms of the field stepper
    Grid grid;
    grid.half_length = 30.0;
    grid.points = 1024;
    const SpectralDecomposition spec = discretize(PoschlTeller{2.0, 1.0}, grid, 1.3);
    Eigen::VectorXd u = Eigen::VectorXd::Random(grid.points);
    Eigen::VectorXd c;
    row("analyze  (Q^T u) M=1024 x200",
        time_ms([&] {
            for (int i = 0; i < 200; ++i) c = spec.to_modes_serial(u);
        }),
        time_ms([&] {
            for (int i = 0; i < 200; ++i) c = spec.to_modes(u);
        }));
    row("synthesize (Q c) M=1024 x200",
        time_ms([&] {
            for (int i = 0; i < 200; ++i) u = spec.from_modes_serial(c);
        }),
        time_ms([&] {
            for (int i = 0; i < 200; ++i) u = spec.from_modes(c);
        }));
    return 0;
}
