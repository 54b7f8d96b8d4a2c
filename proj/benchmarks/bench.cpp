#include <benchmark/benchmark.h>

#include <random>

#include "dyncirc/pcm.hpp"
#include "dyncirc/qcp.hpp"
#include "dyncirc/randgen.hpp"
#include "dyncirc/synth.hpp"

namespace {

using namespace dyncirc;

synth::TargetState random_state(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    synth::TargetState psi;
    psi.n_qubits = n;
    psi.amps.resize(std::int64_t{1} << n);
    for (Eigen::Index i = 0; i < psi.amps.size(); ++i) {
        psi.amps[i] = cplx(gauss(rng), gauss(rng));
    }
    psi.amps.normalize();
    return psi;
}

void BM_StatePrep(benchmark::State& state) {
    auto psi = random_state(static_cast<std::size_t>(state.range(0)), 42);
    for (auto _ : state) {
        benchmark::DoNotOptimize(synth::state_prep(psi));
    }
}
BENCHMARK(BM_StatePrep)->DenseRange(2, 10, 2);

void BM_QcpRun(benchmark::State& state) {
    randgen::GenConfig cfg;
    cfg.scale = static_cast<unsigned>(state.range(0));
    cfg.seed = 7;
    Circuit circuit = randgen::generate(cfg);
    qcp::QcpConfig qcfg;
    for (auto _ : state) {
        benchmark::DoNotOptimize(qcp::run(circuit, qcfg));
    }
}
BENCHMARK(BM_QcpRun)->Arg(1)->Arg(2)->Arg(3);

void BM_RunPass(benchmark::State& state) {
    randgen::GenConfig cfg;
    cfg.scale = 1;
    cfg.seed = 7;
    Circuit circuit = randgen::generate(cfg);
    pcm::PassConfig pcfg;
    pcfg.n_pcm = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(pcm::run_pass(circuit, pcfg));
    }
}
BENCHMARK(BM_RunPass)->Arg(1)->Arg(4)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
