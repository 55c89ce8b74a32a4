#include <benchmark/benchmark.h>

#include "dgreedy/greedy.hpp"
#include "dgreedy/stabilization.hpp"

using namespace dgreedy;

namespace {

std::vector<double> left_samples(int count) {
    ParameterDomain d;
    d.hi = kSplitAngle;
    d.samples = count;
    return d.sample_points();
}

CoverPiece left_piece() {
    ParameterDomain d;
    return cover_pieces(d).front();
}

}  // namespace

static void BM_AssembleStiffness(benchmark::State& state) {
    const FESpace space(static_cast<int>(state.range(0)), Continuity::continuous, {});
    for (auto _ : state) benchmark::DoNotOptimize(assemble(space, space, {Kind::stiff}));
}
BENCHMARK(BM_AssembleStiffness)->Arg(4)->Arg(6);

static void BM_TruthSolveCd(benchmark::State& state) {
    CdOptions o;
    o.trial_level = static_cast<int>(state.range(0));
    o.test_level = o.trial_level + 1;
    const SaddleProblem p = build_cd_problem(o, left_piece(), left_samples(4));
    for (auto _ : state) benchmark::DoNotOptimize(solve_truth(p, 0.7));
}
BENCHMARK(BM_TruthSolveCd)->Arg(3)->Arg(5)->Unit(benchmark::kMillisecond);

static void BM_MinSingular(benchmark::State& state) {
    const Eigen::Index n = state.range(0);
    Mat d = Mat::Random(2 * n, n);
    for (auto _ : state) benchmark::DoNotOptimize(min_singular(d));
}
BENCHMARK(BM_MinSingular)->Arg(10)->Arg(40);

static void BM_DeltaSweepTransport(benchmark::State& state) {
    TransportOptions o;
    const SaddleProblem p = build_transport_problem(o, left_piece(), left_samples(25));
    GreedyConfig g;
    g.surrogate = SurrogateKind::reduced_dual;
    g.loop = StabLoop::delta;
    g.n_max = static_cast<int>(state.range(0));
    g.tol = 1e-12;
    g.track_best_error = false;
    const GreedyResult r = dg1(p, g);
    for (auto _ : state) benchmark::DoNotOptimize(delta_sweep(p, *r.pair, g.stab));
}
BENCHMARK(BM_DeltaSweepTransport)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
