#include "specmono/pipeline.hpp"

#include <benchmark/benchmark.h>

using namespace specmono;

namespace {

Exec exec_of(const benchmark::State& st) { return st.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_BadFraction(benchmark::State& st) {
    DiophantineParams p;
    p.alpha = 0.05;
    p.k_max = 2000;
    const FrequencyBox box{Vec2(1.0, 1.0), Vec2(2.0, 2.0)};
    for (auto _ : st) benchmark::DoNotOptimize(bad_fraction(box, p, 20000, 7, exec_of(st)));
}
BENCHMARK(BM_BadFraction)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

const PipelineConfig& annulus() {
    static const PipelineConfig cfg = champagne_annulus_config();
    return cfg;
}

const std::vector<Vec2>& anchors() {
    static const std::vector<Vec2> a =
        make_anchors(make_model(annulus().model), annulus().anchors, annulus().diophantine);
    return a;
}

void BM_Synthesize(benchmark::State& st) {
    const ModelPtr m = make_model(annulus().model);
    for (auto _ : st)
        benchmark::DoNotOptimize(synthesize_anchors(m, anchors(), annulus().band, annulus().synthesis, exec_of(st)));
}
BENCHMARK(BM_Synthesize)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_FitMicroCharts(benchmark::State& st) {
    const ModelPtr m = make_model(annulus().model);
    const SpectrumCloud cloud = synthesize_anchors(m, anchors(), annulus().band, annulus().synthesis);
    PseudoChartOptions opt = annulus().chart;
    opt.exec = exec_of(st);
    for (auto _ : st) benchmark::DoNotOptimize(fit_micro_charts(cloud, anchors(), opt));
}
BENCHMARK(BM_FitMicroCharts)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
