#include <random>

#include <benchmark/benchmark.h>

#include "lector/analytics.hpp"

namespace {

struct Data {
    lector::Matrix x;
    std::vector<int> y;
};

Data dataset(Eigen::Index n, Eigen::Index d) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g;
    Data out{lector::Matrix(n, d), {}};
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) out.x(i, j) = g(rng);
        out.y.push_back(out.x(i, 0) + g(rng) > 0.5 ? 1 : 0);
    }
    return out;
}

void BM_TrainLogReg(benchmark::State& state) {
    const auto data = dataset(state.range(0), 10);
    for (auto _ : state) {
        auto model = lector::train_logreg(data.x, data.y);
        benchmark::DoNotOptimize(model.bias);
    }
}
BENCHMARK(BM_TrainLogReg)->Arg(100)->Arg(1000)->Unit(benchmark::kMicrosecond);

void BM_CrossValidate(benchmark::State& state) {
    const auto data = dataset(state.range(0), 10);
    lector::CVParams p;
    p.fold_size = static_cast<std::size_t>(state.range(0) / 3);
    for (auto _ : state) {
        auto r = lector::cross_validate(data.x, data.y, p);
        benchmark::DoNotOptimize(r.auc_mean);
    }
}
BENCHMARK(BM_CrossValidate)->Arg(60)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_Fdr(benchmark::State& state) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> a(static_cast<std::size_t>(state.range(0))), b(a.size());
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng) + 1.0;
    for (auto _ : state) benchmark::DoNotOptimize(lector::fdr(a, b));
}
BENCHMARK(BM_Fdr)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
