#include <benchmark/benchmark.h>

#include "affgest/bayesnet.hpp"
#include "affgest/fusion.hpp"
#include "affgest/gesture.hpp"
#include "affgest/simgen.hpp"

namespace {

using namespace affgest;

const AffordanceNetwork& network() {
  static const AffordanceNetwork net = [] {
    const auto rs = generate_records(3000, WorldTable::standard(), UtteranceGrammar::standard(), 7);
    return learn_cpts(rs, NetworkStructure::standard(build_vocabulary(rs)), 1.0);
  }();
  return net;
}

std::vector<FeatureSequence> sequences(const std::string& action, int n) {
  std::vector<FeatureSequence> out;
  for (int i = 0; i < n; ++i) out.push_back(preprocess(generate_trajectory(action, GestureParams::standard(), i)));
  return out;
}

void BM_LearnCpts(benchmark::State& state) {
  const auto rs = generate_records(static_cast<std::size_t>(state.range(0)), WorldTable::standard(),
                                   UtteranceGrammar::standard(), 1);
  const auto s = NetworkStructure::standard(build_vocabulary(rs));
  for (auto _ : state) benchmark::DoNotOptimize(learn_cpts(rs, s, 1.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LearnCpts)->Arg(1000)->Arg(10000);

void BM_PosteriorObjVel(benchmark::State& state) {
  Evidence ev;
  ev.hard = {{"Action", "tap"}, {"Shape", "sphere"}, {"rolls", "present"}};
  ev.soft["Size"] = {0.2, 0.3, 0.5};
  for (auto _ : state) benchmark::DoNotOptimize(posterior(network(), ev, vars::kObjVel));
}
BENCHMARK(BM_PosteriorObjVel);

void BM_WordDelta(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        word_delta(network(), {{"Shape", "sphere"}, {"Size", "big"}}, {{"ObjVel", "fast"}}, "tap"));
  }
}
BENCHMARK(BM_WordDelta);

void BM_SoftFusion(benchmark::State& state) {
  const auto hmm = LabelDistribution::from_weights(action_domain(), {0.1, 0.7, 0.2});
  Evidence ev;
  ev.hard = {{"Shape", "box"}, {"Size", "big"}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_downstream(hmm, network(), ev, vars::kObjVel, FusionStrategy::kSoft));
  }
}
BENCHMARK(BM_SoftFusion);

void BM_ForwardLogLikelihood(benchmark::State& state) {
  static const auto model = [] {
    HmmTrainingOptions o;
    o.max_iters = 10;
    return train_hmm(sequences("tap", 20), o, "tap").model;
  }();
  const auto seq = sequences("grasp", 1)[0];
  for (auto _ : state) benchmark::DoNotOptimize(forward_log_likelihood(model, seq));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(seq.samples.size()));
}
BENCHMARK(BM_ForwardLogLikelihood);

void BM_TrainHmm(benchmark::State& state) {
  const auto data = sequences("touch", static_cast<int>(state.range(0)));
  HmmTrainingOptions o;
  o.max_iters = 10;
  o.tol = 0.0;
  for (auto _ : state) benchmark::DoNotOptimize(train_hmm(data, o, "touch"));
}
BENCHMARK(BM_TrainHmm)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_GenerateTrajectory(benchmark::State& state) {
  const auto p = GestureParams::standard();
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_trajectory("grasp", p, seed++));
}
BENCHMARK(BM_GenerateTrajectory);

}  // namespace

BENCHMARK_MAIN();
