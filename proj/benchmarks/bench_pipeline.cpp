// Copyright 2026 The avtime Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "avtime/clusterer.hpp"
#include "avtime/evaluator.hpp"
#include "avtime/interleaver.hpp"
#include "avtime/synthesizer.hpp"
#include "support/synthetic.hpp"

namespace {

void BM_HashEmbed(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(avtime::hash_embed("a large dog barks at the passing freight train", dim, 7));
  }
}
BENCHMARK(BM_HashEmbed)->Arg(64)->Arg(256)->Arg(1024);

void BM_Cluster(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto corpus = avtime::with_hash_embeddings(testing_support::themed_corpus(n, 1).corpus, 256, 7);
  avtime::ClusterOptions opts;
  opts.k = n / 8;
  opts.restarts = 1;
  for (auto _ : state) benchmark::DoNotOptimize(avtime::cluster(corpus, opts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Cluster)->Arg(200)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_BuildDataset(benchmark::State& state) {
  const auto clusters = static_cast<std::size_t>(state.range(0));
  const auto themed = testing_support::themed_corpus(clusters * 6, 2);
  avtime::ClusterAssignment a;
  for (std::size_t i = 0; i < themed.corpus.size(); ++i) {
    a.clip_ids.push_back(themed.corpus[i].id);
    a.cluster_of.push_back(i % clusters);
  }
  a.cluster_count = clusters;
  avtime::SynthesisConfig cfg;
  cfg.videos_per_cluster = 5;
  for (auto _ : state) benchmark::DoNotOptimize(avtime::build_dataset(themed.corpus, a, cfg));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(clusters * 5));
}
BENCHMARK(BM_BuildDataset)->Arg(100)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_Interleave(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  avtime::Rng rng(3);
  std::vector<double> vd(256 * dim), ad(100 * dim);
  for (auto& x : vd) x = rng.uniform01();
  for (auto& x : ad) x = rng.uniform01();
  const avtime::TokenSequence v(avtime::Modality::video, dim, vd);
  const avtime::TokenSequence a(avtime::Modality::audio, dim, ad);
  for (auto _ : state) benchmark::DoNotOptimize(avtime::interleave(v, a, 100, 0.25));
}
BENCHMARK(BM_Interleave)->Arg(64)->Arg(1024);

void BM_EvaluateAvedl(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  avtime::Rng rng(4);
  std::vector<avtime::GroundTruth> gts;
  std::vector<avtime::Prediction> preds;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string video = "v" + std::to_string(i % 50);
    const std::string label = "c" + std::to_string(i % 10);
    const double s = rng.uniform01() * 100.0;
    gts.push_back({video, label, s, s + 1.0 + rng.uniform01() * 20.0});
    for (int j = 0; j < 3; ++j) {
      const double ps = s + (rng.uniform01() - 0.5) * 5.0;
      preds.push_back({video, label, ps, ps + 1.0 + rng.uniform01() * 20.0, rng.uniform01()});
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(avtime::evaluate_avedl(preds, gts));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(preds.size()));
}
BENCHMARK(BM_EvaluateAvedl)->Arg(100)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
