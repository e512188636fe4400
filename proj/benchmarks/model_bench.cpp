// Copyright 2026 The JuryLearn Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "jury/synthetic.hpp"
#include "jury/trainer.hpp"

namespace jury {
namespace {

const Dataset& BenchData() {
  static const Dataset d = [] {
    SyntheticSpec s;
    s.attribute_values = {{"gender", {"a", "b", "c"}}, {"age", {"young", "old"}}};
    s.n_items = 200;
    s.n_annotators = 100;
    s.seed = 1;
    return GenerateSynthetic(s).first;
  }();
  return d;
}

// Default architecture: 3 cross layers, 256x3 deep.
void BM_Forward(benchmark::State& state) {
  const Dataset& d = BenchData();
  const JuryModel m = JuryModel::Initialize(ModelConfig{}, d, 1);
  const std::vector<double> content = m.encoder().Encode(d.item(0));
  const FeatureRows rows = m.ResolveAnnotator(0);
  JuryModel::Workspace ws;
  for (auto _ : state) benchmark::DoNotOptimize(m.ForwardEncoded(content, rows, ws));
}
BENCHMARK(BM_Forward);

void BM_BatchGradients(benchmark::State& state) {
  const Dataset& d = BenchData();
  const JuryModel m = JuryModel::Initialize(ModelConfig{}, d, 1);
  const auto examples = AnnotatorExamples(m, d);
  const std::span<const TrainingExample> batch(examples.data(), static_cast<std::size_t>(state.range(0)));
  ModelGradients grads(m);
  for (auto _ : state) {
    grads.Zero();
    benchmark::DoNotOptimize(BatchLossAndGradients(m, d, batch, grads, true));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BatchGradients)->Arg(16)->Arg(64);

}  // namespace
}  // namespace jury

BENCHMARK_MAIN();
