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

#include "jury/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "jury/error.hpp"
#include "jury/rng.hpp"

namespace jury {

namespace {

// Token bags (hashed_bow) or nothing (precomputed), per dataset item.
class ContentCache {
 public:
  ContentCache(const JuryModel& model, const Dataset& dataset, bool precompute)
      : model_(model), dataset_(dataset) {
    if (precompute && model.encoder().has_parameters()) {
      bags_.reserve(dataset.items().size());
      for (const auto& item : dataset.items()) bags_.push_back(model.encoder().Bag(item.text));
    }
  }

  const TokenBag& bag(std::size_t item) {
    if (!bags_.empty()) return bags_[item];
    scratch_ = model_.encoder().Bag(dataset_.item(item).text);
    return scratch_;
  }

  void Encode(std::size_t item, std::span<double> out) {
    if (model_.encoder().has_parameters()) {
      model_.encoder().EncodeBag(bag(item), out);
    } else {
      model_.encoder().EncodeInto(dataset_.item(item), out);
    }
  }

 private:
  const JuryModel& model_;
  const Dataset& dataset_;
  std::vector<TokenBag> bags_;
  TokenBag scratch_;
};

FeatureRows RowsFor(const JuryModel& model, const TrainingExample& ex) {
  if (model.kind() == ModelKind::kAggregate) return {};
  return model.ResolveAnnotator(ex.annotator_row);
}

// Adds d(mean squared error)/d(params) for `examples` to `grads` and returns
// the summed squared error.
double AccumulateBatch(const JuryModel& model, ContentCache& cache,
                       std::span<const TrainingExample> examples,
                       std::span<const std::size_t> substitute_unknown, ModelGradients& grads,
                       bool encoder_gradients, double scale) {
  const std::size_t dim = model.encoder().dim();
  std::vector<double> content(dim), content_grad(dim);
  JuryModel::Workspace ws;
  double sse = 0.0;
  std::size_t next_sub = 0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    FeatureRows rows = RowsFor(model, ex);
    if (next_sub < substitute_unknown.size() && substitute_unknown[next_sub] == i) {
      rows.annotator_row = model.unknown_annotator_row();
      ++next_sub;
    }
    cache.Encode(ex.item_index, content);
    const double pred = model.ForwardEncoded(content, rows, ws);
    const double err = pred - ex.target;
    sse += err * err;
    const bool want_content = encoder_gradients && model.encoder().has_parameters();
    model.Backward(ws, rows, 2.0 * err * scale, grads,
                   want_content ? std::span<double>(content_grad) : std::span<double>());
    if (want_content) {
      model.encoder().AccumulateGradients(cache.bag(ex.item_index), content_grad, grads.block(0));
    }
  }
  return sse;
}

class Adam {
 public:
  Adam(JuryModel& model, const TrainConfig& config) : config_(config) {
    for (const Tensor* t : model.Blocks()) {
      m_.emplace_back(t->size(), 0.0);
      v_.emplace_back(t->size(), 0.0);
    }
    groups_ = model.BlockGroups();
  }

  void Step(JuryModel& model, ModelGradients& grads, bool encoder_frozen) {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    auto blocks = model.Blocks();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      double lr = config_.lr_dense;
      if (groups_[b] == ParamGroup::kEmbedding) lr = config_.lr_embedding;
      if (groups_[b] == ParamGroup::kEncoder) {
        if (encoder_frozen) continue;
        lr = config_.lr_encoder;
      }
      GradBlock& g = grads.block(b);
      Tensor& p = *blocks[b];
      if (g.sparse) {
        for (std::size_t r : g.touched) {
          const std::size_t begin = r * p.cols;
          Update(p, g, b, begin, begin + p.cols, lr, bc1, bc2);
        }
      } else {
        Update(p, g, b, 0, p.size(), lr, bc1, bc2);
      }
    }
  }

 private:
  void Update(Tensor& p, const GradBlock& g, std::size_t b, std::size_t begin, std::size_t end,
              double lr, double bc1, double bc2) {
    auto& m = m_[b];
    auto& v = v_[b];
    const double b1 = config_.beta1, b2 = config_.beta2, eps = config_.epsilon;
    for (std::size_t i = begin; i < end; ++i) {
      const double gi = g.grad.data[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      p.data[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }

  TrainConfig config_;
  std::vector<std::vector<double>> m_, v_;
  std::vector<ParamGroup> groups_;
  std::size_t t_ = 0;
};

JuryModel RunTraining(JuryModel model, const Dataset& dataset,
                      std::vector<TrainingExample> examples, const TrainConfig& config,
                      const EpochCallback& on_epoch) {
  if (examples.empty()) throw Error(ErrorCode::kEmptyDataset, "no training examples");
  ContentCache cache(model, dataset, /*precompute=*/true);
  model.mutable_metadata() = {};
  model.mutable_metadata().initial_loss = MeanSquaredError(model, dataset, examples);

  const std::size_t epochs = config.joint_epochs + config.frozen_epochs;
  if (epochs == 0) return model;

  ModelGradients grads(model);
  Adam adam(model, config);
  const bool has_unknown_row = model.config().include_annotator_id;
  std::vector<std::size_t> order(examples.size());
  std::vector<TrainingExample> batch;
  std::vector<std::size_t> substitutions;
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    const bool frozen = epoch >= config.joint_epochs;
    if (frozen && model.encoder().has_parameters()) model.FreezeEncoder();
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = MakeStream(config.seed, 1 + 2 * epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    Rng substitution_rng = MakeStream(config.seed, 2 + 2 * epoch);
    std::bernoulli_distribution substitute(config.unknown_substitution_rate);

    double epoch_sse = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      substitutions.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(examples[order[i]]);
        if (has_unknown_row && substitute(substitution_rng)) substitutions.push_back(i - start);
      }
      grads.Zero();
      const double sse = AccumulateBatch(model, cache, batch, substitutions, grads,
                                         !frozen && model.encoder().has_parameters(),
                                         1.0 / static_cast<double>(batch.size()));
      if (!std::isfinite(sse)) {
        throw Error(ErrorCode::kNonFiniteLoss, "training loss is not finite",
                    "step=" + std::to_string(step) + " epoch=" + std::to_string(epoch));
      }
      adam.Step(model, grads, frozen);
      epoch_sse += sse;
      ++step;
    }
    const double mse = epoch_sse / static_cast<double>(examples.size());
    auto& meta = model.mutable_metadata();
    meta.epoch_losses.push_back(mse);
    meta.epochs_run = epoch + 1;
    meta.steps = step;
    meta.encoder_frozen = frozen;
    if (on_epoch) on_epoch(epoch, mse);
  }
  if (config.frozen_epochs > 0 && model.encoder().has_parameters()) {
    model.FreezeEncoder();
    model.mutable_metadata().encoder_frozen = true;
  }
  return model;
}

}  // namespace

std::vector<TrainingExample> AnnotatorExamples(const JuryModel& model, const Dataset& dataset) {
  std::vector<TrainingExample> out;
  out.reserve(dataset.annotations().size());
  for (const auto& a : dataset.annotations()) {
    const auto row = model.FindAnnotator(a.annotator_id);
    if (!row) throw Error(ErrorCode::kUnknownAnnotator, "annotator missing from model", a.annotator_id);
    out.push_back({dataset.ItemIndexOf(a), *row, a.score});
  }
  return out;
}

std::vector<TrainingExample> AggregateExamples(const Dataset& dataset) {
  std::vector<TrainingExample> out;
  for (std::size_t i = 0; i < dataset.items().size(); ++i) {
    const auto& anns = dataset.AnnotationsOfItem(i);
    if (anns.empty()) continue;
    double sum = 0.0;
    for (std::size_t k : anns) sum += dataset.annotations()[k].score;
    out.push_back({i, 0, sum / static_cast<double>(anns.size())});
  }
  return out;
}

double BatchLossAndGradients(const JuryModel& model, const Dataset& dataset,
                             std::span<const TrainingExample> examples, ModelGradients& grads,
                             bool encoder_gradients) {
  if (examples.empty()) throw Error(ErrorCode::kEmptyDataset, "empty batch");
  ContentCache cache(model, dataset, /*precompute=*/false);
  const double n = static_cast<double>(examples.size());
  return AccumulateBatch(model, cache, examples, {}, grads, encoder_gradients, 1.0 / n) / n;
}

double MeanSquaredError(const JuryModel& model, const Dataset& dataset,
                        std::span<const TrainingExample> examples) {
  if (examples.empty()) throw Error(ErrorCode::kEmptyDataset, "no examples");
  ContentCache cache(model, dataset, /*precompute=*/false);
  std::vector<double> content(model.encoder().dim());
  JuryModel::Workspace ws;
  double sse = 0.0;
  for (const auto& ex : examples) {
    cache.Encode(ex.item_index, content);
    const double err = model.ForwardEncoded(content, RowsFor(model, ex), ws) - ex.target;
    sse += err * err;
  }
  return sse / static_cast<double>(examples.size());
}

JuryModel TrainKind(ModelKind kind, const Dataset& dataset, const ModelConfig& model_config,
                    const TrainConfig& train_config, const EpochCallback& on_epoch) {
  train_config.Validate();
  if (dataset.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no annotations");
  JuryModel model = JuryModel::Initialize(model_config, dataset, train_config.seed, kind);
  auto examples = kind == ModelKind::kAggregate ? AggregateExamples(dataset)
                                                : AnnotatorExamples(model, dataset);
  return RunTraining(std::move(model), dataset, std::move(examples), train_config, on_epoch);
}

JuryModel Train(const Dataset& dataset, const ModelConfig& model_config,
                const TrainConfig& train_config, const EpochCallback& on_epoch) {
  const ModelKind kind = model_config.include_annotator_id ? ModelKind::kFull : ModelKind::kGroupOnly;
  return TrainKind(kind, dataset, model_config, train_config, on_epoch);
}

JuryModel TrainGroupOnly(const Dataset& dataset, const ModelConfig& model_config,
                         const TrainConfig& train_config, const EpochCallback& on_epoch) {
  return TrainKind(ModelKind::kGroupOnly, dataset, model_config, train_config, on_epoch);
}

JuryModel TrainBaselineAggregate(const Dataset& dataset, const ModelConfig& model_config,
                                 const TrainConfig& train_config, const EpochCallback& on_epoch) {
  return TrainKind(ModelKind::kAggregate, dataset, model_config, train_config, on_epoch);
}

}  // namespace jury
