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

#ifndef JURY_TRAINER_HPP_
#define JURY_TRAINER_HPP_

#include <functional>
#include <vector>

#include "jury/dataset.hpp"
#include "jury/model.hpp"

namespace jury {

// One regression target. For per-annotator models `annotator_row` indexes the
// model's annotator table; aggregate examples carry no annotator.
struct TrainingExample {
  std::size_t item_index = 0;
  std::size_t annotator_row = 0;
  double target = 0.0;
};

// Per-annotator examples, one per annotation, in dataset order.
std::vector<TrainingExample> AnnotatorExamples(const JuryModel& model, const Dataset& dataset);
// One example per annotated item with the mean label as target.
std::vector<TrainingExample> AggregateExamples(const Dataset& dataset);

// Mean squared error of `examples` plus its gradient, accumulated into `grads`
// (not zeroed here). The encoder table receives gradients only when
// `encoder_gradients` is set.
double BatchLossAndGradients(const JuryModel& model, const Dataset& dataset,
                             std::span<const TrainingExample> examples, ModelGradients& grads,
                             bool encoder_gradients);
double MeanSquaredError(const JuryModel& model, const Dataset& dataset,
                        std::span<const TrainingExample> examples);

// Called after each epoch with (epoch index, mean training MSE).
using EpochCallback = std::function<void(std::size_t, double)>;

// joint_epochs with the encoder trainable, then frozen_epochs with it frozen.
// Adam with per-group rates; embedding tables use sparse (lazy) row updates.
// Throws EmptyDataset and NonFiniteLoss.
JuryModel Train(const Dataset& dataset, const ModelConfig& model_config,
                const TrainConfig& train_config, const EpochCallback& on_epoch = {});
// include_annotator_id = false, same pipeline.
JuryModel TrainGroupOnly(const Dataset& dataset, const ModelConfig& model_config,
                         const TrainConfig& train_config, const EpochCallback& on_epoch = {});
// Content-only model fit to per-item mean labels.
JuryModel TrainBaselineAggregate(const Dataset& dataset, const ModelConfig& model_config,
                                 const TrainConfig& train_config,
                                 const EpochCallback& on_epoch = {});
JuryModel TrainKind(ModelKind kind, const Dataset& dataset, const ModelConfig& model_config,
                    const TrainConfig& train_config, const EpochCallback& on_epoch = {});

}  // namespace jury

#endif  // JURY_TRAINER_HPP_
