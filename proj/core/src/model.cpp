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

#include "jury/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "jury/error.hpp"
#include "jury/rng.hpp"

namespace jury {

std::string_view ModelKindName(ModelKind kind) {
  switch (kind) {
    case ModelKind::kFull: return "full";
    case ModelKind::kGroupOnly: return "group-only";
    case ModelKind::kAggregate: return "aggregate";
  }
  return "full";
}

ModelKind ParseModelKind(std::string_view name) {
  if (name == "full") return ModelKind::kFull;
  if (name == "group-only" || name == "group_only") return ModelKind::kGroupOnly;
  if (name == "aggregate") return ModelKind::kAggregate;
  throw Error(ErrorCode::kInvalidArgument, "unknown model kind", std::string(name));
}

std::size_t ModelConfig::CrossWidth(std::size_t n_attributes) const {
  return encoder.dim + (include_annotator_id ? embedding_dim : 0) +
         (include_groups ? n_attributes * embedding_dim : 0);
}

void ModelConfig::Validate() const {
  if (embedding_dim == 0) throw Error(ErrorCode::kInvalidArgument, "embedding_dim must be >= 1");
  if (encoder.dim == 0) throw Error(ErrorCode::kInvalidArgument, "encoder dim must be >= 1");
  for (std::size_t w : deep_layers) {
    if (w == 0) throw Error(ErrorCode::kInvalidArgument, "deep layer widths must be >= 1");
  }
}

void TrainConfig::Validate() const {
  if (batch_size == 0) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (!(lr_dense >= 0 && lr_embedding >= 0 && lr_encoder >= 0)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rates must be >= 0");
  }
  if (!(unknown_substitution_rate >= 0 && unknown_substitution_rate <= 1)) {
    throw Error(ErrorCode::kInvalidArgument, "unknown_substitution_rate must lie in [0, 1]");
  }
}

namespace {

void FillUniform(Tensor& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& x : t.data) x = dist(rng);
}

void FillNormal(Tensor& t, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& x : t.data) x = dist(rng);
}

constexpr double kEmbeddingInitStddev = 0.05;

// y = W x + b with W (out x in).
void Affine(const Tensor& w, const Tensor& b, std::span<const double> x, std::vector<double>& y) {
  y.resize(w.rows);
  const double* wp = w.data.data();
  for (std::size_t r = 0; r < w.rows; ++r) {
    double acc = b.data[r];
    const double* row = wp + r * w.cols;
    for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
    y[r] = acc;
  }
}

}  // namespace

void JuryModel::BuildIndex() {
  annotator_index_.clear();
  for (std::size_t i = 0; i < annotator_ids_.size(); ++i) annotator_index_[annotator_ids_[i]] = i;
}

void JuryModel::BuildLayout() {
  params_.clear();
  group_tables_.clear();
  cross_w_.clear();
  cross_b_.clear();
  deep_w_.clear();
  deep_b_.clear();
  annotator_table_.reset();
  const std::size_t e = config_.embedding_dim;
  if (config_.include_annotator_id) {
    annotator_table_ = params_.size();
    params_.emplace_back("annotators", annotator_ids_.size() + 1, e);
  }
  if (config_.include_groups) {
    for (std::size_t a = 0; a < attributes_.size(); ++a) {
      group_tables_.push_back(params_.size());
      params_.emplace_back("groups." + attributes_[a], values_[a].size() + 1, e);
    }
  }
  width_ = config_.CrossWidth(config_.include_groups ? attributes_.size() : 0);
  for (std::size_t l = 0; l < config_.cross_layers; ++l) {
    cross_w_.push_back(params_.size());
    params_.emplace_back("cross." + std::to_string(l) + ".w", width_, width_);
    cross_b_.push_back(params_.size());
    params_.emplace_back("cross." + std::to_string(l) + ".b", 1, width_);
  }
  std::size_t in = width_;
  for (std::size_t j = 0; j < config_.deep_layers.size(); ++j) {
    const std::size_t out = config_.deep_layers[j];
    deep_w_.push_back(params_.size());
    params_.emplace_back("deep." + std::to_string(j) + ".w", out, in);
    deep_b_.push_back(params_.size());
    params_.emplace_back("deep." + std::to_string(j) + ".b", 1, out);
    in = out;
  }
  out_w_ = params_.size();
  params_.emplace_back("output.w", 1, in);
  out_b_ = params_.size();
  params_.emplace_back("output.b", 1, 1);
}

JuryModel JuryModel::Initialize(const ModelConfig& config_in, const Dataset& dataset,
                                std::uint64_t seed, ModelKind kind) {
  ModelConfig config = config_in;
  if (kind == ModelKind::kGroupOnly) config.include_annotator_id = false;
  if (kind == ModelKind::kAggregate) {
    config.include_annotator_id = false;
    config.include_groups = false;
  }
  config.Validate();
  if (config.encoder.kind == EncoderKind::kPrecomputed && dataset.embedding_dim() != 0 &&
      dataset.embedding_dim() != config.encoder.dim) {
    throw Error(ErrorCode::kShapeMismatch, "precomputed encoder dim differs from dataset embeddings");
  }

  JuryModel m;
  m.config_ = config;
  m.kind_ = kind;
  m.attributes_ = dataset.schema().names;
  for (const auto& name : m.attributes_) m.values_.push_back(dataset.schema().values.at(name));
  for (const auto& a : dataset.annotators()) {
    m.annotator_ids_.push_back(a.annotator_id);
    std::vector<std::size_t> rows;
    for (std::size_t k = 0; k < m.attributes_.size(); ++k) {
      rows.push_back(*dataset.schema().ValueIndex(m.attributes_[k], a.attributes.at(m.attributes_[k])));
    }
    m.annotator_groups_.push_back(std::move(rows));
  }
  m.BuildIndex();
  m.BuildLayout();

  Rng rng = MakeStream(seed, 0);
  m.encoder_ = ContentEncoder(config.encoder);
  m.encoder_.InitializeNormal(rng, kEmbeddingInitStddev);
  if (m.annotator_table_) FillNormal(m.params_[*m.annotator_table_], kEmbeddingInitStddev, rng);
  for (std::size_t t : m.group_tables_) FillNormal(m.params_[t], kEmbeddingInitStddev, rng);
  for (std::size_t t : m.cross_w_) {
    FillUniform(m.params_[t], 1.0 / std::sqrt(static_cast<double>(m.params_[t].cols)), rng);
  }
  for (std::size_t t : m.deep_w_) {
    FillUniform(m.params_[t], 1.0 / std::sqrt(static_cast<double>(m.params_[t].cols)), rng);
  }
  FillUniform(m.params_[m.out_w_], 1.0 / std::sqrt(static_cast<double>(m.params_[m.out_w_].cols)), rng);

  // Start the output at the mean target so early steps shape the network
  // instead of chasing the label offset.
  double sum = 0.0;
  std::size_t n = 0;
  if (kind == ModelKind::kAggregate) {
    for (std::size_t i = 0; i < dataset.items().size(); ++i) {
      const auto& anns = dataset.AnnotationsOfItem(i);
      if (anns.empty()) continue;
      double s = 0.0;
      for (std::size_t k : anns) s += dataset.annotations()[k].score;
      sum += s / static_cast<double>(anns.size());
      ++n;
    }
  } else {
    for (const auto& a : dataset.annotations()) sum += a.score;
    n = dataset.annotations().size();
  }
  m.params_[m.out_b_].data[0] = n > 0 ? sum / static_cast<double>(n) : 0.0;
  return m;
}

std::optional<std::size_t> JuryModel::FindAnnotator(const std::string& id) const {
  auto it = annotator_index_.find(id);
  if (it == annotator_index_.end()) return std::nullopt;
  return it->second;
}

FeatureRows JuryModel::ResolveAnnotator(std::size_t row) const {
  FeatureRows rows;
  rows.annotator_row = row;
  if (row < annotator_groups_.size()) {
    rows.group_rows = annotator_groups_[row];
  } else {
    for (const auto& vals : values_) {
      auto pos = std::lower_bound(vals.begin(), vals.end(), std::string(kUndisclosed));
      rows.group_rows.push_back(pos != vals.end() && *pos == kUndisclosed
                                    ? static_cast<std::size_t>(pos - vals.begin())
                                    : vals.size());
    }
  }
  return rows;
}

FeatureRows JuryModel::Resolve(const PredictionRequest& request) const {
  std::size_t row = unknown_annotator_row();
  if (request.annotator_id) {
    if (auto found = FindAnnotator(*request.annotator_id)) row = *found;
  }
  FeatureRows rows = ResolveAnnotator(row);
  if (request.attributes) {
    for (std::size_t k = 0; k < attributes_.size(); ++k) {
      const auto& vals = values_[k];
      auto it = request.attributes->find(attributes_[k]);
      const std::string value = it != request.attributes->end() ? it->second : kUndisclosed;
      auto pos = std::lower_bound(vals.begin(), vals.end(), value);
      rows.group_rows[k] = pos != vals.end() && *pos == value
                               ? static_cast<std::size_t>(pos - vals.begin())
                               : vals.size();
    }
  }
  return rows;
}

double JuryModel::ForwardEncoded(std::span<const double> content, const FeatureRows& rows,
                                 Workspace& ws) const {
  if (content.size() != config_.encoder.dim) {
    throw Error(ErrorCode::kShapeMismatch, "content embedding length differs from encoder dim");
  }
  const std::size_t e = config_.embedding_dim;
  const std::size_t L = config_.cross_layers;
  const std::size_t J = config_.deep_layers.size();
  ws.cross.resize(L + 1);
  ws.linear.resize(L);
  ws.pre.resize(J);
  ws.act.resize(J + 1);

  auto& x0 = ws.cross[0];
  x0.resize(width_);
  std::copy(content.begin(), content.end(), x0.begin());
  std::size_t off = content.size();
  if (annotator_table_) {
    const auto& table = params_[*annotator_table_];
    if (rows.annotator_row >= table.rows) throw Error(ErrorCode::kShapeMismatch, "annotator row out of range");
    auto r = table.row(rows.annotator_row);
    std::copy(r.begin(), r.end(), x0.begin() + off);
    off += e;
  }
  if (!group_tables_.empty()) {
    if (rows.group_rows.size() != group_tables_.size()) {
      throw Error(ErrorCode::kShapeMismatch, "group row count differs from attribute count");
    }
    for (std::size_t k = 0; k < group_tables_.size(); ++k) {
      const auto& table = params_[group_tables_[k]];
      if (rows.group_rows[k] >= table.rows) throw Error(ErrorCode::kShapeMismatch, "group row out of range");
      auto r = table.row(rows.group_rows[k]);
      std::copy(r.begin(), r.end(), x0.begin() + off);
      off += e;
    }
  }

  for (std::size_t l = 0; l < L; ++l) {
    Affine(params_[cross_w_[l]], params_[cross_b_[l]], ws.cross[l], ws.linear[l]);
    auto& next = ws.cross[l + 1];
    next.resize(width_);
    const auto& cur = ws.cross[l];
    const auto& lin = ws.linear[l];
    for (std::size_t i = 0; i < width_; ++i) next[i] = x0[i] * lin[i] + cur[i];
  }
  ws.act[0] = ws.cross[L];
  for (std::size_t j = 0; j < J; ++j) {
    Affine(params_[deep_w_[j]], params_[deep_b_[j]], ws.act[j], ws.pre[j]);
    auto& a = ws.act[j + 1];
    a.resize(ws.pre[j].size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] = ws.pre[j][i] > 0.0 ? ws.pre[j][i] : 0.0;
  }
  const auto& h = ws.act[J];
  const auto& w = params_[out_w_].data;
  double out = params_[out_b_].data[0];
  for (std::size_t i = 0; i < h.size(); ++i) out += w[i] * h[i];
  ws.output = out;
  return out;
}

double JuryModel::ForwardEncoded(std::span<const double> content, const FeatureRows& rows) const {
  Workspace ws;
  return ForwardEncoded(content, rows, ws);
}

double JuryModel::Forward(const Item& item, const PredictionRequest& request) const {
  const auto content = encoder_.Encode(item);
  return ForwardEncoded(content, Resolve(request));
}

double JuryModel::Predict(const Item& item, const PredictionRequest& request) const {
  return std::clamp(Forward(item, request), kMinScore, kMaxScore);
}

void JuryModel::Backward(const Workspace& ws, const FeatureRows& rows, double dout,
                         ModelGradients& grads, std::span<double> content_grad) const {
  const std::size_t base = encoder_.has_parameters() ? 1 : 0;
  auto g = [&](std::size_t param) -> GradBlock& { return grads.block(base + param); };
  const std::size_t L = config_.cross_layers;
  const std::size_t J = config_.deep_layers.size();

  // Output unit.
  const auto& hJ = ws.act[J];
  {
    auto& gw = g(out_w_).grad.data;
    for (std::size_t i = 0; i < hJ.size(); ++i) gw[i] += dout * hJ[i];
    g(out_b_).grad.data[0] += dout;
  }
  std::vector<double> dh(hJ.size());
  {
    const auto& w = params_[out_w_].data;
    for (std::size_t i = 0; i < dh.size(); ++i) dh[i] = dout * w[i];
  }

  // Deep network.
  std::vector<double> dz;
  for (std::size_t jj = J; jj-- > 0;) {
    const auto& pre = ws.pre[jj];
    const auto& in = ws.act[jj];
    dz.assign(pre.size(), 0.0);
    for (std::size_t i = 0; i < pre.size(); ++i) dz[i] = pre[i] > 0.0 ? dh[i] : 0.0;
    const Tensor& w = params_[deep_w_[jj]];
    auto& gw = g(deep_w_[jj]).grad;
    auto& gb = g(deep_b_[jj]).grad.data;
    std::vector<double> din(in.size(), 0.0);
    for (std::size_t r = 0; r < w.rows; ++r) {
      const double d = dz[r];
      gb[r] += d;
      if (d == 0.0) continue;
      double* gr = gw.data.data() + r * w.cols;
      const double* wr = w.data.data() + r * w.cols;
      for (std::size_t c = 0; c < w.cols; ++c) {
        gr[c] += d * in[c];
        din[c] += d * wr[c];
      }
    }
    dh = std::move(din);
  }

  // Cross network: x_{l+1} = x0 * u_l + x_l, u_l = W_l x_l + b_l.
  const auto& x0 = ws.cross[0];
  std::vector<double> dx = std::move(dh);  // d/d x_L
  std::vector<double> dx0(width_, 0.0);
  std::vector<double> du(width_);
  for (std::size_t ll = L; ll-- > 0;) {
    const auto& u = ws.linear[ll];
    const auto& xl = ws.cross[ll];
    for (std::size_t i = 0; i < width_; ++i) {
      du[i] = dx[i] * x0[i];
      dx0[i] += dx[i] * u[i];
    }
    const Tensor& w = params_[cross_w_[ll]];
    auto& gw = g(cross_w_[ll]).grad;
    auto& gb = g(cross_b_[ll]).grad.data;
    std::vector<double> dprev = dx;  // identity path
    for (std::size_t r = 0; r < width_; ++r) {
      const double d = du[r];
      gb[r] += d;
      if (d == 0.0) continue;
      double* gr = gw.data.data() + r * width_;
      const double* wr = w.data.data() + r * width_;
      for (std::size_t c = 0; c < width_; ++c) {
        gr[c] += d * xl[c];
        dprev[c] += d * wr[c];
      }
    }
    dx = std::move(dprev);
  }
  for (std::size_t i = 0; i < width_; ++i) dx0[i] += dx[i];

  // Scatter x0 gradient into embedding rows.
  const std::size_t cdim = config_.encoder.dim;
  const std::size_t e = config_.embedding_dim;
  if (!content_grad.empty()) {
    std::copy(dx0.begin(), dx0.begin() + static_cast<std::ptrdiff_t>(cdim), content_grad.begin());
  }
  std::size_t off = cdim;
  if (annotator_table_) {
    auto row = g(*annotator_table_).touch_row(rows.annotator_row);
    for (std::size_t d = 0; d < e; ++d) row[d] += dx0[off + d];
    off += e;
  }
  for (std::size_t k = 0; k < group_tables_.size(); ++k) {
    auto row = g(group_tables_[k]).touch_row(rows.group_rows[k]);
    for (std::size_t d = 0; d < e; ++d) row[d] += dx0[off + d];
    off += e;
  }
}

std::vector<Tensor*> JuryModel::Blocks() {
  std::vector<Tensor*> out;
  if (encoder_.has_parameters()) out.push_back(&encoder_.table());
  for (auto& t : params_) out.push_back(&t);
  return out;
}

std::vector<const Tensor*> JuryModel::Blocks() const {
  std::vector<const Tensor*> out;
  if (encoder_.has_parameters()) out.push_back(&encoder_.table());
  for (const auto& t : params_) out.push_back(&t);
  return out;
}

std::vector<ParamGroup> JuryModel::BlockGroups() const {
  std::vector<ParamGroup> out;
  if (encoder_.has_parameters()) out.push_back(ParamGroup::kEncoder);
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const bool embedding = (annotator_table_ && i == *annotator_table_) ||
                           std::find(group_tables_.begin(), group_tables_.end(), i) != group_tables_.end();
    out.push_back(embedding ? ParamGroup::kEmbedding : ParamGroup::kDense);
  }
  return out;
}

bool JuryModel::SameParameters(const JuryModel& other) const {
  const auto a = Blocks();
  const auto b = other.Blocks();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(*a[i] == *b[i])) return false;
  }
  return true;
}

ModelGradients::ModelGradients(const JuryModel& model) {
  const auto blocks = model.Blocks();
  const auto groups = model.BlockGroups();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    blocks_.emplace_back(*blocks[i], groups[i] != ParamGroup::kDense);
  }
}

void ModelGradients::Zero() {
  for (auto& b : blocks_) b.zero();
}

}  // namespace jury
