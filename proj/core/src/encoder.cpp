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

#include "jury/encoder.hpp"

#include <algorithm>
#include <random>

#include "jury/error.hpp"

namespace jury {

namespace {

bool IsTokenByte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (IsTokenByte(c)) {
      current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

ContentEncoder::ContentEncoder(ContentEncoderConfig config) : config_(config) {
  if (config_.dim == 0) throw Error(ErrorCode::kInvalidArgument, "encoder dim must be >= 1");
  if (config_.kind == EncoderKind::kHashedBow) {
    if (config_.buckets == 0) throw Error(ErrorCode::kInvalidArgument, "bucket count must be >= 1");
    table_ = Tensor("encoder.buckets", config_.buckets, config_.dim);
  }
}

void ContentEncoder::InitializeNormal(Rng& rng, double stddev) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (auto& x : table_.data) x = dist(rng);
}

TokenBag ContentEncoder::Bag(std::string_view text) const {
  TokenBag bag;
  if (config_.kind != EncoderKind::kHashedBow) return bag;
  const auto tokens = Tokenize(text);
  if (tokens.empty()) return bag;
  std::map<std::size_t, double> counts;
  for (const auto& t : tokens) counts[Fnv1a64(t) % config_.buckets] += 1.0;
  const double n = static_cast<double>(tokens.size());
  for (const auto& [bucket, count] : counts) bag.emplace_back(bucket, count / n);
  return bag;
}

void ContentEncoder::EncodeBag(const TokenBag& bag, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& [bucket, weight] : bag) {
    const auto row = table_.row(bucket);
    for (std::size_t d = 0; d < out.size(); ++d) out[d] += weight * row[d];
  }
}

void ContentEncoder::EncodeInto(const Item& item, std::span<double> out) const {
  if (out.size() != config_.dim) {
    throw Error(ErrorCode::kShapeMismatch, "encoder output buffer has wrong length");
  }
  if (config_.kind == EncoderKind::kPrecomputed) {
    if (!item.embedding) {
      throw Error(ErrorCode::kMissingEmbedding, "item lacks a precomputed embedding", item.item_id);
    }
    if (item.embedding->size() != config_.dim) {
      throw Error(ErrorCode::kShapeMismatch, "embedding length differs from encoder dim",
                  item.item_id);
    }
    std::copy(item.embedding->begin(), item.embedding->end(), out.begin());
    return;
  }
  EncodeBag(Bag(item.text), out);
}

std::vector<double> ContentEncoder::Encode(const Item& item) const {
  std::vector<double> out(config_.dim);
  EncodeInto(item, out);
  return out;
}

BucketGradients ContentEncoder::Gradients(const Item& item,
                                          std::span<const double> upstream) const {
  if (!config_.trainable) throw Error(ErrorCode::kNotTrainable, "encoder is frozen");
  if (upstream.size() != config_.dim) {
    throw Error(ErrorCode::kShapeMismatch, "upstream gradient has wrong length");
  }
  BucketGradients grads;
  for (const auto& [bucket, weight] : Bag(item.text)) {
    auto& g = grads[bucket];
    g.resize(config_.dim);
    for (std::size_t d = 0; d < config_.dim; ++d) g[d] = weight * upstream[d];
  }
  return grads;
}

void ContentEncoder::AccumulateGradients(const TokenBag& bag, std::span<const double> upstream,
                                         GradBlock& out) const {
  for (const auto& [bucket, weight] : bag) {
    auto g = out.touch_row(bucket);
    for (std::size_t d = 0; d < upstream.size(); ++d) g[d] += weight * upstream[d];
  }
}

}  // namespace jury
