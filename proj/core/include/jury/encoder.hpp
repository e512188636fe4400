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

#ifndef JURY_ENCODER_HPP_
#define JURY_ENCODER_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "jury/dataset.hpp"
#include "jury/rng.hpp"
#include "jury/tensor.hpp"

namespace jury {

enum class EncoderKind { kPrecomputed, kHashedBow };

struct ContentEncoderConfig {
  EncoderKind kind = EncoderKind::kHashedBow;
  std::size_t dim = 64;
  std::size_t buckets = 4096;  // hashed_bow only
  bool trainable = true;

  bool operator==(const ContentEncoderConfig&) const = default;
};

// Lowercased tokens split on ASCII whitespace and punctuation. Bytes >= 0x80
// are kept inside tokens so UTF-8 sequences survive intact.
std::vector<std::string> Tokenize(std::string_view text);

// 64-bit FNV-1a.
std::uint64_t Fnv1a64(std::string_view bytes);

// (bucket, weight) pairs with weight = occurrences / token count, sorted by
// bucket. Empty for empty text.
using TokenBag = std::vector<std::pair<std::size_t, double>>;

// Sparse gradient with respect to the bucket table, keyed by bucket.
using BucketGradients = std::map<std::size_t, std::vector<double>>;

// Content embedding for an item: either the item's precomputed vector or the
// mean of trainable bucket embeddings over its tokens.
class ContentEncoder {
 public:
  ContentEncoder() = default;
  explicit ContentEncoder(ContentEncoderConfig config);

  void InitializeNormal(Rng& rng, double stddev);

  const ContentEncoderConfig& config() const { return config_; }
  std::size_t dim() const { return config_.dim; }
  bool trainable() const { return config_.trainable; }
  void set_trainable(bool trainable) { config_.trainable = trainable; }
  bool has_parameters() const { return config_.kind == EncoderKind::kHashedBow; }

  TokenBag Bag(std::string_view text) const;

  std::vector<double> Encode(const Item& item) const;
  void EncodeInto(const Item& item, std::span<double> out) const;
  void EncodeBag(const TokenBag& bag, std::span<double> out) const;

  // d(encode(item)) / d(table) contracted with `upstream`.
  BucketGradients Gradients(const Item& item, std::span<const double> upstream) const;
  // Same contraction, accumulated into a gradient block shaped like table().
  void AccumulateGradients(const TokenBag& bag, std::span<const double> upstream,
                           GradBlock& out) const;

  Tensor& table() { return table_; }
  const Tensor& table() const { return table_; }

 private:
  ContentEncoderConfig config_;
  Tensor table_;
};

}  // namespace jury

#endif  // JURY_ENCODER_HPP_
