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

#ifndef JURY_TENSOR_HPP_
#define JURY_TENSOR_HPP_

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace jury {

// Named row-major matrix of doubles. Vectors are 1 x n.
struct Tensor {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::string n, std::size_t r, std::size_t c)
      : name(std::move(n)), rows(r), cols(c), data(r * c, 0.0) {}

  std::size_t size() const { return data.size(); }
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Tensor&) const = default;
};

// How a parameter block is optimized. Embedding-style blocks receive sparse
// row updates; dense blocks are updated in full every step.
enum class ParamGroup { kEncoder, kEmbedding, kDense };

// Gradient buffer for one block, tracking touched rows for sparse blocks.
struct GradBlock {
  Tensor grad;
  bool sparse = false;
  std::vector<std::size_t> touched;
  std::vector<char> is_touched;

  GradBlock() = default;
  GradBlock(const Tensor& like, bool sparse_rows)
      : grad(like.name, like.rows, like.cols), sparse(sparse_rows),
        is_touched(sparse_rows ? like.rows : 0, 0) {}

  std::span<double> touch_row(std::size_t r) {
    if (sparse && !is_touched[r]) {
      is_touched[r] = 1;
      touched.push_back(r);
    }
    return grad.row(r);
  }

  void zero() {
    if (sparse) {
      for (std::size_t r : touched) {
        auto row = grad.row(r);
        std::fill(row.begin(), row.end(), 0.0);
        is_touched[r] = 0;
      }
      touched.clear();
    } else {
      std::fill(grad.data.begin(), grad.data.end(), 0.0);
    }
  }
};

}  // namespace jury

#endif  // JURY_TENSOR_HPP_
