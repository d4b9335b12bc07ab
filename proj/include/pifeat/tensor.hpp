#pragma once

// 32-bit row-major tensors for the forward-only inference runtime. The
// geometry core stays in 64-bit; inference mirrors the embedded deployment
// arithmetic.

#include <cstddef>
#include <string>
#include <vector>

#include "pifeat/errors.hpp"

namespace pifeat::nn {

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, std::vector<float> d);

  static Tensor zeros(std::vector<std::size_t> shape);

  std::size_t size() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rank() const { return shape.size(); }

  // row-major element access
  float& at2(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  float at2(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
  float& at3(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  float at3(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  std::string shape_string() const;
};

std::size_t shape_product(const std::vector<std::size_t>& shape);

/// Debug-mode layer postcondition: every element finite.
void debug_check_finite(const Tensor& t, const char* where);

}  // namespace pifeat::nn
