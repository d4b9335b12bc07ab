#include "pifeat/tensor.hpp"

#include <cassert>
#include <cmath>

namespace pifeat::nn {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) {
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<std::size_t> s, std::vector<float> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (data.size() != shape_product(shape)) {
    throw ShapeMismatch("tensor data length " + std::to_string(data.size()) +
                        " does not match shape " + shape_string());
  }
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  const std::size_t n = shape_product(shape);
  return Tensor(std::move(shape), std::vector<float>(n, 0.0f));
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i > 0) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void debug_check_finite(const Tensor& t, const char* where) {
#ifndef NDEBUG
  for (float v : t.data) {
    assert(std::isfinite(v) && where != nullptr);
  }
#else
  (void)t;
  (void)where;
#endif
}

}  // namespace pifeat::nn
