#include "ldp/tensor.hpp"

#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

namespace ldp {

void fail(const std::string& msg) { throw std::runtime_error(msg); }

std::string shape_str(const std::vector<int>& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ", ";
    os << shape[i];
  }
  os << ")";
  return os.str();
}

std::int64_t shape_numel(const std::vector<int>& shape) {
  std::int64_t n = 1;
  for (int d : shape) {
    if (d <= 0) fail("tensor: non-positive dimension in shape " + shape_str(shape));
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(shape_numel(shape_)), 0.0f);
}

Tensor::Tensor(std::vector<int> shape, float fill) : shape_(std::move(shape)) {
  data_.assign(static_cast<std::size_t>(shape_numel(shape_)), fill);
}

Tensor Tensor::scalar(float v) {
  Tensor t(std::vector<int>{1});
  t.data_[0] = v;
  return t;
}

Tensor Tensor::from(std::vector<int> shape, std::vector<float> values) {
  if (shape_numel(shape) != static_cast<std::int64_t>(values.size()))
    fail("tensor: data length " + std::to_string(values.size()) + " does not match shape " +
         shape_str(shape));
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = std::move(values);
  return t;
}

Tensor Tensor::normal(std::vector<int> shape, Rng& rng, double stddev) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(rng.normal() * stddev);
  return t;
}

Tensor Tensor::uniform(std::vector<int> shape, Rng& rng, double lo, double hi) {
  Tensor t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

bool Tensor::all_finite() const {
  for (float v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

double Tensor::sum() const {
  double acc = 0.0;
  for (float v : data_) acc += v;
  return acc;
}

double Tensor::abs_max() const {
  double m = 0.0;
  for (float v : data_) m = std::max(m, static_cast<double>(std::fabs(v)));
  return m;
}

Tensor Tensor::reshaped(std::vector<int> new_shape) const {
  if (shape_numel(new_shape) != numel())
    fail("reshape: cannot view " + shape_str(shape_) + " as " + shape_str(new_shape));
  Tensor t = *this;
  t.shape_ = std::move(new_shape);
  return t;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  return std::memcmp(a.data(), b.data(), sizeof(float) * static_cast<std::size_t>(a.numel())) == 0;
}

}  // namespace ldp
