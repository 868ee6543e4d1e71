#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldp/rng.hpp"

namespace ldp {

[[noreturn]] void fail(const std::string& msg);

std::string shape_str(const std::vector<int>& shape);

// Dense row-major float32 array. Value semantics: copies are deep, moves are
// cheap, and no two tensors alias storage.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);
  Tensor(std::vector<int> shape, float fill);

  static Tensor scalar(float v);
  static Tensor from(std::vector<int> shape, std::vector<float> values);
  static Tensor normal(std::vector<int> shape, Rng& rng, double stddev = 1.0);
  static Tensor uniform(std::vector<int> shape, Rng& rng, double lo, double hi);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::int64_t numel() const { return static_cast<std::int64_t>(data_.size()); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }
  float& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }
  float operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }

  bool all_finite() const;
  // Sum/min/max accumulate in double.
  double sum() const;
  double abs_max() const;

  Tensor reshaped(std::vector<int> new_shape) const;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

std::int64_t shape_numel(const std::vector<int>& shape);

bool bitwise_equal(const Tensor& a, const Tensor& b);

}  // namespace ldp
