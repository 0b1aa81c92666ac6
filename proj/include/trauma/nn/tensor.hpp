#pragma once

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "trauma/errors.hpp"

namespace trauma::nn {

// Contiguous row-major n-d array of 64-bit floats. Copies share storage
// (graph nodes hand tensors around constantly); use clone() for a deep copy.
// Op implementations allocate fresh outputs and never mutate inputs.
class Tensor {
 public:
  Tensor() : buf_(std::make_shared<std::vector<double>>()) {}

  explicit Tensor(std::vector<std::int64_t> shape)
      : shape_(std::move(shape)),
        buf_(std::make_shared<std::vector<double>>(
            static_cast<std::size_t>(count(shape_)), 0.0)) {}

  Tensor(std::vector<std::int64_t> shape, std::vector<double> values)
      : shape_(std::move(shape)),
        buf_(std::make_shared<std::vector<double>>(std::move(values))) {
    if (static_cast<std::int64_t>(buf_->size()) != count(shape_))
      throw contract_error("Tensor: value count does not match shape");
  }

  static Tensor zeros(std::vector<std::int64_t> shape) { return Tensor(std::move(shape)); }

  static Tensor full(std::vector<std::int64_t> shape, double v) {
    Tensor t(std::move(shape));
    for (auto& x : *t.buf_) x = v;
    return t;
  }

  static Tensor scalar(double v) { return Tensor({1}, {v}); }

  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t dim(std::size_t i) const { return shape_[i]; }
  std::size_t rank() const { return shape_.size(); }
  std::int64_t numel() const { return static_cast<std::int64_t>(buf_->size()); }
  bool empty() const { return buf_->empty(); }

  double* data() { return buf_->data(); }
  const double* data() const { return buf_->data(); }
  double& operator[](std::int64_t i) { return (*buf_)[static_cast<std::size_t>(i)]; }
  double operator[](std::int64_t i) const { return (*buf_)[static_cast<std::size_t>(i)]; }

  Tensor clone() const {
    Tensor t;
    t.shape_ = shape_;
    t.buf_ = std::make_shared<std::vector<double>>(*buf_);
    return t;
  }

  // Shares storage under a new shape with identical element count.
  Tensor reshaped(std::vector<std::int64_t> shape) const {
    if (count(shape) != numel())
      throw contract_error("Tensor::reshaped: element count mismatch");
    Tensor t;
    t.shape_ = std::move(shape);
    t.buf_ = buf_;
    return t;
  }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  std::string shape_str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
      if (i) s += ", ";
      s += std::to_string(shape_[i]);
    }
    return s + ")";
  }

  static std::int64_t count(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (auto d : shape) {
      if (d < 0) throw contract_error("Tensor: negative dimension");
      n *= d;
    }
    return shape.empty() ? 0 : n;
  }

 private:
  std::vector<std::int64_t> shape_;
  std::shared_ptr<std::vector<double>> buf_;
};

}  // namespace trauma::nn
