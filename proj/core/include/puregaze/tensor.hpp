#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <string>
#include <vector>

namespace puregaze {

/// Dense NCHW tensor of doubles. Vectors and matrices are represented with
/// trailing singleton dims, e.g. a batch of gaze labels is (n, 2, 1, 1).
class Tensor {
 public:
  Tensor() = default;
  Tensor(int n, int c, int h, int w) : n_(n), c_(c), h_(h), w_(w), v_(static_cast<std::size_t>(n) * c * h * w, 0.0) {
    assert(n >= 0 && c >= 0 && h >= 0 && w >= 0);
  }

  static Tensor zeros_like(const Tensor& t) { return Tensor(t.n_, t.c_, t.h_, t.w_); }

  int n() const { return n_; }
  int c() const { return c_; }
  int h() const { return h_; }
  int w() const { return w_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  bool same_shape(const Tensor& o) const {
    return n_ == o.n_ && c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }
  std::string shape_str() const {
    return "(" + std::to_string(n_) + "," + std::to_string(c_) + "," + std::to_string(h_) + "," + std::to_string(w_) + ")";
  }

  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }

  double& at(int in, int ic, int iy, int ix) {
    return v_[((static_cast<std::size_t>(in) * c_ + ic) * h_ + iy) * w_ + ix];
  }
  double at(int in, int ic, int iy, int ix) const {
    return v_[((static_cast<std::size_t>(in) * c_ + ic) * h_ + iy) * w_ + ix];
  }

  /// Pointer to the start of sample `in` (c*h*w contiguous doubles).
  double* sample(int in) { return v_.data() + static_cast<std::size_t>(in) * c_ * h_ * w_; }
  const double* sample(int in) const { return v_.data() + static_cast<std::size_t>(in) * c_ * h_ * w_; }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }
  void zero() { fill(0.0); }

  const std::vector<double>& vec() const { return v_; }
  std::vector<double>& vec() { return v_; }

 private:
  int n_ = 0, c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> v_;
};

}  // namespace puregaze
