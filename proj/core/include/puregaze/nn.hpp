#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "puregaze/common.hpp"
#include "puregaze/tensor.hpp"

namespace puregaze {
namespace nn {

enum class Init { He, Xavier };

Init init_from_string(const std::string& s);
std::string to_string(Init init);

/// Named view of one parameter tensor and its gradient buffer.
struct ParamRef {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
};

/// Per-forward-call activation storage. Owned by the caller, so a network
/// can run concurrent read-only forward passes with independent caches and
/// a training backward can replay the same cache several times.
struct Cache {
  Tensor x;                   // layer input
  Tensor y;                   // layer output, kept only where backward needs it
  std::vector<std::int32_t> idx;  // pool argmax, flat offsets within a sample
  std::vector<Cache> sub;     // children of composite layers
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& x, Cache& cache) const = 0;

  /// Returns d(loss)/d(input). When accum_param_grads is set, adds
  /// d(loss)/d(params) into the layers' grad buffers; otherwise parameters
  /// are treated as a frozen function and only the input gradient flows.
  /// May be called repeatedly against the same cache.
  virtual Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) = 0;

  virtual void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {}
  virtual void init_params(Rng& rng, Init scheme) {}
};

using LayerPtr = std::unique_ptr<Layer>;

class Conv2d final : public Layer {
 public:
  Conv2d(int in_c, int out_c, int kernel, int stride, int pad);

  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
  void init_params(Rng& rng, Init scheme) override;

  int in_channels() const { return in_c_; }
  int out_channels() const { return out_c_; }

 private:
  int in_c_, out_c_, kernel_, stride_, pad_;
  Tensor weight_;  // (out_c, in_c, k, k)
  Tensor bias_;    // (out_c, 1, 1, 1)
  Tensor gweight_, gbias_;
};

class Linear final : public Layer {
 public:
  Linear(int in_features, int out_features);

  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
  void init_params(Rng& rng, Init scheme) override;

 private:
  int in_f_, out_f_;
  Tensor weight_;  // (out_f, in_f, 1, 1)
  Tensor bias_;    // (out_f, 1, 1, 1)
  Tensor gweight_, gbias_;
};

class ReLU final : public Layer {
 public:
  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;
};

class Sigmoid final : public Layer {
 public:
  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;
};

class MaxPool2d final : public Layer {
 public:
  MaxPool2d(int kernel, int stride, int pad);
  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;

 private:
  int kernel_, stride_, pad_;
};

class GlobalAvgPool final : public Layer {
 public:
  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;
};

class UpsampleNearest2x final : public Layer {
 public:
  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;
};

/// Two 3x3 convolutions with an identity (or 1x1 projected) skip, ReLU
/// after the first convolution and after the residual sum. Norm-free.
class BasicBlock final : public Layer {
 public:
  BasicBlock(int in_c, int out_c, int stride);

  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
  void init_params(Rng& rng, Init scheme) override;

 private:
  Conv2d conv1_, conv2_;
  std::unique_ptr<Conv2d> down_;  // null when the skip is identity
};

class Sequential final : public Layer {
 public:
  Sequential() = default;

  void add(std::string name, LayerPtr layer);

  Tensor forward(const Tensor& x, Cache& cache) const override;
  Tensor backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) override;
  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) override;
  void init_params(Rng& rng, Init scheme) override;

  std::size_t size() const { return layers_.size(); }

 private:
  std::vector<std::pair<std::string, LayerPtr>> layers_;
};

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction over one parameter group.
class Adam {
 public:
  Adam(std::vector<ParamRef> params, AdamConfig cfg);

  /// Applies one update from the current grad buffers.
  void step();
  void zero_grad();
  std::int64_t steps_taken() const { return t_; }

 private:
  std::vector<ParamRef> params_;
  AdamConfig cfg_;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

/// Zeroes the grad buffer of every param in the list.
void zero_grads(const std::vector<ParamRef>& params);

/// Total number of scalar parameters.
std::size_t param_count(const std::vector<ParamRef>& params);

/// FNV-1a over the raw parameter bytes, for cheap bitwise-change checks.
std::uint64_t param_fingerprint(const std::vector<ParamRef>& params);

}  // namespace nn
}  // namespace puregaze
