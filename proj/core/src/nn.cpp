#include "puregaze/nn.hpp"

#include <cmath>
#include <cstring>
#include <limits>

#include <Eigen/Dense>

namespace puregaze {
namespace nn {

namespace {

using MatRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapM = Eigen::Map<MatRM>;
using MapCM = Eigen::Map<const MatRM>;

int conv_out_dim(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

// Unfolds one sample (c,h,w) into a (c*k*k) x (ho*wo) column matrix.
void im2col(const double* src, int c, int h, int w, int kernel, int stride, int pad, int ho,
            int wo, double* col) {
  const int cols = ho * wo;
  for (int ic = 0; ic < c; ++ic) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        double* row = col + (static_cast<std::size_t>(ic) * kernel * kernel + ky * kernel + kx) * cols;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) {
            std::fill(row + static_cast<std::size_t>(oy) * wo, row + static_cast<std::size_t>(oy + 1) * wo, 0.0);
            continue;
          }
          const double* src_row = src + (static_cast<std::size_t>(ic) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            row[static_cast<std::size_t>(oy) * wo + ox] = (ix >= 0 && ix < w) ? src_row[ix] : 0.0;
          }
        }
      }
    }
  }
}

// Scatter-adds a column matrix back into one sample (c,h,w).
void col2im(const double* col, int c, int h, int w, int kernel, int stride, int pad, int ho,
            int wo, double* dst) {
  const int cols = ho * wo;
  for (int ic = 0; ic < c; ++ic) {
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx) {
        const double* row = col + (static_cast<std::size_t>(ic) * kernel * kernel + ky * kernel + kx) * cols;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) continue;
          double* dst_row = dst + (static_cast<std::size_t>(ic) * h + iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < w) dst_row[ix] += row[static_cast<std::size_t>(oy) * wo + ox];
          }
        }
      }
    }
  }
}

}  // namespace

Init init_from_string(const std::string& s) {
  if (s == "he") return Init::He;
  if (s == "xavier") return Init::Xavier;
  throw ConfigError("unknown init scheme '" + s + "' (expected he|xavier)");
}

std::string to_string(Init init) { return init == Init::He ? "he" : "xavier"; }

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_c, int out_c, int kernel, int stride, int pad)
    : in_c_(in_c),
      out_c_(out_c),
      kernel_(kernel),
      stride_(stride),
      pad_(pad),
      weight_(out_c, in_c, kernel, kernel),
      bias_(out_c, 1, 1, 1),
      gweight_(out_c, in_c, kernel, kernel),
      gbias_(out_c, 1, 1, 1) {}

Tensor Conv2d::forward(const Tensor& x, Cache& cache) const {
  if (x.c() != in_c_) {
    throw DomainError("Conv2d expects " + std::to_string(in_c_) + " input channels, got " + x.shape_str());
  }
  const int ho = conv_out_dim(x.h(), kernel_, stride_, pad_);
  const int wo = conv_out_dim(x.w(), kernel_, stride_, pad_);
  Tensor y(x.n(), out_c_, ho, wo);
  const int patch = in_c_ * kernel_ * kernel_;
  std::vector<double> col(static_cast<std::size_t>(patch) * ho * wo);
  MapCM wmat(weight_.data(), out_c_, patch);
  for (int in = 0; in < x.n(); ++in) {
    im2col(x.sample(in), in_c_, x.h(), x.w(), kernel_, stride_, pad_, ho, wo, col.data());
    MapCM cmat(col.data(), patch, ho * wo);
    MapM ymat(y.sample(in), out_c_, ho * wo);
    ymat.noalias() = wmat * cmat;
    for (int oc = 0; oc < out_c_; ++oc) ymat.row(oc).array() += bias_[oc];
  }
  cache.x = x;
  return y;
}

Tensor Conv2d::backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) {
  const Tensor& x = cache.x;
  const int ho = gy.h(), wo = gy.w();
  const int patch = in_c_ * kernel_ * kernel_;
  Tensor gx = Tensor::zeros_like(x);
  std::vector<double> col(static_cast<std::size_t>(patch) * ho * wo);
  std::vector<double> gcol(static_cast<std::size_t>(patch) * ho * wo);
  MapCM wmat(weight_.data(), out_c_, patch);
  MapM gwmat(gweight_.data(), out_c_, patch);
  for (int in = 0; in < x.n(); ++in) {
    MapCM gymat(gy.sample(in), out_c_, ho * wo);
    if (accum_param_grads) {
      im2col(x.sample(in), in_c_, x.h(), x.w(), kernel_, stride_, pad_, ho, wo, col.data());
      MapCM cmat(col.data(), patch, ho * wo);
      gwmat.noalias() += gymat * cmat.transpose();
      for (int oc = 0; oc < out_c_; ++oc) gbias_[oc] += gymat.row(oc).sum();
    }
    MapM gcmat(gcol.data(), patch, ho * wo);
    gcmat.noalias() = wmat.transpose() * gymat;
    col2im(gcol.data(), in_c_, x.h(), x.w(), kernel_, stride_, pad_, ho, wo, gx.sample(in));
  }
  return gx;
}

void Conv2d::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", &weight_, &gweight_});
  out.push_back({prefix + ".bias", &bias_, &gbias_});
}

void Conv2d::init_params(Rng& rng, Init scheme) {
  const double fan_in = static_cast<double>(in_c_) * kernel_ * kernel_;
  const double fan_out = static_cast<double>(out_c_) * kernel_ * kernel_;
  const double stddev = scheme == Init::He ? std::sqrt(2.0 / fan_in) : std::sqrt(2.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < weight_.size(); ++i) weight_[i] = rng.normal(0.0, stddev);
  bias_.zero();
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_features, int out_features)
    : in_f_(in_features),
      out_f_(out_features),
      weight_(out_features, in_features, 1, 1),
      bias_(out_features, 1, 1, 1),
      gweight_(out_features, in_features, 1, 1),
      gbias_(out_features, 1, 1, 1) {}

Tensor Linear::forward(const Tensor& x, Cache& cache) const {
  if (x.c() * x.h() * x.w() != in_f_) {
    throw DomainError("Linear expects " + std::to_string(in_f_) + " features, got " + x.shape_str());
  }
  Tensor y(x.n(), out_f_, 1, 1);
  MapCM xmat(x.data(), x.n(), in_f_);
  MapCM wmat(weight_.data(), out_f_, in_f_);
  MapM ymat(y.data(), x.n(), out_f_);
  ymat.noalias() = xmat * wmat.transpose();
  for (int in = 0; in < x.n(); ++in) {
    for (int of = 0; of < out_f_; ++of) ymat(in, of) += bias_[of];
  }
  cache.x = x;
  return y;
}

Tensor Linear::backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) {
  const Tensor& x = cache.x;
  MapCM xmat(x.data(), x.n(), in_f_);
  MapCM gymat(gy.data(), x.n(), out_f_);
  if (accum_param_grads) {
    MapM gwmat(gweight_.data(), out_f_, in_f_);
    gwmat.noalias() += gymat.transpose() * xmat;
    for (int of = 0; of < out_f_; ++of) gbias_[of] += gymat.col(of).sum();
  }
  Tensor gx = Tensor::zeros_like(x);
  MapM gxmat(gx.data(), x.n(), in_f_);
  MapCM wmat(weight_.data(), out_f_, in_f_);
  gxmat.noalias() = gymat * wmat;
  return gx;
}

void Linear::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  out.push_back({prefix + ".weight", &weight_, &gweight_});
  out.push_back({prefix + ".bias", &bias_, &gbias_});
}

void Linear::init_params(Rng& rng, Init scheme) {
  const double fan_in = in_f_, fan_out = out_f_;
  const double stddev = scheme == Init::He ? std::sqrt(2.0 / fan_in) : std::sqrt(2.0 / (fan_in + fan_out));
  for (std::size_t i = 0; i < weight_.size(); ++i) weight_[i] = rng.normal(0.0, stddev);
  bias_.zero();
}

// ---------------------------------------------------------------------------
// Activations

Tensor ReLU::forward(const Tensor& x, Cache& cache) const {
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] < 0.0) y[i] = 0.0;
  }
  cache.x = x;
  return y;
}

Tensor ReLU::backward(const Tensor& gy, const Cache& cache, bool) {
  Tensor gx = gy;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    if (cache.x[i] <= 0.0) gx[i] = 0.0;
  }
  return gx;
}

Tensor Sigmoid::forward(const Tensor& x, Cache& cache) const {
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));
  cache.y = y;
  return y;
}

Tensor Sigmoid::backward(const Tensor& gy, const Cache& cache, bool) {
  Tensor gx = gy;
  for (std::size_t i = 0; i < gx.size(); ++i) {
    const double s = cache.y[i];
    gx[i] *= s * (1.0 - s);
  }
  return gx;
}

// ---------------------------------------------------------------------------
// Pooling

MaxPool2d::MaxPool2d(int kernel, int stride, int pad) : kernel_(kernel), stride_(stride), pad_(pad) {}

Tensor MaxPool2d::forward(const Tensor& x, Cache& cache) const {
  const int ho = conv_out_dim(x.h(), kernel_, stride_, pad_);
  const int wo = conv_out_dim(x.w(), kernel_, stride_, pad_);
  Tensor y(x.n(), x.c(), ho, wo);
  cache.idx.assign(y.size(), -1);
  std::size_t o = 0;
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int oy = 0; oy < ho; ++oy) {
        for (int ox = 0; ox < wo; ++ox, ++o) {
          double best = -std::numeric_limits<double>::infinity();
          int best_idx = -1;
          for (int ky = 0; ky < kernel_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= x.h()) continue;
            for (int kx = 0; kx < kernel_; ++kx) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix < 0 || ix >= x.w()) continue;
              const double v = x.at(in, ic, iy, ix);
              if (v > best) {
                best = v;
                best_idx = (ic * x.h() + iy) * x.w() + ix;
              }
            }
          }
          y[o] = best;
          cache.idx[o] = best_idx;
        }
      }
    }
  }
  cache.x = x;
  return y;
}

Tensor MaxPool2d::backward(const Tensor& gy, const Cache& cache, bool) {
  Tensor gx = Tensor::zeros_like(cache.x);
  const std::size_t per_sample = static_cast<std::size_t>(gx.c()) * gx.h() * gx.w();
  const std::size_t out_per_sample = gy.size() / gy.n();
  for (int in = 0; in < gy.n(); ++in) {
    double* dst = gx.data() + in * per_sample;
    const std::size_t base = in * out_per_sample;
    for (std::size_t o = 0; o < out_per_sample; ++o) {
      dst[cache.idx[base + o]] += gy[base + o];
    }
  }
  return gx;
}

Tensor GlobalAvgPool::forward(const Tensor& x, Cache& cache) const {
  Tensor y(x.n(), x.c(), 1, 1);
  const double inv = 1.0 / (static_cast<double>(x.h()) * x.w());
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      double sum = 0.0;
      const double* p = x.data() + ((static_cast<std::size_t>(in) * x.c() + ic) * x.h() * x.w());
      for (int i = 0; i < x.h() * x.w(); ++i) sum += p[i];
      y.at(in, ic, 0, 0) = sum * inv;
    }
  }
  cache.x = x;
  return y;
}

Tensor GlobalAvgPool::backward(const Tensor& gy, const Cache& cache, bool) {
  const Tensor& x = cache.x;
  Tensor gx = Tensor::zeros_like(x);
  const double inv = 1.0 / (static_cast<double>(x.h()) * x.w());
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      const double g = gy.at(in, ic, 0, 0) * inv;
      double* p = gx.data() + ((static_cast<std::size_t>(in) * x.c() + ic) * x.h() * x.w());
      for (int i = 0; i < x.h() * x.w(); ++i) p[i] = g;
    }
  }
  return gx;
}

Tensor UpsampleNearest2x::forward(const Tensor& x, Cache& cache) const {
  Tensor y(x.n(), x.c(), x.h() * 2, x.w() * 2);
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int iy = 0; iy < x.h(); ++iy) {
        for (int ix = 0; ix < x.w(); ++ix) {
          const double v = x.at(in, ic, iy, ix);
          y.at(in, ic, 2 * iy, 2 * ix) = v;
          y.at(in, ic, 2 * iy, 2 * ix + 1) = v;
          y.at(in, ic, 2 * iy + 1, 2 * ix) = v;
          y.at(in, ic, 2 * iy + 1, 2 * ix + 1) = v;
        }
      }
    }
  }
  cache.x = x;
  return y;
}

Tensor UpsampleNearest2x::backward(const Tensor& gy, const Cache& cache, bool) {
  const Tensor& x = cache.x;
  Tensor gx = Tensor::zeros_like(x);
  for (int in = 0; in < x.n(); ++in) {
    for (int ic = 0; ic < x.c(); ++ic) {
      for (int iy = 0; iy < x.h(); ++iy) {
        for (int ix = 0; ix < x.w(); ++ix) {
          gx.at(in, ic, iy, ix) = gy.at(in, ic, 2 * iy, 2 * ix) + gy.at(in, ic, 2 * iy, 2 * ix + 1) +
                                  gy.at(in, ic, 2 * iy + 1, 2 * ix) + gy.at(in, ic, 2 * iy + 1, 2 * ix + 1);
        }
      }
    }
  }
  return gx;
}

// ---------------------------------------------------------------------------
// BasicBlock

BasicBlock::BasicBlock(int in_c, int out_c, int stride)
    : conv1_(in_c, out_c, 3, stride, 1), conv2_(out_c, out_c, 3, 1, 1) {
  if (stride != 1 || in_c != out_c) {
    down_ = std::make_unique<Conv2d>(in_c, out_c, 1, stride, 0);
  }
}

Tensor BasicBlock::forward(const Tensor& x, Cache& cache) const {
  cache.sub.resize(3);
  const Tensor a1 = conv1_.forward(x, cache.sub[0]);
  Tensor r1 = a1;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    if (r1[i] < 0.0) r1[i] = 0.0;
  }
  Tensor h2 = conv2_.forward(r1, cache.sub[1]);
  Tensor skip = down_ ? down_->forward(x, cache.sub[2]) : x;
  for (std::size_t i = 0; i < h2.size(); ++i) {
    double v = h2[i] + skip[i];
    h2[i] = v > 0.0 ? v : 0.0;
  }
  cache.y = h2;  // post-activation output; >0 iff pre-activation >0
  return h2;
}

Tensor BasicBlock::backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) {
  Tensor gsum = gy;
  for (std::size_t i = 0; i < gsum.size(); ++i) {
    if (cache.y[i] <= 0.0) gsum[i] = 0.0;
  }
  Tensor gr1 = conv2_.backward(gsum, cache.sub[1], accum_param_grads);
  // conv2's cached input is relu(a1); its positive entries mark where a1 > 0.
  for (std::size_t i = 0; i < gr1.size(); ++i) {
    if (cache.sub[1].x[i] <= 0.0) gr1[i] = 0.0;
  }
  Tensor gx = conv1_.backward(gr1, cache.sub[0], accum_param_grads);
  if (down_) {
    const Tensor gskip = down_->backward(gsum, cache.sub[2], accum_param_grads);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gskip[i];
  } else {
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gsum[i];
  }
  return gx;
}

void BasicBlock::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  conv1_.collect_params(prefix + ".conv1", out);
  conv2_.collect_params(prefix + ".conv2", out);
  if (down_) down_->collect_params(prefix + ".down", out);
}

void BasicBlock::init_params(Rng& rng, Init scheme) {
  conv1_.init_params(rng, scheme);
  conv2_.init_params(rng, scheme);
  if (down_) down_->init_params(rng, scheme);
}

// ---------------------------------------------------------------------------
// Sequential

void Sequential::add(std::string name, LayerPtr layer) {
  layers_.emplace_back(std::move(name), std::move(layer));
}

Tensor Sequential::forward(const Tensor& x, Cache& cache) const {
  cache.sub.resize(layers_.size());
  Tensor cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    cur = layers_[i].second->forward(cur, cache.sub[i]);
  }
  return cur;
}

Tensor Sequential::backward(const Tensor& gy, const Cache& cache, bool accum_param_grads) {
  Tensor cur = gy;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    cur = layers_[i].second->backward(cur, cache.sub[i], accum_param_grads);
  }
  return cur;
}

void Sequential::collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
  for (auto& [name, layer] : layers_) {
    layer->collect_params(prefix.empty() ? name : prefix + "." + name, out);
  }
}

void Sequential::init_params(Rng& rng, Init scheme) {
  for (auto& [name, layer] : layers_) layer->init_params(rng, scheme);
}

// ---------------------------------------------------------------------------
// Adam

Adam::Adam(std::vector<ParamRef> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.emplace_back(p.value->size(), 0.0);
    v_.emplace_back(p.value->size(), 0.0);
  }
}

void Adam::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& value = *params_[pi].value;
    const Tensor& grad = *params_[pi].grad;
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = grad[i];
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g;
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

void Adam::zero_grad() { zero_grads(params_); }

void zero_grads(const std::vector<ParamRef>& params) {
  for (const auto& p : params) p.grad->zero();
}

std::size_t param_count(const std::vector<ParamRef>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.value->size();
  return n;
}

std::uint64_t param_fingerprint(const std::vector<ParamRef>& params) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& p : params) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(p.value->data());
    const std::size_t nbytes = p.value->size() * sizeof(double);
    for (std::size_t i = 0; i < nbytes; ++i) {
      h ^= bytes[i];
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

}  // namespace nn
}  // namespace puregaze
