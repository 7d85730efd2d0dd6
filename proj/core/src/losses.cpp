#include "puregaze/losses.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "puregaze/common.hpp"

namespace puregaze {

namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DomainError(std::string(what) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  }
}

}  // namespace

std::string LossReport::to_json_line() const {
  nlohmann::json j{{"step", step},
                   {"gaze_loss", gaze_loss},
                   {"rec_loss", rec_loss},
                   {"adv_loss", adv_loss},
                   {"adv_gated", adv_gated},
                   {"backbone_loss", backbone_loss},
                   {"sa_loss", sa_loss},
                   {"mlp_loss", mlp_loss}};
  return j.dump();
}

LossReport LossReport::from_json_line(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  LossReport r;
  r.step = j.at("step").get<std::int64_t>();
  r.gaze_loss = j.at("gaze_loss").get<double>();
  r.rec_loss = j.at("rec_loss").get<double>();
  r.adv_loss = j.at("adv_loss").get<double>();
  r.adv_gated = j.value("adv_gated", 0.0);
  r.backbone_loss = j.at("backbone_loss").get<double>();
  r.sa_loss = j.at("sa_loss").get<double>();
  r.mlp_loss = j.at("mlp_loss").get<double>();
  return r;
}

double gaze_loss(const GazeLabel& pred, const GazeLabel& truth) {
  return std::abs(pred.pitch - truth.pitch) + std::abs(pred.yaw - truth.yaw);
}

double gaze_loss(const Tensor& pred, const Tensor& truth, Tensor* grad_pred) {
  require_same_shape(pred, truth, "gaze_loss");
  if (pred.c() != 2 || pred.h() != 1 || pred.w() != 1) {
    throw DomainError("gaze_loss expects (n,2,1,1) label tensors, got " + pred.shape_str());
  }
  const int n = pred.n();
  if (n == 0) throw DomainError("gaze_loss on empty batch");
  if (grad_pred) *grad_pred = Tensor::zeros_like(pred);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    sum += std::abs(d);
    if (grad_pred) (*grad_pred)[i] = sign(d) / n;
  }
  return sum / n;
}

double reconstruction_loss(const Tensor& original, const Tensor& reconstructed, Tensor* grad_rec) {
  require_same_shape(original, reconstructed, "reconstruction_loss");
  const std::size_t total = original.size();
  if (total == 0) throw DomainError("reconstruction_loss on empty tensors");
  if (grad_rec) *grad_rec = Tensor::zeros_like(reconstructed);
  double sum = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    const double d = original[i] - reconstructed[i];
    sum += d * d;
    if (grad_rec) (*grad_rec)[i] = -2.0 * d / static_cast<double>(total);
  }
  return sum / static_cast<double>(total);
}

double adversarial_loss(const Tensor& original, const Tensor& reconstructed, Tensor* grad_rec) {
  const double rec = reconstruction_loss(original, reconstructed, grad_rec);
  if (grad_rec) {
    for (std::size_t i = 0; i < grad_rec->size(); ++i) (*grad_rec)[i] = -(*grad_rec)[i];
  }
  return 1.0 - rec;
}

double sa_module_loss(const Tensor& original, const Tensor& reconstructed, Tensor* grad_rec) {
  return reconstruction_loss(original, reconstructed, grad_rec);
}

double truncated_adversarial_term(const Tensor& original, const Tensor& reconstructed,
                                  const Tensor& attention, double k, Tensor* grad_rec) {
  require_same_shape(original, reconstructed, "truncated_adversarial_term");
  const bool has_map = !attention.empty();
  if (has_map &&
      (attention.n() != original.n() || attention.c() != 1 || attention.h() != original.h() ||
       attention.w() != original.w())) {
    throw DomainError("attention shape " + attention.shape_str() + " does not match images " +
                      original.shape_str());
  }
  const int n = original.n(), c = original.c(), h = original.h(), w = original.w();
  const std::size_t total = original.size();
  if (total == 0) throw DomainError("truncated_adversarial_term on empty tensors");
  if (grad_rec) *grad_rec = Tensor::zeros_like(reconstructed);

  double sum = 0.0;
  for (int in = 0; in < n; ++in) {
    for (int iy = 0; iy < h; ++iy) {
      for (int ix = 0; ix < w; ++ix) {
        double d = 0.0;  // channel-mean absolute difference at this pixel
        for (int ic = 0; ic < c; ++ic) {
          d += std::abs(original.at(in, ic, iy, ix) - reconstructed.at(in, ic, iy, ix));
        }
        d /= c;
        const bool gate = (1.0 - d * d) > k;
        if (!gate) continue;  // contributes nothing, gradient exactly zero
        const double m = has_map ? attention.at(in, 0, iy, ix) : 1.0;
        for (int ic = 0; ic < c; ++ic) {
          const double diff = original.at(in, ic, iy, ix) - reconstructed.at(in, ic, iy, ix);
          sum += m * (1.0 - diff * diff);
          if (grad_rec) {
            (*grad_rec).at(in, ic, iy, ix) = m * 2.0 * diff / static_cast<double>(total);
          }
        }
      }
    }
  }
  return sum / static_cast<double>(total);
}

BackboneLossParts backbone_loss(const Tensor& original, const Tensor& reconstructed,
                                const Tensor& pred, const Tensor& truth, const Tensor& attention,
                                const LossWeights& w, Tensor* grad_rec, Tensor* grad_pred) {
  BackboneLossParts parts;
  parts.adv_term = truncated_adversarial_term(original, reconstructed, attention, w.k, grad_rec);
  parts.gaze_term = gaze_loss(pred, truth, grad_pred);
  parts.total = w.alpha * parts.adv_term + w.beta * parts.gaze_term;
  if (grad_rec) {
    for (std::size_t i = 0; i < grad_rec->size(); ++i) (*grad_rec)[i] *= w.alpha;
  }
  if (grad_pred) {
    for (std::size_t i = 0; i < grad_pred->size(); ++i) (*grad_pred)[i] *= w.beta;
  }
  return parts;
}

}  // namespace puregaze
