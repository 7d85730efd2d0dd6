#pragma once

#include <cstdint>
#include <string>

#include "puregaze/geometry.hpp"
#include "puregaze/tensor.hpp"

namespace puregaze {

/// Hyper-parameters of the composite backbone loss.
/// alpha scales the truncated adversarial term, beta the gaze term, k is
/// the truncation threshold: a pixel contributes only while (1 - d^2) > k.
/// k = 0 disables truncation for images in [0,1].
struct LossWeights {
  double alpha = 1.0;
  double beta = 1.0;
  double k = 0.75;
};

/// One training step's loss components. adv_loss is the identity 1 - rec_loss
/// (pre-truncation, unweighted); adv_gated is the attention-weighted,
/// truncated term that actually reaches the backbone.
struct LossReport {
  std::int64_t step = 0;
  double gaze_loss = 0.0;
  double rec_loss = 0.0;
  double adv_loss = 0.0;
  double adv_gated = 0.0;
  double backbone_loss = 0.0;
  double sa_loss = 0.0;
  double mlp_loss = 0.0;

  std::string to_json_line() const;
  static LossReport from_json_line(const std::string& line);
};

/// L1 distance between two labels: |dpitch| + |dyaw|.
double gaze_loss(const GazeLabel& pred, const GazeLabel& truth);

/// Batch version over (n,2,1,1) tensors; mean over samples, sum over the two
/// components. If grad_pred is non-null it receives d(loss)/d(pred).
double gaze_loss(const Tensor& pred, const Tensor& truth, Tensor* grad_pred = nullptr);

/// Pixel-wise MSE, mean over all pixels and channels. In [0,1] for inputs
/// in [0,1]. grad_rec receives d(loss)/d(reconstructed).
double reconstruction_loss(const Tensor& original, const Tensor& reconstructed,
                           Tensor* grad_rec = nullptr);

/// 1 - reconstruction_loss.
double adversarial_loss(const Tensor& original, const Tensor& reconstructed,
                        Tensor* grad_rec = nullptr);

/// Identical contract to reconstruction_loss; the SA-Module's own objective
/// carries no attention weighting.
double sa_module_loss(const Tensor& original, const Tensor& reconstructed,
                      Tensor* grad_rec = nullptr);

/// Attention-weighted truncated adversarial term:
///   mean over batch, pixels and channels of M(p) * gate(p) * (1 - (I - Ihat)^2)
/// where the gate is one bit per spatial location, computed from the
/// channel-mean absolute difference d(p): gate(p) = 1 iff (1 - d(p)^2) > k.
/// The gate is constant under differentiation; gated-off pixels have exactly
/// zero gradient. `attention` is (n,1,h,w); pass an empty tensor for M = 1.
double truncated_adversarial_term(const Tensor& original, const Tensor& reconstructed,
                                  const Tensor& attention, double k, Tensor* grad_rec = nullptr);

struct BackboneLossParts {
  double total = 0.0;
  double adv_term = 0.0;  // post-gate, attention-weighted
  double gaze_term = 0.0;
};

/// alpha * truncated_adversarial_term + beta * gaze_loss. With M = 1 and
/// k = 0 this reduces to alpha * (1 - rec_loss) + beta * gaze_loss.
BackboneLossParts backbone_loss(const Tensor& original, const Tensor& reconstructed,
                                const Tensor& pred, const Tensor& truth, const Tensor& attention,
                                const LossWeights& w, Tensor* grad_rec = nullptr,
                                Tensor* grad_pred = nullptr);

}  // namespace puregaze
