#pragma once

#include <vector>

#include "har/nn.hpp"

namespace har {

/// Mixing weights for the step-3.1 feature objective.
struct LossWeights {
  double w_A = 0.1;
  double w_R = 0.7;
  double w_C = 0.2;

  void validate() const;
};

/// Scalar loss value plus its gradient w.r.t. the tensor argument the loss
/// was evaluated on.
struct LossResult {
  double value = 0.0;
  nn::Tensor grad{std::vector<int>{0}};
};

/// Mean squared element difference (element mean, then batch mean).
LossResult recon_loss(const nn::Tensor& x_hat, const nn::Tensor& x);

/// Mean over batch of -log softmax(logits)[y]; max-subtracted for stability.
LossResult classification_loss(const nn::Tensor& logits, const std::vector<int>& y);

/// Binary cross-entropy over same-subject probabilities; p clamped to
/// [1e-7, 1 - 1e-7]. Probabilities outside [0,1] before clamping are an
/// error.
LossResult discrimination_loss(const nn::Tensor& p, const std::vector<int>& g);

/// Non-saturating generator objective: mean of -log p over the g=0 subset
/// only; g=1 entries contribute nothing. A batch without g=0 pairs is an
/// error.
LossResult adversarial_loss(const nn::Tensor& p, const std::vector<int>& g);

/// Cross-entropy between softmax(logits) and the uniform distribution over
/// the logit dimension; the feature-side objective against the
/// subject-identification head.
LossResult subject_confusion_loss(const nn::Tensor& logits);

/// Step-2 feature objective: unit-weight sum.
double feature_step2_loss(double classification_val, double recon_val);

/// Step-3.1 feature objective: w_A*L_A + w_R*L_R + w_C*L_C.
double feature_step31_loss(double adversarial_val, double recon_val,
                           double classification_val, const LossWeights& weights);

}  // namespace har
