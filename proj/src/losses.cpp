#include "har/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace har {

namespace {

constexpr double kEps = 1e-7;

// Flat batch view over (B) or (B, 1) probability tensors.
std::size_t flat_batch(const nn::Tensor& p) {
  if (p.rank() == 1) return static_cast<std::size_t>(p.dim(0));
  if (p.rank() == 2 && p.dim(1) == 1) return static_cast<std::size_t>(p.dim(0));
  throw std::invalid_argument("loss: probabilities must be shaped (B) or (B, 1)");
}

}  // namespace

void LossWeights::validate() const {
  if (w_A < 0.0 || w_R < 0.0 || w_C < 0.0) {
    throw std::invalid_argument("LossWeights: weights must be non-negative");
  }
}

LossResult recon_loss(const nn::Tensor& x_hat, const nn::Tensor& x) {
  if (!x_hat.same_shape(x)) throw std::invalid_argument("recon_loss: shape mismatch");
  if (x_hat.v.empty()) throw std::invalid_argument("recon_loss: empty input");
  LossResult r;
  r.grad = nn::Tensor(x_hat.shape);
  const double scale = 1.0 / static_cast<double>(x_hat.v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x_hat.v.size(); ++i) {
    const double d = x_hat.v[i] - x.v[i];
    sum += d * d;
    r.grad.v[i] = 2.0 * d * scale;
  }
  r.value = sum * scale;
  return r;
}

LossResult classification_loss(const nn::Tensor& logits, const std::vector<int>& y) {
  if (logits.rank() != 2) throw std::invalid_argument("classification_loss: need (B, K)");
  const int B = logits.dim(0);
  const int K = logits.dim(1);
  if (static_cast<int>(y.size()) != B) {
    throw std::invalid_argument("classification_loss: label count mismatch");
  }
  LossResult r;
  r.grad = nn::Tensor(logits.shape);
  double total = 0.0;
  for (int i = 0; i < B; ++i) {
    if (y[i] < 0 || y[i] >= K) {
      throw std::invalid_argument("classification_loss: class index out of range");
    }
    double mx = logits.at2(i, 0);
    for (int k = 1; k < K; ++k) mx = std::max(mx, logits.at2(i, k));
    double denom = 0.0;
    for (int k = 0; k < K; ++k) denom += std::exp(logits.at2(i, k) - mx);
    total += -(logits.at2(i, y[i]) - mx) + std::log(denom);
    for (int k = 0; k < K; ++k) {
      const double soft = std::exp(logits.at2(i, k) - mx) / denom;
      r.grad.at2(i, k) = (soft - (k == y[i] ? 1.0 : 0.0)) / B;
    }
  }
  r.value = total / B;
  return r;
}

LossResult discrimination_loss(const nn::Tensor& p, const std::vector<int>& g) {
  const std::size_t B = flat_batch(p);
  if (g.size() != B) throw std::invalid_argument("discrimination_loss: label count mismatch");
  if (B == 0) throw std::invalid_argument("discrimination_loss: empty batch");
  LossResult r;
  r.grad = nn::Tensor(p.shape);
  double total = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    const double raw = p.v[i];
    if (raw < 0.0 || raw > 1.0 || !std::isfinite(raw)) {
      throw std::invalid_argument("discrimination_loss: probability outside [0, 1]");
    }
    if (g[i] != 0 && g[i] != 1) {
      throw std::invalid_argument("discrimination_loss: labels must be 0 or 1");
    }
    const double pc = std::clamp(raw, kEps, 1.0 - kEps);
    total += g[i] == 1 ? -std::log(pc) : -std::log(1.0 - pc);
    if (raw > kEps && raw < 1.0 - kEps) {
      r.grad.v[i] = (g[i] == 1 ? -1.0 / pc : 1.0 / (1.0 - pc)) / static_cast<double>(B);
    }
  }
  r.value = total / static_cast<double>(B);
  return r;
}

LossResult adversarial_loss(const nn::Tensor& p, const std::vector<int>& g) {
  const std::size_t B = flat_batch(p);
  if (g.size() != B) throw std::invalid_argument("adversarial_loss: label count mismatch");
  std::size_t n0 = 0;
  for (int gi : g) {
    if (gi != 0 && gi != 1) {
      throw std::invalid_argument("adversarial_loss: labels must be 0 or 1");
    }
    if (gi == 0) ++n0;
  }
  if (n0 == 0) {
    throw std::invalid_argument("adversarial_loss: batch has no g=0 pairs");
  }
  LossResult r;
  r.grad = nn::Tensor(p.shape);
  double total = 0.0;
  for (std::size_t i = 0; i < B; ++i) {
    if (g[i] != 0) continue;
    const double raw = p.v[i];
    if (raw < 0.0 || raw > 1.0 || !std::isfinite(raw)) {
      throw std::invalid_argument("adversarial_loss: probability outside [0, 1]");
    }
    const double pc = std::clamp(raw, kEps, 1.0 - kEps);
    total += -std::log(pc);
    if (raw > kEps && raw < 1.0 - kEps) {
      r.grad.v[i] = -1.0 / (pc * static_cast<double>(n0));
    }
  }
  r.value = total / static_cast<double>(n0);
  return r;
}

LossResult subject_confusion_loss(const nn::Tensor& logits) {
  if (logits.rank() != 2) throw std::invalid_argument("subject_confusion_loss: need (B, n)");
  const int B = logits.dim(0);
  const int n = logits.dim(1);
  if (B == 0 || n < 2) throw std::invalid_argument("subject_confusion_loss: degenerate shape");
  LossResult r;
  r.grad = nn::Tensor(logits.shape);
  const double u = 1.0 / n;
  double total = 0.0;
  for (int i = 0; i < B; ++i) {
    double mx = logits.at2(i, 0);
    for (int k = 1; k < n; ++k) mx = std::max(mx, logits.at2(i, k));
    double denom = 0.0;
    for (int k = 0; k < n; ++k) denom += std::exp(logits.at2(i, k) - mx);
    const double log_denom = std::log(denom);
    for (int k = 0; k < n; ++k) {
      total += u * (-(logits.at2(i, k) - mx) + log_denom);
      const double soft = std::exp(logits.at2(i, k) - mx) / denom;
      r.grad.at2(i, k) = (soft - u) / B;
    }
  }
  r.value = total / B;
  return r;
}

double feature_step2_loss(double classification_val, double recon_val) {
  return classification_val + recon_val;
}

double feature_step31_loss(double adversarial_val, double recon_val,
                           double classification_val, const LossWeights& weights) {
  weights.validate();
  return weights.w_A * adversarial_val + weights.w_R * recon_val +
         weights.w_C * classification_val;
}

}  // namespace har
