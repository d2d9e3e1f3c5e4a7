#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "har/rng.hpp"

namespace har::nn {

/// Dense row-major tensor of doubles, rank 1..3. Batched windows use the
/// layout (batch, channel, time) so convolution inner loops run over
/// contiguous memory.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(static_cast<std::size_t>(count(shape)), 0.0);
  }

  static std::int64_t count(const std::vector<int>& s) {
    std::int64_t n = 1;
    for (int d : s) n *= d;
    return n;
  }

  std::int64_t size() const { return static_cast<std::int64_t>(v.size()); }
  int dim(int i) const { return shape[static_cast<std::size_t>(i)]; }
  int rank() const { return static_cast<int>(shape.size()); }

  double& at2(int i, int j) { return v[static_cast<std::size_t>(i) * dim(1) + j]; }
  double at2(int i, int j) const { return v[static_cast<std::size_t>(i) * dim(1) + j]; }
  double& at3(int b, int c, int t) {
    return v[(static_cast<std::size_t>(b) * dim(1) + c) * dim(2) + t];
  }
  double at3(int b, int c, int t) const {
    return v[(static_cast<std::size_t>(b) * dim(1) + c) * dim(2) + t];
  }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  void fill(double x) { std::fill(v.begin(), v.end(), x); }
  bool all_finite() const;
};

struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  void zero_grad() { grad.fill(0.0); }
};

/// Per-call activation cache. Each layer defines its own subclass; eval-mode
/// forwards pass nullptr and skip caching.
struct LayerCtx {
  virtual ~LayerCtx() = default;
};

class Layer {
 public:
  virtual ~Layer() = default;
  virtual std::string kind() const = 0;
  virtual std::vector<Param*> params() { return {}; }

  /// Forward pass. When `cache` is non-null the layer stores whatever its
  /// backward pass needs there.
  virtual Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) = 0;

  /// Backward pass for the call that produced `cache`. Returns the gradient
  /// w.r.t. the input; accumulates parameter gradients only when
  /// `with_param_grads` is set (gradients still flow through frozen blocks).
  virtual Tensor backward(const LayerCtx& cache, const Tensor& gy,
                          bool with_param_grads) = 0;

  /// Seeded fan-in-scaled init; weights uniform with variance
  /// init_gain^2 / fan_in, biases zero.
  virtual void init(Rng&) {}
};

/// Gain for layers whose output feeds a ReLU; compensates rectification so
/// activation scale is preserved through the stack.
inline constexpr double kReluGain = 1.4142135623730951;

class Dense : public Layer {
 public:
  Dense(int in, int out, std::string name, double init_gain = 1.0);
  std::string kind() const override { return "dense"; }
  std::vector<Param*> params() override { return {&W_, &b_}; }
  Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) override;
  Tensor backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) override;
  void init(Rng& rng) override;

 private:
  int in_, out_;
  double init_gain_;
  Param W_;  // (out, in)
  Param b_;  // (out)
};

class ReLU : public Layer {
 public:
  std::string kind() const override { return "relu"; }
  Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) override;
  Tensor backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) override;
};

class Sigmoid : public Layer {
 public:
  std::string kind() const override { return "sigmoid"; }
  Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) override;
  Tensor backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) override;
};

/// Temporal convolution, stride 1, explicit left/right zero padding.
/// Input (B, c_in, T) -> output (B, c_out, T + pad_l + pad_r - k + 1).
class Conv1d : public Layer {
 public:
  Conv1d(int c_in, int c_out, int k, int pad_l, int pad_r, std::string name,
         double init_gain = 1.0);
  std::string kind() const override { return "conv1d"; }
  std::vector<Param*> params() override { return {&W_, &b_}; }
  Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) override;
  Tensor backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) override;
  void init(Rng& rng) override;

 private:
  int c_in_, c_out_, k_, pad_l_, pad_r_;
  double init_gain_;
  Param W_;  // (c_out, c_in, k)
  Param b_;  // (c_out)
};

/// Fractionally strided temporal convolution: stride 2, kernel 8, padding 3,
/// so out_len = 2 * in_len + out_extra with out_extra in {0, 1}.
class ConvTranspose1d : public Layer {
 public:
  ConvTranspose1d(int c_in, int c_out, int out_extra, std::string name,
                  double init_gain = 1.0);
  std::string kind() const override { return "conv_transpose1d"; }
  std::vector<Param*> params() override { return {&W_, &b_}; }
  Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) override;
  Tensor backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) override;
  void init(Rng& rng) override;

  static constexpr int kKernel = 8;
  static constexpr int kStride = 2;
  static constexpr int kPad = 3;

 private:
  int c_in_, c_out_, out_extra_;
  double init_gain_;
  Param W_;  // (c_in, c_out, k)
  Param b_;  // (c_out)
};

/// Mean over non-overlapping windows of 2 along time; tail sample dropped
/// when the length is odd. (B, C, T) -> (B, C, floor(T/2)).
class AvgPool1d : public Layer {
 public:
  std::string kind() const override { return "avg_pool1d"; }
  Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) override;
  Tensor backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) override;
};

/// Mean over the whole time axis. (B, C, T) -> (B, C).
class GlobalAvgPool : public Layer {
 public:
  std::string kind() const override { return "global_avg_pool"; }
  Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) override;
  Tensor backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) override;
};

/// (B, C*T) -> (B, C, T).
class Reshape3 : public Layer {
 public:
  Reshape3(int channels, int time) : channels_(channels), time_(time) {}
  std::string kind() const override { return "reshape3"; }
  Tensor forward(const Tensor& x, std::unique_ptr<LayerCtx>* cache) override;
  Tensor backward(const LayerCtx& cache, const Tensor& gy, bool with_param_grads) override;

 private:
  int channels_, time_;
};

/// Ordered layer stack with explicit per-call activation contexts, so one
/// parameter set can serve several concurrent forward passes per batch.
class Sequential {
 public:
  struct Ctx {
    std::vector<std::unique_ptr<LayerCtx>> per_layer;
  };

  Sequential() = default;
  Sequential(Sequential&&) = default;
  Sequential& operator=(Sequential&&) = default;

  void add(std::unique_ptr<Layer> l) { layers_.push_back(std::move(l)); }

  Tensor forward(const Tensor& x, Ctx* ctx);
  Tensor backward(const Ctx& ctx, const Tensor& gy, bool with_param_grads);

  std::vector<Param*> params();
  std::int64_t param_count() const;
  void zero_grad();
  void init(Rng& rng);

  std::vector<double> flat_params() const;
  void set_flat_params(const std::vector<double>& flat);

  std::size_t layer_count() const { return layers_.size(); }

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// Adam with standard defaults; one instance per block so freezing a block
/// also freezes its optimizer state.
class Adam {
 public:
  explicit Adam(double lr = 1e-4) : lr_(lr) {}

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  std::int64_t steps() const { return t_; }

  /// Drops moments and the step counter (used at training-step boundaries).
  void reset();

  void step(const std::vector<Param*>& params);

 private:
  double lr_;
  double beta1_ = 0.9;
  double beta2_ = 0.999;
  double eps_ = 1e-8;
  std::int64_t t_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace har::nn
