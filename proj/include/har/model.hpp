#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "har/nn.hpp"
#include "har/rng.hpp"

namespace har {

enum class DiscriminatorVariant { ours, subject_id, pair_random };

std::string to_string(DiscriminatorVariant v);
DiscriminatorVariant discriminator_variant_from_string(const std::string& s);

/// Architecture hyperparameters shared by all four blocks.
struct ModelArch {
  int c = 18;
  int w = 512;
  int d_latent = 128;
  int K = 12;
  double width_scale = 1.0;
  DiscriminatorVariant variant = DiscriminatorVariant::ours;
  int n_train_subjects = 0;  // required for the subject-id discriminator

  void validate() const;
};

/// Time lengths after each of the three halving stages of the encoder.
std::array<int, 3> encoder_time_lengths(int w);

int scaled_width(int base, double width_scale);

/// Convolutional encoder: 3 x {conv(k=8, same) -> ReLU -> avg-pool(2)},
/// global temporal average, linear map to d_latent.
/// Input (B, c, w) -> output (B, d_latent).
nn::Sequential make_feature_extractor(int c, int w, int d_latent, double width_scale);

/// Mirror decoder: linear -> reshape -> 3 transposed convolutions undoing
/// the encoder's halvings. Input (B, d_latent) -> output (B, c, w).
nn::Sequential make_reconstructor(int d_latent, int w, int c, double width_scale);

/// Two-layer perceptron (hidden 64) emitting K activity logits.
nn::Sequential make_classifier(int d_latent, int K);

/// Pair discriminator over concatenated features (a then b):
/// (B, 2*d_latent) -> same-subject probability in (0,1).
nn::Sequential make_discriminator_ours(int d_latent);

/// Subject-identification head: (B, d_latent) -> per-train-subject logits.
nn::Sequential make_discriminator_subject_id(int d_latent, int n_train_subjects);

/// Same head as make_discriminator_ours; trained on pairs sampled without
/// the same-activity constraint.
nn::Sequential make_discriminator_pair_random(int d_latent);

/// One trainable block plus its optimizer, freeze flag, and parameter
/// snapshot used to verify that frozen parameters stay bit-identical.
struct Block {
  std::string name;
  nn::Sequential net;
  nn::Adam opt;
  bool frozen = false;
  std::vector<double> snapshot;

  void take_snapshot() { snapshot = net.flat_params(); }
  bool matches_snapshot() const { return net.flat_params() == snapshot; }
};

struct ModelBundle {
  ModelArch arch;
  Block F, R, C, D;

  /// Builds all four blocks for `arch` and initializes parameters from
  /// per-block streams of `seed`.
  static ModelBundle build(const ModelArch& arch, std::uint64_t seed);

  Block& block(const std::string& name);
  const Block& block(const std::string& name) const;
  std::vector<Block*> blocks();
};

/// True iff the named block's parameters are bit-identical to its snapshot.
bool snapshot_and_verify_frozen(const ModelBundle& bundle, const std::string& block_name);

/// Single-file container: magic, JSON manifest (architecture + tensor
/// index), raw little-endian doubles.
void save_checkpoint(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_checkpoint(const std::filesystem::path& path);

}  // namespace har
