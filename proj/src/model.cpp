#include "har/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "har/errors.hpp"

namespace har {

using json = nlohmann::json;

std::string to_string(DiscriminatorVariant v) {
  switch (v) {
    case DiscriminatorVariant::ours: return "ours";
    case DiscriminatorVariant::subject_id: return "subject_id";
    case DiscriminatorVariant::pair_random: return "pair_random";
  }
  return "?";
}

DiscriminatorVariant discriminator_variant_from_string(const std::string& s) {
  if (s == "ours") return DiscriminatorVariant::ours;
  if (s == "subject_id") return DiscriminatorVariant::subject_id;
  if (s == "pair_random") return DiscriminatorVariant::pair_random;
  throw ConfigError("unknown discriminator variant: '" + s + "'");
}

void ModelArch::validate() const {
  if (c < 1) throw std::invalid_argument("ModelArch: c must be >= 1");
  if (w < 8) throw std::invalid_argument("ModelArch: w must be >= 8 (three halvings)");
  if (d_latent < 2) throw std::invalid_argument("ModelArch: d_latent must be >= 2");
  if (K < 2) throw std::invalid_argument("ModelArch: K must be >= 2");
  if (width_scale <= 0.0) throw std::invalid_argument("ModelArch: width_scale must be > 0");
  if (variant == DiscriminatorVariant::subject_id && n_train_subjects < 2) {
    throw std::invalid_argument("ModelArch: subject-id head needs n_train_subjects >= 2");
  }
}

std::array<int, 3> encoder_time_lengths(int w) {
  if (w < 8) throw std::invalid_argument("encoder_time_lengths: w must be >= 8");
  const int t1 = w / 2;
  const int t2 = t1 / 2;
  const int t3 = t2 / 2;
  return {t1, t2, t3};
}

int scaled_width(int base, double width_scale) {
  return std::max(1, static_cast<int>(std::llround(base * width_scale)));
}

namespace {

constexpr int kBaseWidths[3] = {32, 64, 128};
constexpr int kKernel = 8;

/// Pass-through layer that rejects inputs whose (channel, time) shape
/// differs from the block's configured one.
class InputGuard : public nn::Layer {
 public:
  InputGuard(int c, int w, std::string block) : c_(c), w_(w), block_(std::move(block)) {}
  std::string kind() const override { return "input_guard"; }

  nn::Tensor forward(const nn::Tensor& x, std::unique_ptr<nn::LayerCtx>*) override {
    if (x.rank() != 3 || x.dim(1) != c_ || x.dim(2) != w_) {
      throw std::invalid_argument(block_ + ": expected input (batch, " +
                                  std::to_string(c_) + ", " + std::to_string(w_) + ")");
    }
    return x;
  }
  nn::Tensor backward(const nn::LayerCtx&, const nn::Tensor& gy, bool) override {
    return gy;
  }

 private:
  int c_, w_;
  std::string block_;
};

}  // namespace

nn::Sequential make_feature_extractor(int c, int w, int d_latent, double width_scale) {
  if (d_latent < 2) throw std::invalid_argument("make_feature_extractor: d_latent >= 2");
  encoder_time_lengths(w);  // validates w
  nn::Sequential net;
  net.add(std::make_unique<InputGuard>(c, w, "feature_extractor"));
  int c_in = c;
  for (int i = 0; i < 3; ++i) {
    const int c_out = scaled_width(kBaseWidths[i], width_scale);
    // kernel 8, stride 1, padding (3, 4) keeps the time length.
    net.add(std::make_unique<nn::Conv1d>(c_in, c_out, kKernel, 3, 4,
                                         "F.conv" + std::to_string(i + 1), nn::kReluGain));
    net.add(std::make_unique<nn::ReLU>());
    net.add(std::make_unique<nn::AvgPool1d>());
    c_in = c_out;
  }
  net.add(std::make_unique<nn::GlobalAvgPool>());
  net.add(std::make_unique<nn::Dense>(c_in, d_latent, "F.fc"));
  return net;
}

nn::Sequential make_reconstructor(int d_latent, int w, int c, double width_scale) {
  const auto t = encoder_time_lengths(w);
  if (t[2] < 1) throw std::invalid_argument("make_reconstructor: w too small");
  const int w1 = scaled_width(kBaseWidths[0], width_scale);
  const int w2 = scaled_width(kBaseWidths[1], width_scale);
  const int w3 = scaled_width(kBaseWidths[2], width_scale);

  nn::Sequential net;
  net.add(std::make_unique<nn::Dense>(d_latent, w3 * t[2], "R.fc", nn::kReluGain));
  net.add(std::make_unique<nn::Reshape3>(w3, t[2]));
  net.add(std::make_unique<nn::ReLU>());
  // Each stage doubles the time length, plus one sample when the matching
  // encoder halving dropped an odd tail.
  net.add(std::make_unique<nn::ConvTranspose1d>(w3, w2, t[1] - 2 * t[2], "R.deconv1",
                                                nn::kReluGain));
  net.add(std::make_unique<nn::ReLU>());
  net.add(std::make_unique<nn::ConvTranspose1d>(w2, w1, t[0] - 2 * t[1], "R.deconv2",
                                                nn::kReluGain));
  net.add(std::make_unique<nn::ReLU>());
  net.add(std::make_unique<nn::ConvTranspose1d>(w1, c, w - 2 * t[0], "R.deconv3"));
  return net;
}

nn::Sequential make_classifier(int d_latent, int K) {
  nn::Sequential net;
  net.add(std::make_unique<nn::Dense>(d_latent, 64, "C.fc1", nn::kReluGain));
  net.add(std::make_unique<nn::ReLU>());
  net.add(std::make_unique<nn::Dense>(64, K, "C.fc2"));
  return net;
}

namespace {

nn::Sequential make_pair_head(int d_latent) {
  nn::Sequential net;
  net.add(std::make_unique<nn::Dense>(2 * d_latent, 128, "D.fc1", nn::kReluGain));
  net.add(std::make_unique<nn::ReLU>());
  net.add(std::make_unique<nn::Dense>(128, 64, "D.fc2", nn::kReluGain));
  net.add(std::make_unique<nn::ReLU>());
  net.add(std::make_unique<nn::Dense>(64, 1, "D.fc3"));
  net.add(std::make_unique<nn::Sigmoid>());
  return net;
}

}  // namespace

nn::Sequential make_discriminator_ours(int d_latent) { return make_pair_head(d_latent); }

nn::Sequential make_discriminator_pair_random(int d_latent) {
  return make_pair_head(d_latent);
}

nn::Sequential make_discriminator_subject_id(int d_latent, int n_train_subjects) {
  if (n_train_subjects < 2) {
    throw std::invalid_argument("make_discriminator_subject_id: need >= 2 subjects");
  }
  nn::Sequential net;
  net.add(std::make_unique<nn::Dense>(d_latent, 128, "D.fc1", nn::kReluGain));
  net.add(std::make_unique<nn::ReLU>());
  net.add(std::make_unique<nn::Dense>(128, 64, "D.fc2", nn::kReluGain));
  net.add(std::make_unique<nn::ReLU>());
  net.add(std::make_unique<nn::Dense>(64, n_train_subjects, "D.fc3"));
  return net;
}

ModelBundle ModelBundle::build(const ModelArch& arch, std::uint64_t seed) {
  arch.validate();
  ModelBundle b;
  b.arch = arch;
  b.F.name = "F";
  b.F.net = make_feature_extractor(arch.c, arch.w, arch.d_latent, arch.width_scale);
  b.R.name = "R";
  b.R.net = make_reconstructor(arch.d_latent, arch.w, arch.c, arch.width_scale);
  b.C.name = "C";
  b.C.net = make_classifier(arch.d_latent, arch.K);
  b.D.name = "D";
  switch (arch.variant) {
    case DiscriminatorVariant::ours:
      b.D.net = make_discriminator_ours(arch.d_latent);
      break;
    case DiscriminatorVariant::subject_id:
      b.D.net = make_discriminator_subject_id(arch.d_latent, arch.n_train_subjects);
      break;
    case DiscriminatorVariant::pair_random:
      b.D.net = make_discriminator_pair_random(arch.d_latent);
      break;
  }
  const Rng base(seed);
  std::uint64_t id = 1;
  for (Block* blk : b.blocks()) {
    Rng stream = base.derive(id++);
    blk->net.init(stream);
    blk->take_snapshot();
  }
  return b;
}

Block& ModelBundle::block(const std::string& name) {
  if (name == "F") return F;
  if (name == "R") return R;
  if (name == "C") return C;
  if (name == "D") return D;
  throw std::invalid_argument("ModelBundle: unknown block '" + name + "'");
}

const Block& ModelBundle::block(const std::string& name) const {
  return const_cast<ModelBundle*>(this)->block(name);
}

std::vector<Block*> ModelBundle::blocks() { return {&F, &R, &C, &D}; }

bool snapshot_and_verify_frozen(const ModelBundle& bundle, const std::string& block_name) {
  return bundle.block(block_name).matches_snapshot();
}

// ---------------------------------------------------------------------------
// Checkpoint container

namespace {

constexpr char kMagic[8] = {'H', 'A', 'R', 'C', 'K', 'P', 'T', '1'};

json arch_to_json(const ModelArch& a) {
  return json{{"c", a.c},
              {"w", a.w},
              {"d_latent", a.d_latent},
              {"K", a.K},
              {"width_scale", a.width_scale},
              {"variant", to_string(a.variant)},
              {"n_train_subjects", a.n_train_subjects}};
}

ModelArch arch_from_json(const json& j) {
  ModelArch a;
  a.c = j.at("c").get<int>();
  a.w = j.at("w").get<int>();
  a.d_latent = j.at("d_latent").get<int>();
  a.K = j.at("K").get<int>();
  a.width_scale = j.at("width_scale").get<double>();
  a.variant = discriminator_variant_from_string(j.at("variant").get<std::string>());
  a.n_train_subjects = j.at("n_train_subjects").get<int>();
  return a;
}

}  // namespace

void save_checkpoint(const ModelBundle& bundle, const std::filesystem::path& path) {
  json manifest;
  manifest["schema_version"] = 1;
  manifest["arch"] = arch_to_json(bundle.arch);
  json blocks = json::array();
  std::vector<const nn::Param*> ordered;
  for (const Block* blk :
       {&bundle.F, &bundle.R, &bundle.C, &bundle.D}) {
    json params = json::array();
    for (nn::Param* p : const_cast<Block*>(blk)->net.params()) {
      params.push_back({{"name", p->name}, {"count", p->value.size()}});
      ordered.push_back(p);
    }
    blocks.push_back({{"name", blk->name}, {"params", params}});
  }
  manifest["blocks"] = blocks;
  const std::string header = manifest.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_checkpoint: cannot open " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const auto len = static_cast<std::uint32_t>(header.size());
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const nn::Param* p : ordered) {
    out.write(reinterpret_cast<const char*>(p->value.v.data()),
              static_cast<std::streamsize>(p->value.v.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("save_checkpoint: write failed for " + path.string());
}

ModelBundle load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_checkpoint: cannot open " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("load_checkpoint: bad magic in " + path.string());
  }
  std::uint32_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  std::string header(len, '\0');
  in.read(header.data(), len);
  if (!in) throw ParseError("load_checkpoint: truncated header in " + path.string());

  json manifest;
  try {
    manifest = json::parse(header);
  } catch (const json::exception& e) {
    throw ParseError("load_checkpoint: invalid manifest in " + path.string() + ": " +
                     e.what());
  }
  if (manifest.at("schema_version").get<int>() != 1) {
    throw ParseError("load_checkpoint: unsupported schema version in " + path.string());
  }

  ModelBundle bundle = ModelBundle::build(arch_from_json(manifest.at("arch")), 0);
  for (const auto& blk_json : manifest.at("blocks")) {
    Block& blk = bundle.block(blk_json.at("name").get<std::string>());
    auto params = blk.net.params();
    const auto& plist = blk_json.at("params");
    if (plist.size() != params.size()) {
      throw ParseError("load_checkpoint: parameter list mismatch for block " + blk.name);
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (plist[i].at("name").get<std::string>() != params[i]->name ||
          plist[i].at("count").get<std::int64_t>() != params[i]->value.size()) {
        throw ParseError("load_checkpoint: tensor mismatch at " + params[i]->name);
      }
      in.read(reinterpret_cast<char*>(params[i]->value.v.data()),
              static_cast<std::streamsize>(params[i]->value.v.size() * sizeof(double)));
      if (!in) throw ParseError("load_checkpoint: truncated tensors in " + path.string());
    }
  }
  for (Block* blk : bundle.blocks()) blk->take_snapshot();
  return bundle;
}

}  // namespace har
