#pragma once

// Tiny pre-norm transformer encoder with hand-written backward pass.
// Padding is stripped before encoding, which is equivalent to key masking
// for every non-pad position.

#include <random>
#include <vector>

#include <json.hpp>

#include "scamrank/tensor.hpp"

namespace scamrank {

struct EncoderConfig {
  int layers = 2;
  int dim = 64;
  int heads = 4;
  int ff_dim = 128;
  double dropout = 0.1;
  int vocab_size = 8192;
  int max_len = 64;

  void validate() const;
  bool operator==(const EncoderConfig&) const = default;
};

nlohmann::json encoder_config_to_json(const EncoderConfig& c);
EncoderConfig encoder_config_from_json(const nlohmann::json& j);

// Randomness for one forward pass; null means eval mode.
struct TrainContext {
  std::mt19937_64* rng = nullptr;
  bool training() const { return rng != nullptr; }
};

// attention maps: [layer][head], each n x n and row-stochastic
using AttentionMaps = std::vector<std::vector<Mat>>;

struct EncoderCache {
  struct Layer {
    Mat h_in;
    LayerNormCache ln1;
    Mat a, q, k, v;
    std::vector<Mat> probs;
    Mat o;
    Mat drop1;
    Mat h_mid;
    LayerNormCache ln2;
    Mat b, pre, f;
    Mat drop2;
  };
  std::vector<int> ids;
  Mat drop_emb;
  std::vector<Layer> layers;
  Mat h_last;
  LayerNormCache ln_f;

  AttentionMaps attention() const;
};

class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& cfg, std::mt19937_64& rng);

  // ids: token ids with trailing PAD (0) allowed; returns n x dim hidden
  // states after the final layer norm, n = unpadded length (>= 1).
  Mat forward(const std::vector<int>& ids, EncoderCache& cache, TrainContext ctx = {}) const;

  // dout: n x dim upstream gradient. d_attn (optional) adds gradient directly
  // on the attention probabilities, same shape as cache.attention().
  void backward(const EncoderCache& cache, const Mat& dout, const AttentionMaps* d_attn = nullptr);

  ParamList params();
  const EncoderConfig& config() const { return cfg_; }

 private:
  struct Layer {
    Param ln1_g, ln1_b, wq, bq, wk, bk, wv, bv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
  };
  EncoderConfig cfg_;
  Param tok_emb;
  std::vector<Layer> layers_;
  Param lnf_g, lnf_b;
  Mat positions_;
};

}  // namespace scamrank
