#pragma once

// Small trainable transformer encoder producing contextualized embeddings
// c_0..c_n for a [CLS]-prefixed token-id sequence. Learned positional
// embeddings, multi-head self-attention, GELU feed-forward, post-LN residuals.

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jointidsf/autodiff.hpp"

namespace jointidsf {

struct EncoderConfig {
    std::size_t vocab_size = 0;
    std::size_t d_model = 64;   // embedding size of the contextualized outputs
    std::size_t n_layers = 2;
    std::size_t n_heads = 4;
    std::size_t max_len = 128;  // includes the [CLS] position
    double dropout_rate = 0.1;

    void validate() const;
};

class Encoder {
public:
    Encoder() = default;
    Encoder(EncoderConfig config, std::mt19937_64& rng);

    // ids must start with [CLS]; mask (when given) covers ids, true = real.
    // With train_mode=false the result is a pure function of weights + input.
    Tensor forward(const std::vector<std::size_t>& ids, bool train_mode, std::mt19937_64& rng,
                   const std::vector<bool>* mask = nullptr) const;

    std::vector<std::pair<std::string, Tensor>> named_parameters() const;

    const EncoderConfig& config() const { return config_; }

    struct Layer {
        Tensor wq, bq, wk, bk, wv, bv, wo, bo;
        Tensor ln1_gain, ln1_bias;
        Tensor ff_w1, ff_b1, ff_w2, ff_b2;
        Tensor ln2_gain, ln2_bias;
    };

private:
    EncoderConfig config_;
    Tensor token_embeddings_;  // vocab x d
    Tensor pos_embeddings_;    // max_len x d
    std::vector<Layer> layers_;
};

}  // namespace jointidsf
