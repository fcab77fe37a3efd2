#include "jointidsf/encoder.hpp"

#include <cmath>
#include <stdexcept>

#include "jointidsf/init.hpp"

namespace jointidsf {

void EncoderConfig::validate() const {
    if (vocab_size == 0) throw ContractError("encoder config: vocab_size must be > 0");
    if (n_heads == 0 || d_model % n_heads != 0)
        throw ContractError("encoder config: d_model (" + std::to_string(d_model) +
                            ") must be divisible by n_heads (" + std::to_string(n_heads) + ")");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ContractError("encoder config: dropout_rate must be in [0,1)");
    if (max_len < 2) throw ContractError("encoder config: max_len must allow [CLS] plus a token");
}

Encoder::Encoder(EncoderConfig config, std::mt19937_64& rng) : config_(config) {
    config_.validate();
    std::size_t d = config_.d_model;
    token_embeddings_ = normal_init({config_.vocab_size, d}, 0.02, rng);
    pos_embeddings_ = normal_init({config_.max_len, d}, 0.02, rng);
    std::size_t ff = 4 * d;
    layers_.resize(config_.n_layers);
    for (auto& l : layers_) {
        l.wq = glorot_uniform({d, d}, d, d, rng);
        l.bq = Tensor::zeros({d}, true);
        l.wk = glorot_uniform({d, d}, d, d, rng);
        l.bk = Tensor::zeros({d}, true);
        l.wv = glorot_uniform({d, d}, d, d, rng);
        l.bv = Tensor::zeros({d}, true);
        l.wo = glorot_uniform({d, d}, d, d, rng);
        l.bo = Tensor::zeros({d}, true);
        l.ln1_gain = Tensor::full({d}, 1.0, true);
        l.ln1_bias = Tensor::zeros({d}, true);
        l.ff_w1 = glorot_uniform({d, ff}, d, ff, rng);
        l.ff_b1 = Tensor::zeros({ff}, true);
        l.ff_w2 = glorot_uniform({ff, d}, ff, d, rng);
        l.ff_b2 = Tensor::zeros({d}, true);
        l.ln2_gain = Tensor::full({d}, 1.0, true);
        l.ln2_bias = Tensor::zeros({d}, true);
    }
}

Tensor Encoder::forward(const std::vector<std::size_t>& ids, bool train_mode,
                        std::mt19937_64& rng, const std::vector<bool>* mask) const {
    if (ids.empty()) throw ContractError("encoder: empty input");
    if (ids.size() > config_.max_len)
        throw ContractError("encoder: input length " + std::to_string(ids.size()) +
                            " exceeds max_len " + std::to_string(config_.max_len));
    if (mask && mask->size() != ids.size()) throw MaskError("encoder: mask length mismatch");

    std::size_t len = ids.size();
    std::size_t d = config_.d_model;
    std::size_t heads = config_.n_heads;
    std::size_t dh = d / heads;
    double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));

    Tensor x = add(embedding_rows(token_embeddings_, ids), rows(pos_embeddings_, 0, len));
    x = dropout(x, config_.dropout_rate, rng, train_mode);

    for (const Layer& l : layers_) {
        Tensor q = add_rows(matmul(x, l.wq), l.bq);
        Tensor k = add_rows(matmul(x, l.wk), l.bk);
        Tensor v = add_rows(matmul(x, l.wv), l.bv);
        Tensor ctx;
        for (std::size_t h = 0; h < heads; ++h) {
            Tensor qh = cols(q, h * dh, (h + 1) * dh);
            Tensor kh = cols(k, h * dh, (h + 1) * dh);
            Tensor vh = cols(v, h * dh, (h + 1) * dh);
            Tensor scores = scale(matmul_nt(qh, kh), inv_sqrt_dh);
            Tensor attn = softmax_rows(scores, mask);
            Tensor ch = matmul(attn, vh);
            ctx = h == 0 ? ch : concat_cols(ctx, ch);
        }
        Tensor attn_out = add_rows(matmul(ctx, l.wo), l.bo);
        attn_out = dropout(attn_out, config_.dropout_rate, rng, train_mode);
        x = layer_norm_rows(add(x, attn_out), l.ln1_gain, l.ln1_bias);

        Tensor ff = add_rows(matmul(gelu(add_rows(matmul(x, l.ff_w1), l.ff_b1)), l.ff_w2), l.ff_b2);
        ff = dropout(ff, config_.dropout_rate, rng, train_mode);
        x = layer_norm_rows(add(x, ff), l.ln2_gain, l.ln2_bias);
    }
    return x;
}

std::vector<std::pair<std::string, Tensor>> Encoder::named_parameters() const {
    std::vector<std::pair<std::string, Tensor>> out;
    out.emplace_back("encoder.token_embeddings", token_embeddings_);
    out.emplace_back("encoder.pos_embeddings", pos_embeddings_);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const Layer& l = layers_[i];
        std::string p = "encoder.layer" + std::to_string(i) + ".";
        out.emplace_back(p + "wq", l.wq);
        out.emplace_back(p + "bq", l.bq);
        out.emplace_back(p + "wk", l.wk);
        out.emplace_back(p + "bk", l.bk);
        out.emplace_back(p + "wv", l.wv);
        out.emplace_back(p + "bv", l.bv);
        out.emplace_back(p + "wo", l.wo);
        out.emplace_back(p + "bo", l.bo);
        out.emplace_back(p + "ln1_gain", l.ln1_gain);
        out.emplace_back(p + "ln1_bias", l.ln1_bias);
        out.emplace_back(p + "ff_w1", l.ff_w1);
        out.emplace_back(p + "ff_b1", l.ff_b1);
        out.emplace_back(p + "ff_w2", l.ff_w2);
        out.emplace_back(p + "ff_b2", l.ff_b2);
        out.emplace_back(p + "ln2_gain", l.ln2_gain);
        out.emplace_back(p + "ln2_bias", l.ln2_bias);
    }
    return out;
}

}  // namespace jointidsf
