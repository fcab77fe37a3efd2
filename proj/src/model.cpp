#include "jointidsf/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

#include "jointidsf/init.hpp"

namespace jointidsf {

IntentHead::IntentHead(std::size_t intent_count, std::size_t d_e, std::mt19937_64& rng)
    : weight(glorot_uniform({intent_count, d_e}, d_e, intent_count, rng)),
      bias(Tensor::zeros({intent_count}, true)) {}

Tensor IntentHead::probs(const Tensor& c0) const {
    if (c0.rank() != 1 || c0.size() != weight.dim(1)) {
        throw ShapeError("intent head: c0 " + shape_to_string(c0.shape()) + " vs weight " +
                         shape_to_string(weight.shape()));
    }
    return softmax(add(matmul(weight, c0), bias));
}

Tensor intent_loss(const Tensor& probs, std::size_t gold) { return cross_entropy(probs, gold); }

std::size_t predict_intent(const Tensor& probs) {
    const auto& v = probs.values();
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] > v[best]) best = i;
    return best;
}

SlotHead::SlotHead(std::size_t tag_count, std::size_t d_slot, std::mt19937_64& rng)
    : weight(glorot_uniform({tag_count, d_slot}, d_slot, tag_count, rng)),
      bias(Tensor::zeros({tag_count}, true)) {}

Tensor SlotHead::emissions(const Tensor& slot_inputs) const {
    if (slot_inputs.rank() != 2 || slot_inputs.dim(1) != weight.dim(1)) {
        throw ShapeError("slot head: inputs " + shape_to_string(slot_inputs.shape()) +
                         " vs weight " + shape_to_string(weight.shape()));
    }
    return add_rows(matmul_nt(slot_inputs, weight), bias);
}

JointModel::JointModel(ModelConfig config, std::uint64_t seed,
                       const std::vector<std::string>* bio_tags)
    : config_(config) {
    if (config_.intent_count == 0 || config_.tag_count == 0)
        throw ContractError("model config: intent_count and tag_count must be > 0");
    std::mt19937_64 rng(seed);
    encoder_ = Encoder(config_.encoder, rng);
    intent_head_ = IntentHead(config_.intent_count, config_.encoder.d_model, rng);
    if (variant_uses_label_matrix(config_.variant)) {
        label_matrix_ = glorot_uniform({config_.encoder.d_model, config_.intent_count},
                                       config_.encoder.d_model, config_.intent_count, rng);
    }
    slot_head_ = SlotHead(config_.tag_count,
                          slot_input_dim(config_.variant, config_.encoder.d_model), rng);
    crf_ = CrfParams::zeros(config_.tag_count);
    if (config_.constrain_bio) {
        if (!bio_tags || bio_tags->size() != config_.tag_count)
            throw ContractError("model config: constrain_bio requires the BIO tag inventory");
        apply_bio_constraints(crf_, *bio_tags);
    }
    dropout_rng_.seed(seed ^ 0x9e3779b97f4a7c15ull);
}

JointModel::Forward JointModel::forward(const std::vector<std::size_t>& ids, bool train_mode,
                                        const std::vector<bool>* pad_mask) {
    Forward f;
    f.encoded = encoder_.forward(ids, train_mode, dropout_rng_, pad_mask);
    Tensor c0 = row(f.encoded, 0);
    c0 = dropout(c0, config_.encoder.dropout_rate, dropout_rng_, train_mode);
    f.intent_probs = intent_head_.probs(c0);

    std::vector<bool> token_mask;
    const std::vector<bool>* token_mask_ptr = nullptr;
    if (pad_mask) {
        token_mask.assign(pad_mask->begin() + 1, pad_mask->end());
        token_mask_ptr = &token_mask;
    }
    f.slot_inputs =
        compose_slot_inputs(config_.variant, f.encoded, f.intent_probs, label_matrix_, token_mask_ptr);
    f.emissions = slot_head_.emissions(f.slot_inputs);
    return f;
}

Tensor JointModel::loss(const Forward& fwd, std::size_t gold_intent,
                        const std::vector<std::size_t>& gold_tags, double lambda) {
    Tensor l_id = intent_loss(fwd.intent_probs, gold_intent);
    Tensor l_sf = crf_nll(fwd.emissions, gold_tags, crf_);
    return joint_loss(l_id, l_sf, lambda);
}

JointModel::Prediction JointModel::predict(const std::vector<std::size_t>& ids) {
    NoGradGuard guard;
    Forward f = forward(ids, /*train_mode=*/false);
    Prediction p;
    p.intent = predict_intent(f.intent_probs);
    p.tags = viterbi_decode(f.emissions, crf_).tags;
    return p;
}

std::vector<std::pair<std::string, Tensor>> JointModel::named_parameters() const {
    auto out = encoder_.named_parameters();
    out.emplace_back("intent_head.weight", intent_head_.weight);
    out.emplace_back("intent_head.bias", intent_head_.bias);
    if (label_matrix_.defined()) out.emplace_back("attention.label_matrix", label_matrix_);
    out.emplace_back("slot_head.weight", slot_head_.weight);
    out.emplace_back("slot_head.bias", slot_head_.bias);
    out.emplace_back("crf.transitions", crf_.transitions);
    out.emplace_back("crf.start_scores", crf_.start_scores);
    out.emplace_back("crf.end_scores", crf_.end_scores);
    return out;
}

void JointModel::zero_grads() {
    for (auto& [name, p] : named_parameters()) p.zero_grad();
}

void JointModel::load_parameter_values(
    const std::vector<std::pair<std::string, std::vector<double>>>& named_values) {
    std::unordered_map<std::string, Tensor> params;
    for (auto& [name, p] : named_parameters()) params.emplace(name, p);
    if (named_values.size() != params.size())
        throw ContractError("checkpoint: parameter count mismatch (" +
                            std::to_string(named_values.size()) + " vs " +
                            std::to_string(params.size()) + ")");
    for (const auto& [name, values] : named_values) {
        auto it = params.find(name);
        if (it == params.end()) throw ContractError("checkpoint: unknown parameter " + name);
        if (it->second.size() != values.size())
            throw ShapeError("checkpoint: size mismatch for " + name);
        it->second.values_mut() = values;
    }
}

Tensor joint_loss(const Tensor& l_id, const Tensor& l_sf, double lambda) {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw ContractError("lambda must be in (0,1), got " + std::to_string(lambda));
    return add(scale(l_id, lambda), scale(l_sf, 1.0 - lambda));
}

}  // namespace jointidsf
