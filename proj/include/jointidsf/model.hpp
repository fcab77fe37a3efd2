#pragma once

// The joint model: encoder, intent head, intent-slot attention, slot head,
// and linear-chain CRF, with the variant switch and the weighted joint loss.

#include <cstddef>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "jointidsf/attention.hpp"
#include "jointidsf/autodiff.hpp"
#include "jointidsf/crf.hpp"
#include "jointidsf/encoder.hpp"

namespace jointidsf {

struct IntentHead {
    Tensor weight;  // k x d_e
    Tensor bias;    // k

    IntentHead() = default;
    IntentHead(std::size_t intent_count, std::size_t d_e, std::mt19937_64& rng);

    // p = softmax(FFNN_ID(c0)), a distribution over the k intents.
    Tensor probs(const Tensor& c0) const;
};

Tensor intent_loss(const Tensor& probs, std::size_t gold);

// Smallest index among maxima.
std::size_t predict_intent(const Tensor& probs);

struct SlotHead {
    Tensor weight;  // T x d_slot
    Tensor bias;    // T

    SlotHead() = default;
    SlotHead(std::size_t tag_count, std::size_t d_slot, std::mt19937_64& rng);

    // h_i = FFNN_SF(v_i), unnormalized tag scores per token.
    Tensor emissions(const Tensor& slot_inputs) const;
};

struct ModelConfig {
    EncoderConfig encoder;
    std::size_t intent_count = 0;
    std::size_t tag_count = 0;
    AttentionVariant variant = AttentionVariant::kFull;
    bool constrain_bio = false;
};

class JointModel {
public:
    JointModel() = default;
    // bio_tags is required when constrain_bio is set.
    JointModel(ModelConfig config, std::uint64_t seed,
               const std::vector<std::string>* bio_tags = nullptr);

    struct Forward {
        Tensor encoded;       // (n+1) x d_e
        Tensor intent_probs;  // k
        Tensor slot_inputs;   // n x d_slot
        Tensor emissions;     // n x T
    };

    // ids must be [CLS]-prefixed; pad_mask covers ids when given.
    Forward forward(const std::vector<std::size_t>& ids, bool train_mode,
                    const std::vector<bool>* pad_mask = nullptr);

    // L = lambda * L_ID + (1 - lambda) * L_SF on one utterance.
    Tensor loss(const Forward& fwd, std::size_t gold_intent,
                const std::vector<std::size_t>& gold_tags, double lambda);

    struct Prediction {
        std::size_t intent = 0;
        std::vector<std::size_t> tags;
    };
    Prediction predict(const std::vector<std::size_t>& ids);

    std::vector<std::pair<std::string, Tensor>> named_parameters() const;
    void zero_grads();

    const ModelConfig& config() const { return config_; }
    const Encoder& encoder() const { return encoder_; }
    const IntentHead& intent_head() const { return intent_head_; }
    const SlotHead& slot_head() const { return slot_head_; }
    const CrfParams& crf() const { return crf_; }
    const Tensor& label_matrix() const { return label_matrix_; }

    // Reseeds the dropout stream (training determinism).
    void seed_dropout(std::uint64_t seed) { dropout_rng_.seed(seed); }

    // Overwrites parameter values from a name -> values map (checkpoint load).
    void load_parameter_values(
        const std::vector<std::pair<std::string, std::vector<double>>>& named_values);

private:
    ModelConfig config_;
    Encoder encoder_;
    IntentHead intent_head_;
    Tensor label_matrix_;  // d_e x k; undefined for variants that skip it
    SlotHead slot_head_;
    CrfParams crf_;
    std::mt19937_64 dropout_rng_;
};

// L = lambda * l_id + (1 - lambda) * l_sf; lambda must lie in (0,1).
Tensor joint_loss(const Tensor& l_id, const Tensor& l_sf, double lambda);

}  // namespace jointidsf
