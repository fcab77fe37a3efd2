#pragma once

// Intent-slot attention: soft intent label embedding w = Wp, per-token
// attention weights over the utterance, and the intent-specific vectors that
// feed the slot head. Also the ablation variants and the baseline bypass.

#include <cstddef>
#include <string>
#include <vector>

#include "jointidsf/autodiff.hpp"

namespace jointidsf {

enum class AttentionVariant {
    kFull,        // v_i = s_i . c_i with w = Wp, s_i = a_i * w
    kClsContext,  // same pipeline with w := c_0
    kScaledSlot,  // s_i = a_i * c_i (w = Wp still drives the weights)
    kConcatCls,   // v_i = c_0 . c_i, no attention
    kBaseline,    // v_i = c_i (reduces to the joint model without attention)
};

AttentionVariant parse_variant(const std::string& name);
std::string variant_name(AttentionVariant v);

// True for variants that own a d_e x k label embedding matrix.
bool variant_uses_label_matrix(AttentionVariant v);

// Slot-input width for a given embedding size.
std::size_t slot_input_dim(AttentionVariant v, std::size_t d_e);

// w = Wp; W is d_e x k, p a distribution over the k intents.
Tensor soft_label_embedding(const Tensor& label_matrix, const Tensor& intent_probs);

// a_i = exp(w^T c_i) / sum_j exp(w^T c_j), over real (unpadded) positions of
// the n utterance tokens; [CLS] is excluded by the caller. Padded positions
// are exactly 0.
Tensor attention_weights(const Tensor& w, const Tensor& token_embeddings,
                         const std::vector<bool>* pad_mask = nullptr);

// s_i = a_i * w, one row per token.
Tensor intent_specific_vectors(const Tensor& alpha, const Tensor& w);

// Builds the n x d_slot slot-head inputs from the full (n+1) x d_e encoder
// output (row 0 = [CLS]), the intent distribution, and the label matrix
// (ignored by variants that do not use it; may be undefined then).
Tensor compose_slot_inputs(AttentionVariant variant, const Tensor& encoded,
                           const Tensor& intent_probs, const Tensor& label_matrix,
                           const std::vector<bool>* pad_mask = nullptr);

}  // namespace jointidsf
