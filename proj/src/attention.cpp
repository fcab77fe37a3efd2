#include "jointidsf/attention.hpp"

#include <stdexcept>

namespace jointidsf {

AttentionVariant parse_variant(const std::string& name) {
    if (name == "full") return AttentionVariant::kFull;
    if (name == "cls_context") return AttentionVariant::kClsContext;
    if (name == "scaled_slot") return AttentionVariant::kScaledSlot;
    if (name == "concat_cls") return AttentionVariant::kConcatCls;
    if (name == "baseline") return AttentionVariant::kBaseline;
    throw std::invalid_argument(
        "unknown attention variant '" + name +
        "' (expected full|cls_context|scaled_slot|concat_cls|baseline)");
}

std::string variant_name(AttentionVariant v) {
    switch (v) {
        case AttentionVariant::kFull: return "full";
        case AttentionVariant::kClsContext: return "cls_context";
        case AttentionVariant::kScaledSlot: return "scaled_slot";
        case AttentionVariant::kConcatCls: return "concat_cls";
        case AttentionVariant::kBaseline: return "baseline";
    }
    return "unknown";
}

bool variant_uses_label_matrix(AttentionVariant v) {
    return v == AttentionVariant::kFull || v == AttentionVariant::kScaledSlot;
}

std::size_t slot_input_dim(AttentionVariant v, std::size_t d_e) {
    return v == AttentionVariant::kBaseline ? d_e : 2 * d_e;
}

Tensor soft_label_embedding(const Tensor& label_matrix, const Tensor& intent_probs) {
    if (label_matrix.rank() != 2 || intent_probs.rank() != 1 ||
        label_matrix.dim(1) != intent_probs.size()) {
        throw ShapeError("soft_label_embedding: W " + shape_to_string(label_matrix.shape()) +
                         " vs p " + shape_to_string(intent_probs.shape()));
    }
    return matmul(label_matrix, intent_probs);
}

Tensor attention_weights(const Tensor& w, const Tensor& token_embeddings,
                         const std::vector<bool>* pad_mask) {
    if (token_embeddings.rank() != 2 || w.rank() != 1 || token_embeddings.dim(1) != w.size()) {
        throw ShapeError("attention_weights: w " + shape_to_string(w.shape()) + " vs c " +
                         shape_to_string(token_embeddings.shape()));
    }
    Tensor scores = matmul(token_embeddings, w);
    return softmax(scores, pad_mask);
}

Tensor intent_specific_vectors(const Tensor& alpha, const Tensor& w) {
    std::size_t n = alpha.size(), d = w.size();
    return matmul(reshape(alpha, {n, 1}), reshape(w, {1, d}));
}

Tensor compose_slot_inputs(AttentionVariant variant, const Tensor& encoded,
                           const Tensor& intent_probs, const Tensor& label_matrix,
                           const std::vector<bool>* pad_mask) {
    if (encoded.rank() != 2 || encoded.dim(0) < 2) {
        throw ShapeError("compose_slot_inputs: encoder output must be (n+1) x d_e, got " +
                         shape_to_string(encoded.shape()));
    }
    std::size_t n = encoded.dim(0) - 1;
    Tensor c = rows(encoded, 1, n + 1);  // utterance tokens, [CLS] excluded

    switch (variant) {
        case AttentionVariant::kBaseline:
            return c;
        case AttentionVariant::kConcatCls:
            return concat_cols(repeat_row(row(encoded, 0), n), c);
        case AttentionVariant::kFull: {
            Tensor w = soft_label_embedding(label_matrix, intent_probs);
            Tensor alpha = attention_weights(w, c, pad_mask);
            return concat_cols(intent_specific_vectors(alpha, w), c);
        }
        case AttentionVariant::kClsContext: {
            Tensor w = row(encoded, 0);
            Tensor alpha = attention_weights(w, c, pad_mask);
            return concat_cols(intent_specific_vectors(alpha, w), c);
        }
        case AttentionVariant::kScaledSlot: {
            Tensor w = soft_label_embedding(label_matrix, intent_probs);
            Tensor alpha = attention_weights(w, c, pad_mask);
            return concat_cols(scale_rows(c, alpha), c);
        }
    }
    throw std::logic_error("compose_slot_inputs: unhandled variant");
}

}  // namespace jointidsf
