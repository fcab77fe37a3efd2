#pragma once

// Linear-chain CRF over per-token emission scores: log-partition and gold
// sequence score as differentiable ops, Viterbi decoding for inference.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "jointidsf/autodiff.hpp"

namespace jointidsf {

struct CrfParams {
    Tensor transitions;  // T x T, score of tag t -> tag u
    Tensor start_scores; // T
    Tensor end_scores;   // T

    // Optional additive constraint applied to transition/start scores during
    // scoring (e.g. -1e4 on BIO-invalid moves). Not trainable; empty = off.
    std::vector<double> transition_penalty;  // T x T row-major, or empty
    std::vector<double> start_penalty;       // T, or empty

    static CrfParams zeros(std::size_t tag_count, bool trainable = true);
    std::size_t tag_count() const { return start_scores.size(); }
};

// Fills the penalty fields so that transitions into I-x from anything other
// than B-x or I-x, and I-x at the first position, score -1e4.
// bio_tags follows the schema layout: index 0 is "O", then B-x/I-x pairs.
void apply_bio_constraints(CrfParams& params, const std::vector<std::string>& bio_tags);

// log sum over all T^n tag sequences of exp(path score), where
// path score = start[y0] + sum_i emissions[i][yi] + sum_i trans[y_{i-1}][y_i]
//            + end[y_{n-1}]. Stable log-sum-exp recursion; differentiable
// (gradient wrt emissions equals the unary marginals).
Tensor crf_log_partition(const Tensor& emissions, const CrfParams& params);

// Score of one specific tag sequence (linear in its inputs).
Tensor crf_gold_score(const Tensor& emissions, const std::vector<std::size_t>& gold_tags,
                      const CrfParams& params);

// Negative log-likelihood of the gold sequence: log_partition - gold_score.
Tensor crf_nll(const Tensor& emissions, const std::vector<std::size_t>& gold_tags,
               const CrfParams& params);

struct ViterbiResult {
    std::vector<std::size_t> tags;
    double score = 0.0;
};

// Maximum-scoring tag sequence. Ties break toward the lower tag id at every
// backtracking step.
ViterbiResult viterbi_decode(const Tensor& emissions, const CrfParams& params);

// Test support: exact per-position tag marginals P(y_i = t) from the
// forward-backward recursion, row-major n x T.
std::vector<double> crf_marginals(const Tensor& emissions, const CrfParams& params);

}  // namespace jointidsf
