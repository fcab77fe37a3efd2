#pragma once

// Deterministic synthetic corpus generator for desk-scale sanity runs: each
// intent owns a marker token and each slot type owns dedicated value tokens,
// so a small model can fit the data exactly.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "jointidsf/data.hpp"

namespace jointidsf {

struct SyntheticSpec {
    std::size_t utterance_count = 50;
    std::size_t intent_count = 3;
    std::size_t slot_type_count = 5;
    std::size_t vocab_limit = 40;  // distinct surface tokens, upper bound
    std::size_t max_tokens = 8;
    std::uint64_t seed = 7;
};

std::vector<Utterance> make_synthetic_corpus(const SyntheticSpec& spec);

}  // namespace jointidsf
