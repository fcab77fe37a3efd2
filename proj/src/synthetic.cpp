#include "jointidsf/synthetic.hpp"

#include <random>
#include <string>

namespace jointidsf {

std::vector<Utterance> make_synthetic_corpus(const SyntheticSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    // Token budget: one marker per intent, two values per slot type, the rest
    // are neutral fillers.
    std::size_t fillers = 4;
    std::uniform_int_distribution<std::size_t> filler_dist(0, fillers - 1);
    std::uniform_int_distribution<std::size_t> intent_dist(0, spec.intent_count - 1);
    std::uniform_int_distribution<std::size_t> slot_dist(0, spec.slot_type_count - 1);
    std::uniform_int_distribution<std::size_t> value_dist(0, 1);
    std::uniform_int_distribution<std::size_t> span_len_dist(1, 2);
    std::uniform_int_distribution<std::size_t> slot_count_dist(1, 2);

    auto filler = [&](std::size_t i) { return "filler" + std::to_string(i); };
    auto marker = [&](std::size_t i) { return "marker" + std::to_string(i); };
    auto value = [&](std::size_t type, std::size_t v) {
        return "val" + std::to_string(type) + "_" + std::to_string(v);
    };

    std::vector<Utterance> corpus;
    for (std::size_t n = 0; n < spec.utterance_count; ++n) {
        std::size_t intent = intent_dist(rng);
        Utterance u;
        u.intent = "intent" + std::to_string(intent);
        u.tokens.push_back(marker(intent));
        u.tags.push_back("O");

        std::size_t slots = slot_count_dist(rng);
        for (std::size_t s = 0; s < slots && u.tokens.size() + 2 < spec.max_tokens; ++s) {
            u.tokens.push_back(filler(filler_dist(rng)));
            u.tags.push_back("O");
            std::size_t type = slot_dist(rng);
            std::string type_name = "slot" + std::to_string(type);
            std::size_t span_len = span_len_dist(rng);
            for (std::size_t j = 0; j < span_len; ++j) {
                u.tokens.push_back(value(type, value_dist(rng)));
                u.tags.push_back((j == 0 ? "B-" : "I-") + type_name);
            }
        }
        corpus.push_back(std::move(u));
    }
    return corpus;
}

}  // namespace jointidsf
