#pragma once

// Corpus ingestion in the three-file split layout (seq.in / seq.out / label),
// label-schema construction, BIO validation, vocabulary, padded batching.

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace jointidsf {

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct Utterance {
    std::vector<std::string> tokens;
    std::string intent;
    std::vector<std::string> tags;
};

struct LabelSchema {
    std::vector<std::string> intents;     // sorted, unique
    std::vector<std::string> slot_types;  // sorted, unique
    std::vector<std::string> bio_tags;    // "O" first, then B-x, I-x per type

    std::unordered_map<std::string, std::size_t> intent_ids;
    std::unordered_map<std::string, std::size_t> bio_tag_ids;

    std::size_t intent_count() const { return intents.size(); }
    std::size_t tag_count() const { return bio_tags.size(); }
    std::size_t intent_id(const std::string& label) const;
    std::size_t tag_id(const std::string& tag) const;
};

struct CorpusSplits {
    std::vector<Utterance> train, valid, test;
};

struct TokenVocab {
    // Reserved ids: 0 = [PAD], 1 = [UNK], 2 = [CLS]; real tokens follow.
    static constexpr std::size_t kPadId = 0;
    static constexpr std::size_t kUnkId = 1;
    static constexpr std::size_t kClsId = 2;

    std::vector<std::string> id_to_token;  // includes the reserved entries
    std::unordered_map<std::string, std::size_t> token_to_id;

    std::size_t size() const { return id_to_token.size(); }
    std::size_t lookup(const std::string& token) const;
};

struct BioViolation {
    std::size_t position;
    std::string message;
};

struct Batch {
    std::vector<std::size_t> utterance_indices;       // into the source list
    std::vector<std::vector<std::size_t>> token_ids;  // padded, no [CLS]
    std::vector<std::vector<bool>> mask;              // true at real tokens
    std::size_t max_len = 0;
};

// Reads seq.in / seq.out / label from `dir`. Throws DataError naming the file
// and 1-based line on any mismatch, missing file, or empty line.
std::vector<Utterance> load_split(const std::string& dir);

// Writes a split back to the three-file layout (one trailing newline per file).
void save_split(const std::string& dir, const std::vector<Utterance>& utterances);

// Reports each I-x not preceded by B-x or I-x of the same type. Diagnostic
// only; predictions are allowed to violate BIO.
std::vector<BioViolation> validate_bio(const std::vector<std::string>& tags);

// Union of labels over all splits, sorted lexicographically.
LabelSchema build_schema(const std::vector<const std::vector<Utterance>*>& splits);

TokenVocab build_vocab(const std::vector<Utterance>& train);

// [CLS]-prefixed id sequence; OOV tokens map to [UNK].
std::vector<std::size_t> tokenize_and_index(const std::vector<std::string>& tokens,
                                            const TokenVocab& vocab);

// Seeded shuffle, then fixed-size groups padded to the per-batch max length.
std::vector<Batch> make_batches(const std::vector<Utterance>& utterances, const TokenVocab& vocab,
                                std::size_t batch_size, std::uint64_t seed);

// Slot instance count (one per B-prefixed span start), as reported in corpus
// statistics.
std::size_t count_slot_instances(const std::vector<Utterance>& utterances);

}  // namespace jointidsf
