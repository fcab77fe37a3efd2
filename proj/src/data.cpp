#include "jointidsf/data.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace jointidsf {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> read_lines(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

std::size_t LabelSchema::intent_id(const std::string& label) const {
    auto it = intent_ids.find(label);
    if (it == intent_ids.end()) throw DataError("unknown intent label: " + label);
    return it->second;
}

std::size_t LabelSchema::tag_id(const std::string& tag) const {
    auto it = bio_tag_ids.find(tag);
    if (it == bio_tag_ids.end()) throw DataError("unknown BIO tag: " + tag);
    return it->second;
}

std::size_t TokenVocab::lookup(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnkId : it->second;
}

std::vector<Utterance> load_split(const std::string& dir) {
    fs::path base(dir);
    auto tokens_lines = read_lines(base / "seq.in");
    auto tags_lines = read_lines(base / "seq.out");
    auto intent_lines = read_lines(base / "label");
    if (tokens_lines.size() != tags_lines.size() || tokens_lines.size() != intent_lines.size()) {
        throw DataError("line-count mismatch under " + dir + ": seq.in=" +
                        std::to_string(tokens_lines.size()) + " seq.out=" +
                        std::to_string(tags_lines.size()) + " label=" +
                        std::to_string(intent_lines.size()));
    }
    std::vector<Utterance> out;
    out.reserve(tokens_lines.size());
    for (std::size_t i = 0; i < tokens_lines.size(); ++i) {
        Utterance u;
        u.tokens = split_ws(tokens_lines[i]);
        u.tags = split_ws(tags_lines[i]);
        u.intent = intent_lines[i];
        std::string where = " at line " + std::to_string(i + 1);
        if (u.tokens.empty()) throw DataError("empty line in " + (base / "seq.in").string() + where);
        if (u.intent.empty()) throw DataError("empty line in " + (base / "label").string() + where);
        if (u.tokens.size() != u.tags.size()) {
            throw DataError("token/tag count mismatch in " + dir + where + ": " +
                            std::to_string(u.tokens.size()) + " tokens vs " +
                            std::to_string(u.tags.size()) + " tags");
        }
        out.push_back(std::move(u));
    }
    return out;
}

void save_split(const std::string& dir, const std::vector<Utterance>& utterances) {
    fs::create_directories(dir);
    std::ofstream tokens(fs::path(dir) / "seq.in", std::ios::binary);
    std::ofstream tags(fs::path(dir) / "seq.out", std::ios::binary);
    std::ofstream labels(fs::path(dir) / "label", std::ios::binary);
    if (!tokens || !tags || !labels) throw DataError("cannot write split under " + dir);
    for (const auto& u : utterances) {
        for (std::size_t i = 0; i < u.tokens.size(); ++i) tokens << (i ? " " : "") << u.tokens[i];
        tokens << "\n";
        for (std::size_t i = 0; i < u.tags.size(); ++i) tags << (i ? " " : "") << u.tags[i];
        tags << "\n";
        labels << u.intent << "\n";
    }
}

std::vector<BioViolation> validate_bio(const std::vector<std::string>& tags) {
    std::vector<BioViolation> out;
    std::string prev_type;  // type of an open span, empty if none
    for (std::size_t i = 0; i < tags.size(); ++i) {
        const std::string& t = tags[i];
        if (t == "O") {
            prev_type.clear();
        } else if (t.rfind("B-", 0) == 0) {
            prev_type = t.substr(2);
        } else if (t.rfind("I-", 0) == 0) {
            std::string type = t.substr(2);
            if (type != prev_type) {
                out.push_back({i, "I-" + type + " not preceded by B-" + type + " or I-" + type});
            }
            prev_type = type;
        } else {
            out.push_back({i, "malformed tag: " + t});
            prev_type.clear();
        }
    }
    return out;
}

LabelSchema build_schema(const std::vector<const std::vector<Utterance>*>& splits) {
    std::set<std::string> intents, types;
    for (const auto* split : splits) {
        for (const auto& u : *split) {
            intents.insert(u.intent);
            for (const auto& t : u.tags)
                if (t.size() > 2 && (t.rfind("B-", 0) == 0 || t.rfind("I-", 0) == 0))
                    types.insert(t.substr(2));
        }
    }
    LabelSchema s;
    s.intents.assign(intents.begin(), intents.end());
    s.slot_types.assign(types.begin(), types.end());
    s.bio_tags.push_back("O");
    for (const auto& t : s.slot_types) {
        s.bio_tags.push_back("B-" + t);
        s.bio_tags.push_back("I-" + t);
    }
    for (std::size_t i = 0; i < s.intents.size(); ++i) s.intent_ids[s.intents[i]] = i;
    for (std::size_t i = 0; i < s.bio_tags.size(); ++i) s.bio_tag_ids[s.bio_tags[i]] = i;
    return s;
}

TokenVocab build_vocab(const std::vector<Utterance>& train) {
    std::set<std::string> tokens;
    for (const auto& u : train) tokens.insert(u.tokens.begin(), u.tokens.end());
    TokenVocab v;
    v.id_to_token = {"[PAD]", "[UNK]", "[CLS]"};
    for (const auto& t : tokens) v.id_to_token.push_back(t);
    for (std::size_t i = 0; i < v.id_to_token.size(); ++i) v.token_to_id[v.id_to_token[i]] = i;
    return v;
}

std::vector<std::size_t> tokenize_and_index(const std::vector<std::string>& tokens,
                                            const TokenVocab& vocab) {
    if (tokens.empty()) throw DataError("empty utterance");
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size() + 1);
    ids.push_back(TokenVocab::kClsId);
    for (const auto& t : tokens) ids.push_back(vocab.lookup(t));
    return ids;
}

std::vector<Batch> make_batches(const std::vector<Utterance>& utterances, const TokenVocab& vocab,
                                std::size_t batch_size, std::uint64_t seed) {
    if (batch_size < 1) throw DataError("batch_size must be >= 1");
    std::vector<std::size_t> order(utterances.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Batch> batches;
    for (std::size_t begin = 0; begin < order.size(); begin += batch_size) {
        std::size_t end = std::min(begin + batch_size, order.size());
        Batch b;
        b.utterance_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                   order.begin() + static_cast<std::ptrdiff_t>(end));
        for (std::size_t idx : b.utterance_indices)
            b.max_len = std::max(b.max_len, utterances[idx].tokens.size());
        for (std::size_t idx : b.utterance_indices) {
            const auto& toks = utterances[idx].tokens;
            std::vector<std::size_t> ids(b.max_len, TokenVocab::kPadId);
            std::vector<bool> mask(b.max_len, false);
            for (std::size_t i = 0; i < toks.size(); ++i) {
                ids[i] = vocab.lookup(toks[i]);
                mask[i] = true;
            }
            b.token_ids.push_back(std::move(ids));
            b.mask.push_back(std::move(mask));
        }
        batches.push_back(std::move(b));
    }
    return batches;
}

std::size_t count_slot_instances(const std::vector<Utterance>& utterances) {
    std::size_t n = 0;
    for (const auto& u : utterances)
        for (const auto& t : u.tags)
            if (t.rfind("B-", 0) == 0) ++n;
    return n;
}

}  // namespace jointidsf
