#include "jointidsf/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

namespace jointidsf {

namespace {

constexpr char kMagic[8] = {'J', 'I', 'D', 'S', 'F', 'C', 'K', '1'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char buf[8];
    is.read(reinterpret_cast<char*>(buf), 8);
    if (!is) throw DataError("checkpoint: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

void write_f64(std::ostream& os, double d) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    write_u64(os, bits);
}

double read_f64(std::istream& is) {
    std::uint64_t bits = read_u64(is);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    std::string s(read_u64(is), '\0');
    is.read(s.data(), static_cast<std::streamsize>(s.size()));
    if (!is) throw DataError("checkpoint: truncated string");
    return s;
}

void write_string_list(std::ostream& os, const std::vector<std::string>& v) {
    write_u64(os, v.size());
    for (const auto& s : v) write_string(os, s);
}

std::vector<std::string> read_string_list(std::istream& is) {
    std::vector<std::string> v(read_u64(is));
    for (auto& s : v) s = read_string(is);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const JointModel& model, const TokenVocab& vocab,
                     const LabelSchema& schema) {
    CheckpointFile f;
    f.config = model.config();
    f.vocab = vocab;
    f.schema = schema;
    for (const auto& [name, p] : model.named_parameters()) f.weights.emplace_back(name, p.values());
    save_checkpoint(path, f);
}

void save_checkpoint(const std::string& path, const CheckpointFile& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("checkpoint: cannot write " + path);
    os.write(kMagic, 8);

    write_u64(os, f.config.encoder.vocab_size);
    write_u64(os, f.config.encoder.d_model);
    write_u64(os, f.config.encoder.n_layers);
    write_u64(os, f.config.encoder.n_heads);
    write_u64(os, f.config.encoder.max_len);
    write_f64(os, f.config.encoder.dropout_rate);
    write_u64(os, f.config.intent_count);
    write_u64(os, f.config.tag_count);
    write_string(os, variant_name(f.config.variant));
    write_u64(os, f.config.constrain_bio ? 1 : 0);

    write_string_list(os, f.vocab.id_to_token);
    write_string_list(os, f.schema.intents);
    write_string_list(os, f.schema.slot_types);

    write_u64(os, f.weights.size());
    for (const auto& [name, values] : f.weights) {
        write_string(os, name);
        write_u64(os, values.size());
        for (double v : values) write_f64(os, v);
    }
    if (!os) throw DataError("checkpoint: write failure on " + path);
}

CheckpointFile load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("checkpoint: bad magic in " + path);

    CheckpointFile f;
    f.config.encoder.vocab_size = read_u64(is);
    f.config.encoder.d_model = read_u64(is);
    f.config.encoder.n_layers = read_u64(is);
    f.config.encoder.n_heads = read_u64(is);
    f.config.encoder.max_len = read_u64(is);
    f.config.encoder.dropout_rate = read_f64(is);
    f.config.intent_count = read_u64(is);
    f.config.tag_count = read_u64(is);
    f.config.variant = parse_variant(read_string(is));
    f.config.constrain_bio = read_u64(is) != 0;

    f.vocab.id_to_token = read_string_list(is);
    for (std::size_t i = 0; i < f.vocab.id_to_token.size(); ++i)
        f.vocab.token_to_id[f.vocab.id_to_token[i]] = i;

    f.schema.intents = read_string_list(is);
    f.schema.slot_types = read_string_list(is);
    f.schema.bio_tags.push_back("O");
    for (const auto& t : f.schema.slot_types) {
        f.schema.bio_tags.push_back("B-" + t);
        f.schema.bio_tags.push_back("I-" + t);
    }
    for (std::size_t i = 0; i < f.schema.intents.size(); ++i)
        f.schema.intent_ids[f.schema.intents[i]] = i;
    for (std::size_t i = 0; i < f.schema.bio_tags.size(); ++i)
        f.schema.bio_tag_ids[f.schema.bio_tags[i]] = i;

    std::size_t n = read_u64(is);
    for (std::size_t i = 0; i < n; ++i) {
        std::string name = read_string(is);
        std::vector<double> values(read_u64(is));
        for (double& v : values) v = read_f64(is);
        f.weights.emplace_back(std::move(name), std::move(values));
    }
    return f;
}

JointModel model_from_checkpoint(const CheckpointFile& f) {
    JointModel model(f.config, /*seed=*/0, &f.schema.bio_tags);
    model.load_parameter_values(f.weights);
    return model;
}

}  // namespace jointidsf
