#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "jointidsf/data.hpp"
#include "jointidsf/synthetic.hpp"

using namespace jointidsf;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("jidsf_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p, std::ios::binary);
    os << content;
}

void write_split(const fs::path& dir, const std::string& seq_in, const std::string& seq_out,
                 const std::string& label) {
    fs::create_directories(dir);
    write_file(dir / "seq.in", seq_in);
    write_file(dir / "seq.out", seq_out);
    write_file(dir / "label", label);
}

}  // namespace

TEST_CASE("load_split reads aligned three-file splits") {
    TempDir tmp;
    write_split(tmp.path, "a b\n", "O B-x\n", "flight\n");
    auto utts = load_split(tmp.path.string());
    REQUIRE(utts.size() == 1);
    CHECK(utts[0].tokens == std::vector<std::string>{"a", "b"});
    CHECK(utts[0].tags == std::vector<std::string>{"O", "B-x"});
    CHECK(utts[0].intent == "flight");
}

TEST_CASE("load_split rejects token/tag mismatch naming the line") {
    TempDir tmp;
    write_split(tmp.path, "a b\n", "O\n", "flight\n");
    CHECK_THROWS_WITH_AS(load_split(tmp.path.string()), doctest::Contains("line 1"), DataError);
}

TEST_CASE("load_split rejects line-count mismatch, missing file, empty line") {
    TempDir tmp;
    write_split(tmp.path, "a\nb\n", "O\n", "flight\n");
    CHECK_THROWS_AS(load_split(tmp.path.string()), DataError);

    TempDir tmp2;
    write_split(tmp2.path, "a\n", "O\n", "flight\n");
    fs::remove(tmp2.path / "label");
    CHECK_THROWS_AS(load_split(tmp2.path.string()), DataError);

    TempDir tmp3;
    write_split(tmp3.path, "a\n\n", "O\nO\n", "flight\nflight\n");
    CHECK_THROWS_WITH_AS(load_split(tmp3.path.string()), doctest::Contains("line 2"), DataError);
}

TEST_CASE("save_split round-trips bit-exactly") {
    TempDir tmp;
    std::string seq_in = "a b\nxin chào sân_bay\n";
    std::string seq_out = "O B-x\nO O B-y\n";
    std::string label = "flight\nairfare#flight\n";
    write_split(tmp.path / "in", seq_in, seq_out, label);
    auto utts = load_split((tmp.path / "in").string());
    save_split((tmp.path / "out").string(), utts);
    for (const char* name : {"seq.in", "seq.out", "label"}) {
        std::ifstream a(tmp.path / "in" / name, std::ios::binary);
        std::ifstream b(tmp.path / "out" / name, std::ios::binary);
        std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
        std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
        CHECK(sa == sb);
    }
}

TEST_CASE("validate_bio reports orphaned and cross-type I tags") {
    CHECK(validate_bio({"O", "B-x", "I-x"}).empty());
    auto v1 = validate_bio({"I-x"});
    REQUIRE(v1.size() == 1);
    CHECK(v1[0].position == 0);
    auto v2 = validate_bio({"B-x", "I-y"});
    REQUIRE(v2.size() == 1);
    CHECK(v2[0].position == 1);
}

TEST_CASE("build_schema: BIO expansion, union of splits, sorted") {
    std::vector<Utterance> a = {{{"t"}, "intent_a", {"B-x"}}};
    std::vector<Utterance> b = {{{"t"}, "intent_b", {"O"}}};
    auto schema = build_schema({&a, &b});
    CHECK(schema.intents == std::vector<std::string>{"intent_a", "intent_b"});
    CHECK(schema.slot_types == std::vector<std::string>{"x"});
    CHECK(schema.bio_tags == std::vector<std::string>{"O", "B-x", "I-x"});
    CHECK(schema.tag_count() == 2 * schema.slot_types.size() + 1);
    CHECK(schema.intent_id("intent_b") == 1);
    CHECK_THROWS_AS(schema.intent_id("nope"), DataError);
}

TEST_CASE("vocab: reserved ids distinct, train-only, OOV maps to UNK") {
    std::vector<Utterance> train = {{{"b", "a"}, "i", {"O", "O"}}};
    TokenVocab v = build_vocab(train);
    CHECK(v.id_to_token[TokenVocab::kPadId] == "[PAD]");
    CHECK(v.id_to_token[TokenVocab::kUnkId] == "[UNK]");
    CHECK(v.id_to_token[TokenVocab::kClsId] == "[CLS]");
    CHECK(v.size() == 5);

    auto ids = tokenize_and_index({"a", "zzz"}, v);
    CHECK(ids[0] == TokenVocab::kClsId);
    CHECK(ids[1] == v.token_to_id.at("a"));
    CHECK(ids[2] == TokenVocab::kUnkId);
    CHECK_THROWS_AS(tokenize_and_index({}, v), DataError);
}

TEST_CASE("vocabulary coverage: training split round-trips without UNK") {
    SyntheticSpec spec;
    auto corpus = make_synthetic_corpus(spec);
    TokenVocab v = build_vocab(corpus);
    for (const auto& u : corpus) {
        auto ids = tokenize_and_index(u.tokens, v);
        for (std::size_t i = 1; i < ids.size(); ++i) CHECK(ids[i] != TokenVocab::kUnkId);
    }
}

TEST_CASE("make_batches: sizes, masks, determinism") {
    std::vector<Utterance> utts;
    for (int i = 0; i < 5; ++i) {
        Utterance u;
        for (int j = 0; j <= i; ++j) {
            u.tokens.push_back("t" + std::to_string(j));
            u.tags.push_back("O");
        }
        u.intent = "i";
        utts.push_back(u);
    }
    TokenVocab v = build_vocab(utts);

    auto batches = make_batches(utts, v, 2, 123);
    REQUIRE(batches.size() == 3);
    CHECK(batches[0].utterance_indices.size() == 2);
    CHECK(batches[1].utterance_indices.size() == 2);
    CHECK(batches[2].utterance_indices.size() == 1);

    for (const auto& b : batches)
        for (std::size_t r = 0; r < b.mask.size(); ++r) {
            std::size_t real = 0;
            for (bool m : b.mask[r]) real += m;
            CHECK(real == utts[b.utterance_indices[r]].tokens.size());
            CHECK(b.token_ids[r].size() == b.max_len);
        }

    auto again = make_batches(utts, v, 2, 123);
    for (std::size_t i = 0; i < batches.size(); ++i)
        CHECK(batches[i].utterance_indices == again[i].utterance_indices);
}

TEST_CASE("synthetic corpus is BIO-valid and within vocab budget") {
    SyntheticSpec spec;
    auto corpus = make_synthetic_corpus(spec);
    CHECK(corpus.size() == spec.utterance_count);
    std::set<std::string> tokens;
    for (const auto& u : corpus) {
        CHECK(validate_bio(u.tags).empty());
        CHECK(u.tokens.size() == u.tags.size());
        tokens.insert(u.tokens.begin(), u.tokens.end());
    }
    CHECK(tokens.size() <= spec.vocab_limit);
    auto schema = build_schema({&corpus});
    CHECK(schema.intent_count() <= spec.intent_count);
    CHECK(schema.slot_types.size() <= spec.slot_type_count);
    CHECK(count_slot_instances(corpus) > 0);
}
