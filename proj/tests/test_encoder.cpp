#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "jointidsf/encoder.hpp"

using namespace jointidsf;

namespace {

EncoderConfig small_config() {
    EncoderConfig c;
    c.vocab_size = 10;
    c.d_model = 8;
    c.n_layers = 1;
    c.n_heads = 2;
    c.max_len = 16;
    c.dropout_rate = 0.1;
    return c;
}

}  // namespace

TEST_CASE("config validation") {
    EncoderConfig c = small_config();
    c.n_heads = 3;  // 8 % 3 != 0
    CHECK_THROWS_AS(c.validate(), ContractError);
    c = small_config();
    c.vocab_size = 0;
    CHECK_THROWS_AS(c.validate(), ContractError);
}

TEST_CASE("single [CLS] token gives 1 x d output") {
    std::mt19937_64 rng(1);
    Encoder enc(small_config(), rng);
    Tensor out = enc.forward({2}, false, rng);
    CHECK(out.shape() == Shape{1, 8});
}

TEST_CASE("over-length input reports both lengths") {
    std::mt19937_64 rng(1);
    Encoder enc(small_config(), rng);
    std::vector<std::size_t> ids(17, 3);
    CHECK_THROWS_WITH_AS(enc.forward(ids, false, rng), doctest::Contains("17"), ContractError);
}

TEST_CASE("positional encoding: permuting tokens changes the output") {
    std::mt19937_64 rng(2);
    Encoder enc(small_config(), rng);
    Tensor a = enc.forward({2, 3, 4}, false, rng);
    Tensor b = enc.forward({2, 4, 3}, false, rng);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        max_diff = std::max(max_diff, std::abs(a.values()[i] - b.values()[i]));
    CHECK(max_diff > 1e-9);
}

TEST_CASE("eval mode is bitwise deterministic across calls") {
    std::mt19937_64 rng(3);
    Encoder enc(small_config(), rng);
    std::mt19937_64 r1(99), r2(1234);  // dropout rngs must not matter in eval
    Tensor a = enc.forward({2, 5, 6, 7}, false, r1);
    Tensor b = enc.forward({2, 5, 6, 7}, false, r2);
    CHECK(a.values() == b.values());
}

TEST_CASE("train mode applies dropout") {
    EncoderConfig c = small_config();
    c.dropout_rate = 0.5;
    std::mt19937_64 rng(4);
    Encoder enc(c, rng);
    std::mt19937_64 r1(8), r2(9);
    Tensor a = enc.forward({2, 5, 6}, true, r1);
    Tensor b = enc.forward({2, 5, 6}, true, r2);
    CHECK(a.values() != b.values());
}

TEST_CASE("padded positions contribute nothing to unpadded outputs") {
    std::mt19937_64 rng(5);
    Encoder enc(small_config(), rng);
    std::vector<bool> mask = {true, true, true, false, false};
    Tensor padded = enc.forward({2, 5, 6, 0, 0}, false, rng, &mask);
    Tensor bare = enc.forward({2, 5, 6}, false, rng);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            CHECK(padded.values()[i * 8 + j] == doctest::Approx(bare.values()[i * 8 + j]).epsilon(1e-12));
}

TEST_CASE("gradient of encoder output wrt all weights passes grad_check") {
    EncoderConfig c = small_config();
    c.dropout_rate = 0.0;
    std::mt19937_64 rng(6);
    Encoder enc(c, rng);
    std::vector<Tensor> params;
    for (auto& [name, p] : enc.named_parameters()) params.push_back(p);
    std::vector<std::size_t> ids = {2, 3, 4};
    auto f = [&](const std::vector<Tensor>&) {
        std::mt19937_64 r(0);
        return sum(enc.forward(ids, false, r));
    };
    CHECK(grad_check(f, params, 1e-5) < 1e-4);
}
