#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "jointidsf/synthetic.hpp"
#include "jointidsf/training.hpp"

using namespace jointidsf;

namespace {

struct Fixture {
    std::vector<Utterance> corpus;
    LabelSchema schema;
    TokenVocab vocab;
    ModelConfig model_config;

    explicit Fixture(std::size_t utterances = 24) {
        SyntheticSpec spec;
        spec.utterance_count = utterances;
        spec.intent_count = 3;
        spec.slot_type_count = 3;
        corpus = make_synthetic_corpus(spec);
        schema = build_schema({&corpus});
        vocab = build_vocab(corpus);
        model_config.encoder.vocab_size = vocab.size();
        model_config.encoder.d_model = 16;
        model_config.encoder.n_layers = 1;
        model_config.encoder.n_heads = 2;
        model_config.encoder.max_len = 16;
        model_config.encoder.dropout_rate = 0.0;
        model_config.intent_count = schema.intent_count();
        model_config.tag_count = schema.tag_count();
    }
};

}  // namespace

TEST_CASE("adamw: zero grad and zero decay leave params unchanged") {
    Tensor p({2}, {1.0, -2.0}, true);
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    AdamW opt(cfg);
    opt.step({{"p", p}});
    CHECK(p.values() == std::vector<double>{1.0, -2.0});
}

TEST_CASE("adamw: bias-corrected first step moves by about lr") {
    Tensor p({1}, {1.0}, true);
    p.node()->grad_buffer()[0] = 1.0;
    AdamWConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.0;
    AdamW opt(cfg);
    opt.step({{"p", p}});
    // hand trace: m_hat = 1, v_hat = 1, update = lr / (1 + eps)
    CHECK(p.values()[0] == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("adamw: decoupled decay shrinks by lr*wd with zero grad") {
    Tensor p({1}, {1.0}, true);
    AdamWConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.weight_decay = 0.1;
    AdamW opt(cfg);
    opt.step({{"p", p}});
    CHECK(p.values()[0] == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("grad clipping caps the global norm") {
    Tensor a({2}, {0, 0}, true);
    Tensor b({1}, {0}, true);
    a.node()->grad_buffer() = {3.0, 0.0};
    b.node()->grad_buffer() = {4.0};
    std::vector<std::pair<std::string, Tensor>> params = {{"a", a}, {"b", b}};
    double norm = clip_grad_norm(params, 1.0);
    CHECK(norm == doctest::Approx(5.0));
    CHECK(a.grad()[0] == doctest::Approx(0.6));
    CHECK(b.grad()[0] == doctest::Approx(0.8));

    // below the cap: untouched
    a.zero_grad();
    a.node()->grad_buffer() = {0.1, 0.0};
    b.zero_grad();
    b.node()->grad_buffer() = {0.1};
    clip_grad_norm(params, 1.0);
    CHECK(a.grad()[0] == 0.1);
}

TEST_CASE("train config validation") {
    TrainConfig cfg;
    cfg.lambda = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.lambda = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = TrainConfig{};
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("grid spec defaults match the protocol grids") {
    GridSpec g;
    CHECK(g.learning_rates.size() == 5);
    CHECK(g.lambdas.size() == 19);
    CHECK(g.lambdas.front() == doctest::Approx(0.05));
    CHECK(g.lambdas.back() == doctest::Approx(0.95));
}

TEST_CASE("empty train set rejected") {
    Fixture fx;
    JointModel model(fx.model_config, 1);
    TrainConfig cfg;
    std::vector<Utterance> empty;
    CHECK_THROWS_AS(train(model, empty, fx.corpus, fx.schema, fx.vocab, cfg), DataError);
}

TEST_CASE("training descends and is deterministic under a fixed seed") {
    Fixture fx;
    TrainConfig cfg;
    cfg.learning_rate = 5e-4;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.seed = 42;

    JointModel m1(fx.model_config, cfg.seed);
    auto r1 = train(m1, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg);
    CHECK(r1.log.size() == 3);
    CHECK(r1.log[1].train_loss < r1.log[0].train_loss);

    JointModel m2(fx.model_config, cfg.seed);
    auto r2 = train(m2, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg);
    for (std::size_t i = 0; i < r1.log.size(); ++i) {
        CHECK(r1.log[i].train_loss == r2.log[i].train_loss);
        CHECK(r1.log[i].avg_score == r2.log[i].avg_score);
    }
    // bitwise-identical final weights
    auto p1 = m1.named_parameters(), p2 = m2.named_parameters();
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].second.values() == p2[i].second.values());
}

TEST_CASE("checkpoint selection maximizes avg score with earlier-epoch ties") {
    Fixture fx;
    TrainConfig cfg;
    cfg.learning_rate = 5e-4;
    cfg.epochs = 4;
    cfg.batch_size = 8;
    JointModel model(fx.model_config, 7);
    auto r = train(model, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg);
    double best = -1.0;
    std::size_t best_epoch = 0;
    for (const auto& e : r.log)
        if (e.avg_score > best) {
            best = e.avg_score;
            best_epoch = e.epoch;
        }
    CHECK(r.best.avg_score == best);
    CHECK(r.best.epoch == best_epoch);
    CHECK(r.best.avg_score ==
          doctest::Approx((r.best.valid_intent_accuracy + r.best.valid_slot_f1) / 2.0));
}

TEST_CASE("small corpus overfits to full sentence accuracy") {
    Fixture fx(16);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    cfg.epochs = 120;
    cfg.batch_size = 8;
    cfg.seed = 3;
    JointModel model(fx.model_config, cfg.seed);
    auto r = train(model, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg);
    double best_sentence = 0.0;
    for (const auto& e : r.log) best_sentence = std::max(best_sentence, e.avg_score);
    model.load_parameter_values(r.best.weights);
    EvalReport rep = evaluate_model(model, fx.corpus, fx.schema, fx.vocab);
    CHECK(rep.sentence_accuracy == doctest::Approx(1.0));
    CHECK(rep.intent_accuracy == doctest::Approx(1.0));
    CHECK(rep.slot_f1 == doctest::Approx(1.0));
}

TEST_CASE("grid search: single cell equals train's best; cells ranked") {
    Fixture fx;
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 5;
    auto factory = [&](std::uint64_t seed) { return JointModel(fx.model_config, seed); };

    GridSpec single;
    single.learning_rates = {5e-4};
    single.lambdas = {0.5};
    auto results = grid_search(factory, single, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg);
    REQUIRE(results.size() == 1);

    TrainConfig same = cfg;
    same.learning_rate = 5e-4;
    same.lambda = 0.5;
    JointModel model = factory(cfg.seed);
    auto direct = train(model, fx.corpus, fx.corpus, fx.schema, fx.vocab, same);
    CHECK(results[0].best_avg_score == direct.best.avg_score);

    GridSpec four;
    four.learning_rates = {1e-4, 5e-4};
    four.lambdas = {0.3, 0.7};
    auto r4 = grid_search(factory, four, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg);
    REQUIRE(r4.size() == 4);
    for (std::size_t i = 1; i < 4; ++i) CHECK(r4[i - 1].best_avg_score >= r4[i].best_avg_score);
}

TEST_CASE("multi_seed: mean/std arithmetic and structure") {
    Fixture fx;
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.learning_rate = 5e-4;
    auto factory = [&](std::uint64_t seed) { return JointModel(fx.model_config, seed); };

    CHECK_THROWS_AS(multi_seed(factory, fx.corpus, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg,
                               {1}),
                    ConfigError);

    auto same = multi_seed(factory, fx.corpus, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg,
                           {9, 9});
    CHECK(same.std_intent_accuracy == doctest::Approx(0.0));
    CHECK(same.std_slot_f1 == doctest::Approx(0.0));

    auto r = multi_seed(factory, fx.corpus, fx.corpus, fx.corpus, fx.schema, fx.vocab, cfg,
                        {1, 2, 3});
    CHECK(r.runs.size() == 3);
    double mean = 0.0;
    for (const auto& run : r.runs) mean += run.report.intent_accuracy;
    CHECK(r.mean_intent_accuracy == doctest::Approx(mean / 3.0));
}

TEST_CASE("epoch log format: header plus one tab-separated line per epoch") {
    std::vector<EpochLog> log = {{0, 1.5, 0.5, 0.25, 0.375}, {1, 1.2, 0.6, 0.5, 0.55}};
    std::string s = format_epoch_log(log);
    std::size_t lines = std::count(s.begin(), s.end(), '\n');
    CHECK(lines == 3);
    CHECK(s.find("0\t1.5\t0.5\t0.25\t0.375") != std::string::npos);
}
