#include "jointidsf/training.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <random>
#include <sstream>

namespace jointidsf {

void TrainConfig::validate() const {
    if (!(lambda > 0.0 && lambda < 1.0))
        throw ConfigError("lambda must be in (0,1), got " + std::to_string(lambda));
    if (learning_rate <= 0.0) throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
}

GridSpec::GridSpec() {
    for (int i = 1; i <= 19; ++i) lambdas.push_back(0.05 * i);
}

void GridSpec::validate() const {
    if (learning_rates.empty() || lambdas.empty())
        throw ConfigError("grid spec: learning rates and lambdas must be non-empty");
    for (double l : lambdas)
        if (!(l > 0.0 && l < 1.0)) throw ConfigError("grid spec: lambda must be in (0,1)");
}

EvalReport evaluate_model(JointModel& model, const std::vector<Utterance>& utterances,
                          const LabelSchema& schema, const TokenVocab& vocab) {
    std::vector<std::string> gold_intents, pred_intents;
    std::vector<std::vector<std::string>> gold_tags, pred_tags;
    for (const auto& u : utterances) {
        auto ids = tokenize_and_index(u.tokens, vocab);
        auto pred = model.predict(ids);
        gold_intents.push_back(u.intent);
        pred_intents.push_back(schema.intents.at(pred.intent));
        gold_tags.push_back(u.tags);
        std::vector<std::string> tags;
        for (std::size_t t : pred.tags) tags.push_back(schema.bio_tags.at(t));
        pred_tags.push_back(std::move(tags));
    }
    return evaluate(gold_intents, pred_intents, gold_tags, pred_tags);
}

namespace {

Checkpoint snapshot(const JointModel& model, std::size_t epoch, double intent_acc, double f1) {
    Checkpoint c;
    c.epoch = epoch;
    for (const auto& [name, p] : model.named_parameters()) c.weights.emplace_back(name, p.values());
    c.valid_intent_accuracy = intent_acc;
    c.valid_slot_f1 = f1;
    c.avg_score = (intent_acc + f1) / 2.0;
    return c;
}

}  // namespace

TrainResult train(JointModel& model, const std::vector<Utterance>& train_set,
                  const std::vector<Utterance>& valid_set, const LabelSchema& schema,
                  const TokenVocab& vocab, const TrainConfig& config) {
    config.validate();
    if (train_set.empty()) throw DataError("train: empty training set");

    model.seed_dropout(config.seed ^ 0xd1b54a32d192ed03ull);
    AdamW optimizer(config.adamw());
    std::mt19937_64 shuffle_seeds(config.seed);
    auto params = model.named_parameters();

    TrainResult result;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        auto batches = make_batches(train_set, vocab, config.batch_size, shuffle_seeds());
        double loss_sum = 0.0;
        for (const auto& batch : batches) {
            model.zero_grads();
            Tensor batch_loss;
            for (std::size_t idx : batch.utterance_indices) {
                const Utterance& u = train_set[idx];
                auto ids = tokenize_and_index(u.tokens, vocab);
                auto fwd = model.forward(ids, /*train_mode=*/true);
                std::vector<std::size_t> gold_tags;
                for (const auto& t : u.tags) gold_tags.push_back(schema.tag_id(t));
                Tensor loss = model.loss(fwd, schema.intent_id(u.intent), gold_tags, config.lambda);
                batch_loss = batch_loss.defined() ? add(batch_loss, loss) : loss;
            }
            batch_loss = scale(batch_loss, 1.0 / static_cast<double>(batch.utterance_indices.size()));
            backward(batch_loss);
            loss_sum += batch_loss.item() * static_cast<double>(batch.utterance_indices.size());
            clip_grad_norm(params, config.clip_norm);
            optimizer.step(params);
        }
        model.zero_grads();

        EvalReport valid = evaluate_model(model, valid_set, schema, vocab);
        EpochLog log;
        log.epoch = epoch;
        log.train_loss = loss_sum / static_cast<double>(train_set.size());
        log.valid_intent_accuracy = valid.intent_accuracy;
        log.valid_slot_f1 = valid.slot_f1;
        log.avg_score = (valid.intent_accuracy + valid.slot_f1) / 2.0;
        result.log.push_back(log);

        if (result.best.weights.empty() || log.avg_score > result.best.avg_score) {
            result.best = snapshot(model, epoch, valid.intent_accuracy, valid.slot_f1);
        }
    }
    return result;
}

std::vector<GridCellResult> grid_search(const ModelFactory& factory, const GridSpec& grids,
                                        const std::vector<Utterance>& train_set,
                                        const std::vector<Utterance>& valid_set,
                                        const LabelSchema& schema, const TokenVocab& vocab,
                                        const TrainConfig& base_config) {
    grids.validate();
    std::vector<GridCellResult> results;
    for (double lr : grids.learning_rates) {
        for (double lambda : grids.lambdas) {
            TrainConfig cfg = base_config;
            cfg.learning_rate = lr;
            cfg.lambda = lambda;
            JointModel model = factory(cfg.seed);
            TrainResult r = train(model, train_set, valid_set, schema, vocab, cfg);
            results.push_back({lr, lambda, r.best.avg_score, r.best.epoch});
        }
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const GridCellResult& a, const GridCellResult& b) {
                         return a.best_avg_score > b.best_avg_score;
                     });
    return results;
}

MultiSeedResult multi_seed(const ModelFactory& factory, const std::vector<Utterance>& train_set,
                           const std::vector<Utterance>& valid_set,
                           const std::vector<Utterance>& test_set, const LabelSchema& schema,
                           const TokenVocab& vocab, const TrainConfig& base_config,
                           const std::vector<std::uint64_t>& seeds) {
    if (seeds.size() < 2) throw ConfigError("multi_seed: need at least 2 seeds");
    MultiSeedResult out;
    for (std::uint64_t seed : seeds) {
        TrainConfig cfg = base_config;
        cfg.seed = seed;
        JointModel model = factory(seed);
        TrainResult r = train(model, train_set, valid_set, schema, vocab, cfg);
        model.load_parameter_values(r.best.weights);
        out.runs.push_back({seed, evaluate_model(model, test_set, schema, vocab)});
    }
    auto mean_std = [&](auto metric) {
        double mean = 0.0;
        for (const auto& run : out.runs) mean += metric(run.report);
        mean /= static_cast<double>(out.runs.size());
        double var = 0.0;
        for (const auto& run : out.runs) {
            double d = metric(run.report) - mean;
            var += d * d;
        }
        var /= static_cast<double>(out.runs.size() - 1);  // sample std
        return std::make_pair(mean, std::sqrt(var));
    };
    std::tie(out.mean_intent_accuracy, out.std_intent_accuracy) =
        mean_std([](const EvalReport& r) { return r.intent_accuracy; });
    std::tie(out.mean_slot_f1, out.std_slot_f1) =
        mean_std([](const EvalReport& r) { return r.slot_f1; });
    std::tie(out.mean_sentence_accuracy, out.std_sentence_accuracy) =
        mean_std([](const EvalReport& r) { return r.sentence_accuracy; });
    return out;
}

std::string format_epoch_log(const std::vector<EpochLog>& log) {
    std::ostringstream os;
    os << "epoch\ttrain_loss\tvalid_intent_acc\tvalid_slot_f1\tavg_score\n";
    os << std::setprecision(10);
    for (const auto& e : log)
        os << e.epoch << "\t" << e.train_loss << "\t" << e.valid_intent_accuracy << "\t"
           << e.valid_slot_f1 << "\t" << e.avg_score << "\n";
    return os.str();
}

}  // namespace jointidsf
