#pragma once

// Training protocol: weighted joint objective over shuffled mini-batches,
// AdamW with gradient clipping, per-epoch validation, checkpoint selection by
// the averaged validation score, grid search, and multi-seed runs.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "jointidsf/data.hpp"
#include "jointidsf/evaluation.hpp"
#include "jointidsf/model.hpp"
#include "jointidsf/optimizer.hpp"

namespace jointidsf {

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainConfig {
    double lambda = 0.5;  // intent-loss mixture weight, must be in (0,1)
    double learning_rate = 5e-5;
    std::size_t batch_size = 32;
    std::size_t epochs = 50;
    std::uint64_t seed = 1;
    double weight_decay = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    double clip_norm = 1.0;

    void validate() const;
    AdamWConfig adamw() const {
        return {learning_rate, beta1, beta2, adam_eps, weight_decay};
    }
};

struct GridSpec {
    std::vector<double> learning_rates = {1e-5, 2e-5, 3e-5, 4e-5, 5e-5};
    std::vector<double> lambdas;  // defaults to 0.05, 0.10, ..., 0.95

    GridSpec();
    void validate() const;
};

struct EpochLog {
    std::size_t epoch = 0;  // 0-based
    double train_loss = 0.0;
    double valid_intent_accuracy = 0.0;
    double valid_slot_f1 = 0.0;
    double avg_score = 0.0;  // (intent accuracy + slot F1) / 2
};

struct Checkpoint {
    std::size_t epoch = 0;
    std::vector<std::pair<std::string, std::vector<double>>> weights;
    double valid_intent_accuracy = 0.0;
    double valid_slot_f1 = 0.0;
    double avg_score = 0.0;
};

struct TrainResult {
    Checkpoint best;
    std::vector<EpochLog> log;
};

// Predicts every utterance and scores it against gold.
EvalReport evaluate_model(JointModel& model, const std::vector<Utterance>& utterances,
                          const LabelSchema& schema, const TokenVocab& vocab);

// Per-epoch loop per the protocol; returns the best checkpoint (ties keep the
// earlier epoch) and the full log. The model ends up holding the final-epoch
// weights; load the checkpoint explicitly to use the best ones.
TrainResult train(JointModel& model, const std::vector<Utterance>& train_set,
                  const std::vector<Utterance>& valid_set, const LabelSchema& schema,
                  const TokenVocab& vocab, const TrainConfig& config);

using ModelFactory = std::function<JointModel(std::uint64_t seed)>;

struct GridCellResult {
    double learning_rate = 0.0;
    double lambda = 0.0;
    double best_avg_score = 0.0;
    std::size_t best_epoch = 0;
};

// One training run per grid cell, ranked by best validation avg score
// (descending; stable for ties).
std::vector<GridCellResult> grid_search(const ModelFactory& factory, const GridSpec& grids,
                                        const std::vector<Utterance>& train_set,
                                        const std::vector<Utterance>& valid_set,
                                        const LabelSchema& schema, const TokenVocab& vocab,
                                        const TrainConfig& base_config);

struct SeedRun {
    std::uint64_t seed = 0;
    EvalReport report;
};

struct MultiSeedResult {
    std::vector<SeedRun> runs;
    double mean_intent_accuracy = 0.0, std_intent_accuracy = 0.0;
    double mean_slot_f1 = 0.0, std_slot_f1 = 0.0;
    double mean_sentence_accuracy = 0.0, std_sentence_accuracy = 0.0;
};

// Full train + best-checkpoint test evaluation per seed; means and sample
// standard deviations across runs.
MultiSeedResult multi_seed(const ModelFactory& factory, const std::vector<Utterance>& train_set,
                           const std::vector<Utterance>& valid_set,
                           const std::vector<Utterance>& test_set, const LabelSchema& schema,
                           const TokenVocab& vocab, const TrainConfig& base_config,
                           const std::vector<std::uint64_t>& seeds);

// One tab-separated line per epoch: epoch, train loss, valid intent acc,
// valid slot F1, avg score.
std::string format_epoch_log(const std::vector<EpochLog>& log);

}  // namespace jointidsf
