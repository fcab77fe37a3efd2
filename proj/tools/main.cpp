// Command-line front end: train, gridsearch, eval, predict, errors.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "jointidsf/checkpoint.hpp"
#include "jointidsf/evaluation.hpp"
#include "jointidsf/synthetic.hpp"
#include "jointidsf/training.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace jointidsf;

namespace {

struct RunConfig {
    std::string data_dir;
    std::string output_dir = "out";
    std::string config_file;
    double lambda = 0.5;
    double lr = 5e-5;
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
    std::string variant = "full";
    bool constrain_bio = false;
    // encoder
    std::size_t d_model = 64;
    std::size_t n_layers = 2;
    std::size_t n_heads = 4;
    double dropout = 0.1;
    // grids / seeds (comma-separated)
    std::string lrs;
    std::string lambdas;
    std::string seeds;
};

std::vector<double> parse_double_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoull(item));
    }
    return out;
}

// key=value file; '#' starts a comment. File values fill in only the keys the
// command line did not set (defaults < file < flags).
void apply_config_file(CLI::App& app, RunConfig& cfg) {
    if (cfg.config_file.empty()) return;
    std::ifstream in(cfg.config_file);
    if (!in) throw ConfigError("cannot open config file: " + cfg.config_file);
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            auto last = s.find_last_not_of(" \t\r");
            s.erase(last == std::string::npos ? 0 : last + 1);
            return s;
        };
        std::string t = trim(line);
        if (t.empty()) continue;
        auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(cfg.config_file + ":" + std::to_string(lineno) +
                              ": expected key=value");
        kv[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
    }
    auto flag_set = [&](const std::string& name) {
        const CLI::Option* opt = app.get_option_no_throw(name);
        return opt && opt->count() > 0;
    };
    auto take = [&](const std::string& key, const std::string& flag, auto& target) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        if (!flag_set(flag)) {
            std::istringstream is(it->second);
            is >> target;
            if (is.fail())
                throw ConfigError("config key " + key + ": bad value '" + it->second + "'");
        }
        kv.erase(it);
    };
    take("data_dir", "--data-dir", cfg.data_dir);
    take("output_dir", "--output-dir", cfg.output_dir);
    take("lambda", "--lambda", cfg.lambda);
    take("lr", "--lr", cfg.lr);
    take("epochs", "--epochs", cfg.epochs);
    take("batch_size", "--batch-size", cfg.batch_size);
    take("seed", "--seed", cfg.seed);
    take("variant", "--variant", cfg.variant);
    take("d_model", "--d-model", cfg.d_model);
    take("n_layers", "--n-layers", cfg.n_layers);
    take("n_heads", "--n-heads", cfg.n_heads);
    take("dropout", "--dropout", cfg.dropout);
    take("lrs", "--lrs", cfg.lrs);
    take("lambdas", "--lambdas", cfg.lambdas);
    take("seeds", "--seeds", cfg.seeds);
    if (kv.count("constrain_bio") && !flag_set("--constrain-bio")) {
        cfg.constrain_bio = kv["constrain_bio"] == "1" || kv["constrain_bio"] == "true";
        kv.erase("constrain_bio");
    }
    if (!kv.empty()) throw ConfigError("config file: unknown key '" + kv.begin()->first + "'");
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
    cmd->add_option("--data-dir", cfg.data_dir, "dataset root with train/, dev/, test/ splits");
    cmd->add_option("--output-dir", cfg.output_dir, "where to write checkpoints, logs, reports");
    cmd->add_option("--config", cfg.config_file, "key=value config file (flags win)");
    cmd->add_option("--lambda", cfg.lambda, "intent-loss mixture weight in (0,1)");
    cmd->add_option("--lr", cfg.lr, "AdamW learning rate");
    cmd->add_option("--epochs", cfg.epochs, "training epochs")->capture_default_str();
    cmd->add_option("--batch-size", cfg.batch_size, "mini-batch size")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "PRNG seed")->capture_default_str();
    cmd->add_option("--variant", cfg.variant,
                    "attention variant: full|cls_context|scaled_slot|concat_cls|baseline");
    cmd->add_flag("--constrain-bio", cfg.constrain_bio, "forbid invalid BIO transitions in the CRF");
    cmd->add_option("--d-model", cfg.d_model, "encoder embedding size");
    cmd->add_option("--n-layers", cfg.n_layers, "encoder layers");
    cmd->add_option("--n-heads", cfg.n_heads, "encoder attention heads");
    cmd->add_option("--dropout", cfg.dropout, "dropout rate");
}

struct LoadedData {
    CorpusSplits splits;
    LabelSchema schema;
    TokenVocab vocab;
    std::size_t max_tokens = 0;
};

LoadedData load_data(const RunConfig& cfg) {
    if (cfg.data_dir.empty()) throw ConfigError("--data-dir is required");
    LoadedData d;
    d.splits.train = load_split((fs::path(cfg.data_dir) / "train").string());
    d.splits.valid = load_split((fs::path(cfg.data_dir) / "dev").string());
    if (fs::exists(fs::path(cfg.data_dir) / "test" / "seq.in"))
        d.splits.test = load_split((fs::path(cfg.data_dir) / "test").string());
    d.schema = build_schema({&d.splits.train, &d.splits.valid, &d.splits.test});
    d.vocab = build_vocab(d.splits.train);
    for (const auto* split : {&d.splits.train, &d.splits.valid, &d.splits.test})
        for (const auto& u : *split) d.max_tokens = std::max(d.max_tokens, u.tokens.size());

    // gold corpora must be BIO-clean
    const char* names[] = {"train", "dev", "test"};
    const std::vector<Utterance>* splits[] = {&d.splits.train, &d.splits.valid, &d.splits.test};
    for (int s = 0; s < 3; ++s)
        for (std::size_t i = 0; i < splits[s]->size(); ++i) {
            auto v = validate_bio((*splits[s])[i].tags);
            if (!v.empty())
                throw DataError(std::string(names[s]) + " utterance " + std::to_string(i + 1) +
                                ": BIO violation at token " + std::to_string(v[0].position + 1) +
                                ": " + v[0].message);
        }
    return d;
}

ModelConfig make_model_config(const RunConfig& cfg, const LoadedData& d) {
    ModelConfig mc;
    mc.encoder.vocab_size = d.vocab.size();
    mc.encoder.d_model = cfg.d_model;
    mc.encoder.n_layers = cfg.n_layers;
    mc.encoder.n_heads = cfg.n_heads;
    mc.encoder.max_len = d.max_tokens + 1;  // [CLS]
    mc.encoder.dropout_rate = cfg.dropout;
    mc.intent_count = d.schema.intent_count();
    mc.tag_count = d.schema.tag_count();
    mc.variant = parse_variant(cfg.variant);
    mc.constrain_bio = cfg.constrain_bio;
    return mc;
}

TrainConfig make_train_config(const RunConfig& cfg) {
    TrainConfig tc;
    tc.lambda = cfg.lambda;
    tc.learning_rate = cfg.lr;
    tc.batch_size = cfg.batch_size;
    tc.epochs = cfg.epochs;
    tc.seed = cfg.seed;
    tc.validate();
    return tc;
}

void echo_effective_config(const RunConfig& cfg, const fs::path& out_dir) {
    std::ofstream os(out_dir / "config.effective");
    os << "data_dir=" << cfg.data_dir << "\n"
       << "output_dir=" << cfg.output_dir << "\n"
       << "lambda=" << cfg.lambda << "\n"
       << "lr=" << cfg.lr << "\n"
       << "epochs=" << cfg.epochs << "\n"
       << "batch_size=" << cfg.batch_size << "\n"
       << "seed=" << cfg.seed << "\n"
       << "variant=" << cfg.variant << "\n"
       << "constrain_bio=" << (cfg.constrain_bio ? 1 : 0) << "\n"
       << "d_model=" << cfg.d_model << "\n"
       << "n_layers=" << cfg.n_layers << "\n"
       << "n_heads=" << cfg.n_heads << "\n"
       << "dropout=" << cfg.dropout << "\n";
}

json report_to_json(const EvalReport& r) {
    return json{{"intent_accuracy", r.intent_accuracy},
                {"slot_precision", r.slot_precision},
                {"slot_recall", r.slot_recall},
                {"slot_f1", r.slot_f1},
                {"sentence_accuracy", r.sentence_accuracy},
                {"errors",
                 {{"WI", r.error_counts.wrong_intent},
                  {"MS", r.error_counts.missing_slot},
                  {"SS", r.error_counts.spurious_slot},
                  {"WB", r.error_counts.wrong_boundary},
                  {"WL", r.error_counts.wrong_label},
                  {"WB_cross_type", r.error_counts.wrong_boundary_cross_type}}}};
}

void print_percent_line(const EvalReport& r) {
    std::cout << std::fixed << std::setprecision(2) << "intent_acc=" << 100.0 * r.intent_accuracy
              << " slot_f1=" << 100.0 * r.slot_f1
              << " sentence_acc=" << 100.0 * r.sentence_accuracy << "\n";
}

int cmd_train(RunConfig& cfg) {
    LoadedData d = load_data(cfg);
    fs::create_directories(cfg.output_dir);
    echo_effective_config(cfg, cfg.output_dir);

    ModelConfig mc = make_model_config(cfg, d);
    TrainConfig tc = make_train_config(cfg);
    JointModel model(mc, tc.seed, &d.schema.bio_tags);
    TrainResult result = train(model, d.splits.train, d.splits.valid, d.schema, d.vocab, tc);

    std::ofstream(fs::path(cfg.output_dir) / "epochs.tsv") << format_epoch_log(result.log);
    model.load_parameter_values(result.best.weights);
    save_checkpoint((fs::path(cfg.output_dir) / "checkpoint.bin").string(), model, d.vocab,
                    d.schema);

    EvalReport valid = evaluate_model(model, d.splits.valid, d.schema, d.vocab);
    std::ofstream(fs::path(cfg.output_dir) / "valid_report.txt") << format_report(valid);
    json summary = {{"best_epoch", result.best.epoch},
                    {"best_avg_score", result.best.avg_score},
                    {"valid", report_to_json(valid)}};
    std::ofstream(fs::path(cfg.output_dir) / "summary.json") << summary.dump(2) << "\n";

    std::cout << "best epoch " << result.best.epoch << " avg_score " << std::fixed
              << std::setprecision(4) << result.best.avg_score << "\n";
    print_percent_line(valid);
    return 0;
}

int cmd_gridsearch(RunConfig& cfg) {
    LoadedData d = load_data(cfg);
    fs::create_directories(cfg.output_dir);
    echo_effective_config(cfg, cfg.output_dir);

    GridSpec grids;
    if (!cfg.lrs.empty()) grids.learning_rates = parse_double_list(cfg.lrs);
    if (!cfg.lambdas.empty()) grids.lambdas = parse_double_list(cfg.lambdas);
    grids.validate();

    ModelConfig mc = make_model_config(cfg, d);
    TrainConfig base = make_train_config(cfg);

    // resume support: completed cells live in cells.tsv as lr lambda score epoch
    fs::path cells_path = fs::path(cfg.output_dir) / "cells.tsv";
    std::map<std::pair<double, double>, GridCellResult> done;
    if (fs::exists(cells_path)) {
        std::ifstream in(cells_path);
        double lr, lambda, score;
        std::size_t epoch;
        while (in >> lr >> lambda >> score >> epoch)
            done[{lr, lambda}] = {lr, lambda, score, epoch};
    }

    std::ofstream cells(cells_path, std::ios::app);
    double best_score = -1.0;
    for (const auto& [key, cell] : done) best_score = std::max(best_score, cell.best_avg_score);

    std::vector<GridCellResult> results;
    for (double lr : grids.learning_rates) {
        for (double lambda : grids.lambdas) {
            auto it = done.find({lr, lambda});
            if (it != done.end()) {
                results.push_back(it->second);
                continue;
            }
            TrainConfig tc = base;
            tc.learning_rate = lr;
            tc.lambda = lambda;
            JointModel model(mc, tc.seed, &d.schema.bio_tags);
            TrainResult r = train(model, d.splits.train, d.splits.valid, d.schema, d.vocab, tc);
            GridCellResult cell{lr, lambda, r.best.avg_score, r.best.epoch};
            results.push_back(cell);
            cells << lr << "\t" << lambda << "\t" << cell.best_avg_score << "\t" << cell.best_epoch
                  << "\n"
                  << std::flush;
            if (cell.best_avg_score > best_score) {
                best_score = cell.best_avg_score;
                model.load_parameter_values(r.best.weights);
                save_checkpoint((fs::path(cfg.output_dir) / "checkpoint.bin").string(), model,
                                d.vocab, d.schema);
            }
            std::cout << "cell lr=" << lr << " lambda=" << lambda << " avg_score=" << std::fixed
                      << std::setprecision(4) << cell.best_avg_score << "\n";
        }
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const GridCellResult& a, const GridCellResult& b) {
                         return a.best_avg_score > b.best_avg_score;
                     });
    std::ofstream table(fs::path(cfg.output_dir) / "results.tsv");
    table << "lr\tlambda\tbest_avg_score\tbest_epoch\n";
    for (const auto& r : results)
        table << r.learning_rate << "\t" << r.lambda << "\t" << r.best_avg_score << "\t"
              << r.best_epoch << "\n";
    std::cout << "best cell: lr=" << results.front().learning_rate
              << " lambda=" << results.front().lambda << " avg_score=" << std::fixed
              << std::setprecision(4) << results.front().best_avg_score << "\n";
    return 0;
}

void check_schema_compat(const LabelSchema& ckpt, const std::vector<Utterance>& data) {
    for (const auto& u : data) {
        if (!ckpt.intent_ids.count(u.intent))
            throw DataError("schema mismatch: intent '" + u.intent + "' not in checkpoint");
        for (const auto& t : u.tags)
            if (!ckpt.bio_tag_ids.count(t))
                throw DataError("schema mismatch: tag '" + t + "' not in checkpoint");
    }
}

int cmd_eval(RunConfig& cfg, const std::string& checkpoint_path, const std::string& split) {
    if (!cfg.seeds.empty()) {
        // multi-seed protocol: train per seed, evaluate the best checkpoint on test
        auto seeds = parse_seed_list(cfg.seeds);
        LoadedData d = load_data(cfg);
        if (d.splits.test.empty()) throw DataError("multi-seed evaluation needs a test split");
        ModelConfig mc = make_model_config(cfg, d);
        TrainConfig tc = make_train_config(cfg);
        auto factory = [&](std::uint64_t seed) { return JointModel(mc, seed, &d.schema.bio_tags); };
        MultiSeedResult r = multi_seed(factory, d.splits.train, d.splits.valid, d.splits.test,
                                       d.schema, d.vocab, tc, seeds);
        std::cout << std::fixed << std::setprecision(2);
        for (const auto& run : r.runs)
            std::cout << "seed " << run.seed << ": intent_acc=" << 100.0 * run.report.intent_accuracy
                      << " slot_f1=" << 100.0 * run.report.slot_f1
                      << " sentence_acc=" << 100.0 * run.report.sentence_accuracy << "\n";
        std::cout << "mean±std: intent_acc=" << 100.0 * r.mean_intent_accuracy << "±"
                  << 100.0 * r.std_intent_accuracy << " slot_f1=" << 100.0 * r.mean_slot_f1 << "±"
                  << 100.0 * r.std_slot_f1 << " sentence_acc=" << 100.0 * r.mean_sentence_accuracy
                  << "±" << 100.0 * r.std_sentence_accuracy << "\n";
        if (!cfg.output_dir.empty()) {
            fs::create_directories(cfg.output_dir);
            json rows = json::array();
            for (const auto& run : r.runs)
                rows.push_back({{"seed", run.seed}, {"report", report_to_json(run.report)}});
            json summary = {{"runs", rows},
                            {"mean_intent_accuracy", r.mean_intent_accuracy},
                            {"std_intent_accuracy", r.std_intent_accuracy},
                            {"mean_slot_f1", r.mean_slot_f1},
                            {"std_slot_f1", r.std_slot_f1},
                            {"mean_sentence_accuracy", r.mean_sentence_accuracy},
                            {"std_sentence_accuracy", r.std_sentence_accuracy}};
            std::ofstream(fs::path(cfg.output_dir) / "multiseed.json") << summary.dump(2) << "\n";
        }
        return 0;
    }

    if (checkpoint_path.empty()) throw ConfigError("--checkpoint is required (or use --seeds)");
    CheckpointFile ckpt = load_checkpoint(checkpoint_path);
    JointModel model = model_from_checkpoint(ckpt);
    auto data = load_split((fs::path(cfg.data_dir) / split).string());
    check_schema_compat(ckpt.schema, data);
    EvalReport r = evaluate_model(model, data, ckpt.schema, ckpt.vocab);
    std::cout << format_report(r);
    if (!cfg.output_dir.empty()) {
        fs::create_directories(cfg.output_dir);
        std::ofstream(fs::path(cfg.output_dir) / (split + "_report.txt")) << format_report(r);
        std::ofstream(fs::path(cfg.output_dir) / (split + "_report.json"))
            << report_to_json(r).dump(2) << "\n";
    }
    return 0;
}

int cmd_predict(const std::string& checkpoint_path, const std::string& input_path,
                const std::string& output_path) {
    CheckpointFile ckpt = load_checkpoint(checkpoint_path);
    JointModel model = model_from_checkpoint(ckpt);
    std::ifstream in(input_path);
    if (!in) throw DataError("cannot open input file: " + input_path);
    std::ostream* out = &std::cout;
    std::ofstream file_out;
    if (!output_path.empty()) {
        file_out.open(output_path);
        if (!file_out) throw DataError("cannot open output file: " + output_path);
        out = &file_out;
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream is(line);
        std::vector<std::string> tokens;
        std::string tok;
        while (is >> tok) tokens.push_back(tok);
        if (tokens.empty()) throw DataError("predict: empty line " + std::to_string(lineno));
        auto ids = tokenize_and_index(tokens, ckpt.vocab);
        auto pred = model.predict(ids);
        *out << ckpt.schema.intents.at(pred.intent) << "\t";
        for (std::size_t i = 0; i < pred.tags.size(); ++i)
            *out << (i ? " " : "") << ckpt.schema.bio_tags.at(pred.tags[i]);
        *out << "\n";
    }
    return 0;
}

int cmd_errors(const std::string& gold_dir, const std::string& pred_path) {
    auto gold = load_split(gold_dir);
    std::ifstream in(pred_path);
    if (!in) throw DataError("cannot open prediction file: " + pred_path);
    std::vector<std::string> gold_intents, pred_intents;
    std::vector<std::vector<std::string>> gold_tags, pred_tags;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw DataError("prediction line " + std::to_string(lineno) +
                            ": expected intent<TAB>tags");
        pred_intents.push_back(line.substr(0, tab));
        std::istringstream is(line.substr(tab + 1));
        std::vector<std::string> tags;
        std::string t;
        while (is >> t) tags.push_back(t);
        pred_tags.push_back(std::move(tags));
    }
    if (pred_intents.size() != gold.size())
        throw AlignmentError("prediction count " + std::to_string(pred_intents.size()) +
                             " vs gold " + std::to_string(gold.size()));
    for (std::size_t i = 0; i < gold.size(); ++i) {
        gold_intents.push_back(gold[i].intent);
        gold_tags.push_back(gold[i].tags);
        if (pred_tags[i].size() != gold[i].tags.size())
            throw AlignmentError("utterance " + std::to_string(i + 1) + ": " +
                                 std::to_string(pred_tags[i].size()) + " predicted tags vs " +
                                 std::to_string(gold[i].tags.size()) + " tokens");
    }
    std::vector<ErrorDiagnostic> diags;
    ErrorCounts c = categorize_errors(gold_intents, pred_intents, gold_tags, pred_tags, &diags);
    std::cout << "WI=" << c.wrong_intent << " MS=" << c.missing_slot << " SS=" << c.spurious_slot
              << " WB=" << c.wrong_boundary << " WL=" << c.wrong_label
              << " (WB cross-type: " << c.wrong_boundary_cross_type << ")\n";
    for (const auto& d : diags)
        std::cout << "utt " << d.utterance + 1 << "\t" << error_category_name(d.category) << "\t"
                  << d.detail << "\n";
    return 0;
}

int cmd_synth(const std::string& out_dir, std::uint64_t seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    save_split((fs::path(out_dir) / "train").string(), make_synthetic_corpus(spec));
    SyntheticSpec dev = spec;
    dev.utterance_count = 20;
    dev.seed = seed + 1;
    save_split((fs::path(out_dir) / "dev").string(), make_synthetic_corpus(dev));
    SyntheticSpec test = spec;
    test.utterance_count = 20;
    test.seed = seed + 2;
    save_split((fs::path(out_dir) / "test").string(), make_synthetic_corpus(test));
    std::cout << "wrote synthetic corpus under " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"joint intent detection and slot filling toolkit"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string checkpoint_path, split = "test", input_path, output_path, gold_dir, pred_path;
    std::string synth_dir = "data/synthetic";
    std::uint64_t synth_seed = 7;

    CLI::App* train_cmd = app.add_subcommand("train", "train a model and keep the best checkpoint");
    add_common_flags(train_cmd, cfg);

    CLI::App* grid_cmd = app.add_subcommand("gridsearch", "grid search over lr and lambda");
    add_common_flags(grid_cmd, cfg);
    grid_cmd->add_option("--lrs", cfg.lrs, "comma-separated learning rates (default: 1e-5..5e-5)");
    grid_cmd->add_option("--lambdas", cfg.lambdas,
                         "comma-separated lambdas (default: 0.05..0.95 step 0.05)");

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint or run multi-seed");
    add_common_flags(eval_cmd, cfg);
    eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint to evaluate");
    eval_cmd->add_option("--split", split, "split name under data-dir")->capture_default_str();
    eval_cmd->add_option("--seeds", cfg.seeds, "comma-separated seeds for the multi-run protocol");

    CLI::App* predict_cmd = app.add_subcommand("predict", "tag utterances from a token file");
    predict_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
    predict_cmd->add_option("--input", input_path, "file with space-separated tokens per line")
        ->required();
    predict_cmd->add_option("--output", output_path, "write predictions here (default stdout)");

    CLI::App* errors_cmd = app.add_subcommand("errors", "categorize prediction errors vs gold");
    errors_cmd->add_option("--gold-dir", gold_dir, "gold split directory")->required();
    errors_cmd->add_option("--pred", pred_path, "prediction file from `predict`")->required();

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
    synth_cmd->add_option("--output-dir", synth_dir, "corpus root")->capture_default_str();
    synth_cmd->add_option("--seed", synth_seed, "generator seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) {
            apply_config_file(*train_cmd, cfg);
            return cmd_train(cfg);
        }
        if (grid_cmd->parsed()) {
            apply_config_file(*grid_cmd, cfg);
            return cmd_gridsearch(cfg);
        }
        if (eval_cmd->parsed()) {
            apply_config_file(*eval_cmd, cfg);
            return cmd_eval(cfg, checkpoint_path, split);
        }
        if (predict_cmd->parsed()) return cmd_predict(checkpoint_path, input_path, output_path);
        if (errors_cmd->parsed()) return cmd_errors(gold_dir, pred_path);
        if (synth_cmd->parsed()) return cmd_synth(synth_dir, synth_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
