#pragma once

// Single-file model archive: config, vocabulary, label schema, and all weight
// arrays with named keys. Versioned little-endian binary; round-trips
// bit-exactly.

#include <string>
#include <utility>
#include <vector>

#include "jointidsf/data.hpp"
#include "jointidsf/model.hpp"

namespace jointidsf {

struct CheckpointFile {
    ModelConfig config;
    TokenVocab vocab;
    LabelSchema schema;
    std::vector<std::pair<std::string, std::vector<double>>> weights;
};

void save_checkpoint(const std::string& path, const JointModel& model, const TokenVocab& vocab,
                     const LabelSchema& schema);

void save_checkpoint(const std::string& path, const CheckpointFile& file);

CheckpointFile load_checkpoint(const std::string& path);

// Rebuilds a model from a loaded archive (weights included).
JointModel model_from_checkpoint(const CheckpointFile& file);

}  // namespace jointidsf
