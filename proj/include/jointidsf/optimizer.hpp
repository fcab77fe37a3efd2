#pragma once

// AdamW with bias correction and decoupled weight decay.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "jointidsf/autodiff.hpp"

namespace jointidsf {

struct AdamWConfig {
    double learning_rate = 5e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.01;
};

class AdamW {
public:
    explicit AdamW(AdamWConfig config) : config_(config) {}

    // Consumes the gradients currently stored on the parameters; a parameter
    // with no populated gradient is treated as having a zero gradient (weight
    // decay still applies). Caller zeroes grads between steps.
    void step(const std::vector<std::pair<std::string, Tensor>>& params);

    std::size_t step_count() const { return step_count_; }
    const AdamWConfig& config() const { return config_; }

private:
    struct State {
        std::vector<double> m, v;
    };
    AdamWConfig config_;
    std::vector<State> state_;  // parallel to the parameter list
    std::size_t step_count_ = 0;
};

// Scales all gradients so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
double clip_grad_norm(const std::vector<std::pair<std::string, Tensor>>& params, double max_norm);

}  // namespace jointidsf
