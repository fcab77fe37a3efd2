#pragma once

#include <cmath>
#include <random>

#include "jointidsf/autodiff.hpp"

namespace jointidsf {

// Glorot-uniform init over an (fan_in, fan_out) map stored in any layout.
inline Tensor glorot_uniform(Shape shape, std::size_t fan_in, std::size_t fan_out,
                             std::mt19937_64& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor t = Tensor::zeros(shape, true);
    for (double& v : t.values_mut()) v = dist(rng);
    return t;
}

inline Tensor normal_init(Shape shape, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    Tensor t = Tensor::zeros(shape, true);
    for (double& v : t.values_mut()) v = dist(rng);
    return t;
}

}  // namespace jointidsf
