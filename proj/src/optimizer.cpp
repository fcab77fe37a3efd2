#include "jointidsf/optimizer.hpp"

#include <cmath>

namespace jointidsf {

void AdamW::step(const std::vector<std::pair<std::string, Tensor>>& params) {
    if (state_.empty()) {
        state_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            state_[i].m.assign(params[i].second.size(), 0.0);
            state_[i].v.assign(params[i].second.size(), 0.0);
        }
    }
    if (state_.size() != params.size())
        throw ContractError("adamw: parameter list changed size between steps");

    ++step_count_;
    double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
    double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));

    for (std::size_t i = 0; i < params.size(); ++i) {
        Tensor p = params[i].second;
        if (p.size() != state_[i].m.size())
            throw ContractError("adamw: state shape mismatch for " + params[i].first);
        const std::vector<double>* grad = p.has_grad() ? &p.grad() : nullptr;
        auto& vals = p.values_mut();
        auto& m = state_[i].m;
        auto& v = state_[i].v;
        for (std::size_t j = 0; j < vals.size(); ++j) {
            double g = grad ? (*grad)[j] : 0.0;
            m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g;
            v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g * g;
            double m_hat = m[j] / bc1;
            double v_hat = v[j] / bc2;
            // decoupled decay on the incoming value, never folded into the gradient
            vals[j] -= config_.learning_rate * config_.weight_decay * vals[j];
            vals[j] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.eps);
        }
    }
}

double clip_grad_norm(const std::vector<std::pair<std::string, Tensor>>& params, double max_norm) {
    double sq = 0.0;
    for (const auto& [name, p] : params) {
        if (!p.has_grad()) continue;
        for (double g : p.grad()) sq += g * g;
    }
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        double factor = max_norm / norm;
        for (auto& [name, p] : params) {
            if (!p.has_grad()) continue;
            Tensor t = p;
            for (double& g : t.node()->grad) g *= factor;
        }
    }
    return norm;
}

}  // namespace jointidsf
