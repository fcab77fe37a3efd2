#include "jointidsf/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace jointidsf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kBioPenalty = -1e4;

double logsumexp(const double* x, std::size_t n) {
    double mx = kNegInf;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, x[i]);
    if (mx == kNegInf) return kNegInf;
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::exp(x[i] - mx);
    return mx + std::log(s);
}

struct EffectiveScores {
    std::vector<double> trans;  // T x T
    std::vector<double> start;  // T
};

EffectiveScores effective(const CrfParams& p) {
    EffectiveScores e;
    e.trans = p.transitions.values();
    e.start = p.start_scores.values();
    if (!p.transition_penalty.empty())
        for (std::size_t i = 0; i < e.trans.size(); ++i) e.trans[i] += p.transition_penalty[i];
    if (!p.start_penalty.empty())
        for (std::size_t i = 0; i < e.start.size(); ++i) e.start[i] += p.start_penalty[i];
    return e;
}

struct ForwardBackward {
    double log_z;
    std::vector<double> unary;      // n x T marginals
    std::vector<double> pair_sum;   // T x T, sum over positions of pairwise marginals
};

ForwardBackward forward_backward(const std::vector<double>& e, std::size_t n, std::size_t t_count,
                                 const EffectiveScores& es, const std::vector<double>& end) {
    const std::size_t T = t_count;
    std::vector<double> alpha(n * T), beta(n * T), scratch(T);
    for (std::size_t t = 0; t < T; ++t) alpha[t] = es.start[t] + e[t];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t u = 0; u < T; ++u) {
            for (std::size_t t = 0; t < T; ++t) scratch[t] = alpha[(i - 1) * T + t] + es.trans[t * T + u];
            alpha[i * T + u] = logsumexp(scratch.data(), T) + e[i * T + u];
        }
    for (std::size_t t = 0; t < T; ++t) scratch[t] = alpha[(n - 1) * T + t] + end[t];
    ForwardBackward fb;
    fb.log_z = logsumexp(scratch.data(), T);

    for (std::size_t t = 0; t < T; ++t) beta[(n - 1) * T + t] = end[t];
    for (std::size_t i = n - 1; i-- > 0;)
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t u = 0; u < T; ++u)
                scratch[u] = es.trans[t * T + u] + e[(i + 1) * T + u] + beta[(i + 1) * T + u];
            beta[i * T + t] = logsumexp(scratch.data(), T);
        }

    fb.unary.resize(n * T);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t t = 0; t < T; ++t)
            fb.unary[i * T + t] = std::exp(alpha[i * T + t] + beta[i * T + t] - fb.log_z);

    fb.pair_sum.assign(T * T, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i)
        for (std::size_t t = 0; t < T; ++t)
            for (std::size_t u = 0; u < T; ++u)
                fb.pair_sum[t * T + u] +=
                    std::exp(alpha[i * T + t] + es.trans[t * T + u] + e[(i + 1) * T + u] +
                             beta[(i + 1) * T + u] - fb.log_z);
    return fb;
}

void check_emissions(const Tensor& emissions, const CrfParams& params) {
    if (emissions.rank() != 2)
        throw ShapeError("crf: emissions must be n x T, got " + shape_to_string(emissions.shape()));
    if (emissions.dim(0) < 1) throw ShapeError("crf: need at least one token");
    if (emissions.dim(1) != params.tag_count())
        throw ShapeError("crf: emissions tag dimension " + std::to_string(emissions.dim(1)) +
                         " does not match parameter tag count " +
                         std::to_string(params.tag_count()));
}

}  // namespace

CrfParams CrfParams::zeros(std::size_t tag_count, bool trainable) {
    CrfParams p;
    p.transitions = Tensor::zeros({tag_count, tag_count}, trainable);
    p.start_scores = Tensor::zeros({tag_count}, trainable);
    p.end_scores = Tensor::zeros({tag_count}, trainable);
    return p;
}

void apply_bio_constraints(CrfParams& params, const std::vector<std::string>& bio_tags) {
    const std::size_t T = bio_tags.size();
    params.transition_penalty.assign(T * T, 0.0);
    params.start_penalty.assign(T, 0.0);
    auto inside_type = [&](std::size_t t) -> std::string {
        const std::string& s = bio_tags[t];
        return s.rfind("I-", 0) == 0 ? s.substr(2) : std::string{};
    };
    auto begin_or_inside_type = [&](std::size_t t) -> std::string {
        const std::string& s = bio_tags[t];
        if (s.rfind("B-", 0) == 0 || s.rfind("I-", 0) == 0) return s.substr(2);
        return std::string{};
    };
    for (std::size_t u = 0; u < T; ++u) {
        std::string itype = inside_type(u);
        if (itype.empty()) continue;
        params.start_penalty[u] = kBioPenalty;
        for (std::size_t t = 0; t < T; ++t)
            if (begin_or_inside_type(t) != itype) params.transition_penalty[t * T + u] = kBioPenalty;
    }
}

Tensor crf_log_partition(const Tensor& emissions, const CrfParams& params) {
    check_emissions(emissions, params);
    const std::size_t n = emissions.dim(0), T = params.tag_count();
    EffectiveScores es = effective(params);
    ForwardBackward fb = forward_backward(emissions.values(), n, T, es, params.end_scores.values());

    auto en = emissions.node_ptr();
    auto trn = params.transitions.node_ptr();
    auto stn = params.start_scores.node_ptr();
    auto endn = params.end_scores.node_ptr();
    return make_op_result(
        Shape{}, {fb.log_z}, {emissions, params.transitions, params.start_scores, params.end_scores},
        [en, trn, stn, endn, fb = std::move(fb), n, T](detail::TensorNode& o) {
            double g0 = o.grad[0];
            if (en->requires_grad) {
                auto& g = en->grad_buffer();
                for (std::size_t i = 0; i < n * T; ++i) g[i] += g0 * fb.unary[i];
            }
            if (trn->requires_grad) {
                auto& g = trn->grad_buffer();
                for (std::size_t i = 0; i < T * T; ++i) g[i] += g0 * fb.pair_sum[i];
            }
            if (stn->requires_grad) {
                auto& g = stn->grad_buffer();
                for (std::size_t t = 0; t < T; ++t) g[t] += g0 * fb.unary[t];
            }
            if (endn->requires_grad) {
                auto& g = endn->grad_buffer();
                for (std::size_t t = 0; t < T; ++t) g[t] += g0 * fb.unary[(n - 1) * T + t];
            }
        });
}

Tensor crf_gold_score(const Tensor& emissions, const std::vector<std::size_t>& gold_tags,
                      const CrfParams& params) {
    check_emissions(emissions, params);
    const std::size_t n = emissions.dim(0), T = params.tag_count();
    if (gold_tags.size() != n)
        throw ShapeError("crf: gold tag sequence length " + std::to_string(gold_tags.size()) +
                         " vs " + std::to_string(n) + " tokens");
    for (std::size_t t : gold_tags)
        if (t >= T) throw IndexError("crf: tag id " + std::to_string(t) + " out of range");

    EffectiveScores es = effective(params);
    double score = es.start[gold_tags[0]] + params.end_scores.values()[gold_tags[n - 1]];
    for (std::size_t i = 0; i < n; ++i) score += emissions.values()[i * T + gold_tags[i]];
    for (std::size_t i = 1; i < n; ++i) score += es.trans[gold_tags[i - 1] * T + gold_tags[i]];

    auto en = emissions.node_ptr();
    auto trn = params.transitions.node_ptr();
    auto stn = params.start_scores.node_ptr();
    auto endn = params.end_scores.node_ptr();
    return make_op_result(
        Shape{}, {score}, {emissions, params.transitions, params.start_scores, params.end_scores},
        [en, trn, stn, endn, gold_tags, n, T](detail::TensorNode& o) {
            double g0 = o.grad[0];
            if (en->requires_grad) {
                auto& g = en->grad_buffer();
                for (std::size_t i = 0; i < n; ++i) g[i * T + gold_tags[i]] += g0;
            }
            if (trn->requires_grad) {
                auto& g = trn->grad_buffer();
                for (std::size_t i = 1; i < n; ++i) g[gold_tags[i - 1] * T + gold_tags[i]] += g0;
            }
            if (stn->requires_grad) stn->grad_buffer()[gold_tags[0]] += g0;
            if (endn->requires_grad) endn->grad_buffer()[gold_tags[n - 1]] += g0;
        });
}

Tensor crf_nll(const Tensor& emissions, const std::vector<std::size_t>& gold_tags,
               const CrfParams& params) {
    return add(crf_log_partition(emissions, params), scale(crf_gold_score(emissions, gold_tags, params), -1.0));
}

ViterbiResult viterbi_decode(const Tensor& emissions, const CrfParams& params) {
    check_emissions(emissions, params);
    const std::size_t n = emissions.dim(0), T = params.tag_count();
    EffectiveScores es = effective(params);
    const auto& e = emissions.values();
    const auto& end = params.end_scores.values();

    std::vector<double> best(n * T);
    std::vector<std::size_t> back(n * T, 0);
    for (std::size_t t = 0; t < T; ++t) best[t] = es.start[t] + e[t];
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t u = 0; u < T; ++u) {
            double mx = kNegInf;
            std::size_t arg = 0;
            for (std::size_t t = 0; t < T; ++t) {
                double s = best[(i - 1) * T + t] + es.trans[t * T + u];
                if (s > mx) {  // strict: keeps the lowest tag id on ties
                    mx = s;
                    arg = t;
                }
            }
            best[i * T + u] = mx + e[i * T + u];
            back[i * T + u] = arg;
        }

    ViterbiResult res;
    double mx = kNegInf;
    std::size_t last = 0;
    for (std::size_t t = 0; t < T; ++t) {
        double s = best[(n - 1) * T + t] + end[t];
        if (s > mx) {
            mx = s;
            last = t;
        }
    }
    res.score = mx;
    res.tags.assign(n, 0);
    res.tags[n - 1] = last;
    for (std::size_t i = n - 1; i > 0; --i) res.tags[i - 1] = back[i * T + res.tags[i]];
    return res;
}

std::vector<double> crf_marginals(const Tensor& emissions, const CrfParams& params) {
    check_emissions(emissions, params);
    EffectiveScores es = effective(params);
    ForwardBackward fb = forward_backward(emissions.values(), emissions.dim(0), params.tag_count(),
                                          es, params.end_scores.values());
    return fb.unary;
}

}  // namespace jointidsf
