#include "ltlm/context.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ltlm {

WeightingScheme WeightingScheme::uniform() {
    return WeightingScheme(WeightingKind::Uniform, 0.0, nullptr);
}

WeightingScheme WeightingScheme::exponential(double alpha) {
    require(alpha > 1.0, ErrorCode::InvalidArgument,
            "exponential weighting requires alpha > 1");
    return WeightingScheme(WeightingKind::Exponential, alpha, nullptr);
}

WeightingScheme WeightingScheme::word_dependent(const IdfTable& idf) {
    return WeightingScheme(WeightingKind::WordDependent, 0.0, &idf);
}

double WeightingScheme::weight(std::size_t k, std::int32_t word) const {
    switch (kind_) {
        case WeightingKind::Uniform: return 1.0;
        case WeightingKind::Exponential: return std::pow(alpha_, -static_cast<double>(k));
        case WeightingKind::WordDependent: return idf_->weight(word);
    }
    fail(ErrorCode::Internal, "unknown weighting kind");
}

WeightingKind parse_weighting_kind(const std::string& name) {
    if (name == "uniform") return WeightingKind::Uniform;
    if (name == "exponential") return WeightingKind::Exponential;
    if (name == "word_dependent") return WeightingKind::WordDependent;
    fail(ErrorCode::InvalidArgument, "unknown weighting scheme: " + name);
}

const char* weighting_kind_name(WeightingKind kind) {
    switch (kind) {
        case WeightingKind::Uniform: return "uniform";
        case WeightingKind::Exponential: return "exponential";
        case WeightingKind::WordDependent: return "word_dependent";
    }
    return "?";
}

std::vector<double> context_weights(const ContextBuffer& buffer, const WeightingScheme& scheme) {
    require(buffer.fill() >= 1, ErrorCode::InvalidArgument, "context_vector: empty buffer");
    std::vector<double> weights(buffer.fill());
    double sum = 0.0;
    for (std::size_t k = 0; k < buffer.fill(); ++k) {
        weights[k] = scheme.weight(k, buffer.at_offset(k));
        sum += weights[k];
    }
    if (sum <= 0.0) {
        // All-zero idf history; fall back to a plain average.
        std::fill(weights.begin(), weights.end(), 1.0);
        sum = static_cast<double>(weights.size());
    }
    for (double& w : weights) w /= sum;
    return weights;
}

Vec context_vector(const ContextBuffer& buffer, const Matrix& ctx_embeddings,
                   const WeightingScheme& scheme) {
    const std::vector<double> weights = context_weights(buffer, scheme);
    Vec d(ctx_embeddings.cols(), 0.0);
    for (std::size_t k = 0; k < buffer.fill(); ++k) {
        const auto row = static_cast<std::size_t>(buffer.at_offset(k));
        axpy(weights[k], ctx_embeddings.row(row), d.data(), d.size());
    }
    return d;
}

void context_vector_backward(const Vec& grad_d, const std::vector<std::int32_t>& snapshot,
                             const WeightingScheme& scheme, Matrix& grad_ctx_embeddings) {
    require(!snapshot.empty(), ErrorCode::InvalidArgument,
            "context_vector_backward: empty buffer snapshot");
    const std::size_t fill = snapshot.size();
    std::vector<double> weights(fill);
    double sum = 0.0;
    for (std::size_t k = 0; k < fill; ++k) {
        weights[k] = scheme.weight(k, snapshot[fill - 1 - k]);
        sum += weights[k];
    }
    if (sum <= 0.0) {
        std::fill(weights.begin(), weights.end(), 1.0);
        sum = static_cast<double>(fill);
    }
    for (std::size_t k = 0; k < fill; ++k) {
        const auto row = static_cast<std::size_t>(snapshot[fill - 1 - k]);
        axpy(weights[k] / sum, grad_d.data(), grad_ctx_embeddings.row(row), grad_d.size());
    }
}

std::vector<std::pair<std::int32_t, double>> nearest_words(
    const Vec& d, const Matrix& ctx_embeddings, std::size_t n,
    const std::vector<std::int32_t>& exclude) {
    require(n >= 1, ErrorCode::InvalidArgument, "nearest_words: n must be >= 1");
    const double d_norm = std::sqrt(dot(d.data(), d.data(), d.size()));
    require(d_norm > 0.0, ErrorCode::InvalidArgument,
            "nearest_words: zero vector has no direction");

    std::vector<std::pair<std::int32_t, double>> scored;
    scored.reserve(ctx_embeddings.rows());
    for (std::size_t id = 0; id < ctx_embeddings.rows(); ++id) {
        const auto token = static_cast<std::int32_t>(id);
        if (std::find(exclude.begin(), exclude.end(), token) != exclude.end()) continue;
        const double* row = ctx_embeddings.row(id);
        const double row_norm = std::sqrt(dot(row, row, d.size()));
        const double sim = row_norm > 0.0
                               ? dot(row, d.data(), d.size()) / (row_norm * d_norm)
                               : -std::numeric_limits<double>::infinity();
        scored.emplace_back(token, sim);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (scored.size() > n) scored.resize(n);
    return scored;
}

} // namespace ltlm
