#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltlm/idf.hpp"
#include "ltlm/matrix.hpp"

namespace ltlm {

// Defaults used whenever a configuration leaves them unspecified.
inline constexpr std::size_t kDefaultHistory = 100;   // K
inline constexpr double kDefaultAlpha = 1.05;

enum class WeightingKind { Uniform, Exponential, WordDependent };

// Fixed (untrained) combination weight g(k, w) for the word at history offset
// k: 1 for uniform, alpha^-k for exponential (alpha > 1 so weights decay into
// the past), idf(w) for word-dependent.
class WeightingScheme {
public:
    static WeightingScheme uniform();
    static WeightingScheme exponential(double alpha);
    static WeightingScheme word_dependent(const IdfTable& idf);

    double weight(std::size_t k, std::int32_t word) const;

    WeightingKind kind() const noexcept { return kind_; }
    double alpha() const noexcept { return alpha_; }
    const IdfTable* idf() const noexcept { return idf_; }

private:
    WeightingScheme(WeightingKind kind, double alpha, const IdfTable* idf)
        : kind_(kind), alpha_(alpha), idf_(idf) {}

    WeightingKind kind_;
    double alpha_;
    const IdfTable* idf_;
};

WeightingKind parse_weighting_kind(const std::string& name);
const char* weighting_kind_name(WeightingKind kind);

// Ring of the last K+1 token ids, positions t-K ... t. The current word is
// part of its own history, so the buffer is never empty once the first token
// of a document has been pushed.
class ContextBuffer {
public:
    explicit ContextBuffer(std::size_t history) : capacity_(history + 1), ring_(capacity_) {}

    void push(std::int32_t token) {
        ring_[head_] = token;
        head_ = (head_ + 1) % capacity_;
        if (fill_ < capacity_) ++fill_;
    }

    void clear() noexcept { fill_ = 0; head_ = 0; }

    std::size_t fill() const noexcept { return fill_; }
    std::size_t capacity() const noexcept { return capacity_; }

    // Token at offset k from the most recent push (k = 0 is the newest).
    std::int32_t at_offset(std::size_t k) const {
        require(k < fill_, ErrorCode::InvalidArgument, "ContextBuffer: offset beyond fill");
        return ring_[(head_ + capacity_ - 1 - k) % capacity_];
    }

    // Contents oldest-to-newest; used to snapshot state for the backward pass.
    std::vector<std::int32_t> snapshot() const {
        std::vector<std::int32_t> out(fill_);
        for (std::size_t k = 0; k < fill_; ++k) out[fill_ - 1 - k] = at_offset(k);
        return out;
    }

private:
    std::size_t capacity_;
    std::vector<std::int32_t> ring_;
    std::size_t head_ = 0;
    std::size_t fill_ = 0;
};

// Normalized weights over the buffer, index k = 0 (newest) ... fill-1. When
// every raw weight is zero (possible with word-dependent weighting over
// ubiquitous words whose idf is exactly 0), the combination falls back to
// uniform so the normalization stays well defined.
std::vector<double> context_weights(const ContextBuffer& buffer, const WeightingScheme& scheme);

// The contextual feature vector: weighted average of the context embeddings
// of the buffered words, summed over the available history positions.
Vec context_vector(const ContextBuffer& buffer, const Matrix& ctx_embeddings,
                   const WeightingScheme& scheme);

// Transpose of the linear map above: row of the word at offset k accumulates
// grad_d * (g_k / sum g); repeated words accumulate additively. The buffer is
// passed as an oldest-to-newest snapshot.
void context_vector_backward(const Vec& grad_d, const std::vector<std::int32_t>& snapshot,
                             const WeightingScheme& scheme, Matrix& grad_ctx_embeddings);

// Top-n vocabulary words by cosine similarity to d, descending, ties broken
// by token id. Ids listed in exclude (unk/eos) are skipped.
std::vector<std::pair<std::int32_t, double>> nearest_words(
    const Vec& d, const Matrix& ctx_embeddings, std::size_t n,
    const std::vector<std::int32_t>& exclude);

} // namespace ltlm
