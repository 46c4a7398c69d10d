#pragma once

#include <cstdint>
#include <vector>

#include "ltlm/corpus.hpp"

namespace ltlm {

// Sentence-level training resets LSTM states after every sentence; discourse-
// level training carries them across sentences and resets only at document
// boundaries.
enum class TrainMode { Sentence, Discourse };

// One truncated-BPTT window over B parallel sub-streams. Entries are indexed
// [step * batch_size + stream].
struct BatchWindow {
    std::size_t steps = 0;
    std::size_t batch_size = 0;
    std::vector<std::int32_t> inputs;
    std::vector<std::int32_t> targets;
    // LSTM state reset before the step: set at positions following a
    // sentence_end (sentence mode) or a document_end (discourse mode).
    std::vector<bool> state_reset;
    // Context-buffer reset: positions following a document_end, in both modes.
    std::vector<bool> doc_reset;

    std::int32_t input(std::size_t step, std::size_t stream) const { return inputs[step * batch_size + stream]; }
    std::int32_t target(std::size_t step, std::size_t stream) const { return targets[step * batch_size + stream]; }
};

// Splits a stream into batch_size contiguous equal-length sub-streams
// (trailing remainder dropped) and serves consecutive unroll windows.
class BatchPlan {
public:
    BatchPlan(const TokenStream& stream, std::size_t batch_size, std::size_t unroll_steps,
              TrainMode mode);

    std::size_t window_count() const noexcept { return window_count_; }
    std::size_t stream_length() const noexcept { return stream_length_; }

    // Fills the next window; returns false once the epoch is exhausted.
    bool next(BatchWindow& window);
    void rewind() noexcept { cursor_ = 0; }

private:
    const TokenStream* stream_;
    std::size_t batch_size_;
    std::size_t unroll_;
    TrainMode mode_;
    std::size_t stream_length_; // per sub-stream
    std::size_t window_count_;
    std::size_t cursor_ = 0; // position within sub-streams
};

} // namespace ltlm
