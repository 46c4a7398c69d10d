#include "ltlm/batches.hpp"

namespace ltlm {

BatchPlan::BatchPlan(const TokenStream& stream, std::size_t batch_size,
                     std::size_t unroll_steps, TrainMode mode)
    : stream_(&stream), batch_size_(batch_size), unroll_(unroll_steps), mode_(mode) {
    require(batch_size > 0 && unroll_steps > 0, ErrorCode::InvalidArgument,
            "make_batches: batch size and unroll steps must be positive");
    require(stream.size() >= batch_size * 2, ErrorCode::InvalidArgument,
            "make_batches: stream of " + std::to_string(stream.size()) +
                " tokens is too short for batch size " + std::to_string(batch_size));
    stream_length_ = stream.size() / batch_size;
    const std::size_t positions = stream_length_ - 1; // inputs per sub-stream
    window_count_ = (positions + unroll_ - 1) / unroll_;
}

bool BatchPlan::next(BatchWindow& window) {
    const std::size_t positions = stream_length_ - 1;
    if (cursor_ >= positions) return false;
    const std::size_t steps = std::min(unroll_, positions - cursor_);

    window.steps = steps;
    window.batch_size = batch_size_;
    window.inputs.resize(steps * batch_size_);
    window.targets.resize(steps * batch_size_);
    window.state_reset.assign(steps * batch_size_, false);
    window.doc_reset.assign(steps * batch_size_, false);

    const TokenStream& s = *stream_;
    for (std::size_t step = 0; step < steps; ++step) {
        const std::size_t pos = cursor_ + step;
        for (std::size_t b = 0; b < batch_size_; ++b) {
            const std::size_t g = b * stream_length_ + pos;
            const std::size_t idx = step * batch_size_ + b;
            window.inputs[idx] = s.tokens[g];
            window.targets[idx] = s.tokens[g + 1];
            const bool after_sentence = pos > 0 && s.sentence_end[g - 1];
            const bool after_document = pos > 0 && s.document_end[g - 1];
            window.doc_reset[idx] = after_document;
            window.state_reset[idx] =
                mode_ == TrainMode::Sentence ? after_sentence : after_document;
        }
    }
    cursor_ += steps;
    return true;
}

} // namespace ltlm
