#pragma once

#include <functional>
#include <optional>
#include <string>

#include "ltlm/model.hpp"

namespace ltlm {

struct TrainingSchedule {
    std::size_t epochs = 75;
    std::size_t batch_size = 20;
    std::size_t unroll_steps = 35;
    double initial_lr = 1.0;
    double decay_rate = 0.8;
    std::size_t decay_start_epoch = 6;
    double clip_norm = 5.0;
    double dropout_p = 0.5;
    TrainMode mode = TrainMode::Sentence;
    std::uint64_t seed = 1;
    double init_range = 0.05;

    // lr(epoch) = initial_lr * decay_rate^(epoch - decay_start_epoch + 1) once
    // epoch reaches decay_start_epoch; flat before that. Epochs are 1-based.
    double learning_rate_for(std::size_t epoch) const;
    void validate() const;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_ppl = 0.0;
    double valid_ppl = 0.0;
    double seconds = 0.0;
};

struct TrainResult {
    ModelParameters params; // parameters after the last completed epoch
    std::vector<EpochRecord> log;
    bool diverged = false;
    std::size_t completed_epochs = 0;
    std::size_t best_epoch = 0; // 1-based; 0 when no epoch completed
};

// Called after every completed epoch (checkpoint writing lives in the caller).
using EpochCallback =
    std::function<void(const EpochRecord&, const ModelParameters&, bool is_best)>;

// Deterministic given the seed: initialization and the per-step dropout masks
// are the only randomness. Validation perplexity is measured after each epoch
// with dropout off and fresh zero states; a non-finite validation perplexity
// (or a numeric failure mid-epoch) aborts training with the last completed
// epoch's parameters retained.
TrainResult train(const TokenStream& train_stream, const TokenStream& valid_stream,
                  const ModelConfig& config, const TrainingSchedule& schedule,
                  const IdfTable* idf, const Matrix* pretrained_input,
                  const Matrix* pretrained_context, const EpochCallback& on_epoch = {});

} // namespace ltlm
