#include "ltlm/train.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "ltlm/eval.hpp"

namespace ltlm {

double TrainingSchedule::learning_rate_for(std::size_t epoch) const {
    if (epoch < decay_start_epoch) return initial_lr;
    const auto exponent = static_cast<double>(epoch - decay_start_epoch + 1);
    return initial_lr * std::pow(decay_rate, exponent);
}

void TrainingSchedule::validate() const {
    require(epochs > 0, ErrorCode::InvalidArgument, "schedule: epochs must be > 0");
    require(batch_size > 0, ErrorCode::InvalidArgument, "schedule: batch_size must be > 0");
    require(unroll_steps > 0, ErrorCode::InvalidArgument, "schedule: unroll_steps must be > 0");
    require(initial_lr > 0.0, ErrorCode::InvalidArgument, "schedule: initial_lr must be > 0");
    require(decay_rate > 0.0 && decay_rate <= 1.0, ErrorCode::InvalidArgument,
            "schedule: decay_rate must be in (0, 1]");
    require(clip_norm > 0.0, ErrorCode::InvalidArgument, "schedule: clip_norm must be > 0");
    require(dropout_p >= 0.0 && dropout_p < 1.0, ErrorCode::InvalidArgument,
            "schedule: dropout must be in [0, 1)");
    require(init_range > 0.0, ErrorCode::InvalidArgument, "schedule: init_range must be > 0");
}

TrainResult train(const TokenStream& train_stream, const TokenStream& valid_stream,
                  const ModelConfig& config, const TrainingSchedule& schedule,
                  const IdfTable* idf, const Matrix* pretrained_input,
                  const Matrix* pretrained_context, const EpochCallback& on_epoch) {
    config.validate();
    schedule.validate();
    require(valid_stream.size() >= 2, ErrorCode::InvalidArgument,
            "train: validation stream needs at least two tokens");

    Rng rng(schedule.seed);
    ModelParameters params = ModelParameters::init(config, rng, schedule.init_range);
    if (pretrained_input) {
        require(pretrained_input->rows() == config.vocab_size &&
                    pretrained_input->cols() == config.input_dim,
                ErrorCode::InvalidArgument, "train: pretrained input embedding shape mismatch");
        params.input_embeddings = *pretrained_input;
    }
    if (pretrained_context) {
        require(config.extension, ErrorCode::InvalidArgument,
                "train: pretrained context embeddings given for a vanilla model");
        require(pretrained_context->rows() == config.vocab_size &&
                    pretrained_context->cols() == config.context_dim,
                ErrorCode::InvalidArgument, "train: pretrained context embedding shape mismatch");
        params.context_embeddings = *pretrained_context;
    }
    const WeightingScheme scheme = make_scheme(config, idf);

    BatchPlan plan(train_stream, schedule.batch_size, schedule.unroll_steps, schedule.mode);

    TrainResult result;
    result.params = params;
    double best_valid = 0.0;

    for (std::size_t epoch = 1; epoch <= schedule.epochs; ++epoch) {
        const auto started = std::chrono::steady_clock::now();
        const double lr = schedule.learning_rate_for(epoch);

        std::vector<LstmState> states(schedule.batch_size, LstmState(config.hidden_size));
        std::vector<ContextBuffer> buffers;
        if (config.extension)
            buffers.assign(schedule.batch_size, ContextBuffer(config.history));
        plan.rewind();

        double loss_sum = 0.0;
        std::size_t position_count = 0;
        BatchWindow window;
        ModelCache cache;
        bool numeric_failure = false;
        try {
            while (plan.next(window)) {
                ForwardOptions opts;
                opts.train_mode = true;
                opts.dropout_p = schedule.dropout_p;
                opts.rng = &rng;
                model_forward(window, states, buffers, params, config, scheme, opts, &cache,
                              nullptr);
                const double loss = cache.mean_cross_entropy(window.targets);
                loss_sum += loss * static_cast<double>(window.steps * window.batch_size);
                position_count += window.steps * window.batch_size;
                ModelParameters grads = model_backward(cache, window.targets, params, config, scheme);
                sgd_step(params, grads, lr, schedule.clip_norm);
            }
        } catch (const Error& e) {
            if (e.code() != ErrorCode::Numeric) throw;
            numeric_failure = true;
        }

        double valid_ppl = std::numeric_limits<double>::quiet_NaN();
        if (!numeric_failure)
            valid_ppl = perplexity(params, config, idf, valid_stream, schedule.mode).ppl;
        if (numeric_failure || !std::isfinite(valid_ppl)) {
            result.diverged = true;
            return result; // params/log reflect the last completed epoch
        }

        EpochRecord record;
        record.epoch = epoch;
        record.lr = lr;
        record.train_ppl = std::exp(loss_sum / static_cast<double>(position_count));
        record.valid_ppl = valid_ppl;
        record.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        result.log.push_back(record);
        result.params = params;
        result.completed_epochs = epoch;

        const bool is_best = result.best_epoch == 0 || valid_ppl < best_valid;
        if (is_best) {
            best_valid = valid_ppl;
            result.best_epoch = epoch;
        }
        if (on_epoch) on_epoch(record, params, is_best);
    }
    return result;
}

} // namespace ltlm
