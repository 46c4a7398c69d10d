#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ltlm/batches.hpp"
#include "ltlm/context.hpp"
#include "ltlm/matrix.hpp"
#include "ltlm/numerics.hpp"
#include "ltlm/rng.hpp"

namespace ltlm {

struct ModelConfig {
    std::size_t vocab_size = 0;
    std::size_t input_dim = 0;    // E, input embedding width
    std::size_t context_dim = 0;  // D, context embedding width (0 when vanilla)
    std::size_t hidden_size = 0;  // H
    bool extension = false;
    WeightingKind weighting = WeightingKind::Uniform;
    double alpha = kDefaultAlpha;
    std::size_t history = kDefaultHistory; // K
    Precision precision = Precision::Float64;

    std::size_t lstm_input_width() const {
        return input_dim + (extension ? context_dim : 0);
    }
    void validate() const;
};

// Gate order used throughout: input, forget, output, candidate.
enum Gate : std::size_t { kInput = 0, kForget = 1, kOutput = 2, kCandidate = 3 };

// The complete trainable state. The two embedding tables of an extended model
// never share weights. Doubles as the gradient container (same shapes, same
// iteration order).
struct ModelParameters {
    Matrix input_embeddings;   // V x E
    Matrix context_embeddings; // V x D, empty when vanilla
    std::array<Matrix, 4> w;   // H x lstm_input_width
    std::array<Matrix, 4> u;   // H x H
    std::array<Matrix, 4> b;   // H x 1
    Matrix w_y;                // V x H
    Matrix b_y;                // V x 1

    static ModelParameters zeros(const ModelConfig& config);
    // Everything uniform in [-init_range, init_range), biases included.
    static ModelParameters init(const ModelConfig& config, Rng& rng, double init_range);

    std::vector<Matrix*> tensors();
    std::vector<const Matrix*> tensors() const;
    // Stable tensor names, aligned with tensors(); used by checkpoints and
    // the gradient check report.
    static std::vector<std::string> tensor_names(const ModelConfig& config);

    std::size_t parameter_count() const;
    bool all_finite() const;
};

struct LstmState {
    Vec h, c;
    explicit LstmState(std::size_t hidden) : h(hidden, 0.0), c(hidden, 0.0) {}
    void reset() {
        std::fill(h.begin(), h.end(), 0.0);
        std::fill(c.begin(), c.end(), 0.0);
    }
};

struct LstmCellCache {
    Vec i, f, o, g; // post-activation gates
    Vec c_new, tanh_c, h_new;
};

// One LSTM step: i,f,o = sigmoid(Wx + Uh + b), g = tanh(...),
// c' = f.c + i.g, h' = o.tanh(c'). Throws on non-finite activations.
LstmCellCache lstm_cell_forward(const Vec& x, const Vec& h_prev, const Vec& c_prev,
                                const ModelParameters& params);

// Everything the backward pass needs, indexed [step * batch + stream].
struct ModelCache {
    std::size_t steps = 0, batch = 0, in_width = 0;
    std::vector<std::int32_t> inputs;
    std::vector<bool> state_reset;
    std::vector<Vec> x;       // LSTM input after dropout
    std::vector<Vec> h_prev, c_prev; // incoming state after any reset
    std::vector<Vec> gate_i, gate_f, gate_o, gate_g, tanh_c;
    std::vector<Vec> h_drop;  // LSTM output after dropout
    std::vector<Vec> probs;   // softmax over logits
    std::vector<std::vector<std::int32_t>> buffer_snapshot; // extended models only
    std::vector<Vec> input_mask, output_mask; // per step, shared across streams

    double mean_cross_entropy(const std::vector<std::int32_t>& targets) const;
};

struct ForwardOptions {
    bool train_mode = false;
    double dropout_p = 0.0;
    Rng* rng = nullptr; // required in train mode with dropout_p > 0
};

// Runs one unroll window over all streams. States are reset where the window
// says so; context buffers get the input word pushed before d_t is formed, so
// the current word is always part of its own history. Dropout (train mode) is
// applied to the LSTM input (the [e_t ; d_t] concatenation for extended
// models) and to the LSTM output, one shared mask per unroll step.
void model_forward(const BatchWindow& window, std::vector<LstmState>& states,
                   std::vector<ContextBuffer>& buffers, const ModelParameters& params,
                   const ModelConfig& config, const WeightingScheme& scheme,
                   const ForwardOptions& opts, ModelCache* cache, Matrix* logits_out);

// Gradients of the window's mean cross-entropy. Truncated BPTT: nothing flows
// into the state that entered the window or across reset positions.
ModelParameters model_backward(const ModelCache& cache, const std::vector<std::int32_t>& targets,
                               const ModelParameters& params, const ModelConfig& config,
                               const WeightingScheme& scheme);

// Global-norm clip followed by params -= lr * grads. Returns the clip scale.
// Throws if any parameter goes non-finite.
double sgd_step(ModelParameters& params, ModelParameters& grads, double lr, double clip_norm);

WeightingScheme make_scheme(const ModelConfig& config, const IdfTable* idf);

} // namespace ltlm
