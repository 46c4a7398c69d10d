#include "ltlm/model.hpp"

#include <cmath>

namespace ltlm {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec gate_preactivation(const Matrix& w, const Matrix& u, const Matrix& b,
                       const Vec& x, const Vec& h) {
    const std::size_t hidden = w.rows();
    Vec a(hidden);
    for (std::size_t r = 0; r < hidden; ++r)
        a[r] = b(r, 0) + dot(w.row(r), x.data(), x.size()) + dot(u.row(r), h.data(), h.size());
    return a;
}

// y += M^T * v  (v has M.rows() entries, y has M.cols())
void add_transpose_times(const Matrix& m, const Vec& v, Vec& y) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const double vr = v[r];
        if (vr == 0.0) continue;
        axpy(vr, m.row(r), y.data(), m.cols());
    }
}

// grad += v (outer) x
void add_outer(Matrix& grad, const Vec& v, const Vec& x) {
    for (std::size_t r = 0; r < grad.rows(); ++r)
        axpy(v[r], x.data(), grad.row(r), grad.cols());
}

} // namespace

void ModelConfig::validate() const {
    require(vocab_size > 0, ErrorCode::InvalidArgument, "config: vocab_size must be > 0");
    require(input_dim > 0, ErrorCode::InvalidArgument, "config: input_dim must be > 0");
    require(hidden_size > 0, ErrorCode::InvalidArgument, "config: hidden_size must be > 0");
    if (extension)
        require(context_dim > 0, ErrorCode::InvalidArgument,
                "config: extension requires context_dim > 0");
    else
        require(context_dim == 0, ErrorCode::InvalidArgument,
                "config: context_dim must be 0 without the extension");
    if (weighting == WeightingKind::Exponential)
        require(alpha > 1.0, ErrorCode::InvalidArgument, "config: alpha must be > 1");
    require(history > 0, ErrorCode::InvalidArgument, "config: history must be > 0");
}

ModelParameters ModelParameters::zeros(const ModelConfig& config) {
    config.validate();
    ModelParameters p;
    const std::size_t in = config.lstm_input_width();
    p.input_embeddings = Matrix(config.vocab_size, config.input_dim);
    if (config.extension) p.context_embeddings = Matrix(config.vocab_size, config.context_dim);
    for (std::size_t g = 0; g < 4; ++g) {
        p.w[g] = Matrix(config.hidden_size, in);
        p.u[g] = Matrix(config.hidden_size, config.hidden_size);
        p.b[g] = Matrix(config.hidden_size, 1);
    }
    p.w_y = Matrix(config.vocab_size, config.hidden_size);
    p.b_y = Matrix(config.vocab_size, 1);
    return p;
}

ModelParameters ModelParameters::init(const ModelConfig& config, Rng& rng, double init_range) {
    ModelParameters p = zeros(config);
    for (Matrix* t : p.tensors())
        for (double& v : t->data()) v = rng.uniform(-init_range, init_range);
    return p;
}

std::vector<Matrix*> ModelParameters::tensors() {
    std::vector<Matrix*> out;
    out.push_back(&input_embeddings);
    if (context_embeddings.size() > 0) out.push_back(&context_embeddings);
    for (std::size_t g = 0; g < 4; ++g) out.push_back(&w[g]);
    for (std::size_t g = 0; g < 4; ++g) out.push_back(&u[g]);
    for (std::size_t g = 0; g < 4; ++g) out.push_back(&b[g]);
    out.push_back(&w_y);
    out.push_back(&b_y);
    return out;
}

std::vector<const Matrix*> ModelParameters::tensors() const {
    auto mutable_this = const_cast<ModelParameters*>(this);
    std::vector<Matrix*> base = mutable_this->tensors();
    return std::vector<const Matrix*>(base.begin(), base.end());
}

std::vector<std::string> ModelParameters::tensor_names(const ModelConfig& config) {
    std::vector<std::string> names;
    names.push_back("input_embeddings");
    if (config.extension) names.push_back("context_embeddings");
    for (const char* g : {"i", "f", "o", "c"}) names.push_back(std::string("w_") + g);
    for (const char* g : {"i", "f", "o", "c"}) names.push_back(std::string("u_") + g);
    for (const char* g : {"i", "f", "o", "c"}) names.push_back(std::string("b_") + g);
    names.push_back("w_y");
    names.push_back("b_y");
    return names;
}

std::size_t ModelParameters::parameter_count() const {
    std::size_t n = 0;
    for (const Matrix* t : tensors()) n += t->size();
    return n;
}

bool ModelParameters::all_finite() const {
    for (const Matrix* t : tensors())
        if (!t->all_finite()) return false;
    return true;
}

LstmCellCache lstm_cell_forward(const Vec& x, const Vec& h_prev, const Vec& c_prev,
                                const ModelParameters& params) {
    const std::size_t hidden = params.u[kInput].rows();
    require(x.size() == params.w[kInput].cols(), ErrorCode::InvalidArgument,
            "lstm_cell_forward: input width mismatch");
    require(h_prev.size() == hidden && c_prev.size() == hidden, ErrorCode::InvalidArgument,
            "lstm_cell_forward: state width mismatch");

    LstmCellCache cc;
    cc.i = gate_preactivation(params.w[kInput], params.u[kInput], params.b[kInput], x, h_prev);
    cc.f = gate_preactivation(params.w[kForget], params.u[kForget], params.b[kForget], x, h_prev);
    cc.o = gate_preactivation(params.w[kOutput], params.u[kOutput], params.b[kOutput], x, h_prev);
    cc.g = gate_preactivation(params.w[kCandidate], params.u[kCandidate], params.b[kCandidate], x, h_prev);
    cc.c_new.resize(hidden);
    cc.tanh_c.resize(hidden);
    cc.h_new.resize(hidden);
    for (std::size_t r = 0; r < hidden; ++r) {
        cc.i[r] = sigmoid(cc.i[r]);
        cc.f[r] = sigmoid(cc.f[r]);
        cc.o[r] = sigmoid(cc.o[r]);
        cc.g[r] = std::tanh(cc.g[r]);
        cc.c_new[r] = cc.f[r] * c_prev[r] + cc.i[r] * cc.g[r];
        cc.tanh_c[r] = std::tanh(cc.c_new[r]);
        cc.h_new[r] = cc.o[r] * cc.tanh_c[r];
        if (!std::isfinite(cc.c_new[r]) || !std::isfinite(cc.h_new[r]))
            fail(ErrorCode::Numeric, "lstm_cell_forward: non-finite activation at unit " +
                                         std::to_string(r));
    }
    return cc;
}

double ModelCache::mean_cross_entropy(const std::vector<std::int32_t>& targets) const {
    require(targets.size() == probs.size(), ErrorCode::InvalidArgument,
            "mean_cross_entropy: target count mismatch");
    double sum = 0.0;
    for (std::size_t idx = 0; idx < probs.size(); ++idx)
        sum += cross_entropy(probs[idx], static_cast<std::size_t>(targets[idx]));
    return sum / static_cast<double>(probs.size());
}

void model_forward(const BatchWindow& window, std::vector<LstmState>& states,
                   std::vector<ContextBuffer>& buffers, const ModelParameters& params,
                   const ModelConfig& config, const WeightingScheme& scheme,
                   const ForwardOptions& opts, ModelCache* cache, Matrix* logits_out) {
    const std::size_t steps = window.steps;
    const std::size_t batch = window.batch_size;
    const std::size_t in_width = config.lstm_input_width();
    const std::size_t hidden = config.hidden_size;
    const std::size_t vocab = config.vocab_size;

    require(states.size() == batch, ErrorCode::InvalidArgument, "model_forward: state count != batch");
    if (config.extension)
        require(buffers.size() == batch, ErrorCode::InvalidArgument,
                "model_forward: buffer count != batch");
    const bool dropout_on = opts.train_mode && opts.dropout_p > 0.0;
    if (dropout_on)
        require(opts.rng != nullptr, ErrorCode::InvalidArgument,
                "model_forward: dropout requires an rng");

    if (cache) {
        cache->steps = steps;
        cache->batch = batch;
        cache->in_width = in_width;
        cache->inputs = window.inputs;
        cache->state_reset = window.state_reset;
        const std::size_t total = steps * batch;
        cache->x.assign(total, Vec());
        cache->h_prev.assign(total, Vec());
        cache->c_prev.assign(total, Vec());
        cache->gate_i.assign(total, Vec());
        cache->gate_f.assign(total, Vec());
        cache->gate_o.assign(total, Vec());
        cache->gate_g.assign(total, Vec());
        cache->tanh_c.assign(total, Vec());
        cache->h_drop.assign(total, Vec());
        cache->probs.assign(total, Vec());
        cache->buffer_snapshot.assign(config.extension ? total : 0, {});
        cache->input_mask.assign(steps, Vec());
        cache->output_mask.assign(steps, Vec());
    }
    if (logits_out) *logits_out = Matrix(steps * batch, vocab);

    for (std::size_t step = 0; step < steps; ++step) {
        Vec in_mask, out_mask;
        if (dropout_on) {
            in_mask = dropout_mask(in_width, opts.dropout_p, *opts.rng);
            out_mask = dropout_mask(hidden, opts.dropout_p, *opts.rng);
        }
        if (cache) {
            cache->input_mask[step] = in_mask;
            cache->output_mask[step] = out_mask;
        }
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t idx = step * batch + b;
            if (window.state_reset[idx]) states[b].reset();
            const std::int32_t tok = window.inputs[idx];
            require(tok >= 0 && static_cast<std::size_t>(tok) < vocab, ErrorCode::InvalidArgument,
                    "model_forward: token id out of range");

            Vec x(in_width);
            const double* e = params.input_embeddings.row(static_cast<std::size_t>(tok));
            std::copy(e, e + config.input_dim, x.begin());
            if (config.extension) {
                if (window.doc_reset[idx]) buffers[b].clear();
                buffers[b].push(tok);
                Vec d = context_vector(buffers[b], params.context_embeddings, scheme);
                std::copy(d.begin(), d.end(), x.begin() + config.input_dim);
                if (cache) cache->buffer_snapshot[idx] = buffers[b].snapshot();
            }
            if (dropout_on)
                for (std::size_t j = 0; j < in_width; ++j) x[j] *= in_mask[j];

            LstmCellCache cc = lstm_cell_forward(x, states[b].h, states[b].c, params);

            Vec h_drop = cc.h_new;
            if (dropout_on)
                for (std::size_t j = 0; j < hidden; ++j) h_drop[j] *= out_mask[j];

            Vec logits(vocab);
            for (std::size_t r = 0; r < vocab; ++r)
                logits[r] = params.b_y(r, 0) + dot(params.w_y.row(r), h_drop.data(), hidden);
            if (logits_out)
                std::copy(logits.begin(), logits.end(), logits_out->row(idx));

            if (cache) {
                cache->h_prev[idx] = states[b].h;
                cache->c_prev[idx] = states[b].c;
                cache->x[idx] = std::move(x);
                cache->gate_i[idx] = std::move(cc.i);
                cache->gate_f[idx] = std::move(cc.f);
                cache->gate_o[idx] = std::move(cc.o);
                cache->gate_g[idx] = std::move(cc.g);
                cache->tanh_c[idx] = std::move(cc.tanh_c);
                cache->h_drop[idx] = h_drop;
                softmax_inplace(logits.data(), vocab);
                cache->probs[idx] = std::move(logits);
            }
            states[b].h = std::move(cc.h_new);
            states[b].c = std::move(cc.c_new);
        }
    }
}

ModelParameters model_backward(const ModelCache& cache, const std::vector<std::int32_t>& targets,
                               const ModelParameters& params, const ModelConfig& config,
                               const WeightingScheme& scheme) {
    const std::size_t steps = cache.steps;
    const std::size_t batch = cache.batch;
    const std::size_t hidden = config.hidden_size;
    const std::size_t vocab = config.vocab_size;
    require(targets.size() == steps * batch, ErrorCode::InvalidArgument,
            "model_backward: target count does not match cache");

    ModelParameters grads = ModelParameters::zeros(config);
    const double inv = 1.0 / static_cast<double>(steps * batch);
    const bool dropout_on = !cache.input_mask.empty() && !cache.input_mask[0].empty();

    std::vector<Vec> dh_next(batch, Vec(hidden, 0.0));
    std::vector<Vec> dc_next(batch, Vec(hidden, 0.0));

    Vec dlogits(vocab), dh_drop(hidden), dh(hidden), dc(hidden);
    Vec da_i(hidden), da_f(hidden), da_o(hidden), da_g(hidden);

    for (std::size_t step = steps; step-- > 0;) {
        for (std::size_t b = 0; b < batch; ++b) {
            const std::size_t idx = step * batch + b;
            const auto target = static_cast<std::size_t>(targets[idx]);
            require(target < vocab, ErrorCode::InvalidArgument,
                    "model_backward: target id out of range");

            const Vec& probs = cache.probs[idx];
            for (std::size_t r = 0; r < vocab; ++r) dlogits[r] = probs[r] * inv;
            dlogits[target] -= inv;

            add_outer(grads.w_y, dlogits, cache.h_drop[idx]);
            for (std::size_t r = 0; r < vocab; ++r) grads.b_y(r, 0) += dlogits[r];

            std::fill(dh_drop.begin(), dh_drop.end(), 0.0);
            add_transpose_times(params.w_y, dlogits, dh_drop);

            for (std::size_t r = 0; r < hidden; ++r) {
                const double mask = dropout_on ? cache.output_mask[step][r] : 1.0;
                dh[r] = dh_drop[r] * mask + dh_next[b][r];
                dc[r] = dc_next[b][r];
            }

            const Vec& gi = cache.gate_i[idx];
            const Vec& gf = cache.gate_f[idx];
            const Vec& go = cache.gate_o[idx];
            const Vec& gg = cache.gate_g[idx];
            const Vec& tc = cache.tanh_c[idx];
            const Vec& c_prev = cache.c_prev[idx];

            for (std::size_t r = 0; r < hidden; ++r) {
                const double d_o = dh[r] * tc[r];
                dc[r] += dh[r] * go[r] * (1.0 - tc[r] * tc[r]);
                const double d_i = dc[r] * gg[r];
                const double d_f = dc[r] * c_prev[r];
                const double d_g = dc[r] * gi[r];
                da_i[r] = d_i * gi[r] * (1.0 - gi[r]);
                da_f[r] = d_f * gf[r] * (1.0 - gf[r]);
                da_o[r] = d_o * go[r] * (1.0 - go[r]);
                da_g[r] = d_g * (1.0 - gg[r] * gg[r]);
                dc[r] *= gf[r]; // becomes dc_prev
            }

            const Vec& x = cache.x[idx];
            Vec dx(cache.in_width, 0.0);
            Vec dh_prev(hidden, 0.0);
            const std::array<const Vec*, 4> das = {&da_i, &da_f, &da_o, &da_g};
            for (std::size_t g = 0; g < 4; ++g) {
                add_outer(grads.w[g], *das[g], x);
                add_outer(grads.u[g], *das[g], cache.h_prev[idx]);
                for (std::size_t r = 0; r < hidden; ++r) grads.b[g](r, 0) += (*das[g])[r];
                add_transpose_times(params.w[g], *das[g], dx);
                add_transpose_times(params.u[g], *das[g], dh_prev);
            }

            if (dropout_on)
                for (std::size_t j = 0; j < cache.in_width; ++j) dx[j] *= cache.input_mask[step][j];

            const auto tok = static_cast<std::size_t>(cache.inputs[idx]);
            axpy(1.0, dx.data(), grads.input_embeddings.row(tok), config.input_dim);
            if (config.extension) {
                Vec grad_d(dx.begin() + static_cast<std::ptrdiff_t>(config.input_dim), dx.end());
                context_vector_backward(grad_d, cache.buffer_snapshot[idx], scheme,
                                        grads.context_embeddings);
            }

            if (cache.state_reset[idx]) {
                std::fill(dh_next[b].begin(), dh_next[b].end(), 0.0);
                std::fill(dc_next[b].begin(), dc_next[b].end(), 0.0);
            } else {
                dh_next[b] = dh_prev;
                dc_next[b] = dc;
            }
        }
    }
    return grads;
}

double sgd_step(ModelParameters& params, ModelParameters& grads, double lr, double clip_norm) {
    require(lr > 0.0, ErrorCode::InvalidArgument, "sgd_step: lr must be > 0");
    std::vector<Matrix*> gs = grads.tensors();
    const double scale = clip_global_norm(gs, clip_norm);
    std::vector<Matrix*> ps = params.tensors();
    require(ps.size() == gs.size(), ErrorCode::InvalidArgument, "sgd_step: shape mismatch");
    for (std::size_t t = 0; t < ps.size(); ++t) {
        auto& pd = ps[t]->data();
        const auto& gd = gs[t]->data();
        require(pd.size() == gd.size(), ErrorCode::InvalidArgument, "sgd_step: shape mismatch");
        for (std::size_t j = 0; j < pd.size(); ++j) pd[j] -= lr * gd[j];
        if (!ps[t]->all_finite())
            fail(ErrorCode::Numeric, "sgd_step: non-finite parameter after update");
    }
    return scale;
}

WeightingScheme make_scheme(const ModelConfig& config, const IdfTable* idf) {
    switch (config.weighting) {
        case WeightingKind::Uniform: return WeightingScheme::uniform();
        case WeightingKind::Exponential: return WeightingScheme::exponential(config.alpha);
        case WeightingKind::WordDependent:
            require(idf != nullptr, ErrorCode::InvalidArgument,
                    "word-dependent weighting requires an idf table");
            require(idf->weights.size() == config.vocab_size, ErrorCode::InvalidArgument,
                    "idf table does not cover the vocabulary");
            return WeightingScheme::word_dependent(*idf);
    }
    fail(ErrorCode::Internal, "unknown weighting kind");
}

} // namespace ltlm
