#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "ltlm/checkpoint.hpp"
#include "ltlm/model.hpp"
#include "ltlm/train.hpp"

using namespace ltlm;

namespace {

ModelConfig tiny_config(bool extension) {
    ModelConfig config;
    config.vocab_size = 5;
    config.input_dim = 3;
    config.context_dim = extension ? 3 : 0;
    config.hidden_size = 4;
    config.extension = extension;
    config.weighting = WeightingKind::Uniform;
    config.history = 3;
    return config;
}

// Scalar-loop LSTM reference written independently of the library kernels:
// no shared helpers, plain index arithmetic only.
struct ScalarLstmResult {
    std::vector<double> h, c;
};

ScalarLstmResult scalar_lstm_reference(const std::vector<double>& x,
                                       const std::vector<double>& h_prev,
                                       const std::vector<double>& c_prev,
                                       const ModelParameters& p) {
    const std::size_t hidden = h_prev.size();
    const std::size_t in = x.size();
    ScalarLstmResult out;
    out.h.resize(hidden);
    out.c.resize(hidden);
    for (std::size_t r = 0; r < hidden; ++r) {
        double pre[4];
        const Matrix* ws[4] = {&p.w[0], &p.w[1], &p.w[2], &p.w[3]};
        const Matrix* us[4] = {&p.u[0], &p.u[1], &p.u[2], &p.u[3]};
        const Matrix* bs[4] = {&p.b[0], &p.b[1], &p.b[2], &p.b[3]};
        for (int g = 0; g < 4; ++g) {
            double acc = (*bs[g])(r, 0);
            for (std::size_t j = 0; j < in; ++j) acc += (*ws[g])(r, j) * x[j];
            for (std::size_t j = 0; j < hidden; ++j) acc += (*us[g])(r, j) * h_prev[j];
            pre[g] = acc;
        }
        const double gi = 1.0 / (1.0 + std::exp(-pre[0]));
        const double gf = 1.0 / (1.0 + std::exp(-pre[1]));
        const double go = 1.0 / (1.0 + std::exp(-pre[2]));
        const double gc = std::tanh(pre[3]);
        out.c[r] = gf * c_prev[r] + gi * gc;
        out.h[r] = go * std::tanh(out.c[r]);
    }
    return out;
}

BatchWindow single_stream_window(const std::vector<std::int32_t>& tokens) {
    BatchWindow w;
    w.steps = tokens.size() - 1;
    w.batch_size = 1;
    for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
        w.inputs.push_back(tokens[t]);
        w.targets.push_back(tokens[t + 1]);
        w.state_reset.push_back(false);
        w.doc_reset.push_back(false);
    }
    return w;
}

} // namespace

TEST_CASE("lstm cell with all-zero parameters") {
    ModelConfig config = tiny_config(false);
    ModelParameters p = ModelParameters::zeros(config);

    // zero state, zero input -> fixed point at zero
    Vec x(3, 0.0), h(4, 0.0), c(4, 0.0);
    LstmCellCache cc = lstm_cell_forward(x, h, c, p);
    for (double v : cc.h_new) CHECK(v == 0.0);
    for (double v : cc.c_new) CHECK(v == 0.0);

    // nonzero cell: gates sit at 0.5, candidate at 0, so c' = 0.5 c
    Vec c2 = {0.4, -0.8, 1.2, 0.0};
    LstmCellCache cc2 = lstm_cell_forward(x, h, c2, p);
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(cc2.i[r] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(cc2.f[r] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(cc2.o[r] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(cc2.g[r] == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(cc2.c_new[r] == doctest::Approx(0.5 * c2[r]).epsilon(1e-15));
        CHECK(cc2.h_new[r] == doctest::Approx(0.5 * std::tanh(0.5 * c2[r])).epsilon(1e-14));
    }
}

TEST_CASE("lstm cell matches the scalar reference on random instances") {
    Rng rng(314);
    ModelConfig config;
    config.vocab_size = 4;
    config.input_dim = 3;
    config.hidden_size = 3;
    for (int trial = 0; trial < 100; ++trial) {
        ModelParameters p = ModelParameters::init(config, rng, 0.5);
        Vec x(3), h(3), c(3);
        for (double& v : x) v = rng.uniform(-2.0, 2.0);
        for (double& v : h) v = rng.uniform(-1.0, 1.0);
        for (double& v : c) v = rng.uniform(-2.0, 2.0);
        LstmCellCache got = lstm_cell_forward(x, h, c, p);
        ScalarLstmResult want = scalar_lstm_reference(x, h, c, p);
        for (std::size_t r = 0; r < 3; ++r) {
            CHECK(std::abs(got.h_new[r] - want.h[r]) <= 1e-12);
            CHECK(std::abs(got.c_new[r] - want.c[r]) <= 1e-12);
        }
    }
}

TEST_CASE("lstm cell rejects non-finite activations") {
    ModelConfig config = tiny_config(false);
    ModelParameters p = ModelParameters::zeros(config);
    Vec x(3, 0.0), h(4, 0.0);
    Vec c = {std::numeric_limits<double>::infinity(), 0, 0, 0};
    CHECK_THROWS_AS(lstm_cell_forward(x, h, c, p), Error);
}

TEST_CASE("model_forward matches a hand-unrolled two-step computation") {
    // B=1, steps=2, 3-word vocab, fixed tiny parameters
    ModelConfig config;
    config.vocab_size = 3;
    config.input_dim = 2;
    config.hidden_size = 2;
    Rng rng(21);
    ModelParameters p = ModelParameters::init(config, rng, 0.4);

    BatchWindow w = single_stream_window({0, 2, 1});
    std::vector<LstmState> states(1, LstmState(2));
    std::vector<ContextBuffer> buffers;
    Matrix logits;
    model_forward(w, states, buffers, p, config, WeightingScheme::uniform(), {}, nullptr,
                  &logits);

    // hand unroll via the independent scalar reference
    Vec h(2, 0.0), c(2, 0.0);
    for (std::size_t step = 0; step < 2; ++step) {
        const auto tok = static_cast<std::size_t>(w.input(step, 0));
        Vec x = {p.input_embeddings(tok, 0), p.input_embeddings(tok, 1)};
        ScalarLstmResult r = scalar_lstm_reference(x, h, c, p);
        h = r.h;
        c = r.c;
        for (std::size_t row = 0; row < 3; ++row) {
            double expect = p.b_y(row, 0);
            for (std::size_t j = 0; j < 2; ++j) expect += p.w_y(row, j) * h[j];
            CHECK(std::abs(logits(step, row) - expect) <= 1e-10);
        }
    }
}

TEST_CASE("extension config validation") {
    ModelConfig bad = tiny_config(true);
    bad.context_dim = 0;
    CHECK_THROWS_AS(bad.validate(), Error);

    ModelConfig vanilla = tiny_config(false);
    vanilla.context_dim = 2;
    CHECK_THROWS_AS(vanilla.validate(), Error);
}

TEST_CASE("extended model with zeroed d-block weights equals the vanilla model") {
    Rng rng(5150);
    ModelConfig ext_config = tiny_config(true);
    ModelParameters ext = ModelParameters::init(ext_config, rng, 0.3);

    ModelConfig van_config = tiny_config(false);
    ModelParameters van = ModelParameters::zeros(van_config);
    van.input_embeddings = ext.input_embeddings;
    van.w_y = ext.w_y;
    van.b_y = ext.b_y;
    for (std::size_t g = 0; g < 4; ++g) {
        van.u[g] = ext.u[g];
        van.b[g] = ext.b[g];
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t j = 0; j < 3; ++j) van.w[g](r, j) = ext.w[g](r, j);
    }

    const std::vector<std::int32_t> tokens = {0, 3, 1, 4, 2, 0, 1};
    BatchWindow w = single_stream_window(tokens);

    auto run = [&](const ModelConfig& config, const ModelParameters& params) {
        std::vector<LstmState> states(1, LstmState(config.hidden_size));
        std::vector<ContextBuffer> buffers;
        if (config.extension) buffers.assign(1, ContextBuffer(config.history));
        Matrix logits;
        model_forward(w, states, buffers, params, config, WeightingScheme::uniform(), {},
                      nullptr, &logits);
        return logits;
    };

    // d-block weights nonzero: outputs must differ
    Matrix with_context = run(ext_config, ext);
    Matrix vanilla = run(van_config, van);
    bool all_equal = true;
    for (std::size_t i = 0; i < vanilla.size(); ++i)
        all_equal = all_equal && with_context.data()[i] == vanilla.data()[i];
    CHECK_FALSE(all_equal);

    // zero the input-weight columns that see d_t: exact equality
    for (std::size_t g = 0; g < 4; ++g)
        for (std::size_t r = 0; r < 4; ++r)
            for (std::size_t j = 3; j < 6; ++j) ext.w[g](r, j) = 0.0;
    Matrix stripped = run(ext_config, ext);
    for (std::size_t i = 0; i < vanilla.size(); ++i)
        CHECK(stripped.data()[i] == vanilla.data()[i]);
}

TEST_CASE("state reset makes the step independent of prior tokens") {
    Rng rng(4321);
    ModelConfig config = tiny_config(false);
    ModelParameters p = ModelParameters::init(config, rng, 0.4);

    BatchWindow w = single_stream_window({0, 1, 2, 3, 4, 0});
    w.state_reset[3] = true;

    std::vector<LstmState> states(1, LstmState(4));
    std::vector<ContextBuffer> buffers;
    Matrix logits;
    model_forward(w, states, buffers, p, config, WeightingScheme::uniform(), {}, nullptr,
                  &logits);

    // fresh run starting at the reset position
    BatchWindow tail = single_stream_window({3, 4, 0});
    std::vector<LstmState> fresh(1, LstmState(4));
    Matrix tail_logits;
    model_forward(tail, fresh, buffers, p, config, WeightingScheme::uniform(), {}, nullptr,
                  &tail_logits);

    for (std::size_t step = 0; step < 2; ++step)
        for (std::size_t v = 0; v < 5; ++v)
            CHECK(logits(3 + step, v) == tail_logits(step, v));
}

TEST_CASE("model_backward near a perfect prediction has negligible gradient") {
    ModelConfig config;
    config.vocab_size = 3;
    config.input_dim = 2;
    config.hidden_size = 2;
    ModelParameters p = ModelParameters::zeros(config);
    // huge bias on the target makes the model one-hot within the floor
    p.b_y(1, 0) = 60.0;

    BatchWindow w = single_stream_window({0, 1, 1});
    std::vector<LstmState> states(1, LstmState(2));
    std::vector<ContextBuffer> buffers;
    ModelCache cache;
    model_forward(w, states, buffers, p, config, WeightingScheme::uniform(), {}, &cache, nullptr);
    CHECK(cache.mean_cross_entropy(w.targets) < 1e-9);

    ModelParameters grads =
        model_backward(cache, w.targets, p, config, WeightingScheme::uniform());
    double norm = 0.0;
    for (const Matrix* g : grads.tensors())
        for (double v : g->data()) norm += v * v;
    CHECK(std::sqrt(norm) < 1e-6);
}

TEST_CASE("doubling the loss scale doubles every gradient entry") {
    Rng rng(99);
    ModelConfig config = tiny_config(true);
    ModelParameters p = ModelParameters::init(config, rng, 0.2);
    const WeightingScheme scheme = WeightingScheme::uniform();

    BatchWindow w = single_stream_window({0, 1, 2, 3});
    auto run = [&](const ModelParameters& params) {
        std::vector<LstmState> states(1, LstmState(4));
        std::vector<ContextBuffer> buffers(1, ContextBuffer(3));
        ModelCache cache;
        model_forward(w, states, buffers, params, config, scheme, {}, &cache, nullptr);
        return cache;
    };
    ModelParameters analytic = model_backward(run(p), w.targets, p, config, scheme);

    // finite differences of the doubled loss against 2x the analytic gradient
    std::vector<Matrix*> tensors = p.tensors();
    std::vector<Matrix*> grads = analytic.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        auto doubled = [&](const Vec& theta) {
            ModelParameters probe = p;
            probe.tensors()[t]->data() = theta;
            return 2.0 * run(probe).mean_cross_entropy(w.targets);
        };
        Vec numeric = finite_difference_gradient(doubled, tensors[t]->data(), 1e-5);
        for (std::size_t j = 0; j < numeric.size(); ++j) {
            const double twice = 2.0 * grads[t]->data()[j];
            const double denom = std::max({std::abs(numeric[j]), std::abs(twice), 1e-5});
            CHECK(std::abs(numeric[j] - twice) / denom < 1e-4);
        }
    }
}

TEST_CASE("sgd_step") {
    ModelConfig config;
    config.vocab_size = 1;
    config.input_dim = 1;
    config.hidden_size = 1;
    ModelParameters p = ModelParameters::zeros(config);
    p.input_embeddings(0, 0) = 1.0;

    SUBCASE("zero gradient is a no-op") {
        ModelParameters g = ModelParameters::zeros(config);
        sgd_step(p, g, 1.0, 5.0);
        CHECK(p.input_embeddings(0, 0) == 1.0);
    }

    SUBCASE("plain arithmetic") {
        ModelParameters g = ModelParameters::zeros(config);
        g.input_embeddings(0, 0) = 0.2;
        sgd_step(p, g, 1.0, 5.0);
        CHECK(p.input_embeddings(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
    }

    SUBCASE("clipping composes with the update") {
        ModelParameters g = ModelParameters::zeros(config);
        g.input_embeddings(0, 0) = 10.0; // norm 10, clip 5 -> effective 5
        const double scale = sgd_step(p, g, 1.0, 5.0);
        CHECK(scale == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(p.input_embeddings(0, 0) == doctest::Approx(1.0 - 5.0).epsilon(1e-12));
    }

    SUBCASE("non-finite update aborts") {
        ModelParameters g = ModelParameters::zeros(config);
        g.input_embeddings(0, 0) = std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(sgd_step(p, g, 1.0, 5.0), Error);
    }
}

TEST_CASE("learning rate schedule closed form") {
    TrainingSchedule schedule;
    schedule.initial_lr = 1.0;
    schedule.decay_rate = 0.8;
    schedule.decay_start_epoch = 6;
    const double expected[] = {1, 1, 1, 1, 1, 0.8, 0.64, 0.512, 0.4096, 0.32768};
    for (std::size_t epoch = 1; epoch <= 10; ++epoch)
        CHECK(schedule.learning_rate_for(epoch) ==
              doctest::Approx(expected[epoch - 1]).epsilon(1e-12));
}

TEST_CASE("parameter count matches the closed-form formula") {
    // small WikiText-2 shape: embedding 100, hidden 200
    ModelConfig config;
    config.vocab_size = 33000;
    config.input_dim = 100;
    config.hidden_size = 200;
    ModelParameters p = ModelParameters::zeros(config);
    const std::size_t v = 33000, e = 100, h = 200;
    CHECK(p.parameter_count() == 4 * h * (e + h) + 4 * h + v * e + h * v + v);

    ModelConfig ext = config;
    ext.extension = true;
    ext.context_dim = 100;
    ModelParameters pe = ModelParameters::zeros(ext);
    CHECK(pe.parameter_count() ==
          4 * h * (e + 100 + h) + 4 * h + 2 * (v * e) + h * v + v);
}

TEST_CASE("checkpoint round trip is bitwise exact") {
    Rng rng(777);
    Checkpoint cp;
    cp.config = tiny_config(true);
    cp.config.weighting = WeightingKind::WordDependent;
    cp.params = ModelParameters::init(cp.config, rng, 0.05);
    cp.meta.vocab_hash = 0xDEADBEEFCAFEF00DULL;
    cp.meta.epoch = 7;
    cp.meta.lr = 0.64;
    cp.meta.seed = 123;
    IdfTable idf;
    idf.document_count = 9;
    idf.weights.resize(5);
    for (double& w : idf.weights) w = rng.uniform(0.0, 2.0);
    cp.idf = idf;

    auto path = std::filesystem::temp_directory_path() / "ltlm_test_checkpoint.ckpt";
    save_checkpoint(path.string(), cp);
    Checkpoint loaded = load_checkpoint(path.string());

    CHECK(loaded.config.vocab_size == cp.config.vocab_size);
    CHECK(loaded.config.extension == cp.config.extension);
    CHECK(loaded.config.weighting == cp.config.weighting);
    CHECK(loaded.config.alpha == cp.config.alpha);
    CHECK(loaded.config.history == cp.config.history);
    CHECK(loaded.meta.vocab_hash == cp.meta.vocab_hash);
    CHECK(loaded.meta.epoch == cp.meta.epoch);
    CHECK(loaded.meta.lr == cp.meta.lr);
    CHECK(loaded.meta.seed == cp.meta.seed);

    std::vector<Matrix*> a = cp.params.tensors();
    std::vector<Matrix*> b = loaded.params.tensors();
    REQUIRE(a.size() == b.size());
    for (std::size_t t = 0; t < a.size(); ++t) CHECK(*a[t] == *b[t]);
    REQUIRE(loaded.idf.has_value());
    CHECK(loaded.idf->weights == idf.weights);
    CHECK(loaded.idf->document_count == 9);
    std::filesystem::remove(path);
}

TEST_CASE("checkpoint corruption and versioning are distinct errors") {
    Rng rng(12);
    Checkpoint cp;
    cp.config = tiny_config(false);
    cp.params = ModelParameters::init(cp.config, rng, 0.05);
    auto path = std::filesystem::temp_directory_path() / "ltlm_test_corrupt.ckpt";
    save_checkpoint(path.string(), cp);

    auto read_bytes = [&] {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    auto write_bytes = [&](const std::string& bytes) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << bytes;
    };
    const std::string original = read_bytes();

    SUBCASE("flipped payload byte -> checksum error") {
        std::string corrupted = original;
        corrupted[corrupted.size() / 2] =
            static_cast<char>(corrupted[corrupted.size() / 2] ^ 0x40);
        write_bytes(corrupted);
        try {
            load_checkpoint(path.string());
            FAIL("expected checksum error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Checksum);
        }
    }

    SUBCASE("truncated file -> truncation error") {
        write_bytes(original.substr(0, original.size() - 40));
        try {
            load_checkpoint(path.string());
            FAIL("expected truncation error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Truncated);
        }
    }

    SUBCASE("future format version -> version error") {
        std::string future = original;
        future[4] = 99; // version field, little-endian low byte
        write_bytes(future);
        try {
            load_checkpoint(path.string());
            FAIL("expected version error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Version);
        }
    }

    SUBCASE("bad magic -> format error") {
        std::string junk = original;
        junk[0] = 'X';
        write_bytes(junk);
        try {
            load_checkpoint(path.string());
            FAIL("expected format error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Format);
        }
    }

    std::filesystem::remove(path);
}

TEST_CASE("analytic gradients match finite differences on a vanilla model") {
    // the extended variant is covered by the acceptance gradient suite; this
    // pins the vanilla topology
    Rng rng(31415);
    ModelConfig config = tiny_config(false);
    ModelParameters params = ModelParameters::init(config, rng, 0.05);
    const WeightingScheme scheme = WeightingScheme::uniform();

    BatchWindow w;
    w.steps = 3;
    w.batch_size = 2;
    w.inputs = {0, 1, 2, 3, 4, 0};
    w.targets = {1, 2, 3, 4, 0, 1};
    w.state_reset.assign(6, false);
    w.doc_reset.assign(6, false);
    w.state_reset[3] = true;

    auto run = [&](const ModelParameters& p) {
        std::vector<LstmState> states(2, LstmState(4));
        std::vector<ContextBuffer> buffers;
        ModelCache cache;
        model_forward(w, states, buffers, p, config, scheme, {}, &cache, nullptr);
        return cache;
    };
    ModelCache cache = run(params);
    ModelParameters analytic = model_backward(cache, w.targets, params, config, scheme);

    std::vector<Matrix*> tensors = params.tensors();
    std::vector<Matrix*> grads = analytic.tensors();
    for (std::size_t t = 0; t < tensors.size(); ++t) {
        Vec flat = tensors[t]->data();
        auto loss = [&](const Vec& theta) {
            ModelParameters probe = params;
            probe.tensors()[t]->data() = theta;
            return run(probe).mean_cross_entropy(w.targets);
        };
        Vec numeric = finite_difference_gradient(loss, flat, 1e-5);
        for (std::size_t j = 0; j < numeric.size(); ++j) {
            const double denom =
                std::max({std::abs(numeric[j]), std::abs(grads[t]->data()[j]), 1e-5});
            CHECK(std::abs(numeric[j] - grads[t]->data()[j]) / denom < 1e-4);
        }
    }
}
