#include "ltlm.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "ltlm/checkpoint.hpp"
#include "ltlm/corpus.hpp"
#include "ltlm/embeddings.hpp"
#include "ltlm/eval.hpp"
#include "ltlm/idf.hpp"
#include "ltlm/numerics.hpp"
#include "ltlm/train.hpp"

struct ltlm_vocab {
    ltlm::Vocabulary impl;
};

struct ltlm_corpus {
    ltlm::TokenStream stream;
    std::size_t word_count = 0;
    std::size_t oov_count = 0;
    std::uint64_t vocab_hash = 0;
};

struct ltlm_idf {
    ltlm::IdfTable impl;
};

struct ltlm_model {
    ltlm::Checkpoint impl;
};

struct ltlm_probe_result {
    std::vector<std::string> words;
    std::vector<double> similarities;
};

namespace {

thread_local std::string g_last_error;

ltlm_status to_status(ltlm::ErrorCode code) {
    using ltlm::ErrorCode;
    switch (code) {
        case ErrorCode::InvalidArgument: return LTLM_ERR_INVALID_ARGUMENT;
        case ErrorCode::Io: return LTLM_ERR_IO;
        case ErrorCode::Format: return LTLM_ERR_FORMAT;
        case ErrorCode::Truncated: return LTLM_ERR_TRUNCATED;
        case ErrorCode::Checksum: return LTLM_ERR_CHECKSUM;
        case ErrorCode::Version: return LTLM_ERR_VERSION;
        case ErrorCode::VocabMismatch: return LTLM_ERR_VOCAB_MISMATCH;
        case ErrorCode::Numeric: return LTLM_ERR_NUMERIC;
        case ErrorCode::Diverged: return LTLM_ERR_DIVERGED;
        case ErrorCode::Internal: return LTLM_ERR_INTERNAL;
    }
    return LTLM_ERR_INTERNAL;
}

template <typename Fn>
ltlm_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return LTLM_OK;
    } catch (const ltlm::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return LTLM_ERR_INTERNAL;
    }
}

void check_arg(bool ok, const char* message) {
    ltlm::require(ok, ltlm::ErrorCode::InvalidArgument, message);
}

ltlm::WeightingKind to_weighting(int32_t w) {
    switch (w) {
        case LTLM_WEIGHT_UNIFORM: return ltlm::WeightingKind::Uniform;
        case LTLM_WEIGHT_EXPONENTIAL: return ltlm::WeightingKind::Exponential;
        case LTLM_WEIGHT_WORD_DEPENDENT: return ltlm::WeightingKind::WordDependent;
        default:
            ltlm::fail(ltlm::ErrorCode::InvalidArgument, "unknown weighting value");
    }
}

ltlm::TrainMode to_mode(int32_t m) {
    switch (m) {
        case LTLM_MODE_SENTENCE: return ltlm::TrainMode::Sentence;
        case LTLM_MODE_DISCOURSE: return ltlm::TrainMode::Discourse;
        default:
            ltlm::fail(ltlm::ErrorCode::InvalidArgument, "unknown mode value");
    }
}

} // namespace

extern "C" {

const char* ltlm_version_string(void) { return "1.0.0"; }

const char* ltlm_status_name(ltlm_status status) {
    switch (status) {
        case LTLM_OK: return "ok";
        case LTLM_ERR_INVALID_ARGUMENT: return "invalid_argument";
        case LTLM_ERR_IO: return "io_error";
        case LTLM_ERR_FORMAT: return "format_error";
        case LTLM_ERR_TRUNCATED: return "truncated";
        case LTLM_ERR_CHECKSUM: return "checksum_mismatch";
        case LTLM_ERR_VERSION: return "version_mismatch";
        case LTLM_ERR_VOCAB_MISMATCH: return "vocab_mismatch";
        case LTLM_ERR_NUMERIC: return "numeric_error";
        case LTLM_ERR_DIVERGED: return "diverged";
        case LTLM_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* ltlm_last_error(void) { return g_last_error.c_str(); }

/* ---- vocabulary --------------------------------------------------------- */

ltlm_status ltlm_vocab_build(const char* corpus_path, int32_t max_size, ltlm_vocab** out) {
    return guarded([&] {
        check_arg(corpus_path && out, "ltlm_vocab_build: null argument");
        check_arg(max_size >= 0, "ltlm_vocab_build: max_size must be >= 0");
        auto lines = ltlm::read_corpus_lines(corpus_path);
        auto vocab = ltlm::Vocabulary::build(lines, static_cast<std::size_t>(max_size));
        *out = new ltlm_vocab{std::move(vocab)};
    });
}

ltlm_status ltlm_vocab_load(const char* path, ltlm_vocab** out) {
    return guarded([&] {
        check_arg(path && out, "ltlm_vocab_load: null argument");
        *out = new ltlm_vocab{ltlm::Vocabulary::load(path)};
    });
}

ltlm_status ltlm_vocab_save(const ltlm_vocab* vocab, const char* path) {
    return guarded([&] {
        check_arg(vocab && path, "ltlm_vocab_save: null argument");
        vocab->impl.save(path);
    });
}

int32_t ltlm_vocab_size(const ltlm_vocab* vocab) {
    return vocab ? static_cast<int32_t>(vocab->impl.size()) : -1;
}

int32_t ltlm_vocab_lookup(const ltlm_vocab* vocab, const char* word) {
    if (!vocab || !word) return -1;
    return vocab->impl.lookup(word);
}

const char* ltlm_vocab_word(const ltlm_vocab* vocab, int32_t id) {
    if (!vocab || id < 0 || static_cast<std::size_t>(id) >= vocab->impl.size()) return nullptr;
    return vocab->impl.word(id).c_str();
}

uint64_t ltlm_vocab_hash(const ltlm_vocab* vocab) { return vocab ? vocab->impl.hash() : 0; }

void ltlm_vocab_free(ltlm_vocab* vocab) { delete vocab; }

/* ---- corpus ------------------------------------------------------------- */

ltlm_status ltlm_corpus_load(const char* path, const ltlm_vocab* vocab, ltlm_corpus** out) {
    return guarded([&] {
        check_arg(path && vocab && out, "ltlm_corpus_load: null argument");
        ltlm::EncodeResult enc = ltlm::encode_file(path, vocab->impl);
        auto* corpus = new ltlm_corpus;
        corpus->stream = std::move(enc.stream);
        corpus->word_count = enc.word_count;
        corpus->oov_count = enc.oov_count;
        corpus->vocab_hash = vocab->impl.hash();
        *out = corpus;
    });
}

int64_t ltlm_corpus_token_count(const ltlm_corpus* corpus) {
    return corpus ? static_cast<int64_t>(corpus->stream.size()) : -1;
}

int64_t ltlm_corpus_document_count(const ltlm_corpus* corpus) {
    if (!corpus) return -1;
    return static_cast<int64_t>(ltlm::split_documents(corpus->stream).size());
}

double ltlm_corpus_oov_rate(const ltlm_corpus* corpus) {
    if (!corpus || corpus->word_count == 0) return 0.0;
    return static_cast<double>(corpus->oov_count) / static_cast<double>(corpus->word_count);
}

void ltlm_corpus_free(ltlm_corpus* corpus) { delete corpus; }

/* ---- idf ---------------------------------------------------------------- */

ltlm_status ltlm_idf_compute(const ltlm_corpus* corpus, const ltlm_vocab* vocab, ltlm_idf** out) {
    return guarded([&] {
        check_arg(corpus && vocab && out, "ltlm_idf_compute: null argument");
        ltlm::require(corpus->vocab_hash == vocab->impl.hash(), ltlm::ErrorCode::VocabMismatch,
                      "corpus was encoded with a different vocabulary");
        *out = new ltlm_idf{ltlm::compute_idf(corpus->stream, vocab->impl)};
    });
}

ltlm_status ltlm_idf_save(const ltlm_idf* idf, const ltlm_vocab* vocab, const char* path) {
    return guarded([&] {
        check_arg(idf && vocab && path, "ltlm_idf_save: null argument");
        ltlm::save_idf(idf->impl, vocab->impl, path);
    });
}

ltlm_status ltlm_idf_load(const char* path, const ltlm_vocab* vocab, ltlm_idf** out) {
    return guarded([&] {
        check_arg(path && vocab && out, "ltlm_idf_load: null argument");
        *out = new ltlm_idf{ltlm::load_idf(path, vocab->impl)};
    });
}

double ltlm_idf_weight(const ltlm_idf* idf, int32_t token_id) {
    if (!idf || token_id < 0 || static_cast<std::size_t>(token_id) >= idf->impl.weights.size())
        return -1.0;
    return idf->impl.weights[static_cast<std::size_t>(token_id)];
}

int64_t ltlm_idf_documents(const ltlm_idf* idf) { return idf ? idf->impl.document_count : -1; }

void ltlm_idf_free(ltlm_idf* idf) { delete idf; }

/* ---- training ----------------------------------------------------------- */

void ltlm_train_options_init(ltlm_train_options* options) {
    if (!options) return;
    std::memset(options, 0, sizeof(*options));
    options->input_dim = 100;
    options->context_dim = 100;
    options->hidden_size = 200;
    options->extension = 0;
    options->weighting = LTLM_WEIGHT_UNIFORM;
    options->alpha = 1.05;
    options->k_history = 100;
    options->epochs = 75;
    options->batch_size = 20;
    options->unroll_steps = 35;
    options->learning_rate = 1.0;
    options->decay_rate = 0.8;
    options->decay_start_epoch = 6;
    options->clip_norm = 5.0;
    options->dropout = 0.5;
    options->mode = LTLM_MODE_SENTENCE;
    options->seed = 1;
    options->init_range = 0.05;
    options->pretrain_input = 1;
    options->pretrain_context = 1;
}

ltlm_status ltlm_train(const ltlm_train_options* options, const ltlm_vocab* vocab,
                       const ltlm_corpus* train_corpus, const ltlm_corpus* valid_corpus,
                       ltlm_model** out) {
    return guarded([&] {
        namespace fs = std::filesystem;
        check_arg(options && vocab && train_corpus && valid_corpus && out,
                  "ltlm_train: null argument");
        const std::uint64_t vhash = vocab->impl.hash();
        ltlm::require(train_corpus->vocab_hash == vhash && valid_corpus->vocab_hash == vhash,
                      ltlm::ErrorCode::VocabMismatch,
                      "corpora were encoded with a different vocabulary");

        ltlm::ModelConfig config;
        config.vocab_size = vocab->impl.size();
        config.input_dim = static_cast<std::size_t>(options->input_dim);
        config.extension = options->extension != 0;
        config.context_dim =
            config.extension ? static_cast<std::size_t>(options->context_dim) : 0;
        config.hidden_size = static_cast<std::size_t>(options->hidden_size);
        config.weighting = to_weighting(options->weighting);
        config.alpha = options->alpha;
        config.history = static_cast<std::size_t>(options->k_history);
        config.validate();

        ltlm::TrainingSchedule schedule;
        schedule.epochs = static_cast<std::size_t>(options->epochs);
        schedule.batch_size = static_cast<std::size_t>(options->batch_size);
        schedule.unroll_steps = static_cast<std::size_t>(options->unroll_steps);
        schedule.initial_lr = options->learning_rate;
        schedule.decay_rate = options->decay_rate;
        schedule.decay_start_epoch = static_cast<std::size_t>(options->decay_start_epoch);
        schedule.clip_norm = options->clip_norm;
        schedule.dropout_p = options->dropout;
        schedule.mode = to_mode(options->mode);
        schedule.seed = options->seed;
        schedule.init_range = options->init_range;
        schedule.validate();

        std::optional<ltlm::IdfTable> idf;
        if (config.weighting == ltlm::WeightingKind::WordDependent)
            idf = ltlm::compute_idf(train_corpus->stream, vocab->impl);

        std::optional<ltlm::Matrix> pre_input, pre_context;
        if (options->embeddings_path) {
            // Separate rng so fallback rows do not shift the training stream.
            ltlm::Rng emb_rng(schedule.seed ^ 0x9E3779B97F4A7C15ULL);
            if (options->pretrain_input)
                pre_input = ltlm::load_pretrained_embeddings(
                    options->embeddings_path, vocab->impl, config.input_dim, emb_rng,
                    schedule.init_range);
            if (options->pretrain_context && config.extension)
                pre_context = ltlm::load_pretrained_embeddings(
                    options->embeddings_path, vocab->impl, config.context_dim, emb_rng,
                    schedule.init_range);
        }

        std::string dir;
        if (options->checkpoint_dir) {
            dir = options->checkpoint_dir;
            fs::create_directories(dir);
            vocab->impl.save(dir + "/vocab.txt");
        }
        std::ofstream log;
        if (options->log_path) {
            log.open(options->log_path, std::ios::trunc);
            ltlm::require(log.good(), ltlm::ErrorCode::Io,
                          std::string("cannot write log file: ") + options->log_path);
        }

        auto on_epoch = [&](const ltlm::EpochRecord& rec, const ltlm::ModelParameters& params,
                            bool is_best) {
            if (log.is_open()) {
                log.precision(17);
                log << "epoch=" << rec.epoch << " lr=" << rec.lr << " train_ppl=" << rec.train_ppl
                    << " valid_ppl=" << rec.valid_ppl << " seconds=" << rec.seconds << '\n';
                log.flush();
            }
            if (!dir.empty()) {
                ltlm::Checkpoint cp;
                cp.config = config;
                cp.params = params;
                cp.meta.vocab_hash = vhash;
                cp.meta.epoch = static_cast<std::int64_t>(rec.epoch);
                cp.meta.lr = rec.lr;
                cp.meta.seed = schedule.seed;
                if (idf) cp.idf = idf;
                char name[32];
                std::snprintf(name, sizeof(name), "epoch_%03zu.ckpt", rec.epoch);
                ltlm::save_checkpoint(dir + "/" + name, cp);
                if (is_best) {
                    fs::copy_file(dir + "/" + name, dir + "/best.ckpt",
                                  fs::copy_options::overwrite_existing);
                }
            }
        };

        ltlm::TrainResult result = ltlm::train(
            train_corpus->stream, valid_corpus->stream, config, schedule,
            idf ? &*idf : nullptr, pre_input ? &*pre_input : nullptr,
            pre_context ? &*pre_context : nullptr, on_epoch);

        if (result.diverged)
            ltlm::fail(ltlm::ErrorCode::Diverged,
                       "training diverged after epoch " + std::to_string(result.completed_epochs) +
                           "; checkpoints of completed epochs are retained");

        auto* model = new ltlm_model;
        model->impl.config = config;
        model->impl.params = std::move(result.params);
        model->impl.meta.vocab_hash = vhash;
        model->impl.meta.epoch = static_cast<std::int64_t>(result.completed_epochs);
        model->impl.meta.lr = schedule.learning_rate_for(schedule.epochs);
        model->impl.meta.seed = schedule.seed;
        if (idf) model->impl.idf = std::move(idf);
        *out = model;
    });
}

/* ---- models ------------------------------------------------------------- */

ltlm_status ltlm_model_load(const char* path, ltlm_model** out) {
    return guarded([&] {
        check_arg(path && out, "ltlm_model_load: null argument");
        *out = new ltlm_model{ltlm::load_checkpoint(path)};
    });
}

ltlm_status ltlm_model_save(const ltlm_model* model, const char* path) {
    return guarded([&] {
        check_arg(model && path, "ltlm_model_save: null argument");
        ltlm::save_checkpoint(path, model->impl);
    });
}

int32_t ltlm_model_vocab_size(const ltlm_model* model) {
    return model ? static_cast<int32_t>(model->impl.config.vocab_size) : -1;
}

int32_t ltlm_model_hidden_size(const ltlm_model* model) {
    return model ? static_cast<int32_t>(model->impl.config.hidden_size) : -1;
}

int32_t ltlm_model_extension(const ltlm_model* model) {
    return model ? (model->impl.config.extension ? 1 : 0) : -1;
}

uint64_t ltlm_model_vocab_hash(const ltlm_model* model) {
    return model ? model->impl.meta.vocab_hash : 0;
}

int64_t ltlm_model_parameter_count(const ltlm_model* model) {
    return model ? static_cast<int64_t>(model->impl.params.parameter_count()) : -1;
}

void ltlm_model_free(ltlm_model* model) { delete model; }

/* ---- evaluation --------------------------------------------------------- */

ltlm_status ltlm_perplexity(const ltlm_model* model, const ltlm_corpus* corpus, int32_t mode,
                            ltlm_ppl_report* report) {
    return guarded([&] {
        check_arg(model && corpus && report, "ltlm_perplexity: null argument");
        ltlm::require(corpus->vocab_hash == model->impl.meta.vocab_hash,
                      ltlm::ErrorCode::VocabMismatch,
                      "corpus was encoded with a different vocabulary than the checkpoint");
        const ltlm::IdfTable* idf = model->impl.idf ? &*model->impl.idf : nullptr;
        ltlm::PplReport r = ltlm::perplexity(model->impl.params, model->impl.config, idf,
                                             corpus->stream, to_mode(mode));
        report->ppl = r.ppl;
        report->log_prob_sum = r.log_prob_sum;
        report->token_count = static_cast<int64_t>(r.token_count);
        report->predictions = static_cast<int64_t>(r.predictions);
    });
}

ltlm_status ltlm_rescore(const ltlm_model* model, const ltlm_vocab* vocab,
                         const char* nbest_path, const char* reference_path, double lambda,
                         const char* detail_path, ltlm_wer_report* report) {
    return guarded([&] {
        check_arg(model && vocab && nbest_path && reference_path && report,
                  "ltlm_rescore: null argument");
        ltlm::require(vocab->impl.hash() == model->impl.meta.vocab_hash,
                      ltlm::ErrorCode::VocabMismatch,
                      "vocabulary does not match the checkpoint");
        ltlm::NBestSet nbest = ltlm::load_nbest(nbest_path);
        auto references = ltlm::load_references(reference_path);
        const ltlm::IdfTable* idf = model->impl.idf ? &*model->impl.idf : nullptr;
        ltlm::WerReport r = ltlm::rescore(model->impl.params, model->impl.config, idf,
                                          vocab->impl, nbest, references, lambda);
        if (detail_path) {
            std::ofstream detail(detail_path, std::ios::trunc);
            ltlm::require(detail.good(), ltlm::ErrorCode::Io,
                          std::string("cannot write detail file: ") + detail_path);
            detail.precision(17);
            for (const auto& u : r.detail)
                detail << "utterance=" << u.id << " selected_rank=" << u.selected_rank
                       << " lm_logprob=" << u.lm_logprob << " sub=" << u.alignment.substitutions
                       << " del=" << u.alignment.deletions << " ins=" << u.alignment.insertions
                       << " ref_len=" << u.alignment.reference_length << '\n';
        }
        report->wer = r.wer;
        report->substitutions = static_cast<int64_t>(r.substitutions);
        report->deletions = static_cast<int64_t>(r.deletions);
        report->insertions = static_cast<int64_t>(r.insertions);
        report->reference_length = static_cast<int64_t>(r.reference_length);
        report->utterance_count = static_cast<int64_t>(r.utterance_count);
    });
}

ltlm_status ltlm_probe(const ltlm_model* model, const ltlm_vocab* vocab,
                       const char* snippet_text, int32_t weighting, double alpha,
                       const ltlm_idf* idf, int32_t top_n, ltlm_probe_result** out) {
    return guarded([&] {
        check_arg(model && vocab && snippet_text && out, "ltlm_probe: null argument");
        check_arg(top_n >= 1, "ltlm_probe: top_n must be >= 1");
        ltlm::require(vocab->impl.hash() == model->impl.meta.vocab_hash,
                      ltlm::ErrorCode::VocabMismatch,
                      "vocabulary does not match the checkpoint");

        ltlm::WeightingKind kind =
            weighting < 0 ? model->impl.config.weighting : to_weighting(weighting);
        const double a = alpha > 0 ? alpha : model->impl.config.alpha;
        const ltlm::IdfTable* table = nullptr;
        if (kind == ltlm::WeightingKind::WordDependent) {
            if (idf)
                table = &idf->impl;
            else if (model->impl.idf)
                table = &*model->impl.idf;
            ltlm::require(table != nullptr, ltlm::ErrorCode::InvalidArgument,
                          "word-dependent probe needs an idf table");
            ltlm::require(table->weights.size() == model->impl.config.vocab_size,
                          ltlm::ErrorCode::InvalidArgument,
                          "idf table does not cover the vocabulary");
        }
        ltlm::WeightingScheme scheme =
            kind == ltlm::WeightingKind::Uniform ? ltlm::WeightingScheme::uniform()
            : kind == ltlm::WeightingKind::Exponential
                ? ltlm::WeightingScheme::exponential(a)
                : ltlm::WeightingScheme::word_dependent(*table);

        auto ranked = ltlm::probe(model->impl.params, model->impl.config, vocab->impl,
                                  snippet_text, scheme, static_cast<std::size_t>(top_n));
        auto* result = new ltlm_probe_result;
        for (const auto& [id, sim] : ranked) {
            result->words.push_back(vocab->impl.word(id));
            result->similarities.push_back(sim);
        }
        *out = result;
    });
}

int32_t ltlm_probe_count(const ltlm_probe_result* result) {
    return result ? static_cast<int32_t>(result->words.size()) : -1;
}

const char* ltlm_probe_word(const ltlm_probe_result* result, int32_t index) {
    if (!result || index < 0 || static_cast<std::size_t>(index) >= result->words.size())
        return nullptr;
    return result->words[static_cast<std::size_t>(index)].c_str();
}

double ltlm_probe_similarity(const ltlm_probe_result* result, int32_t index) {
    if (!result || index < 0 || static_cast<std::size_t>(index) >= result->similarities.size())
        return 0.0;
    return result->similarities[static_cast<std::size_t>(index)];
}

void ltlm_probe_free(ltlm_probe_result* result) { delete result; }

/* ---- gradient self-check ------------------------------------------------ */

ltlm_status ltlm_gradient_check(uint64_t seed, ltlm_gradcheck_report* report) {
    return guarded([&] {
        check_arg(report != nullptr, "ltlm_gradient_check: null report");
        std::memset(report, 0, sizeof(*report));

        ltlm::ModelConfig config;
        config.vocab_size = 5;
        config.input_dim = 3;
        config.context_dim = 3;
        config.hidden_size = 4;
        config.extension = true;
        config.weighting = ltlm::WeightingKind::Exponential;
        config.alpha = 1.05;
        config.history = 3;
        config.validate();
        ltlm::require(config.precision == ltlm::Precision::Float64, ltlm::ErrorCode::InvalidArgument,
                      "gradient check must run in 64-bit mode");

        ltlm::Rng rng(seed);
        ltlm::ModelParameters params = ltlm::ModelParameters::init(config, rng, 0.05);
        const ltlm::WeightingScheme scheme = ltlm::make_scheme(config, nullptr);

        // Fixed window: batch 2, 3 steps, tokens drawn from the rng, one
        // mid-window reset to exercise the truncation path.
        const std::size_t steps = 3, batch = 2;
        ltlm::BatchWindow window;
        window.steps = steps;
        window.batch_size = batch;
        window.inputs.resize(steps * batch);
        window.targets.resize(steps * batch);
        window.state_reset.assign(steps * batch, false);
        window.doc_reset.assign(steps * batch, false);
        for (auto& t : window.inputs) t = static_cast<std::int32_t>(rng.next_u64() % 5);
        for (auto& t : window.targets) t = static_cast<std::int32_t>(rng.next_u64() % 5);
        window.state_reset[1 * batch + 1] = true;

        auto run_forward = [&](const ltlm::ModelParameters& p) {
            std::vector<ltlm::LstmState> states(batch, ltlm::LstmState(config.hidden_size));
            std::vector<ltlm::ContextBuffer> buffers(batch, ltlm::ContextBuffer(config.history));
            ltlm::ModelCache cache;
            ltlm::ForwardOptions opts; // dropout off
            ltlm::model_forward(window, states, buffers, p, config, scheme, opts, &cache, nullptr);
            return cache;
        };

        ltlm::ModelCache cache = run_forward(params);
        ltlm::ModelParameters analytic =
            ltlm::model_backward(cache, window.targets, params, config, scheme);

        std::vector<ltlm::Matrix*> tensors = params.tensors();
        std::vector<ltlm::Matrix*> grads = analytic.tensors();
        std::vector<std::string> names = ltlm::ModelParameters::tensor_names(config);

        report->group_count = static_cast<int32_t>(tensors.size());
        for (std::size_t t = 0; t < tensors.size(); ++t) {
            std::snprintf(report->group_names[t], sizeof(report->group_names[t]), "%s",
                          names[t].c_str());
            ltlm::Vec flat(tensors[t]->data());
            auto loss_at = [&](const ltlm::Vec& theta) {
                ltlm::ModelParameters probe = params;
                probe.tensors()[t]->data() = theta;
                return run_forward(probe).mean_cross_entropy(window.targets);
            };
            ltlm::Vec numeric = ltlm::finite_difference_gradient(loss_at, flat, 1e-5);
            double max_rel = 0.0;
            const auto& a = grads[t]->data();
            for (std::size_t j = 0; j < numeric.size(); ++j) {
                // Floor the denominator at 1e-5: central differences carry
                // ~4e-11 absolute noise at this loss scale, which would read
                // as huge relative error on near-zero coordinates.
                const double denom = std::max({std::abs(a[j]), std::abs(numeric[j]), 1e-5});
                max_rel = std::max(max_rel, std::abs(a[j] - numeric[j]) / denom);
            }
            report->max_rel_err[t] = max_rel;
        }
    });
}

} // extern "C"
