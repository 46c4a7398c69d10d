/*
 * C API for the ltlm library: word-level LSTM language models with an
 * optional CBOW-style long-term context extension.
 *
 * All functions return LTLM_OK on success or an error status; the detail
 * message for the most recent failure on the calling thread is available
 * via ltlm_last_error(). Objects returned through out-parameters are owned
 * by the caller and released with the matching *_free function. Handles are
 * immutable after creation and may be shared across threads.
 */
#ifndef LTLM_H
#define LTLM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define LTLM_API __declspec(dllexport)
#else
#define LTLM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ltlm_status {
    LTLM_OK = 0,
    LTLM_ERR_INVALID_ARGUMENT = 1,
    LTLM_ERR_IO = 2,
    LTLM_ERR_FORMAT = 3,
    LTLM_ERR_TRUNCATED = 4,
    LTLM_ERR_CHECKSUM = 5,
    LTLM_ERR_VERSION = 6,
    LTLM_ERR_VOCAB_MISMATCH = 7,
    LTLM_ERR_NUMERIC = 8,
    LTLM_ERR_DIVERGED = 9,
    LTLM_ERR_INTERNAL = 10
} ltlm_status;

/* Weighting of the context combination. */
enum { LTLM_WEIGHT_UNIFORM = 0, LTLM_WEIGHT_EXPONENTIAL = 1, LTLM_WEIGHT_WORD_DEPENDENT = 2 };

/* State handling across sentence boundaries. */
enum { LTLM_MODE_SENTENCE = 0, LTLM_MODE_DISCOURSE = 1 };

LTLM_API const char* ltlm_version_string(void);
LTLM_API const char* ltlm_status_name(ltlm_status status);

/* Detail message of the last failure on this thread ("" when none). */
LTLM_API const char* ltlm_last_error(void);

typedef struct ltlm_vocab ltlm_vocab;
typedef struct ltlm_corpus ltlm_corpus;
typedef struct ltlm_idf ltlm_idf;
typedef struct ltlm_model ltlm_model;
typedef struct ltlm_probe_result ltlm_probe_result;

/* ---- vocabulary --------------------------------------------------------- */

/*
 * Builds a vocabulary from a corpus file (one sentence per line, blank line
 * between documents). max_size limits the retained words, most frequent
 * first with lexicographic tie-breaks; 0 keeps every word. <unk> and <eos>
 * are always present.
 */
LTLM_API ltlm_status ltlm_vocab_build(const char* corpus_path, int32_t max_size,
                                      ltlm_vocab** out);

/* Word list file, one word per line, id = line index. */
LTLM_API ltlm_status ltlm_vocab_load(const char* path, ltlm_vocab** out);
LTLM_API ltlm_status ltlm_vocab_save(const ltlm_vocab* vocab, const char* path);

LTLM_API int32_t ltlm_vocab_size(const ltlm_vocab* vocab);
LTLM_API int32_t ltlm_vocab_lookup(const ltlm_vocab* vocab, const char* word);
LTLM_API const char* ltlm_vocab_word(const ltlm_vocab* vocab, int32_t id);
LTLM_API uint64_t ltlm_vocab_hash(const ltlm_vocab* vocab);
LTLM_API void ltlm_vocab_free(ltlm_vocab* vocab);

/* ---- corpus ------------------------------------------------------------- */

LTLM_API ltlm_status ltlm_corpus_load(const char* path, const ltlm_vocab* vocab,
                                      ltlm_corpus** out);
LTLM_API int64_t ltlm_corpus_token_count(const ltlm_corpus* corpus);
LTLM_API int64_t ltlm_corpus_document_count(const ltlm_corpus* corpus);
LTLM_API double ltlm_corpus_oov_rate(const ltlm_corpus* corpus);
LTLM_API void ltlm_corpus_free(ltlm_corpus* corpus);

/* ---- idf ---------------------------------------------------------------- */

/* idf(w) = ln(N / df(w)) over the corpus documents. */
LTLM_API ltlm_status ltlm_idf_compute(const ltlm_corpus* corpus, const ltlm_vocab* vocab,
                                      ltlm_idf** out);
LTLM_API ltlm_status ltlm_idf_save(const ltlm_idf* idf, const ltlm_vocab* vocab,
                                   const char* path);
LTLM_API ltlm_status ltlm_idf_load(const char* path, const ltlm_vocab* vocab, ltlm_idf** out);
LTLM_API double ltlm_idf_weight(const ltlm_idf* idf, int32_t token_id);
LTLM_API int64_t ltlm_idf_documents(const ltlm_idf* idf);
LTLM_API void ltlm_idf_free(ltlm_idf* idf);

/* ---- training ----------------------------------------------------------- */

typedef struct ltlm_train_options {
    /* model */
    int32_t input_dim;
    int32_t context_dim; /* ignored unless extension != 0 */
    int32_t hidden_size;
    int32_t extension;
    int32_t weighting; /* LTLM_WEIGHT_* */
    double alpha;
    int32_t k_history;
    /* schedule */
    int32_t epochs;
    int32_t batch_size;
    int32_t unroll_steps;
    double learning_rate;
    double decay_rate;
    int32_t decay_start_epoch;
    double clip_norm;
    double dropout;
    int32_t mode; /* LTLM_MODE_* */
    uint64_t seed;
    double init_range;
    /* optional pretrained embeddings, word2vec text format */
    const char* embeddings_path; /* NULL = random init */
    int32_t pretrain_input;      /* apply file to the input table */
    int32_t pretrain_context;    /* apply file to the context table */
    /* optional outputs */
    const char* checkpoint_dir; /* NULL = keep nothing on disk */
    const char* log_path;       /* NULL = no log file */
} ltlm_train_options;

/* Fills every field with the defaults of the small WikiText-2 recipe. */
LTLM_API void ltlm_train_options_init(ltlm_train_options* options);

/*
 * Trains a model. When checkpoint_dir is given, writes epoch_NNN.ckpt per
 * epoch, best.ckpt (lowest validation perplexity) and vocab.txt. Training is
 * bitwise deterministic for a fixed seed. Divergence (non-finite validation
 * perplexity) aborts with LTLM_ERR_DIVERGED; checkpoints of completed epochs
 * are retained.
 */
LTLM_API ltlm_status ltlm_train(const ltlm_train_options* options, const ltlm_vocab* vocab,
                                const ltlm_corpus* train_corpus, const ltlm_corpus* valid_corpus,
                                ltlm_model** out);

/* ---- models ------------------------------------------------------------- */

LTLM_API ltlm_status ltlm_model_load(const char* path, ltlm_model** out);
LTLM_API ltlm_status ltlm_model_save(const ltlm_model* model, const char* path);
LTLM_API int32_t ltlm_model_vocab_size(const ltlm_model* model);
LTLM_API int32_t ltlm_model_hidden_size(const ltlm_model* model);
LTLM_API int32_t ltlm_model_extension(const ltlm_model* model);
LTLM_API uint64_t ltlm_model_vocab_hash(const ltlm_model* model);
LTLM_API int64_t ltlm_model_parameter_count(const ltlm_model* model);
LTLM_API void ltlm_model_free(ltlm_model* model);

/* ---- evaluation --------------------------------------------------------- */

typedef struct ltlm_ppl_report {
    double ppl;
    double log_prob_sum;
    int64_t token_count;
    int64_t predictions;
} ltlm_ppl_report;

/* Rejects corpora encoded with a vocabulary other than the model's. */
LTLM_API ltlm_status ltlm_perplexity(const ltlm_model* model, const ltlm_corpus* corpus,
                                     int32_t mode, ltlm_ppl_report* report);

typedef struct ltlm_wer_report {
    double wer;
    int64_t substitutions;
    int64_t deletions;
    int64_t insertions;
    int64_t reference_length;
    int64_t utterance_count;
} ltlm_wer_report;

/*
 * 100-best rescoring. N-best lines are "id<TAB>rank<TAB>score_or_dash<TAB>
 * text", references "id<TAB>text". lambda in [0,1] interpolates the length-
 * normalized LM log-probability with the external score (lambda = 1 is pure
 * LM). detail_path, when non-NULL, receives one line per utterance.
 */
LTLM_API ltlm_status ltlm_rescore(const ltlm_model* model, const ltlm_vocab* vocab,
                                  const char* nbest_path, const char* reference_path,
                                  double lambda, const char* detail_path,
                                  ltlm_wer_report* report);

/*
 * Context probe: feeds snippet_text through the context buffer and returns
 * the top_n vocabulary words whose context embeddings lie closest (cosine)
 * to the final context vector. weighting -1 uses the scheme the model was
 * trained with; LTLM_WEIGHT_WORD_DEPENDENT needs idf unless the model
 * carries its own table. Extended models only.
 */
LTLM_API ltlm_status ltlm_probe(const ltlm_model* model, const ltlm_vocab* vocab,
                                const char* snippet_text, int32_t weighting, double alpha,
                                const ltlm_idf* idf, int32_t top_n, ltlm_probe_result** out);
LTLM_API int32_t ltlm_probe_count(const ltlm_probe_result* result);
LTLM_API const char* ltlm_probe_word(const ltlm_probe_result* result, int32_t index);
LTLM_API double ltlm_probe_similarity(const ltlm_probe_result* result, int32_t index);
LTLM_API void ltlm_probe_free(ltlm_probe_result* result);

/* ---- gradient self-check ------------------------------------------------ */

#define LTLM_GRADCHECK_MAX_GROUPS 24

typedef struct ltlm_gradcheck_report {
    int32_t group_count;
    char group_names[LTLM_GRADCHECK_MAX_GROUPS][24];
    double max_rel_err[LTLM_GRADCHECK_MAX_GROUPS];
} ltlm_gradcheck_report;

/*
 * Compares analytic gradients against central finite differences on a small
 * extended model (vocab 5, hidden 4, embedding 3, history 3, 3 unroll steps,
 * 64-bit, dropout off) and reports the max relative error per parameter
 * tensor. Errors below 1e-4 across the board mean the backward pass is
 * consistent with the forward pass.
 */
LTLM_API ltlm_status ltlm_gradient_check(uint64_t seed, ltlm_gradcheck_report* report);

#ifdef __cplusplus
}
#endif

#endif /* LTLM_H */
