#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ltlm/model.hpp"

namespace ltlm {

struct PplReport {
    double ppl = 0.0;
    double log_prob_sum = 0.0;     // natural log
    std::size_t token_count = 0;   // stream length
    std::size_t predictions = 0;   // scored positions (token_count - 1)
};

// Single-stream stateful scorer used by perplexity and rescoring. Dropout is
// never applied; evaluating the same stream twice gives bitwise-identical
// results.
class StreamScorer {
public:
    StreamScorer(const ModelParameters& params, const ModelConfig& config, const IdfTable* idf);

    void reset_state() { state_.reset(); }
    void reset_buffer() {
        if (config_->extension) buffer_.clear();
    }

    // Feeds one input token and returns ln p(target | history).
    double step(std::int32_t input, std::int32_t target);

private:
    const ModelParameters* params_;
    const ModelConfig* config_;
    WeightingScheme scheme_;
    LstmState state_;
    ContextBuffer buffer_;
};

// exp(mean negative log-likelihood) over positions 1..T-1 of the stream, each
// predicted from its full preceding history. Sentence-level mode zeroes the
// LSTM state at every <eos> input, so each sentence is scored independently
// of its neighbours; discourse-level mode carries state across sentences and
// resets it only at document boundaries. The context buffer (extended models)
// persists across sentences in both modes and clears at document boundaries.
PplReport perplexity(const ModelParameters& params, const ModelConfig& config,
                     const IdfTable* idf, const TokenStream& stream, TrainMode mode);

// Word-level Levenshtein alignment with unit costs. Ties among minimal
// alignments are resolved preferring substitutions, then deletions, then
// insertions.
struct Alignment {
    std::size_t substitutions = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t reference_length = 0;

    std::size_t edits() const { return substitutions + deletions + insertions; }
    double wer() const {
        return static_cast<double>(edits()) / static_cast<double>(reference_length);
    }
};

Alignment word_error_rate(const std::vector<std::string>& reference,
                          const std::vector<std::string>& hypothesis);

struct Hypothesis {
    int rank = 0;
    std::optional<double> external_score;
    std::string text;
};

// Parsed n-best file: utterance id -> hypotheses ordered by rank.
struct NBestSet {
    std::map<std::string, std::vector<Hypothesis>> utterances;
};

// File format: "utterance_id<TAB>rank<TAB>external_score_or_dash<TAB>text".
NBestSet load_nbest(const std::string& path, std::size_t max_hypotheses = 100);

// File format: "utterance_id<TAB>reference text".
std::map<std::string, std::vector<std::string>> load_references(const std::string& path);

struct RescoredUtterance {
    std::string id;
    int selected_rank = 0;
    double combined_score = 0.0;
    double lm_logprob = 0.0; // length-normalized
    Alignment alignment;
};

struct WerReport {
    double wer = 0.0;
    std::size_t substitutions = 0, deletions = 0, insertions = 0;
    std::size_t reference_length = 0;
    std::size_t utterance_count = 0;
    std::vector<RescoredUtterance> detail;
};

// Scores every hypothesis with the LM (fresh zero state and empty context
// buffer per hypothesis, <eos>-seeded and <eos>-terminated), combines
// lambda * normalized LM log-prob + (1-lambda) * external score, picks the
// best per utterance (ties by original rank) and measures corpus-level WER
// against the references: total edits over total reference words.
WerReport rescore(const ModelParameters& params, const ModelConfig& config,
                  const IdfTable* idf, const Vocabulary& vocab, const NBestSet& nbest,
                  const std::map<std::string, std::vector<std::string>>& references,
                  double lambda);

// Feeds an encoded snippet through the context buffer and ranks vocabulary
// words by cosine similarity of their context embedding to the final context
// vector. unk/eos are excluded from the ranking. Extended checkpoints only.
std::vector<std::pair<std::int32_t, double>> probe(
    const ModelParameters& params, const ModelConfig& config, const Vocabulary& vocab,
    const std::string& snippet, const WeightingScheme& scheme, std::size_t n);

} // namespace ltlm
