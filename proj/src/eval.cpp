#include "ltlm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ltlm/corpus.hpp"

namespace ltlm {

StreamScorer::StreamScorer(const ModelParameters& params, const ModelConfig& config,
                           const IdfTable* idf)
    : params_(&params), config_(&config), scheme_(make_scheme(config, idf)),
      state_(config.hidden_size), buffer_(config.history) {}

double StreamScorer::step(std::int32_t input, std::int32_t target) {
    const ModelConfig& cfg = *config_;
    require(input >= 0 && static_cast<std::size_t>(input) < cfg.vocab_size &&
                target >= 0 && static_cast<std::size_t>(target) < cfg.vocab_size,
            ErrorCode::InvalidArgument, "StreamScorer: token id out of range");

    Vec x(cfg.lstm_input_width());
    const double* e = params_->input_embeddings.row(static_cast<std::size_t>(input));
    std::copy(e, e + cfg.input_dim, x.begin());
    if (cfg.extension) {
        buffer_.push(input);
        Vec d = context_vector(buffer_, params_->context_embeddings, scheme_);
        std::copy(d.begin(), d.end(), x.begin() + cfg.input_dim);
    }
    LstmCellCache cc = lstm_cell_forward(x, state_.h, state_.c, *params_);
    state_.h = std::move(cc.h_new);
    state_.c = std::move(cc.c_new);

    Vec logits(cfg.vocab_size);
    for (std::size_t r = 0; r < cfg.vocab_size; ++r)
        logits[r] = params_->b_y(r, 0) + dot(params_->w_y.row(r), state_.h.data(), cfg.hidden_size);
    softmax_inplace(logits.data(), logits.size());
    return std::log(std::max(logits[static_cast<std::size_t>(target)], kProbFloor));
}

PplReport perplexity(const ModelParameters& params, const ModelConfig& config,
                     const IdfTable* idf, const TokenStream& stream, TrainMode mode) {
    require(stream.size() >= 2, ErrorCode::InvalidArgument,
            "perplexity: stream needs at least two tokens");
    StreamScorer scorer(params, config, idf);

    PplReport report;
    report.token_count = stream.size();
    for (std::size_t t = 0; t + 1 < stream.size(); ++t) {
        if (mode == TrainMode::Sentence) {
            // Score each sentence independently: zero the state whenever the
            // input is an <eos>, so the next sentence starts from scratch.
            if (t == 0 || stream.sentence_end[t]) scorer.reset_state();
        } else {
            if (t > 0 && stream.document_end[t - 1]) scorer.reset_state();
        }
        if (t > 0 && stream.document_end[t - 1]) scorer.reset_buffer();
        report.log_prob_sum += scorer.step(stream.tokens[t], stream.tokens[t + 1]);
        ++report.predictions;
    }
    report.ppl = std::exp(-report.log_prob_sum / static_cast<double>(report.predictions));
    return report;
}

Alignment word_error_rate(const std::vector<std::string>& reference,
                          const std::vector<std::string>& hypothesis) {
    require(!reference.empty(), ErrorCode::InvalidArgument, "word_error_rate: empty reference");
    const std::size_t n = reference.size();
    const std::size_t m = hypothesis.size();

    // dist[i][j] = edit distance between reference[0..i) and hypothesis[0..j)
    std::vector<std::vector<std::size_t>> dist(n + 1, std::vector<std::size_t>(m + 1, 0));
    for (std::size_t i = 0; i <= n; ++i) dist[i][0] = i;
    for (std::size_t j = 0; j <= m; ++j) dist[0][j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = dist[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1]);
            const std::size_t del = dist[i - 1][j] + 1;
            const std::size_t ins = dist[i][j - 1] + 1;
            dist[i][j] = std::min({sub, del, ins});
        }
    }

    Alignment a;
    a.reference_length = n;
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 &&
            dist[i][j] == dist[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1])) {
            if (reference[i - 1] != hypothesis[j - 1]) ++a.substitutions;
            --i;
            --j;
        } else if (i > 0 && dist[i][j] == dist[i - 1][j] + 1) {
            ++a.deletions;
            --i;
        } else {
            ++a.insertions;
            --j;
        }
    }
    return a;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::vector<std::string> split_words(const std::string& text) {
    std::istringstream iss(text);
    std::vector<std::string> words;
    std::string w;
    while (iss >> w) words.push_back(w);
    return words;
}

} // namespace

NBestSet load_nbest(const std::string& path, std::size_t max_hypotheses) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open n-best file: " + path);
    NBestSet set;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_fields(line, '\t');
        if (fields.size() != 4)
            fail(ErrorCode::Format, "n-best line " + std::to_string(line_no) +
                                        " must have 4 tab-separated fields: " + path);
        Hypothesis hyp;
        try {
            hyp.rank = std::stoi(fields[1]);
        } catch (const std::exception&) {
            fail(ErrorCode::Format, "n-best line " + std::to_string(line_no) +
                                        " has a non-integer rank: " + path);
        }
        if (fields[2] != "-") {
            try {
                hyp.external_score = std::stod(fields[2]);
            } catch (const std::exception&) {
                fail(ErrorCode::Format, "n-best line " + std::to_string(line_no) +
                                            " has a malformed score: " + path);
            }
        }
        hyp.text = fields[3];
        set.utterances[fields[0]].push_back(std::move(hyp));
    }
    require(!set.utterances.empty(), ErrorCode::Format, "n-best file is empty: " + path);
    for (auto& [id, hyps] : set.utterances) {
        require(hyps.size() <= max_hypotheses, ErrorCode::Format,
                "utterance '" + id + "' has more than " + std::to_string(max_hypotheses) +
                    " hypotheses: " + path);
        std::stable_sort(hyps.begin(), hyps.end(),
                         [](const Hypothesis& a, const Hypothesis& b) { return a.rank < b.rank; });
    }
    return set;
}

std::map<std::string, std::vector<std::string>> load_references(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open reference file: " + path);
    std::map<std::string, std::vector<std::string>> refs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string::npos)
            fail(ErrorCode::Format, "reference line " + std::to_string(line_no) +
                                        " must be 'id<TAB>text': " + path);
        refs[line.substr(0, tab)] = split_words(line.substr(tab + 1));
    }
    require(!refs.empty(), ErrorCode::Format, "reference file is empty: " + path);
    return refs;
}

namespace {

// LM log-probability of a hypothesis: <eos>-seeded, <eos>-terminated, fresh
// zero state and empty buffer, normalized by the number of scored positions.
double hypothesis_logprob(const ModelParameters& params, const ModelConfig& config,
                          const IdfTable* idf, const Vocabulary& vocab,
                          const std::string& text) {
    std::vector<std::string> words = split_words(text);
    std::vector<std::int32_t> ids;
    ids.reserve(words.size() + 2);
    ids.push_back(vocab.eos_id());
    for (const std::string& w : words) ids.push_back(vocab.lookup(w));
    ids.push_back(vocab.eos_id());

    StreamScorer scorer(params, config, idf);
    double sum = 0.0;
    for (std::size_t t = 0; t + 1 < ids.size(); ++t) sum += scorer.step(ids[t], ids[t + 1]);
    return sum / static_cast<double>(ids.size() - 1);
}

} // namespace

WerReport rescore(const ModelParameters& params, const ModelConfig& config,
                  const IdfTable* idf, const Vocabulary& vocab, const NBestSet& nbest,
                  const std::map<std::string, std::vector<std::string>>& references,
                  double lambda) {
    require(lambda >= 0.0 && lambda <= 1.0, ErrorCode::InvalidArgument,
            "rescore: lambda must be in [0, 1]");
    for (const auto& [id, hyps] : nbest.utterances) {
        require(!hyps.empty(), ErrorCode::InvalidArgument,
                "rescore: utterance '" + id + "' has no hypotheses");
        require(references.count(id) > 0, ErrorCode::InvalidArgument,
                "rescore: no reference for utterance '" + id + "'");
    }

    WerReport report;
    for (const auto& [id, hyps] : nbest.utterances) {
        double best_score = 0.0;
        std::size_t best_index = 0;
        double best_lm = 0.0;
        for (std::size_t h = 0; h < hyps.size(); ++h) {
            const Hypothesis& hyp = hyps[h];
            const double lm = hypothesis_logprob(params, config, idf, vocab, hyp.text);
            double combined = lm;
            if (lambda < 1.0) {
                require(hyp.external_score.has_value(), ErrorCode::InvalidArgument,
                        "rescore: lambda < 1 requires external scores (utterance '" + id + "')");
                combined = lambda * lm + (1.0 - lambda) * *hyp.external_score;
            }
            if (h == 0 || combined > best_score) {
                best_score = combined;
                best_index = h;
                best_lm = lm;
            }
        }
        const Hypothesis& chosen = hyps[best_index];
        RescoredUtterance ru;
        ru.id = id;
        ru.selected_rank = chosen.rank;
        ru.combined_score = best_score;
        ru.lm_logprob = best_lm;
        ru.alignment = word_error_rate(references.at(id), split_words(chosen.text));
        report.substitutions += ru.alignment.substitutions;
        report.deletions += ru.alignment.deletions;
        report.insertions += ru.alignment.insertions;
        report.reference_length += ru.alignment.reference_length;
        report.detail.push_back(std::move(ru));
    }
    report.utterance_count = report.detail.size();
    report.wer = static_cast<double>(report.substitutions + report.deletions + report.insertions) /
                 static_cast<double>(report.reference_length);
    return report;
}

std::vector<std::pair<std::int32_t, double>> probe(
    const ModelParameters& params, const ModelConfig& config, const Vocabulary& vocab,
    const std::string& snippet, const WeightingScheme& scheme, std::size_t n) {
    require(config.extension, ErrorCode::InvalidArgument,
            "probe: checkpoint has no context embeddings (vanilla model)");
    EncodeResult enc = encode(snippet, vocab);
    require(!enc.stream.tokens.empty(), ErrorCode::InvalidArgument, "probe: empty snippet");

    ContextBuffer buffer(config.history);
    for (std::int32_t tok : enc.stream.tokens) buffer.push(tok);
    Vec d = context_vector(buffer, params.context_embeddings, scheme);
    return nearest_words(d, params.context_embeddings, n, {vocab.unk_id(), vocab.eos_id()});
}

} // namespace ltlm
