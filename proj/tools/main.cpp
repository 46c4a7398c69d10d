// Command-line front end. Links the C API only (ltlm.h); everything here is
// configuration plumbing around the library calls.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltlm.h"
#include "run_config.hpp"

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 success, 1 validation error, 2 runtime error, 3 divergence.
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitDiverged = 3;

struct CliError {
    int exit_code;
    std::string message;
};

void check(ltlm_status status) {
    if (status == LTLM_OK) return;
    std::string message = std::string(ltlm_status_name(status)) + ": " + ltlm_last_error();
    throw CliError{status == LTLM_ERR_DIVERGED ? kExitDiverged : kExitRuntime, message};
}

int parse_weighting(const std::string& name) {
    if (name == "uniform") return LTLM_WEIGHT_UNIFORM;
    if (name == "exponential") return LTLM_WEIGHT_EXPONENTIAL;
    if (name == "word_dependent") return LTLM_WEIGHT_WORD_DEPENDENT;
    throw ConfigError("unknown weighting scheme: " + name);
}

int parse_mode(const std::string& name) {
    if (name == "sentence") return LTLM_MODE_SENTENCE;
    if (name == "discourse") return LTLM_MODE_DISCOURSE;
    throw ConfigError("unknown mode: " + name);
}

// The effective configuration is echoed into the run directory so every run
// can be reproduced from its artifacts alone.
void echo_effective_config(const RunConfig& config, const std::string& subcommand) {
    const std::string run_dir = config.get("run_dir");
    fs::create_directories(run_dir);
    std::ofstream out(run_dir + "/effective_" + subcommand + ".cfg", std::ios::trunc);
    if (!out.good()) throw ConfigError("cannot write effective config into: " + run_dir);
    out << config.dump(subcommand);
}

struct VocabHandle {
    ltlm_vocab* ptr = nullptr;
    ~VocabHandle() { ltlm_vocab_free(ptr); }
};
struct CorpusHandle {
    ltlm_corpus* ptr = nullptr;
    ~CorpusHandle() { ltlm_corpus_free(ptr); }
};
struct ModelHandle {
    ltlm_model* ptr = nullptr;
    ~ModelHandle() { ltlm_model_free(ptr); }
};
struct IdfHandle {
    ltlm_idf* ptr = nullptr;
    ~IdfHandle() { ltlm_idf_free(ptr); }
};

void load_vocab_for_checkpoint(const RunConfig& config, VocabHandle& vocab) {
    std::string vocab_path = config.get("vocab_path", "");
    if (vocab_path.empty())
        vocab_path = (fs::path(config.get("checkpoint")).parent_path() / "vocab.txt").string();
    if (!fs::exists(vocab_path))
        throw ConfigError("config key 'vocab_path' points to a missing path: " + vocab_path);
    check(ltlm_vocab_load(vocab_path.c_str(), &vocab.ptr));
}

int cmd_train(const RunConfig& config) {
    config.require_paths({"train_path", "valid_path"});
    const std::string checkpoint_dir =
        config.get("checkpoint_dir", config.get("run_dir") + "/checkpoints");
    fs::create_directories(checkpoint_dir);
    const std::string log_path = config.get("log_path", checkpoint_dir + "/train.log");

    VocabHandle vocab;
    if (config.has("vocab_path") && !config.get("vocab_path", "").empty()) {
        config.require_paths({"vocab_path"});
        check(ltlm_vocab_load(config.get("vocab_path").c_str(), &vocab.ptr));
    } else {
        check(ltlm_vocab_build(config.get("train_path").c_str(),
                               static_cast<int32_t>(config.get_int("vocab_max_size", 0)),
                               &vocab.ptr));
    }

    CorpusHandle train_corpus, valid_corpus;
    check(ltlm_corpus_load(config.get("train_path").c_str(), vocab.ptr, &train_corpus.ptr));
    check(ltlm_corpus_load(config.get("valid_path").c_str(), vocab.ptr, &valid_corpus.ptr));
    std::printf("vocab=%d train_tokens=%lld valid_tokens=%lld oov_rate=%.4f\n",
                ltlm_vocab_size(vocab.ptr),
                static_cast<long long>(ltlm_corpus_token_count(train_corpus.ptr)),
                static_cast<long long>(ltlm_corpus_token_count(valid_corpus.ptr)),
                ltlm_corpus_oov_rate(train_corpus.ptr));

    ltlm_train_options options;
    ltlm_train_options_init(&options);
    options.input_dim = static_cast<int32_t>(config.get_int("input_dim", 100));
    options.context_dim = static_cast<int32_t>(config.get_int("context_dim", 100));
    options.hidden_size = static_cast<int32_t>(config.get_int("hidden_size", 200));
    options.extension = config.get_bool("extension", false) ? 1 : 0;
    options.weighting = parse_weighting(config.get("weighting"));
    options.alpha = config.get_double("alpha", 1.05);
    options.k_history = static_cast<int32_t>(config.get_int("k_history", 100));
    options.epochs = static_cast<int32_t>(config.get_int("epochs", 75));
    options.batch_size = static_cast<int32_t>(config.get_int("batch_size", 20));
    options.unroll_steps = static_cast<int32_t>(config.get_int("unroll_steps", 35));
    options.learning_rate = config.get_double("learning_rate", 1.0);
    options.decay_rate = config.get_double("decay_rate", 0.8);
    options.decay_start_epoch = static_cast<int32_t>(config.get_int("decay_start_epoch", 6));
    options.clip_norm = config.get_double("clip_norm", 5.0);
    options.dropout = config.get_double("dropout", 0.5);
    options.mode = parse_mode(config.get("mode"));
    options.seed = static_cast<uint64_t>(config.get_int("seed", 1));
    options.init_range = config.get_double("init_range", 0.05);
    options.checkpoint_dir = checkpoint_dir.c_str();
    options.log_path = log_path.c_str();

    std::string embeddings;
    if (config.has("embeddings_path") && !config.get("embeddings_path", "").empty()) {
        config.require_paths({"embeddings_path"});
        embeddings = config.get("embeddings_path");
        options.embeddings_path = embeddings.c_str();
        options.pretrain_input = config.get_bool("pretrain_input", true) ? 1 : 0;
        options.pretrain_context = config.get_bool("pretrain_context", true) ? 1 : 0;
    }

    ModelHandle model;
    check(ltlm_train(&options, vocab.ptr, train_corpus.ptr, valid_corpus.ptr, &model.ptr));

    std::ifstream log(log_path);
    std::string line;
    while (std::getline(log, line)) std::printf("%s\n", line.c_str());
    std::printf("checkpoint_dir=%s best=%s/best.ckpt\n", checkpoint_dir.c_str(),
                checkpoint_dir.c_str());
    return kExitOk;
}

int cmd_eval(const RunConfig& config) {
    config.require_paths({"checkpoint", "test_path"});
    VocabHandle vocab;
    load_vocab_for_checkpoint(config, vocab);

    ModelHandle model;
    check(ltlm_model_load(config.get("checkpoint").c_str(), &model.ptr));
    CorpusHandle corpus;
    check(ltlm_corpus_load(config.get("test_path").c_str(), vocab.ptr, &corpus.ptr));

    ltlm_ppl_report report;
    check(ltlm_perplexity(model.ptr, corpus.ptr, parse_mode(config.get("mode")), &report));

    std::ostringstream out;
    out << "metric=ppl value=" << report.ppl << " tokens=" << report.token_count
        << " predictions=" << report.predictions << " mode=" << config.get("mode")
        << " checkpoint=" << config.get("checkpoint") << '\n';
    std::fputs(out.str().c_str(), stdout);
    if (config.has("out_path") && !config.get("out_path", "").empty()) {
        std::ofstream file(config.get("out_path"), std::ios::trunc);
        if (!file.good()) throw ConfigError("cannot write report: " + config.get("out_path"));
        file << out.str();
    }
    return kExitOk;
}

int cmd_rescore(const RunConfig& config) {
    config.require_paths({"checkpoint", "nbest_path", "reference_path"});
    VocabHandle vocab;
    load_vocab_for_checkpoint(config, vocab);

    ModelHandle model;
    check(ltlm_model_load(config.get("checkpoint").c_str(), &model.ptr));

    const double lambda = config.get_double("lambda", 1.0);
    if (lambda < 0.0 || lambda > 1.0)
        throw ConfigError("config key 'lambda' must be in [0, 1]");

    std::string detail = config.get("detail_path", "");
    ltlm_wer_report report;
    check(ltlm_rescore(model.ptr, vocab.ptr, config.get("nbest_path").c_str(),
                       config.get("reference_path").c_str(), lambda,
                       detail.empty() ? nullptr : detail.c_str(), &report));

    std::ostringstream out;
    out << "metric=wer value=" << report.wer << " sub=" << report.substitutions
        << " del=" << report.deletions << " ins=" << report.insertions
        << " ref_words=" << report.reference_length << " utterances=" << report.utterance_count
        << " lambda=" << lambda << '\n';
    std::fputs(out.str().c_str(), stdout);
    if (config.has("out_path") && !config.get("out_path", "").empty()) {
        std::ofstream file(config.get("out_path"), std::ios::trunc);
        if (!file.good()) throw ConfigError("cannot write report: " + config.get("out_path"));
        file << out.str();
    }
    return kExitOk;
}

int cmd_probe(const RunConfig& config) {
    config.require_paths({"checkpoint", "snippet_path"});
    VocabHandle vocab;
    load_vocab_for_checkpoint(config, vocab);

    ModelHandle model;
    check(ltlm_model_load(config.get("checkpoint").c_str(), &model.ptr));

    std::ifstream snippet_file(config.get("snippet_path"));
    std::ostringstream snippet;
    snippet << snippet_file.rdbuf();

    IdfHandle idf;
    if (config.has("idf_path") && !config.get("idf_path", "").empty()) {
        config.require_paths({"idf_path"});
        check(ltlm_idf_load(config.get("idf_path").c_str(), vocab.ptr, &idf.ptr));
    }

    std::vector<std::string> schemes;
    std::string requested = config.get("weighting");
    if (requested == "all") requested = "uniform,exponential,word_dependent";
    std::istringstream iss(requested);
    std::string name;
    while (std::getline(iss, name, ',')) schemes.push_back(name);

    const auto top_n = static_cast<int32_t>(config.get_int("top_n", 10));
    const double alpha = config.get_double("alpha", 1.05);

    std::vector<std::vector<std::string>> columns;
    for (const std::string& scheme : schemes) {
        ltlm_probe_result* result = nullptr;
        check(ltlm_probe(model.ptr, vocab.ptr, snippet.str().c_str(), parse_weighting(scheme),
                         alpha, idf.ptr, top_n, &result));
        std::vector<std::string> column;
        for (int32_t i = 0; i < ltlm_probe_count(result); ++i) {
            std::ostringstream cell;
            cell << ltlm_probe_word(result, i) << " (" << std::fixed;
            cell.precision(3);
            cell << ltlm_probe_similarity(result, i) << ")";
            column.push_back(cell.str());
        }
        ltlm_probe_free(result);
        columns.push_back(std::move(column));
    }

    // Table layout: one column per weighting scheme, one row per rank.
    std::printf("%-6s", "rank");
    for (const std::string& scheme : schemes) std::printf("%-28s", scheme.c_str());
    std::printf("\n");
    std::size_t rows = 0;
    for (const auto& c : columns) rows = std::max(rows, c.size());
    for (std::size_t r = 0; r < rows; ++r) {
        std::printf("%-6zu", r + 1);
        for (const auto& c : columns) std::printf("%-28s", r < c.size() ? c[r].c_str() : "");
        std::printf("\n");
    }
    return kExitOk;
}

int cmd_idf(const RunConfig& config) {
    config.require_paths({"train_path"});
    VocabHandle vocab;
    if (config.has("vocab_path") && !config.get("vocab_path", "").empty()) {
        config.require_paths({"vocab_path"});
        check(ltlm_vocab_load(config.get("vocab_path").c_str(), &vocab.ptr));
    } else {
        check(ltlm_vocab_build(config.get("train_path").c_str(),
                               static_cast<int32_t>(config.get_int("vocab_max_size", 0)),
                               &vocab.ptr));
    }
    CorpusHandle corpus;
    check(ltlm_corpus_load(config.get("train_path").c_str(), vocab.ptr, &corpus.ptr));
    IdfHandle idf;
    check(ltlm_idf_compute(corpus.ptr, vocab.ptr, &idf.ptr));

    const std::string out_path = config.get("out_path", config.get("run_dir") + "/idf.txt");
    check(ltlm_idf_save(idf.ptr, vocab.ptr, out_path.c_str()));
    std::printf("documents=%lld words=%d path=%s\n",
                static_cast<long long>(ltlm_idf_documents(idf.ptr)), ltlm_vocab_size(vocab.ptr),
                out_path.c_str());
    return kExitOk;
}

int cmd_gradcheck(const RunConfig& config) {
    ltlm_gradcheck_report report;
    check(ltlm_gradient_check(static_cast<uint64_t>(config.get_int("seed", 1)), &report));
    const double tolerance = 1e-4;
    bool ok = true;
    for (int32_t g = 0; g < report.group_count; ++g) {
        const bool pass = report.max_rel_err[g] < tolerance;
        ok = ok && pass;
        std::printf("group=%-20s max_rel_err=%.3e status=%s\n", report.group_names[g],
                    report.max_rel_err[g], pass ? "ok" : "fail");
    }
    if (!ok) throw CliError{kExitRuntime, "gradient check failed"};
    std::printf("gradcheck=pass groups=%d tolerance=%.0e\n", report.group_count, tolerance);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"word-level LSTM language models with a CBOW long-term context extension"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    bool dump_config = false;

    struct Sub {
        CLI::App* app;
        int (*run)(const RunConfig&);
        const char* name;
    };
    std::vector<Sub> subs;
    auto add = [&](const char* name, const char* desc, int (*run)(const RunConfig&)) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--config", config_path, "key=value config file");
        sub->add_option("--set", overrides, "override a config key (key=value, repeatable)");
        sub->add_flag("--dump-config", dump_config,
                      "print the effective configuration and exit");
        subs.push_back({sub, run, name});
    };
    add("train", "train a model and write per-epoch checkpoints", cmd_train);
    add("eval", "measure perplexity of a checkpoint on a corpus", cmd_eval);
    add("rescore", "n-best rescoring and word error rate", cmd_rescore);
    add("probe", "nearest context-embedding words for a text snippet", cmd_probe);
    add("idf", "compute and export inverse document frequencies", cmd_idf);
    add("gradcheck", "finite-difference check of the backward pass", cmd_gradcheck);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig config;
        if (!config_path.empty()) config = RunConfig::from_file(config_path);
        for (const std::string& pair : overrides) config.set_pair(pair);

        for (const Sub& sub : subs) {
            if (!sub.app->parsed()) continue;
            if (dump_config) {
                std::fputs(config.dump(sub.name).c_str(), stdout);
                return kExitOk;
            }
            echo_effective_config(config, sub.name);
            return sub.run(config);
        }
        std::fprintf(stderr, "error: no subcommand\n");
        return kExitValidation;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitValidation;
    } catch (const CliError& e) {
        std::fprintf(stderr, "error: %s\n", e.message.c_str());
        return e.exit_code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
}
