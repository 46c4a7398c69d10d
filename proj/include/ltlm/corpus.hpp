#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltlm/vocab.hpp"

namespace ltlm {

// Encoded corpus: token ids plus per-position boundary flags. Every
// document_end position is also a sentence_end position (both sit on the
// <eos> closing the last sentence of a document).
struct TokenStream {
    std::vector<std::int32_t> tokens;
    std::vector<bool> sentence_end;
    std::vector<bool> document_end;

    std::size_t size() const noexcept { return tokens.size(); }
};

struct EncodeResult {
    TokenStream stream;
    std::size_t word_count = 0; // word tokens, excluding appended <eos>
    std::size_t oov_count = 0;

    double oov_rate() const { return word_count == 0 ? 0.0 : static_cast<double>(oov_count) / static_cast<double>(word_count); }
};

// Corpus file format: UTF-8 plain text, one sentence per line (whitespace
// tokenized, one <eos> appended per line), blank line = document boundary.
// Invalid UTF-8 is rejected with the line and byte position.
EncodeResult encode(const std::string& text, const Vocabulary& vocab);

EncodeResult encode_file(const std::string& path, const Vocabulary& vocab);

// Inverse of encode for in-vocabulary text: words joined by spaces, newline
// per sentence, blank line between documents.
std::string decode(const TokenStream& stream, const Vocabulary& vocab);

// Reads lines of a corpus file (used for vocabulary construction).
std::vector<std::string> read_corpus_lines(const std::string& path);

// Splits a stream at document_end flags. The final document is closed by the
// end of the stream even without an explicit flag.
std::vector<TokenStream> split_documents(const TokenStream& stream);

} // namespace ltlm
