#include "ltlm/corpus.hpp"

#include <fstream>
#include <sstream>

namespace ltlm {

namespace {

// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
std::size_t first_invalid_utf8(const std::string& s) {
    const auto* p = reinterpret_cast<const unsigned char*>(s.data());
    std::size_t i = 0, n = s.size();
    while (i < n) {
        unsigned char c = p[i];
        std::size_t len;
        std::uint32_t cp;
        if (c < 0x80) { ++i; continue; }
        else if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1Fu; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0Fu; }
        else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07u; }
        else return i;
        if (i + len > n) return i;
        for (std::size_t k = 1; k < len; ++k) {
            if ((p[i + k] & 0xC0) != 0x80) return i;
            cp = (cp << 6) | (p[i + k] & 0x3Fu);
        }
        // overlong encodings, surrogates, out-of-range code points
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000))
            return i;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return i;
        i += len;
    }
    return std::string::npos;
}

bool is_blank(const std::string& line) {
    for (char c : line)
        if (c != ' ' && c != '\t' && c != '\r') return false;
    return true;
}

} // namespace

EncodeResult encode(const std::string& text, const Vocabulary& vocab) {
    EncodeResult result;
    TokenStream& ts = result.stream;

    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool pending_doc_break = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t bad = first_invalid_utf8(line);
        if (bad != std::string::npos)
            fail(ErrorCode::Format, "invalid UTF-8 at line " + std::to_string(line_no) +
                                    ", byte " + std::to_string(bad + 1));
        if (is_blank(line)) {
            if (!ts.tokens.empty()) pending_doc_break = true;
            continue;
        }
        if (pending_doc_break) {
            ts.document_end.back() = true;
            pending_doc_break = false;
        }
        std::istringstream words(line);
        std::string w;
        while (words >> w) {
            std::int32_t id = vocab.lookup(w);
            if (id == vocab.unk_id() && w != kUnkWord) ++result.oov_count;
            ++result.word_count;
            ts.tokens.push_back(id);
            ts.sentence_end.push_back(false);
            ts.document_end.push_back(false);
        }
        ts.tokens.push_back(vocab.eos_id());
        ts.sentence_end.push_back(true);
        ts.document_end.push_back(false);
    }
    if (!ts.tokens.empty()) ts.document_end.back() = true;
    return result;
}

EncodeResult encode_file(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open corpus file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return encode(buf.str(), vocab);
}

std::string decode(const TokenStream& stream, const Vocabulary& vocab) {
    std::string out;
    bool at_line_start = true;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        std::int32_t id = stream.tokens[t];
        if (id == vocab.eos_id() && stream.sentence_end[t]) {
            out += '\n';
            if (stream.document_end[t] && t + 1 < stream.size()) out += '\n';
            at_line_start = true;
            continue;
        }
        if (!at_line_start) out += ' ';
        out += vocab.word(id);
        at_line_start = false;
    }
    return out;
}

std::vector<std::string> read_corpus_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCode::Io, "cannot open corpus file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

std::vector<TokenStream> split_documents(const TokenStream& stream) {
    std::vector<TokenStream> docs;
    TokenStream cur;
    for (std::size_t t = 0; t < stream.size(); ++t) {
        cur.tokens.push_back(stream.tokens[t]);
        cur.sentence_end.push_back(stream.sentence_end[t]);
        cur.document_end.push_back(stream.document_end[t]);
        if (stream.document_end[t]) {
            docs.push_back(std::move(cur));
            cur = TokenStream{};
        }
    }
    if (!cur.tokens.empty()) docs.push_back(std::move(cur));
    return docs;
}

} // namespace ltlm
