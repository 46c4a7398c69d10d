#include "ltlm/idf.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace ltlm {

IdfTable compute_idf(const std::vector<TokenStream>& documents, const Vocabulary& vocab) {
    require(!documents.empty(), ErrorCode::InvalidArgument, "compute_idf: no documents");
    std::vector<std::int64_t> df(vocab.size(), 0);
    for (const TokenStream& doc : documents) {
        std::unordered_set<std::int32_t> seen(doc.tokens.begin(), doc.tokens.end());
        for (std::int32_t id : seen) ++df[static_cast<std::size_t>(id)];
    }
    IdfTable table;
    table.document_count = static_cast<std::int64_t>(documents.size());
    table.weights.resize(vocab.size());
    const double n = static_cast<double>(documents.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        table.weights[i] = df[i] == 0 ? std::log(n) + 1.0
                                      : std::log(n / static_cast<double>(df[i]));
    }
    return table;
}

IdfTable compute_idf(const TokenStream& stream, const Vocabulary& vocab) {
    return compute_idf(split_documents(stream), vocab);
}

void save_idf(const IdfTable& table, const Vocabulary& vocab, const std::string& path) {
    require(table.weights.size() == vocab.size(), ErrorCode::InvalidArgument,
            "save_idf: table does not cover the vocabulary");
    std::ofstream out(path);
    require(out.good(), ErrorCode::Io, "cannot write idf file: " + path);
    out << "# documents: " << table.document_count << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < vocab.size(); ++i)
        out << vocab.word(static_cast<std::int32_t>(i)) << '\t' << table.weights[i] << '\n';
    require(out.good(), ErrorCode::Io, "write failed: " + path);
}

IdfTable load_idf(const std::string& path, const Vocabulary& vocab) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open idf file: " + path);
    IdfTable table;
    table.weights.assign(vocab.size(), -1.0);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto pos = line.find("documents:");
            if (pos != std::string::npos)
                table.document_count = std::stoll(line.substr(pos + 10));
            continue;
        }
        std::istringstream iss(line);
        std::string word;
        double w;
        if (!(iss >> word >> w))
            fail(ErrorCode::Format, "malformed idf line " + std::to_string(line_no) + ": " + path);
        if (!vocab.contains(word))
            continue; // table may come from a larger vocabulary
        table.weights[static_cast<std::size_t>(vocab.lookup(word))] = w;
    }
    for (std::size_t i = 0; i < table.weights.size(); ++i)
        require(table.weights[i] >= 0.0, ErrorCode::Format,
                "idf file does not cover word '" + vocab.word(static_cast<std::int32_t>(i)) + "': " + path);
    require(table.document_count > 0, ErrorCode::Format, "idf file lacks a document count: " + path);
    return table;
}

} // namespace ltlm
