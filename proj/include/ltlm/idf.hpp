#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltlm/corpus.hpp"
#include "ltlm/vocab.hpp"

namespace ltlm {

// Per-token inverse document frequency, idf(w) = ln(N / df(w)). Words that
// appear in no document get ln(N) + 1, a cap above every in-collection value.
struct IdfTable {
    std::vector<double> weights;        // indexed by token id
    std::int64_t document_count = 0;

    double weight(std::int32_t token_id) const {
        require(token_id >= 0 && static_cast<std::size_t>(token_id) < weights.size(),
                ErrorCode::InvalidArgument, "IdfTable: token id out of range");
        return weights[static_cast<std::size_t>(token_id)];
    }
};

IdfTable compute_idf(const std::vector<TokenStream>& documents, const Vocabulary& vocab);

// Convenience: splits the stream at document boundaries first.
IdfTable compute_idf(const TokenStream& stream, const Vocabulary& vocab);

// Text format: '# documents: N' header, then one 'word<TAB>idf' line per id.
void save_idf(const IdfTable& table, const Vocabulary& vocab, const std::string& path);
IdfTable load_idf(const std::string& path, const Vocabulary& vocab);

} // namespace ltlm
