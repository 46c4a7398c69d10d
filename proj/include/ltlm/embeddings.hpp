#pragma once

#include <string>

#include "ltlm/matrix.hpp"
#include "ltlm/rng.hpp"
#include "ltlm/vocab.hpp"

namespace ltlm {

// Loads word2vec text format: a "count dim" header line, then one
// "word v1 ... v_dim" line per word. Rows for vocabulary words found in the
// file are copied; missing vocabulary words are initialized U[-init_range,
// init_range) from fallback_rng; file words outside the vocabulary are
// ignored. dim must equal expected_dim. Arity problems are reported with
// their line number.
Matrix load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                                  std::size_t expected_dim, Rng& fallback_rng,
                                  double init_range = 0.05);

} // namespace ltlm
