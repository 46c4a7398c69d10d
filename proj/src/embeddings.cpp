#include "ltlm/embeddings.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace ltlm {

Matrix load_pretrained_embeddings(const std::string& path, const Vocabulary& vocab,
                                  std::size_t expected_dim, Rng& fallback_rng,
                                  double init_range) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open embeddings file: " + path);

    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCode::Format,
            "embeddings file is empty: " + path);
    std::istringstream header(line);
    std::uint64_t count = 0, dim = 0;
    std::string extra;
    if (!(header >> count >> dim) || (header >> extra))
        fail(ErrorCode::Format, "embeddings header must be 'count dim' (line 1): " + path);
    require(dim == expected_dim, ErrorCode::InvalidArgument,
            "embedding dim " + std::to_string(dim) + " does not match configured dim " +
                std::to_string(expected_dim) + ": " + path);

    Matrix table(vocab.size(), expected_dim);
    std::vector<bool> covered(vocab.size(), false);

    std::size_t line_no = 1, rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        ++rows;
        std::istringstream iss(line);
        std::string word;
        iss >> word;
        std::vector<double> values(expected_dim);
        for (std::size_t d = 0; d < expected_dim; ++d) {
            if (!(iss >> values[d]))
                fail(ErrorCode::Format, "embeddings row has fewer than " +
                                            std::to_string(expected_dim) + " values (line " +
                                            std::to_string(line_no) + "): " + path);
        }
        if (iss >> extra)
            fail(ErrorCode::Format, "embeddings row has more than " + std::to_string(expected_dim) +
                                        " values (line " + std::to_string(line_no) + "): " + path);
        if (!vocab.contains(word)) continue;
        auto id = static_cast<std::size_t>(vocab.lookup(word));
        for (std::size_t d = 0; d < expected_dim; ++d) table(id, d) = values[d];
        covered[id] = true;
    }
    require(rows == count, ErrorCode::Format,
            "embeddings header declares " + std::to_string(count) + " rows but file has " +
                std::to_string(rows) + ": " + path);

    for (std::size_t id = 0; id < vocab.size(); ++id) {
        if (covered[id]) continue;
        for (std::size_t d = 0; d < expected_dim; ++d)
            table(id, d) = fallback_rng.uniform(-init_range, init_range);
    }
    return table;
}

} // namespace ltlm
