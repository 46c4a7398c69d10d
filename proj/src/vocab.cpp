#include "ltlm/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace ltlm {

void Vocabulary::add(const std::string& word) {
    if (word_to_id_.count(word)) return;
    auto id = static_cast<std::int32_t>(words_.size());
    word_to_id_.emplace(word, id);
    words_.push_back(word);
    if (word == kUnkWord) unk_id_ = id;
    if (word == kEosWord) eos_id_ = id;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& lines, std::size_t max_size) {
    std::unordered_map<std::string, std::uint64_t> counts;
    std::size_t total_words = 0;
    for (const std::string& line : lines) {
        std::istringstream iss(line);
        std::string w;
        while (iss >> w) {
            ++counts[w];
            ++total_words;
        }
    }
    require(total_words > 0, ErrorCode::InvalidArgument, "build_vocabulary: empty corpus");

    std::vector<std::pair<std::string, std::uint64_t>> order(counts.begin(), counts.end());
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (max_size > 0 && order.size() > max_size) order.resize(max_size);

    Vocabulary v;
    v.add(kUnkWord);
    v.add(kEosWord);
    for (const auto& [word, count] : order) v.add(word);
    return v;
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
    Vocabulary v;
    for (const std::string& w : words) v.add(w);
    if (v.unk_id_ < 0) v.add(kUnkWord);
    if (v.eos_id_ < 0) v.add(kEosWord);
    return v;
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCode::Io, "cannot open vocabulary file: " + path);
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        require(!line.empty(), ErrorCode::Format, "vocabulary file has an empty line: " + path);
        words.push_back(line);
    }
    require(!words.empty(), ErrorCode::Format, "vocabulary file is empty: " + path);
    return from_words(words);
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), ErrorCode::Io, "cannot write vocabulary file: " + path);
    for (const std::string& w : words_) out << w << '\n';
    require(out.good(), ErrorCode::Io, "write failed: " + path);
}

std::uint64_t Vocabulary::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    for (const std::string& w : words_) {
        for (char c : w) mix(static_cast<unsigned char>(c));
        mix('\n');
    }
    return h;
}

} // namespace ltlm
