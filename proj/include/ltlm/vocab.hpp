#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ltlm/error.hpp"

namespace ltlm {

inline constexpr const char* kUnkWord = "<unk>";
inline constexpr const char* kEosWord = "<eos>";

// Word <-> id bijection. <unk> and <eos> are always present.
class Vocabulary {
public:
    // Frequency-ordered truncation over whitespace-tokenized lines.
    // max_size counts retained non-special words; 0 keeps everything.
    // Frequency ties are broken lexicographically so the result is stable.
    static Vocabulary build(const std::vector<std::string>& lines, std::size_t max_size);

    // Explicit word list, id = position. Specials are appended when absent.
    static Vocabulary from_words(const std::vector<std::string>& words);

    static Vocabulary load(const std::string& path);
    void save(const std::string& path) const;

    std::int32_t lookup(const std::string& word) const {
        auto it = word_to_id_.find(word);
        return it == word_to_id_.end() ? unk_id_ : it->second;
    }

    bool contains(const std::string& word) const {
        return word_to_id_.find(word) != word_to_id_.end();
    }

    const std::string& word(std::int32_t id) const {
        require(id >= 0 && static_cast<std::size_t>(id) < words_.size(),
                ErrorCode::InvalidArgument, "Vocabulary::word: id out of range");
        return words_[static_cast<std::size_t>(id)];
    }

    std::size_t size() const noexcept { return words_.size(); }
    std::int32_t unk_id() const noexcept { return unk_id_; }
    std::int32_t eos_id() const noexcept { return eos_id_; }

    // FNV-1a over the ordered word list; stored in checkpoints so a model is
    // never evaluated against a stream encoded with a different vocabulary.
    std::uint64_t hash() const;

private:
    void add(const std::string& word);

    std::unordered_map<std::string, std::int32_t> word_to_id_;
    std::vector<std::string> words_;
    std::int32_t unk_id_ = -1;
    std::int32_t eos_id_ = -1;
};

} // namespace ltlm
