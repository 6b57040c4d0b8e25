#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace opm {

// Lowercases and splits on whitespace; every non-alphanumeric character
// becomes its own token ("Water!" -> "water", "!").
std::vector<std::string> tokenize(const std::string& text);

// Word-id table built from the training split only. Ids 0..3 are reserved
// for <pad>, <unk>, <self>, <opp>; words below min_freq map to <unk>.
class Vocab {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kSelf = 2;
    static constexpr int kOpp = 3;

    Vocab() = default;

    static Vocab build(const std::vector<std::string>& texts, int min_freq = 2);

    int size() const { return static_cast<int>(words_.size()); }
    int id_of(const std::string& word) const;
    const std::string& word_of(int id) const { return words_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::string>& words() const { return words_; }

    // token ids for a text, truncated to max_tokens entries
    std::vector<int> encode(const std::string& text, int max_tokens) const;

    static Vocab from_words(std::vector<std::string> words);  // checkpoint load

private:
    std::vector<std::string> words_;
    std::unordered_map<std::string, int> index_;
    void rebuild_index();
};

}  // namespace opm
