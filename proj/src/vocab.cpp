#include "opm/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "opm/errors.hpp"

namespace opm {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) {
            out.push_back(word);
            word.clear();
        }
    };
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            word.push_back(static_cast<char>(std::tolower(c)));
        } else if (std::isspace(c)) {
            flush();
        } else {
            flush();
            out.emplace_back(1, static_cast<char>(c));
        }
    }
    flush();
    return out;
}

Vocab Vocab::build(const std::vector<std::string>& texts, int min_freq) {
    std::map<std::string, int> counts;  // ordered map keeps ties lexicographic
    for (const auto& t : texts)
        for (const auto& w : tokenize(t)) ++counts[w];

    std::vector<std::pair<std::string, int>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    Vocab v;
    v.words_ = {"<pad>", "<unk>", "<self>", "<opp>"};
    for (const auto& [w, c] : items)
        if (c >= min_freq) v.words_.push_back(w);
    v.rebuild_index();
    return v;
}

Vocab Vocab::from_words(std::vector<std::string> words) {
    if (words.size() < 4 || words[0] != "<pad>" || words[1] != "<unk>" || words[2] != "<self>" || words[3] != "<opp>")
        throw ValidationError("vocab: word list missing reserved entries");
    Vocab v;
    v.words_ = std::move(words);
    v.rebuild_index();
    return v;
}

void Vocab::rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < words_.size(); ++i) index_[words_[i]] = static_cast<int>(i);
}

int Vocab::id_of(const std::string& word) const {
    auto it = index_.find(word);
    return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(const std::string& text, int max_tokens) const {
    std::vector<int> ids;
    for (const auto& w : tokenize(text)) {
        if (static_cast<int>(ids.size()) >= max_tokens) break;
        ids.push_back(id_of(w));
    }
    return ids;
}

}  // namespace opm
