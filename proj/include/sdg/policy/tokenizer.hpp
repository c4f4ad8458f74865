#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdg/core/errors.hpp"

namespace sdg {

// Closed lowercase vocabulary. The reserved unknown and end-of-sequence
// tokens always occupy slots 0 and 1, so a saved token list reconstructs an
// identical vocabulary.
class Vocabulary {
  public:
    static constexpr const char* unk_token = "<unk>";
    static constexpr const char* eos_token = "<eos>";

    Vocabulary() : Vocabulary(std::vector<std::string>{}) {}

    explicit Vocabulary(const std::vector<std::string>& words) {
        add(unk_token);
        add(eos_token);
        for (const auto& w : words) {
            std::string lw = lower(w);
            if (index_.count(lw)) {
                if (lw == unk_token || lw == eos_token) continue;
                throw ConfigError("duplicate vocabulary word: " + lw);
            }
            add(lw);
        }
    }

    int size() const { return static_cast<int>(tokens_.size()); }
    int unk_id() const { return 0; }
    int eos_id() const { return 1; }
    const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    const std::vector<std::string>& tokens() const { return tokens_; }

    std::optional<int> id_of(const std::string& word) const {
        auto it = index_.find(lower(word));
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    // Lowercased whitespace split; out-of-vocabulary words collapse to <unk>.
    std::vector<int> tokenize(const std::string& text) const {
        std::vector<int> ids;
        std::string word;
        for (char c : text) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                flush(word, ids);
            } else {
                word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
        }
        flush(word, ids);
        return ids;
    }

    std::string detokenize(const std::vector<int>& ids) const {
        std::string out;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            if (i) out += ' ';
            out += token(ids[i]);
        }
        return out;
    }

  private:
    static std::string lower(const std::string& w) {
        std::string out = w;
        for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    }

    void add(const std::string& t) {
        index_[t] = size();
        tokens_.push_back(t);
    }

    void flush(std::string& word, std::vector<int>& ids) const {
        if (word.empty()) return;
        auto it = index_.find(word);
        ids.push_back(it == index_.end() ? unk_id() : it->second);
        word.clear();
    }

    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> index_;
};

}  // namespace sdg
