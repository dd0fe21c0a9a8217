#pragma once

#include <string>
#include <utility>
#include <vector>

namespace orch {

// Fixed ES<->EN token table shipped with the project (also exported as
// data/lexicon.csv). Normalization maps Spanish operational tokens to the
// English canonical vocabulary; unknown tokens map to "unknown".
class Lexicon {
public:
    static const Lexicon& shipped();

    // ES -> EN; EN tokens pass through; anything else -> "unknown".
    std::string normalize(const std::string& token) const;

    // EN -> ES; identity when the token has no Spanish counterpart.
    std::string localize(const std::string& token) const;

    bool is_english_token(const std::string& token) const;

    const std::vector<std::pair<std::string, std::string>>& pairs() const { return pairs_; }

    std::string to_csv() const; // "es_token,en_token" rows with header

private:
    Lexicon();
    std::vector<std::pair<std::string, std::string>> pairs_; // (es, en)
};

std::string normalize_language(const std::string& token, const Lexicon& lexicon);

} // namespace orch
