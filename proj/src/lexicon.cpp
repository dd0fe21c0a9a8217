#include "orch/lexicon.hpp"

namespace orch {

Lexicon::Lexicon() {
    pairs_ = {
        {"urgente", "urgent"},   {"alta", "high"},          {"baja", "low"},
        {"normal", "normal"},    {"averiado", "down"},      {"recoger", "pick"},
        {"empaquetar", "pack"},  {"enviar", "ship"},        {"retrasado", "delayed"},
        {"bloqueado", "blocked"}, {"hecho", "done"},        {"abierto", "open"},
    };
}

const Lexicon& Lexicon::shipped() {
    static const Lexicon instance;
    return instance;
}

std::string Lexicon::normalize(const std::string& token) const {
    for (const auto& [es, en] : pairs_) {
        if (token == es) return en;
    }
    if (is_english_token(token)) return token;
    return "unknown";
}

std::string Lexicon::localize(const std::string& token) const {
    for (const auto& [es, en] : pairs_) {
        if (token == en) return es;
    }
    return token;
}

bool Lexicon::is_english_token(const std::string& token) const {
    for (const auto& [es, en] : pairs_) {
        if (token == en) return true;
    }
    return false;
}

std::string Lexicon::to_csv() const {
    std::string out = "es_token,en_token\n";
    for (const auto& [es, en] : pairs_) {
        out += es;
        out += ',';
        out += en;
        out += '\n';
    }
    return out;
}

std::string normalize_language(const std::string& token, const Lexicon& lexicon) {
    return lexicon.normalize(token);
}

} // namespace orch
