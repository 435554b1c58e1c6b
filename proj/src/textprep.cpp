#include "dilemma/textprep.hpp"

#include "dilemma/error.hpp"
#include "dilemma/util.hpp"

namespace dilemma {

namespace {

bool is_word_char(char32_t c) {
    if (c < 0x80) {
        return (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z') || (c >= U'0' && c <= U'9');
    }
    // Latin-1 punctuation and symbols, except the letters ª µ º.
    if (c >= 0x80 && c <= 0xBF) return c == 0xAA || c == 0xB5 || c == 0xBA;
    if (c == 0xD7 || c == 0xF7) return false;
    // General punctuation, super/subscripts, currency, letterlike arrows etc.
    if (c >= 0x2000 && c <= 0x2BFF) return false;
    // CJK symbols and punctuation.
    if (c >= 0x3000 && c <= 0x303F) return false;
    // Fullwidth ASCII punctuation.
    if ((c >= 0xFF00 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
        (c >= 0xFF5B && c <= 0xFF65)) {
        return false;
    }
    if (c == 0xFEFF || c == 0xFFFD) return false;
    // Emoji and pictographs.
    if (c >= 0x1F000 && c <= 0x1FAFF) return false;
    return true;
}

char32_t fold_case(char32_t c) {
    if (c >= U'A' && c <= U'Z') return c + 32;
    if (c < 0x80) return c;
    if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 32;
    if (c >= 0x100 && c <= 0x137 && (c % 2 == 0)) return c + 1;
    if (c >= 0x139 && c <= 0x148 && (c % 2 == 1)) return c + 1;
    if (c >= 0x14A && c <= 0x177 && (c % 2 == 0)) return c + 1;
    if (c == 0x178) return 0xFF;
    if (c == 0x179 || c == 0x17B || c == 0x17D) return c + 1;
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
    if (c >= 0x410 && c <= 0x42F) return c + 32;
    if (c >= 0x400 && c <= 0x40F) return c + 80;
    return c;
}

}  // namespace

TokenStream tokenize(std::string_view text) {
    TokenStream tokens;
    std::u32string current;
    for (char32_t c : utf8_decode(text)) {
        if (is_word_char(c)) {
            current.push_back(fold_case(c));
        } else if (!current.empty()) {
            tokens.push_back(utf8_encode(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(utf8_encode(current));
    return tokens;
}

std::size_t NgramCounts::total() const {
    std::size_t sum = 0;
    for (const auto& [gram, c] : counts) sum += c;
    return sum;
}

std::size_t NgramCounts::count(const Ngram& gram) const {
    auto it = counts.find(gram);
    return it == counts.end() ? 0 : it->second;
}

NgramCounts ngrams(const TokenStream& tokens, std::size_t n) {
    if (n < 1) throw Error(ErrorCode::InvalidN, "n must be >= 1");
    NgramCounts out{n, {}};
    if (tokens.size() < n) return out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        ++out.counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                           tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
    }
    return out;
}

}  // namespace dilemma
