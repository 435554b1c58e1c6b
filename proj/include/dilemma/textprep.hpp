#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace dilemma {

/// Identifies the tokenization convention in run manifests.
inline constexpr std::string_view kTokenizerConvention = "unicode-word-lowercase-v1";

using TokenStream = std::vector<std::string>;

/// Splits on anything that is not a letter or digit, lowercases, and drops
/// the separators. Letters outside ASCII are kept; case folding covers
/// Latin-1, Latin Extended-A, Greek and Cyrillic. Independent of locale.
TokenStream tokenize(std::string_view text);

using Ngram = std::vector<std::string>;

struct NgramCounts {
    std::size_t n = 1;
    std::map<Ngram, std::size_t> counts;

    std::size_t total() const;
    std::size_t count(const Ngram& gram) const;
};

/// Sliding-window n-gram counts. Throws InvalidN for n < 1.
NgramCounts ngrams(const TokenStream& tokens, std::size_t n);

}  // namespace dilemma
