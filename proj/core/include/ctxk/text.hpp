#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctxk::text {

inline constexpr std::size_t kVectorDim = 256;

// Lower-cased alphanumeric runs; stopwords and single characters dropped.
std::vector<std::string> tokenize(std::string_view s);
// Like tokenize() but keeps stopwords (used for phrase matching).
std::vector<std::string> words(std::string_view s);
bool is_stopword(std::string_view w);

std::size_t utf8_length(std::string_view s);
// ceil(code points / 4); cheap model-free token estimate.
std::size_t token_count(std::string_view s);
// Prefix holding at most `tokens` tokens, cut on a code point boundary.
std::string truncate_to_tokens(std::string_view s, std::size_t tokens);

std::size_t bucket(std::string_view term);

// L2-normalised hashed bag-of-words with sublinear (1 + ln tf) weighting.
// All-zero when the text has no indexable terms.
std::vector<double> term_vector(std::string_view s);

double cosine(std::span<const double> a, std::span<const double> b);

// Smoothed inverse document frequency per bucket over a document set:
// ln((1 + n) / (1 + df)) + 1.
std::vector<double> idf(std::span<const std::vector<double>> docs);

// Element-wise reweighting followed by L2 renormalisation.
std::vector<double> reweight(std::span<const double> v, std::span<const double> weights);

std::string to_lower(std::string_view s);

}  // namespace ctxk::text
