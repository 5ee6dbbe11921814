#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace intercom {

// Lowercased word tokens: maximal runs of ASCII letters, digits, apostrophes
// and any non-ASCII bytes. Leading/trailing apostrophes are trimmed.
std::vector<std::string> tokenize_words(std::string_view text);

// Whitespace-delimited chunks, punctuation preserved.
std::vector<std::string_view> split_whitespace(std::string_view text);

// The lowercased word content of a whitespace chunk ("Idiots!" -> "idiots").
std::string normalize_word(std::string_view chunk);

std::string to_lower(std::string_view s);

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);

// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace intercom
