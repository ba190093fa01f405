#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace colm::metrics {

// NFC-normalizes and lowercases `text`, then splits it on whitespace with
// every punctuation or symbol code point emitted as its own token.
// Input must be UTF-8; invalid sequences are replaced with U+FFFD.
std::vector<std::string> tokenize(std::string_view text);

// True when the token starts with a letter, digit or combining mark, i.e.
// it is not a lone punctuation or symbol token.
bool is_word_token(std::string_view token);

}  // namespace colm::metrics
