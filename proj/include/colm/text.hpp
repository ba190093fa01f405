#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace colm::text {

std::string trim(std::string_view s);

// Collapses every run of whitespace to a single space and trims the ends.
std::string collapse_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Sentence boundaries are '.', '!' or '?' followed by whitespace. The
// terminator stays with its sentence; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view s);

// Comma-delimited clauses of a sentence, trimmed, empty pieces dropped.
std::vector<std::string> split_clauses(std::string_view s);

// Lowercases ASCII letters only; other bytes pass through.
std::string ascii_lower(std::string_view s);

bool iequals_ascii(std::string_view a, std::string_view b);

}  // namespace colm::text
