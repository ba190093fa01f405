#include "colm/tokenize.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf16.h>
#include <unicode/utf8.h>

#include "colm/error.hpp"

namespace colm::metrics {
namespace {

enum class CharClass { kSpace, kWord, kPunct };

CharClass classify(UChar32 c) {
  if (u_isUWhiteSpace(c)) return CharClass::kSpace;
  if (u_isalnum(c) || (U_GET_GC_MASK(c) & U_GC_M_MASK) != 0) return CharClass::kWord;
  return CharClass::kPunct;
}

void append_utf8(const icu::UnicodeString& s, int32_t start, int32_t limit, std::string& out) {
  icu::UnicodeString piece(s, start, limit - start);
  piece.toUTF8String(out);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  if (text.empty()) return tokens;

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU NFC normalizer unavailable");

  icu::UnicodeString raw = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
  icu::UnicodeString normalized = nfc->normalize(raw, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");
  normalized.toLower(icu::Locale::getRoot());
  // Lowercasing can produce unnormalized sequences.
  normalized = nfc->normalize(normalized, status);
  if (U_FAILURE(status)) throw Error("NFC normalization failed");

  const int32_t length = normalized.length();
  int32_t word_start = -1;
  int32_t i = 0;
  while (i < length) {
    const UChar32 c = normalized.char32At(i);
    const int32_t next = i + U16_LENGTH(c);
    const CharClass cls = classify(c);
    if (cls == CharClass::kWord) {
      if (word_start < 0) word_start = i;
    } else {
      if (word_start >= 0) {
        append_utf8(normalized, word_start, i, tokens.emplace_back());
        word_start = -1;
      }
      if (cls == CharClass::kPunct) append_utf8(normalized, i, next, tokens.emplace_back());
    }
    i = next;
  }
  if (word_start >= 0) append_utf8(normalized, word_start, length, tokens.emplace_back());
  return tokens;
}

bool is_word_token(std::string_view token) {
  if (token.empty()) return false;
  int32_t i = 0;
  UChar32 c;
  U8_NEXT(token.data(), i, static_cast<int32_t>(token.size()), c);
  return c >= 0 && classify(c) == CharClass::kWord;
}

}  // namespace colm::metrics
