#ifndef PIVALIGN_TEXT_H_
#define PIVALIGN_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace pivalign {

// Decodes one UTF-8 code point starting at s[pos]. Returns the byte length
// (1..4) and stores the code point; malformed input decodes as a single byte
// with code point 0xFFFFFFFF.
std::size_t DecodeUtf8(std::string_view s, std::size_t pos, char32_t* cp);

void AppendUtf8(char32_t cp, std::string* out);

bool IsUnicodeSpace(char32_t cp);

// Byte length of the whitespace code point at s[pos], or 0 if none.
std::size_t WhitespaceAt(std::string_view s, std::size_t pos);

std::string_view Trim(std::string_view s);

// Splits on runs of Unicode whitespace; never yields empty pieces.
std::vector<std::string> SplitWhitespace(std::string_view s);

// Alternating whitespace / non-whitespace runs covering s exactly.
struct Segment {
  std::string_view text;
  bool space;
};
std::vector<Segment> Segments(std::string_view s);

std::vector<std::string> SplitChar(std::string_view s, char delim);

std::string AsciiLower(std::string_view s);

// Shortest round-trip decimal representation.
std::string FormatDouble(double v);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace pivalign

#endif  // PIVALIGN_TEXT_H_
