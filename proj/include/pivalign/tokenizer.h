#ifndef PIVALIGN_TOKENIZER_H_
#define PIVALIGN_TOKENIZER_H_

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace pivalign {

using MergeRule = std::pair<std::string, std::string>;

// Byte-level BPE vocabulary: the 256 single-byte symbols plus the outputs of
// an ordered list of merge rules. Merge order is priority order.
class SubwordVocab {
 public:
  SubwordVocab();
  explicit SubwordVocab(std::vector<MergeRule> merges);

  const std::vector<MergeRule>& merges() const { return merges_; }
  // Number of distinct symbols, bytes included.
  std::size_t size() const { return symbols_.size(); }
  bool contains(std::string_view symbol) const;

  // Segments one whitespace-free word into symbols.
  std::vector<std::string> Encode(std::string_view word) const;

  friend bool operator==(const SubwordVocab& a, const SubwordVocab& b) {
    return a.merges_ == b.merges_;
  }

 private:
  std::vector<MergeRule> merges_;
  std::unordered_set<std::string> symbols_;
  std::unordered_map<std::string, std::size_t> ranks_;
};

inline constexpr std::size_t kByteAlphabetSize = 256;

// Learns merges over whitespace-separated words until the vocabulary holds
// vocab_size symbols or no pair occurs at least twice. Ties between equally
// frequent pairs go to the lexicographically smaller (left, right).
SubwordVocab TrainSubword(const std::vector<std::string>& sentences, std::size_t vocab_size);

// Vocabulary file: "bpe v1 <size>" header, then "left<TAB>right" per merge.
void WriteVocab(const SubwordVocab& vocab, std::ostream& out);
SubwordVocab ParseVocab(std::istream& in);
void SaveVocab(const SubwordVocab& vocab, const std::string& path);
SubwordVocab LoadVocab(const std::string& path);

enum class TokenizerMode { kWhitespace, kSubword };

struct TokenizerConfig {
  TokenizerMode mode = TokenizerMode::kWhitespace;
  std::shared_ptr<const SubwordVocab> vocab;
  // ASCII-only lowercasing; off by default.
  bool lowercase = false;

  void Validate() const;
};

TokenizerConfig WhitespaceTokenizer();
TokenizerConfig SubwordTokenizer(std::shared_ptr<const SubwordVocab> vocab);

// Whitespace mode returns the words. Subword mode also returns each
// whitespace run as its own token, so Detokenize(Tokenize(t)) == t.
std::vector<std::string> Tokenize(std::string_view text, const TokenizerConfig& config);
std::string Detokenize(const std::vector<std::string>& tokens);

// Tokens with the whitespace runs dropped; this is what gets vectorized.
std::vector<std::string> ContentTokens(std::string_view text, const TokenizerConfig& config);

}  // namespace pivalign

#endif  // PIVALIGN_TOKENIZER_H_
