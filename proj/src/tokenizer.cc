#include "pivalign/tokenizer.h"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>

#include "pivalign/error.h"
#include "pivalign/text.h"

namespace pivalign {

namespace {

std::string RankKey(std::string_view left, std::string_view right) {
  std::string key;
  key.reserve(left.size() + right.size() + 1);
  key.append(left);
  key.push_back('\t');
  key.append(right);
  return key;
}

}  // namespace

SubwordVocab::SubwordVocab() {
  for (int b = 0; b < 256; ++b) symbols_.insert(std::string(1, static_cast<char>(b)));
}

SubwordVocab::SubwordVocab(std::vector<MergeRule> merges) : SubwordVocab() {
  merges_ = std::move(merges);
  for (std::size_t i = 0; i < merges_.size(); ++i) {
    const auto& [left, right] = merges_[i];
    if (!contains(left) || !contains(right)) {
      throw DataError("merge " + std::to_string(i) + " uses an unknown symbol");
    }
    ranks_.emplace(RankKey(left, right), i);
    symbols_.insert(left + right);
  }
}

bool SubwordVocab::contains(std::string_view symbol) const {
  return symbols_.count(std::string(symbol)) > 0;
}

std::vector<std::string> SubwordVocab::Encode(std::string_view word) const {
  std::vector<std::string> parts;
  parts.reserve(word.size());
  for (char c : word) parts.emplace_back(1, c);
  while (parts.size() > 1) {
    std::size_t best_rank = SIZE_MAX;
    std::size_t best_pos = 0;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
      auto it = ranks_.find(RankKey(parts[i], parts[i + 1]));
      if (it != ranks_.end() && it->second < best_rank) {
        best_rank = it->second;
        best_pos = i;
      }
    }
    if (best_rank == SIZE_MAX) break;
    const std::string left = parts[best_pos];
    const std::string right = parts[best_pos + 1];
    std::vector<std::string> next;
    next.reserve(parts.size());
    for (std::size_t i = 0; i < parts.size();) {
      if (i + 1 < parts.size() && parts[i] == left && parts[i + 1] == right) {
        next.push_back(left + right);
        i += 2;
      } else {
        next.push_back(std::move(parts[i]));
        ++i;
      }
    }
    parts = std::move(next);
  }
  return parts;
}

namespace {

using PairKey = std::uint64_t;

PairKey MakeKey(std::uint32_t l, std::uint32_t r) { return (PairKey{l} << 32) | r; }
std::uint32_t KeyLeft(PairKey k) { return static_cast<std::uint32_t>(k >> 32); }
std::uint32_t KeyRight(PairKey k) { return static_cast<std::uint32_t>(k); }

// Incremental BPE trainer over symbol ids. Pair counts are kept in a hash map
// and mirrored in an ordered set that yields the next merge directly.
class BpeTrainer {
 public:
  explicit BpeTrainer(const std::vector<std::string>& sentences) : queue_(QueueOrder{this}) {
    for (int b = 0; b < 256; ++b) Intern(std::string(1, static_cast<char>(b)));
    std::map<std::string, std::int64_t> word_counts;
    for (const std::string& s : sentences) {
      for (const Segment& seg : Segments(s)) {
        if (!seg.space) ++word_counts[std::string(seg.text)];
      }
    }
    for (const auto& [word, count] : word_counts) {
      std::vector<std::uint32_t> seq;
      seq.reserve(word.size());
      for (unsigned char c : word) seq.push_back(c);
      words_.push_back(std::move(seq));
      freqs_.push_back(count);
    }
    std::unordered_map<PairKey, std::int64_t> delta;
    for (std::size_t w = 0; w < words_.size(); ++w) AddPairs(w, +1, &delta);
    ApplyDelta(delta);
  }

  std::vector<MergeRule> Run(std::size_t vocab_size) {
    std::vector<MergeRule> merges;
    while (strings_.size() < vocab_size && !queue_.empty()) {
      const auto [count, key] = *queue_.begin();
      if (count < 2) break;
      const std::uint32_t left = KeyLeft(key), right = KeyRight(key);
      merges.emplace_back(strings_[left], strings_[right]);
      const std::uint32_t merged = Intern(strings_[left] + strings_[right]);

      std::vector<std::uint32_t> candidates = std::move(occurrences_[key]);
      occurrences_.erase(key);
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

      std::unordered_map<PairKey, std::int64_t> delta;
      for (std::uint32_t w : candidates) {
        std::vector<std::uint32_t>& seq = words_[w];
        bool present = false;
        for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
          if (seq[i] == left && seq[i + 1] == right) {
            present = true;
            break;
          }
        }
        if (!present) continue;
        AddPairs(w, -1, &delta);
        std::vector<std::uint32_t> next;
        next.reserve(seq.size());
        for (std::size_t i = 0; i < seq.size();) {
          if (i + 1 < seq.size() && seq[i] == left && seq[i + 1] == right) {
            next.push_back(merged);
            i += 2;
          } else {
            next.push_back(seq[i]);
            ++i;
          }
        }
        seq = std::move(next);
        AddPairs(w, +1, &delta);
      }
      ApplyDelta(delta);
    }
    return merges;
  }

 private:
  struct QueueOrder {
    const BpeTrainer* self;
    bool operator()(const std::pair<std::int64_t, PairKey>& a,
                    const std::pair<std::int64_t, PairKey>& b) const {
      if (a.first != b.first) return a.first > b.first;
      const std::string& al = self->strings_[KeyLeft(a.second)];
      const std::string& bl = self->strings_[KeyLeft(b.second)];
      if (al != bl) return al < bl;
      return self->strings_[KeyRight(a.second)] < self->strings_[KeyRight(b.second)];
    }
  };

  std::uint32_t Intern(const std::string& s) {
    auto [it, inserted] = ids_.emplace(s, static_cast<std::uint32_t>(strings_.size()));
    if (inserted) strings_.push_back(s);
    return it->second;
  }

  void AddPairs(std::size_t w, int sign, std::unordered_map<PairKey, std::int64_t>* delta) {
    const std::vector<std::uint32_t>& seq = words_[w];
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const PairKey key = MakeKey(seq[i], seq[i + 1]);
      (*delta)[key] += sign * freqs_[w];
      if (sign > 0) occurrences_[key].push_back(static_cast<std::uint32_t>(w));
    }
  }

  void ApplyDelta(const std::unordered_map<PairKey, std::int64_t>& delta) {
    for (const auto& [key, d] : delta) {
      if (d == 0) continue;
      std::int64_t& count = counts_[key];
      if (count > 0) queue_.erase({count, key});
      count += d;
      if (count > 0) {
        queue_.insert({count, key});
      } else {
        counts_.erase(key);
      }
    }
  }

  std::vector<std::string> strings_;
  std::unordered_map<std::string, std::uint32_t> ids_;
  std::vector<std::vector<std::uint32_t>> words_;
  std::vector<std::int64_t> freqs_;
  std::unordered_map<PairKey, std::int64_t> counts_;
  std::unordered_map<PairKey, std::vector<std::uint32_t>> occurrences_;
  std::set<std::pair<std::int64_t, PairKey>, QueueOrder> queue_;
};

}  // namespace

SubwordVocab TrainSubword(const std::vector<std::string>& sentences, std::size_t vocab_size) {
  if (vocab_size < kByteAlphabetSize) {
    throw ConfigError("vocab_size " + std::to_string(vocab_size) +
                      " is below the byte alphabet size 256");
  }
  if (sentences.empty()) throw DataError("cannot train a subword vocabulary on no sentences");
  BpeTrainer trainer(sentences);
  return SubwordVocab(trainer.Run(vocab_size));
}

void WriteVocab(const SubwordVocab& vocab, std::ostream& out) {
  out << "bpe v1 " << vocab.size() << '\n';
  for (const auto& [left, right] : vocab.merges()) out << left << '\t' << right << '\n';
}

SubwordVocab ParseVocab(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty vocabulary file");
  const std::string prefix = "bpe v1 ";
  if (line.rfind(prefix, 0) != 0) throw DataError("bad vocabulary header '" + line + "'");
  std::size_t declared = 0;
  try {
    declared = std::stoul(line.substr(prefix.size()));
  } catch (const std::exception&) {
    throw DataError("bad vocabulary size in header '" + line + "'");
  }
  std::vector<MergeRule> merges;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw DataError("vocabulary line " + std::to_string(line_no) + ": expected left<TAB>right");
    }
    merges.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  SubwordVocab vocab(std::move(merges));
  if (vocab.size() != declared) {
    throw DataError("vocabulary header declares " + std::to_string(declared) +
                    " symbols but merges yield " + std::to_string(vocab.size()));
  }
  return vocab;
}

void SaveVocab(const SubwordVocab& vocab, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary '" + path + "'");
  WriteVocab(vocab, out);
}

SubwordVocab LoadVocab(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary '" + path + "'");
  return ParseVocab(in);
}

void TokenizerConfig::Validate() const {
  if (mode == TokenizerMode::kSubword && !vocab) {
    throw ConfigError("subword tokenization requires a vocabulary");
  }
}

TokenizerConfig WhitespaceTokenizer() { return TokenizerConfig{}; }

TokenizerConfig SubwordTokenizer(std::shared_ptr<const SubwordVocab> vocab) {
  TokenizerConfig config;
  config.mode = TokenizerMode::kSubword;
  config.vocab = std::move(vocab);
  return config;
}

namespace {

std::vector<std::string> TokenizeImpl(std::string_view raw, const TokenizerConfig& config,
                                      bool keep_space) {
  config.Validate();
  const std::string lowered = config.lowercase ? AsciiLower(raw) : std::string();
  const std::string_view text = config.lowercase ? std::string_view(lowered) : raw;
  std::vector<std::string> out;
  for (const Segment& seg : Segments(text)) {
    if (seg.space) {
      if (keep_space && config.mode == TokenizerMode::kSubword) out.emplace_back(seg.text);
      continue;
    }
    if (config.mode == TokenizerMode::kWhitespace) {
      out.emplace_back(seg.text);
    } else {
      for (std::string& piece : config.vocab->Encode(seg.text)) out.push_back(std::move(piece));
    }
  }
  return out;
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text, const TokenizerConfig& config) {
  return TokenizeImpl(text, config, true);
}

std::string Detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const std::string& t : tokens) out += t;
  return out;
}

std::vector<std::string> ContentTokens(std::string_view text, const TokenizerConfig& config) {
  return TokenizeImpl(text, config, false);
}

}  // namespace pivalign
