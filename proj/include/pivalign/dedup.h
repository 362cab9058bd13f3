#ifndef PIVALIGN_DEDUP_H_
#define PIVALIGN_DEDUP_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pivalign/tfidf.h"

namespace pivalign {

// Token windows never span two sequences (sentences).
using TokenCorpus = std::vector<TokenSeq>;

// Whitespace word tokens of every text.
TokenCorpus WordTokens(const std::vector<std::string>& texts);

struct Digest128 {
  std::uint64_t hi = 0;
  std::uint64_t lo = 0;
  friend bool operator==(const Digest128&, const Digest128&) = default;
};

struct Digest128Hash {
  std::size_t operator()(const Digest128& d) const {
    return static_cast<std::size_t>(d.hi ^ (d.lo * 0x9e3779b97f4a7c15ULL));
  }
};

// Polynomial rolling hash over token ids in two independent 61-bit Mersenne
// prime fields.
class RollingWindowHash {
 public:
  explicit RollingWindowHash(std::size_t window);

  // Digest of every length-`window` window of seq, in position order.
  std::vector<Digest128> Windows(const std::vector<std::uint64_t>& seq) const;

 private:
  std::size_t window_;
  std::uint64_t pow_hi_;
  std::uint64_t pow_lo_;
};

// Maps tokens to stable 64-bit ids (FNV-1a of the token bytes).
std::vector<std::uint64_t> TokenIds(const TokenSeq& seq);

// Window digests of one side at one length, with occurrence counts.
class SubstringIndex {
 public:
  SubstringIndex(const TokenCorpus& side, std::size_t length);

  std::size_t length() const { return length_; }
  std::size_t total_windows() const { return total_; }
  std::size_t count(const Digest128& d) const;
  bool contains(const Digest128& d) const { return count(d) > 0; }

 private:
  std::size_t length_;
  std::size_t total_ = 0;
  std::unordered_map<Digest128, std::uint32_t, Digest128Hash> counts_;
};

enum class DupKind { kWithin, kCross };

struct DupProfile {
  std::string label;
  DupKind kind = DupKind::kWithin;
  std::vector<std::size_t> lengths;
  std::vector<double> probs;
};

// For each L: windows whose content occurs at >= 2 positions of the side,
// divided by the number of windows (0 when there are none).
DupProfile DupWithin(const TokenCorpus& side, const std::vector<std::size_t>& lengths,
                     std::string label = "within");

// For each L: fraction of eval windows that also occur somewhere in train.
DupProfile DupCross(const TokenCorpus& eval_side, const TokenCorpus& train_side,
                    const std::vector<std::size_t>& lengths, std::string label = "cross");

// CSV "length,series,prob", one row per (profile, length).
void WriteProfileCsv(const std::vector<DupProfile>& profiles, std::ostream& out);

enum class LeakRule {
  // Remove when some window longer than min_len tokens occurs in train.
  kLongWindow,
  // Remove when more than min_count windows of count_window tokens occur in train.
  kWindowCount,
};

struct LeakFilterConfig {
  LeakRule rule = LeakRule::kLongWindow;
  std::size_t min_len = 10;
  std::size_t count_window = 3;
  std::size_t min_count = 10;
};

struct LeakSplit {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> removed;
};

// Partitions eval item indices; eval_side[i] is the measured side of item i.
LeakSplit FilterLeaky(const TokenCorpus& eval_side, const TokenCorpus& train_side,
                      const LeakFilterConfig& config = {});

}  // namespace pivalign

#endif  // PIVALIGN_DEDUP_H_
