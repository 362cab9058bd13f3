#include "pivalign/dedup.h"

#include <ostream>

#include "pivalign/error.h"
#include "pivalign/random.h"
#include "pivalign/text.h"

namespace pivalign {

namespace {

constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;
constexpr std::uint64_t kBaseHi = 0x1f3d5b79a2c4e687ULL % kMersenne61;
constexpr std::uint64_t kBaseLo = 0x0a4b6c8d9e1f2031ULL % kMersenne61;

std::uint64_t MulMod(std::uint64_t a, std::uint64_t b) {
  const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
  std::uint64_t r = static_cast<std::uint64_t>(p & kMersenne61) + static_cast<std::uint64_t>(p >> 61);
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

std::uint64_t AddMod(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = a + b;
  if (r >= kMersenne61) r -= kMersenne61;
  return r;
}

std::uint64_t SubMod(std::uint64_t a, std::uint64_t b) {
  return a >= b ? a - b : a + kMersenne61 - b;
}

std::uint64_t PowMod(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  while (exp) {
    if (exp & 1) r = MulMod(r, base);
    base = MulMod(base, base);
    exp >>= 1;
  }
  return r;
}

// Token symbols in [1, p): zero would make leading-zero windows collide.
std::uint64_t Symbol(std::uint64_t id, std::uint64_t salt) {
  return SplitMix64(id ^ salt) % (kMersenne61 - 1) + 1;
}

}  // namespace

TokenCorpus WordTokens(const std::vector<std::string>& texts) {
  TokenCorpus out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(SplitWhitespace(t));
  return out;
}

RollingWindowHash::RollingWindowHash(std::size_t window) : window_(window) {
  if (window < 1) throw ConfigError("substring length must be >= 1");
  pow_hi_ = PowMod(kBaseHi, window - 1);
  pow_lo_ = PowMod(kBaseLo, window - 1);
}

std::vector<Digest128> RollingWindowHash::Windows(const std::vector<std::uint64_t>& seq) const {
  std::vector<Digest128> out;
  if (seq.size() < window_) return out;
  out.reserve(seq.size() - window_ + 1);
  std::uint64_t hi = 0, lo = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const std::uint64_t sh = Symbol(seq[i], 0x5bd1e995ULL);
    const std::uint64_t sl = Symbol(seq[i], 0xc2b2ae35ULL);
    if (i >= window_) {
      const std::uint64_t oh = Symbol(seq[i - window_], 0x5bd1e995ULL);
      const std::uint64_t ol = Symbol(seq[i - window_], 0xc2b2ae35ULL);
      hi = SubMod(hi, MulMod(oh, pow_hi_));
      lo = SubMod(lo, MulMod(ol, pow_lo_));
    }
    hi = AddMod(MulMod(hi, kBaseHi), sh);
    lo = AddMod(MulMod(lo, kBaseLo), sl);
    if (i + 1 >= window_) out.push_back({hi, lo});
  }
  return out;
}

std::vector<std::uint64_t> TokenIds(const TokenSeq& seq) {
  std::vector<std::uint64_t> out;
  out.reserve(seq.size());
  for (const std::string& t : seq) out.push_back(Fnv1a(t));
  return out;
}

SubstringIndex::SubstringIndex(const TokenCorpus& side, std::size_t length) : length_(length) {
  const RollingWindowHash hasher(length);
  for (const TokenSeq& seq : side) {
    for (const Digest128& d : hasher.Windows(TokenIds(seq))) {
      ++counts_[d];
      ++total_;
    }
  }
}

std::size_t SubstringIndex::count(const Digest128& d) const {
  auto it = counts_.find(d);
  return it == counts_.end() ? 0 : it->second;
}

DupProfile DupWithin(const TokenCorpus& side, const std::vector<std::size_t>& lengths,
                     std::string label) {
  DupProfile profile;
  profile.label = std::move(label);
  profile.kind = DupKind::kWithin;
  for (std::size_t len : lengths) {
    const SubstringIndex index(side, len);
    const RollingWindowHash hasher(len);
    std::size_t dup = 0;
    for (const TokenSeq& seq : side) {
      for (const Digest128& d : hasher.Windows(TokenIds(seq))) dup += index.count(d) >= 2;
    }
    profile.lengths.push_back(len);
    profile.probs.push_back(index.total_windows()
                                ? static_cast<double>(dup) / static_cast<double>(index.total_windows())
                                : 0.0);
  }
  return profile;
}

DupProfile DupCross(const TokenCorpus& eval_side, const TokenCorpus& train_side,
                    const std::vector<std::size_t>& lengths, std::string label) {
  DupProfile profile;
  profile.label = std::move(label);
  profile.kind = DupKind::kCross;
  for (std::size_t len : lengths) {
    const SubstringIndex train(train_side, len);
    const RollingWindowHash hasher(len);
    std::size_t total = 0, hits = 0;
    for (const TokenSeq& seq : eval_side) {
      for (const Digest128& d : hasher.Windows(TokenIds(seq))) {
        ++total;
        hits += train.contains(d);
      }
    }
    profile.lengths.push_back(len);
    profile.probs.push_back(total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0);
  }
  return profile;
}

void WriteProfileCsv(const std::vector<DupProfile>& profiles, std::ostream& out) {
  out << "length,series,prob\n";
  for (const DupProfile& p : profiles) {
    for (std::size_t i = 0; i < p.lengths.size(); ++i) {
      out << p.lengths[i] << ',' << p.label << ',' << FormatDouble(p.probs[i]) << '\n';
    }
  }
}

LeakSplit FilterLeaky(const TokenCorpus& eval_side, const TokenCorpus& train_side,
                      const LeakFilterConfig& config) {
  if (config.min_len < 1) throw ConfigError("leak filter min_len must be >= 1");
  // A window longer than min_len occurs in train iff some window of exactly
  // min_len + 1 tokens does.
  const std::size_t window =
      config.rule == LeakRule::kLongWindow ? config.min_len + 1 : config.count_window;
  const SubstringIndex train(train_side, window);
  const RollingWindowHash hasher(window);
  LeakSplit split;
  for (std::size_t i = 0; i < eval_side.size(); ++i) {
    std::size_t hits = 0;
    for (const Digest128& d : hasher.Windows(TokenIds(eval_side[i]))) hits += train.contains(d);
    const bool leaky = config.rule == LeakRule::kLongWindow ? hits > 0 : hits > config.min_count;
    (leaky ? split.removed : split.kept).push_back(i);
  }
  return split;
}

}  // namespace pivalign
