#include "pivalign/evaluation.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "pivalign/error.h"
#include "pivalign/parallel.h"
#include "pivalign/random.h"

namespace pivalign {

namespace {

using PairKey = std::pair<std::string, std::string>;

void CheckLevels(const AlignmentSet& a, const AlignmentSet& b) {
  if (a.level != b.level) {
    throw DataError("alignment level mismatch: " + std::string(ToString(a.level)) + " vs " +
                    std::string(ToString(b.level)));
  }
}

std::set<PairKey> PairSet(const AlignmentSet& s) {
  std::set<PairKey> out;
  for (const AlignmentPair& p : s.pairs) out.emplace(p.src_id, p.tgt_id);
  return out;
}

}  // namespace

PRF PrfFromCounts(std::size_t n_correct, std::size_t n_pred, std::size_t n_gold) {
  PRF r;
  r.n_correct = n_correct;
  r.n_pred = n_pred;
  r.n_gold = n_gold;
  r.precision = n_pred ? static_cast<double>(n_correct) / static_cast<double>(n_pred) : 0.0;
  r.recall = n_gold ? static_cast<double>(n_correct) / static_cast<double>(n_gold) : 0.0;
  const double denom = r.precision + r.recall;
  r.f1 = denom > 0.0 ? 2.0 * r.precision * r.recall / denom : 0.0;
  return r;
}

PRF Prf(const AlignmentSet& pred, const AlignmentSet& gold) {
  CheckLevels(pred, gold);
  const std::set<PairKey> g = PairSet(gold);
  const std::set<PairKey> p = PairSet(pred);
  std::size_t correct = 0;
  for (const PairKey& k : p) correct += g.count(k);
  return PrfFromCounts(correct, p.size(), g.size());
}

double Agreement(const AlignmentSet& a, const AlignmentSet& b,
                 const std::set<std::string>& universe) {
  CheckLevels(a, b);
  if (universe.empty()) throw DataError("agreement over an empty universe");
  auto partners = [&](const AlignmentSet& s) {
    std::map<std::string, std::set<std::string>> out;
    for (const AlignmentPair& p : s.pairs) {
      if (!universe.count(p.src_id)) {
        throw DataError("item '" + p.src_id + "' is outside the agreement universe");
      }
      out[p.src_id].insert(p.tgt_id);
    }
    return out;
  };
  const auto pa = partners(a);
  const auto pb = partners(b);
  static const std::set<std::string> kNone;
  std::size_t agree = 0;
  for (const std::string& item : universe) {
    auto ia = pa.find(item);
    auto ib = pb.find(item);
    const auto& sa = ia == pa.end() ? kNone : ia->second;
    const auto& sb = ib == pb.end() ? kNone : ib->second;
    agree += sa == sb;
  }
  return static_cast<double>(agree) / static_cast<double>(universe.size());
}

double Significance(const AlignmentSet& pred_a, const AlignmentSet& pred_b,
                    const AlignmentSet& gold, std::size_t n_resamples, std::uint64_t seed,
                    std::size_t jobs) {
  CheckLevels(pred_a, gold);
  CheckLevels(pred_b, gold);
  if (gold.empty()) throw DataError("significance test needs a non-empty gold set");
  if (n_resamples < 100) throw ConfigError("significance test needs at least 100 resamples");

  const std::set<PairKey> g = PairSet(gold);
  // Per target unit: (predicted, correct) counts for each system.
  struct Unit {
    long pred_a = 0, correct_a = 0, pred_b = 0, correct_b = 0;
  };
  std::map<std::string, Unit> by_target;
  for (const PairKey& k : PairSet(pred_a)) {
    Unit& u = by_target[k.second];
    ++u.pred_a;
    u.correct_a += static_cast<long>(g.count(k));
  }
  for (const PairKey& k : PairSet(pred_b)) {
    Unit& u = by_target[k.second];
    ++u.pred_b;
    u.correct_b += static_cast<long>(g.count(k));
  }
  std::vector<Unit> units;
  units.reserve(by_target.size());
  for (const auto& [id, u] : by_target) {
    if (u.pred_a != u.pred_b || u.correct_a != u.correct_b) units.push_back(u);
  }
  long base_pa = 0, base_ca = 0, base_pb = 0, base_cb = 0;
  for (const auto& [id, u] : by_target) {
    base_pa += u.pred_a;
    base_ca += u.correct_a;
    base_pb += u.pred_b;
    base_cb += u.correct_b;
  }
  const std::size_t n_gold = g.size();
  auto gap = [n_gold](long pa, long ca, long pb, long cb) {
    return PrfFromCounts(ca, pa, n_gold).f1 - PrfFromCounts(cb, pb, n_gold).f1;
  };
  const double observed = std::abs(gap(base_pa, base_ca, base_pb, base_cb));

  // Each resample has its own derived seed, so chunking across threads does
  // not change the result.
  std::vector<unsigned char> hit(n_resamples, 0);
  ParallelFor(n_resamples, jobs, [&](std::size_t r) {
    Xorshift64Star rng(SplitMix64(seed ^ SplitMix64(r + 1)));
    long pa = base_pa, ca = base_ca, pb = base_pb, cb = base_cb;
    for (const Unit& u : units) {
      if (!rng.Coin()) continue;
      pa += u.pred_b - u.pred_a;
      ca += u.correct_b - u.correct_a;
      pb += u.pred_a - u.pred_b;
      cb += u.correct_a - u.correct_b;
    }
    hit[r] = std::abs(gap(pa, ca, pb, cb)) >= observed - 1e-12;
  });
  std::size_t hits = 0;
  for (unsigned char h : hit) hits += h;
  return static_cast<double>(hits + 1) / static_cast<double>(n_resamples + 1);
}

std::string ReportJson(const PRF& prf, std::optional<double> p_value) {
  nlohmann::ordered_json j;
  j["precision"] = prf.precision;
  j["recall"] = prf.recall;
  j["f1"] = prf.f1;
  j["n_pred"] = prf.n_pred;
  j["n_gold"] = prf.n_gold;
  j["n_correct"] = prf.n_correct;
  if (p_value) j["p_value"] = *p_value;
  return j.dump();
}

}  // namespace pivalign
