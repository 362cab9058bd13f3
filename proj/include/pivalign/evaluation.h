#ifndef PIVALIGN_EVALUATION_H_
#define PIVALIGN_EVALUATION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include "pivalign/corpus.h"

namespace pivalign {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t n_pred = 0;
  std::size_t n_gold = 0;
  std::size_t n_correct = 0;
};

// BUCC-style scoring: a prediction is correct iff (src_id, tgt_id) is a gold
// pair. Empty predictions score 0 everywhere.
PRF Prf(const AlignmentSet& pred, const AlignmentSet& gold);

PRF PrfFromCounts(std::size_t n_correct, std::size_t n_pred, std::size_t n_gold);

// Fraction of universe items (source ids) whose assigned partners, or lack of
// one, agree between a and b.
double Agreement(const AlignmentSet& a, const AlignmentSet& b, const std::set<std::string>& universe);

inline constexpr std::size_t kDefaultResamples = 10000;

// Paired approximate randomization on the F1 difference. Units are target ids;
// each resample swaps the two systems' predictions for a unit with
// probability 1/2. Returns (hits + 1) / (n_resamples + 1).
double Significance(const AlignmentSet& pred_a, const AlignmentSet& pred_b,
                    const AlignmentSet& gold, std::size_t n_resamples, std::uint64_t seed,
                    std::size_t jobs = 1);

// {"precision":..,"recall":..,"f1":..,"n_pred":..,"n_gold":..,"n_correct":..}
// with "p_value" appended when given.
std::string ReportJson(const PRF& prf, std::optional<double> p_value = std::nullopt);

}  // namespace pivalign

#endif  // PIVALIGN_EVALUATION_H_
