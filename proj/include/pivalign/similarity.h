#ifndef PIVALIGN_SIMILARITY_H_
#define PIVALIGN_SIMILARITY_H_

#include <cstddef>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pivalign/tfidf.h"

namespace pivalign {

enum class MarginVariant { kRatio, kDistance, kAbsolute };

std::string_view ToString(MarginVariant v);
MarginVariant ParseMarginVariant(std::string_view s);

struct MarginConfig {
  std::size_t k = 4;
  MarginVariant variant = MarginVariant::kRatio;

  void Validate() const;
};

inline constexpr double kMarginFloor = 1e-9;

// dot(a, b) / (|a| |b|), or 0 when either norm is 0.
double Cosine(const SparseVector& a, const SparseVector& b);

struct Neighbor {
  std::size_t index;
  double cosine;
};

// The min(k, |pool|) largest cosines, descending, ties by ascending index.
std::vector<Neighbor> KnnCosines(const SparseVector& query, std::span<const SparseVector> pool,
                                 std::size_t k);

// Mean of the top-min(k, |pool|) cosines of query against pool.
double NeighborhoodMean(const SparseVector& query, std::span<const SparseVector> pool,
                        std::size_t k);

// Combines a pair cosine with the two neighborhood means:
//   m = mean_x / 2 + mean_y / 2
//   ratio: a / max(m, 1e-9)   distance: a - m   absolute: a
double MarginFromParts(double cosine, double mean_x, double mean_y, MarginVariant variant);

// pool_x holds the candidates x is compared against, pool_y those of y.
double MarginScore(const SparseVector& x, const SparseVector& y,
                   std::span<const SparseVector> pool_x, std::span<const SparseVector> pool_y,
                   const MarginConfig& config);

// Dense rows x cols matrix, row-major.
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), values(r * c, fill) {}
  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

Grid CosineGrid(std::span<const SparseVector> rows, std::span<const SparseVector> cols);

// Per-row and per-column neighborhood means of a cosine grid (row r's pool is
// every column and vice versa).
std::vector<double> RowMeans(const Grid& cosines, std::size_t k);
std::vector<double> ColMeans(const Grid& cosines, std::size_t k);

// Margin score of every (row, col) pair given the neighborhood means.
Grid MarginGrid(const Grid& cosines, std::span<const double> row_means,
                std::span<const double> col_means, MarginVariant variant);

// Convenience: margin grid with neighborhoods taken within the two sets.
Grid MarginGrid(std::span<const SparseVector> rows, std::span<const SparseVector> cols,
                const MarginConfig& config);

}  // namespace pivalign

#endif  // PIVALIGN_SIMILARITY_H_
