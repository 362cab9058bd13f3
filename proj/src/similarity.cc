#include "pivalign/similarity.h"

#include <algorithm>
#include <string>

#include "pivalign/error.h"

namespace pivalign {

std::string_view ToString(MarginVariant v) {
  switch (v) {
    case MarginVariant::kRatio: return "ratio";
    case MarginVariant::kDistance: return "distance";
    case MarginVariant::kAbsolute: return "absolute";
  }
  return "ratio";
}

MarginVariant ParseMarginVariant(std::string_view s) {
  if (s == "ratio") return MarginVariant::kRatio;
  if (s == "distance") return MarginVariant::kDistance;
  if (s == "absolute") return MarginVariant::kAbsolute;
  throw ConfigError("unknown margin variant '" + std::string(s) + "'");
}

void MarginConfig::Validate() const {
  if (k < 1) throw ConfigError("margin k must be >= 1");
}

double Cosine(const SparseVector& a, const SparseVector& b) {
  if (a.norm() == 0.0 || b.norm() == 0.0) return 0.0;
  const double c = Dot(a, b) / (a.norm() * b.norm());
  return std::clamp(c, -1.0, 1.0);
}

namespace {

bool NeighborBefore(const Neighbor& a, const Neighbor& b) {
  if (a.cosine != b.cosine) return a.cosine > b.cosine;
  return a.index < b.index;
}

double TopKMean(std::vector<double> values, std::size_t k) {
  const std::size_t kk = std::min(k, values.size());
  if (kk == 0) return 0.0;
  std::partial_sort(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(kk), values.end(),
                    std::greater<double>());
  double sum = 0.0;
  for (std::size_t i = 0; i < kk; ++i) sum += values[i];
  return sum / static_cast<double>(kk);
}

}  // namespace

std::vector<Neighbor> KnnCosines(const SparseVector& query, std::span<const SparseVector> pool,
                                 std::size_t k) {
  if (pool.empty()) throw DataError("k-NN query against an empty pool");
  std::vector<Neighbor> all;
  all.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) all.push_back({i, Cosine(query, pool[i])});
  const std::size_t kk = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(kk), all.end(),
                    NeighborBefore);
  all.resize(kk);
  return all;
}

double NeighborhoodMean(const SparseVector& query, std::span<const SparseVector> pool,
                        std::size_t k) {
  if (pool.empty()) return 0.0;
  double sum = 0.0;
  const std::vector<Neighbor> nn = KnnCosines(query, pool, k);
  for (const Neighbor& n : nn) sum += n.cosine;
  return sum / static_cast<double>(nn.size());
}

double MarginFromParts(double cosine, double mean_x, double mean_y, MarginVariant variant) {
  const double m = mean_x / 2.0 + mean_y / 2.0;
  switch (variant) {
    case MarginVariant::kRatio: return cosine / std::max(m, kMarginFloor);
    case MarginVariant::kDistance: return cosine - m;
    case MarginVariant::kAbsolute: return cosine;
  }
  return cosine;
}

double MarginScore(const SparseVector& x, const SparseVector& y,
                   std::span<const SparseVector> pool_x, std::span<const SparseVector> pool_y,
                   const MarginConfig& config) {
  config.Validate();
  const double a = Cosine(x, y);
  if (config.variant == MarginVariant::kAbsolute) return a;
  return MarginFromParts(a, NeighborhoodMean(x, pool_x, config.k),
                         NeighborhoodMean(y, pool_y, config.k), config.variant);
}

Grid CosineGrid(std::span<const SparseVector> rows, std::span<const SparseVector> cols) {
  Grid g(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) g.at(r, c) = Cosine(rows[r], cols[c]);
  }
  return g;
}

std::vector<double> RowMeans(const Grid& cosines, std::size_t k) {
  std::vector<double> out(cosines.rows);
  std::vector<double> buf(cosines.cols);
  for (std::size_t r = 0; r < cosines.rows; ++r) {
    for (std::size_t c = 0; c < cosines.cols; ++c) buf[c] = cosines.at(r, c);
    out[r] = TopKMean(buf, k);
  }
  return out;
}

std::vector<double> ColMeans(const Grid& cosines, std::size_t k) {
  std::vector<double> out(cosines.cols);
  std::vector<double> buf(cosines.rows);
  for (std::size_t c = 0; c < cosines.cols; ++c) {
    for (std::size_t r = 0; r < cosines.rows; ++r) buf[r] = cosines.at(r, c);
    out[c] = TopKMean(buf, k);
  }
  return out;
}

Grid MarginGrid(const Grid& cosines, std::span<const double> row_means,
                std::span<const double> col_means, MarginVariant variant) {
  Grid g(cosines.rows, cosines.cols);
  for (std::size_t r = 0; r < cosines.rows; ++r) {
    for (std::size_t c = 0; c < cosines.cols; ++c) {
      g.at(r, c) = MarginFromParts(cosines.at(r, c), row_means[r], col_means[c], variant);
    }
  }
  return g;
}

Grid MarginGrid(std::span<const SparseVector> rows, std::span<const SparseVector> cols,
                const MarginConfig& config) {
  config.Validate();
  const Grid cos = CosineGrid(rows, cols);
  const std::vector<double> rm = RowMeans(cos, config.k);
  const std::vector<double> cm = ColMeans(cos, config.k);
  return MarginGrid(cos, rm, cm, config.variant);
}

}  // namespace pivalign
