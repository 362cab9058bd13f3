#ifndef PIVALIGN_TFIDF_H_
#define PIVALIGN_TFIDF_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pivalign/corpus.h"
#include "pivalign/tokenizer.h"

namespace pivalign {

// Sparse vector sorted by index, zero entries never stored.
class SparseVector {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  SparseVector() = default;
  // Sorts by index, sums repeated indices and drops zeros.
  explicit SparseVector(std::vector<Entry> entries);
  static SparseVector FromDense(const std::vector<double>& values);

  const std::vector<Entry>& entries() const { return entries_; }
  double norm() const { return norm_; }
  bool empty() const { return entries_.empty(); }
  double weight(std::uint32_t index) const;

  SparseVector Scaled(double factor) const;
  SparseVector Normalized() const;

 private:
  std::vector<Entry> entries_;
  double norm_ = 0.0;
};

double Dot(const SparseVector& a, const SparseVector& b);

using TokenSeq = std::vector<std::string>;

// Smoothed tf-idf: idf(t) = ln((1 + n_docs) / (1 + df(t))) + 1, tf = raw count.
class TfIdfModel {
 public:
  std::size_t n_docs() const { return n_docs_; }
  std::size_t vocab_size() const { return index_.size(); }
  std::optional<std::uint32_t> index(const std::string& token) const;
  // idf of a fitted token, nullopt for unseen tokens.
  std::optional<double> idf(const std::string& token) const;

  SparseVector Transform(const TokenSeq& tokens, bool normalize = true) const;

  // Model dump: "tfidf v1 <n_docs>" then "token<TAB>idf" sorted by token.
  void Write(std::ostream& out) const;

  friend TfIdfModel FitTfIdf(const std::vector<TokenSeq>& documents);

 private:
  std::size_t n_docs_ = 0;
  std::map<std::string, std::uint32_t> index_;
  std::vector<double> idf_;
};

// Throws a data error unless some document is non-empty.
TfIdfModel FitTfIdf(const std::vector<TokenSeq>& documents);

// Title tokens followed by every body sentence's tokens.
TokenSeq ArticleTokens(const Article& article, const TokenizerConfig& config);
SparseVector ArticleVector(const Article& article, const TfIdfModel& model,
                           const TokenizerConfig& config, bool normalize = true);

}  // namespace pivalign

#endif  // PIVALIGN_TFIDF_H_
