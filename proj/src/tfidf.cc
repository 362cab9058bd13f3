#include "pivalign/tfidf.h"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>

#include "pivalign/error.h"
#include "pivalign/text.h"

namespace pivalign {

namespace {

double EuclideanNorm(const std::vector<SparseVector::Entry>& entries) {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.second * e.second;
  return std::sqrt(sum);
}

}  // namespace

SparseVector::SparseVector(std::vector<Entry> entries) {
  std::sort(entries.begin(), entries.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  for (const Entry& e : entries) {
    if (!entries_.empty() && entries_.back().first == e.first) {
      entries_.back().second += e.second;
    } else {
      entries_.push_back(e);
    }
  }
  std::erase_if(entries_, [](const Entry& e) { return e.second == 0.0; });
  norm_ = EuclideanNorm(entries_);
}

SparseVector SparseVector::FromDense(const std::vector<double>& values) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) entries.emplace_back(static_cast<std::uint32_t>(i), values[i]);
  }
  return SparseVector(std::move(entries));
}

double SparseVector::weight(std::uint32_t index) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), index,
                             [](const Entry& e, std::uint32_t i) { return e.first < i; });
  return (it != entries_.end() && it->first == index) ? it->second : 0.0;
}

SparseVector SparseVector::Scaled(double factor) const {
  std::vector<Entry> out = entries_;
  for (Entry& e : out) e.second *= factor;
  return SparseVector(std::move(out));
}

SparseVector SparseVector::Normalized() const {
  if (norm_ == 0.0) return *this;
  return Scaled(1.0 / norm_);
}

double Dot(const SparseVector& a, const SparseVector& b) {
  const auto& x = a.entries();
  const auto& y = b.entries();
  double sum = 0.0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i].first < y[j].first) {
      ++i;
    } else if (y[j].first < x[i].first) {
      ++j;
    } else {
      sum += x[i].second * y[j].second;
      ++i;
      ++j;
    }
  }
  return sum;
}

std::optional<std::uint32_t> TfIdfModel::index(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> TfIdfModel::idf(const std::string& token) const {
  auto i = index(token);
  if (!i) return std::nullopt;
  return idf_[*i];
}

SparseVector TfIdfModel::Transform(const TokenSeq& tokens, bool normalize) const {
  std::vector<SparseVector::Entry> entries;
  entries.reserve(tokens.size());
  for (const std::string& t : tokens) {
    auto it = index_.find(t);
    if (it != index_.end()) entries.emplace_back(it->second, 1.0);
  }
  // The constructor sums the unit entries into raw counts.
  SparseVector counts(std::move(entries));
  std::vector<SparseVector::Entry> weighted = counts.entries();
  for (auto& e : weighted) e.second *= idf_[e.first];
  SparseVector v(std::move(weighted));
  return normalize ? v.Normalized() : v;
}

void TfIdfModel::Write(std::ostream& out) const {
  out << "tfidf v1 " << n_docs_ << '\n';
  for (const auto& [token, i] : index_) out << token << '\t' << FormatDouble(idf_[i]) << '\n';
}

TfIdfModel FitTfIdf(const std::vector<TokenSeq>& documents) {
  const bool any = std::any_of(documents.begin(), documents.end(),
                               [](const TokenSeq& d) { return !d.empty(); });
  if (!any) throw DataError("tf-idf fit needs at least one non-empty document");

  std::map<std::string, std::size_t> df;
  for (const TokenSeq& doc : documents) {
    std::set<std::string> unique(doc.begin(), doc.end());
    for (const std::string& t : unique) ++df[t];
  }
  TfIdfModel model;
  model.n_docs_ = documents.size();
  model.idf_.reserve(df.size());
  const double n = static_cast<double>(model.n_docs_);
  for (const auto& [token, count] : df) {
    model.index_.emplace(token, static_cast<std::uint32_t>(model.idf_.size()));
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return model;
}

TokenSeq ArticleTokens(const Article& article, const TokenizerConfig& config) {
  TokenSeq tokens = ContentTokens(article.title, config);
  for (const Sentence& s : article.sentences) {
    TokenSeq part = ContentTokens(s.text, config);
    tokens.insert(tokens.end(), part.begin(), part.end());
  }
  return tokens;
}

SparseVector ArticleVector(const Article& article, const TfIdfModel& model,
                           const TokenizerConfig& config, bool normalize) {
  return model.Transform(ArticleTokens(article, config), normalize);
}

}  // namespace pivalign
