#include <algorithm>
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "pivalign/corpus.h"
#include "pivalign/error.h"
#include "pivalign/random.h"
#include "pivalign/text.h"
#include "pivalign/tfidf.h"
#include "pivalign/tokenizer.h"

namespace pivalign {
namespace {

double Idf(std::size_t n_docs, std::size_t df) {
  return std::log((1.0 + n_docs) / (1.0 + df)) + 1.0;
}

TEST(SparseVectorTest, DropsZerosAndMergesDuplicates) {
  const SparseVector v({{3, 1.0}, {1, 0.0}, {3, 2.0}, {0, -1.0}});
  ASSERT_EQ(v.entries().size(), 2u);
  EXPECT_EQ(v.entries()[0], (SparseVector::Entry{0, -1.0}));
  EXPECT_EQ(v.entries()[1], (SparseVector::Entry{3, 3.0}));
  EXPECT_NEAR(v.norm(), std::sqrt(10.0), 1e-12);
  EXPECT_EQ(v.weight(1), 0.0);
}

TEST(SparseVectorTest, NormalizedHasUnitNorm) {
  const SparseVector v = SparseVector::FromDense({3, 0, 4}).Normalized();
  EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  EXPECT_NEAR(v.weight(0), 0.6, 1e-12);
  EXPECT_TRUE(SparseVector().Normalized().empty());
}

TEST(FitTest, HandValues) {
  const TfIdfModel m = FitTfIdf({{"a", "b"}, {"a"}});
  EXPECT_EQ(m.n_docs(), 2u);
  EXPECT_NEAR(*m.idf("a"), 1.0, 1e-12);
  EXPECT_NEAR(*m.idf("b"), std::log(1.5) + 1.0, 1e-12);
  EXPECT_NEAR(*m.idf("b"), 1.4055, 1e-4);
  EXPECT_FALSE(m.idf("c").has_value());
}

TEST(FitTest, SingleDoc) {
  EXPECT_NEAR(*FitTfIdf({{"x"}}).idf("x"), 1.0, 1e-12);
}

TEST(FitTest, EmptyCollectionRejected) {
  EXPECT_THROW(FitTfIdf({}), Error);
  EXPECT_THROW(FitTfIdf({{}, {}}), Error);
}

TEST(FitTest, OrderIndependent) {
  std::vector<TokenSeq> docs = {{"a", "b", "c"}, {"b"}, {"c", "c", "d"}, {"e"}};
  const TfIdfModel m1 = FitTfIdf(docs);
  std::reverse(docs.begin(), docs.end());
  const TfIdfModel m2 = FitTfIdf(docs);
  std::ostringstream a, b;
  m1.Write(a);
  m2.Write(b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(FitTest, MatchesFormulaOnRandomCollections) {
  Xorshift64Star rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<TokenSeq> docs(1 + rng.Below(20));
    for (auto& d : docs) {
      for (std::size_t i = 0, n = rng.Below(10); i < n; ++i) d.push_back("t" + std::to_string(rng.Below(15)));
    }
    docs[0].push_back("t0");
    const TfIdfModel m = FitTfIdf(docs);
    for (int t = 0; t < 15; ++t) {
      const std::string tok = "t" + std::to_string(t);
      std::size_t df = 0;
      for (const auto& d : docs) df += std::find(d.begin(), d.end(), tok) != d.end();
      if (df == 0) {
        EXPECT_FALSE(m.idf(tok).has_value());
      } else {
        EXPECT_NEAR(*m.idf(tok), Idf(docs.size(), df), 1e-12);
        EXPECT_GT(*m.idf(tok), 0.0);
      }
    }
  }
}

TEST(TransformTest, HandValues) {
  const TfIdfModel m = FitTfIdf({{"a", "b"}, {"a"}});
  const SparseVector raw = m.Transform({"a", "a", "b"}, false);
  EXPECT_NEAR(raw.weight(*m.index("a")), 2.0, 1e-12);
  EXPECT_NEAR(raw.weight(*m.index("b")), std::log(1.5) + 1.0, 1e-12);
  const SparseVector unit = m.Transform({"a", "a", "b"});
  EXPECT_NEAR(unit.norm(), 1.0, 1e-12);
}

TEST(TransformTest, EmptyAndOutOfVocabulary) {
  const TfIdfModel m = FitTfIdf({{"a", "b"}, {"a"}});
  EXPECT_TRUE(m.Transform({}).empty());
  EXPECT_EQ(m.Transform({}).norm(), 0.0);
  EXPECT_TRUE(m.Transform({"zz", "yy"}).empty());
}

TEST(TransformTest, LinearInCounts) {
  const TfIdfModel m = FitTfIdf({{"a", "b", "c"}, {"a"}, {"c"}});
  const SparseVector once = m.Transform({"a", "b", "c", "c"}, false);
  const SparseVector twice = m.Transform({"a", "b", "c", "c", "a", "b", "c", "c"}, false);
  ASSERT_EQ(once.entries().size(), twice.entries().size());
  for (std::size_t i = 0; i < once.entries().size(); ++i) {
    EXPECT_NEAR(twice.entries()[i].second, 2 * once.entries()[i].second, 1e-12);
  }
}

TEST(TfIdfModelTest, DumpFormat) {
  std::ostringstream out;
  FitTfIdf({{"b", "a"}, {"a"}}).Write(out);
  std::ostringstream expected;
  expected << "tfidf v1 2\na\t1\nb\t" << FormatDouble(std::log(1.5) + 1.0) << "\n";
  EXPECT_EQ(out.str(), expected.str());
}

TEST(ArticleVectorTest, TitleThenBody) {
  const Article a = MakeArticle("x", LangCode("en"), "t", {"a", "b"});
  EXPECT_EQ(ArticleTokens(a, WhitespaceTokenizer()), (TokenSeq{"t", "a", "b"}));
  const Article untitled = MakeArticle("y", LangCode("en"), "", {"a", "b"});
  EXPECT_EQ(ArticleTokens(untitled, WhitespaceTokenizer()), (TokenSeq{"a", "b"}));
  const TfIdfModel m = FitTfIdf({{"t", "a", "b"}, {"a"}});
  const SparseVector v1 = ArticleVector(a, m, WhitespaceTokenizer());
  const SparseVector v2 = ArticleVector(MakeArticle("z", LangCode("en"), "t", {"a", "b"}), m,
                                        WhitespaceTokenizer());
  EXPECT_EQ(v1.entries(), v2.entries());
}

}  // namespace
}  // namespace pivalign
