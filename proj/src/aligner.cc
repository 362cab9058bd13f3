#include "pivalign/aligner.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <tuple>

#include "pivalign/error.h"
#include "pivalign/parallel.h"
#include "pivalign/text.h"

namespace pivalign {

std::string_view ToString(AlignMethod m) {
  switch (m) {
    case AlignMethod::kToPivot: return "to_pivot";
    case AlignMethod::kFromPivot: return "from_pivot";
    case AlignMethod::kBidi: return "bidi";
    case AlignMethod::kNaive: return "naive";
    case AlignMethod::kExternalEmbedding: return "external_embedding";
  }
  return "bidi";
}

std::string_view ToString(Selection s) {
  return s == Selection::kGlobalGreedy ? "global_greedy" : "per_target_argmax";
}

std::string_view ToString(PoolScope s) { return s == PoolScope::kDocument ? "document" : "corpus"; }

std::string_view ToString(VocabScope s) { return s == VocabScope::kShared ? "shared" : "per_component"; }

AlignMethod ParseAlignMethod(std::string_view s) {
  if (s == "to_pivot") return AlignMethod::kToPivot;
  if (s == "from_pivot") return AlignMethod::kFromPivot;
  if (s == "bidi") return AlignMethod::kBidi;
  if (s == "naive") return AlignMethod::kNaive;
  if (s == "external_embedding") return AlignMethod::kExternalEmbedding;
  throw ConfigError("unknown alignment method '" + std::string(s) + "'");
}

Selection ParseSelection(std::string_view s) {
  if (s == "global_greedy") return Selection::kGlobalGreedy;
  if (s == "per_target_argmax") return Selection::kPerTargetArgmax;
  throw ConfigError("unknown selection '" + std::string(s) + "'");
}

PoolScope ParsePoolScope(std::string_view s) {
  if (s == "document") return PoolScope::kDocument;
  if (s == "corpus") return PoolScope::kCorpus;
  throw ConfigError("unknown pool scope '" + std::string(s) + "'");
}

VocabScope ParseVocabScope(std::string_view s) {
  if (s == "shared") return VocabScope::kShared;
  if (s == "per_component") return VocabScope::kPerComponent;
  throw ConfigError("unknown vocabulary scope '" + std::string(s) + "'");
}

std::size_t AlignConfig::components() const {
  switch (method) {
    case AlignMethod::kBidi: return 2;
    case AlignMethod::kNaive: return 0;
    default: return 1;
  }
}

double AlignConfig::effective_threshold() const {
  if (threshold) return *threshold;
  return kDefaultThresholdPerComponent * static_cast<double>(components());
}

void AlignConfig::Validate() const {
  margin.Validate();
  if (threshold && (std::isnan(*threshold) || *threshold == std::numeric_limits<double>::infinity())) {
    throw ConfigError("threshold must be a number below +inf");
  }
}

namespace {

bool UsesToPivot(AlignMethod m) { return m == AlignMethod::kToPivot || m == AlignMethod::kBidi; }
bool UsesFromPivot(AlignMethod m) { return m == AlignMethod::kFromPivot || m == AlignMethod::kBidi; }

void AddComponent(Grid* total, std::span<const SparseVector> rows,
                  std::span<const SparseVector> cols, const MarginConfig& margin,
                  const ComponentMeans* means) {
  const Grid cos = CosineGrid(rows, cols);
  std::vector<double> rm, cm;
  if (means) {
    if (means->rows.size() != rows.size() || means->cols.size() != cols.size()) {
      throw DataError("neighborhood means do not match the matrix shape");
    }
    rm = means->rows;
    cm = means->cols;
  } else if (margin.variant != MarginVariant::kAbsolute) {
    rm = RowMeans(cos, margin.k);
    cm = ColMeans(cos, margin.k);
  } else {
    rm.assign(rows.size(), 0.0);
    cm.assign(cols.size(), 0.0);
  }
  const Grid m = MarginGrid(cos, rm, cm, margin.variant);
  for (std::size_t i = 0; i < m.values.size(); ++i) total->values[i] += m.values[i];
}

}  // namespace

ScoreMatrix ScoreVectors(const SideVectors& src, const SideVectors& tgt, const AlignConfig& config,
                         const ComponentMeans* to_pivot_means,
                         const ComponentMeans* from_pivot_means) {
  config.Validate();
  if (config.method == AlignMethod::kNaive) {
    throw ConfigError("the naive method does not build a score matrix");
  }
  if (src.original.size() != src.ids.size() || tgt.original.size() != tgt.ids.size()) {
    throw DataError("vector and id counts differ");
  }
  ScoreMatrix m;
  m.src_ids = src.ids;
  m.tgt_ids = tgt.ids;
  m.scores = Grid(src.ids.size(), tgt.ids.size());
  if (config.method == AlignMethod::kExternalEmbedding) {
    m.direct = true;
    AddComponent(&m.scores, src.original, tgt.original, config.margin, to_pivot_means);
  }
  if (UsesToPivot(config.method)) {
    if (tgt.translated.size() != tgt.ids.size()) {
      throw DataError("to_pivot scoring needs target-side translations");
    }
    m.to_pivot = true;
    AddComponent(&m.scores, src.original, tgt.translated, config.margin, to_pivot_means);
  }
  if (UsesFromPivot(config.method)) {
    if (src.translated.size() != src.ids.size()) {
      throw DataError("from_pivot scoring needs source-side translations");
    }
    m.from_pivot = true;
    AddComponent(&m.scores, src.translated, tgt.original, config.margin, from_pivot_means);
  }
  for (double v : m.scores.values) {
    if (!std::isfinite(v)) throw DataError("non-finite entry in score matrix");
  }
  return m;
}

namespace {

void CheckTranslation(const Article& a, const TranslatedDocument* t, const char* what) {
  if (!t) throw DataError(std::string("missing ") + what + " translation for article " + a.id);
  if (t->sentences.size() != a.sentences.size()) {
    throw DataError("translation of article " + a.id + " has " +
                    std::to_string(t->sentences.size()) + " sentences, expected " +
                    std::to_string(a.sentences.size()));
  }
}

std::vector<TokenSeq> TokenizeAll(const std::vector<std::string>& texts,
                                  const TokenizerConfig& tokenizer) {
  std::vector<TokenSeq> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(ContentTokens(t, tokenizer));
  return out;
}

std::vector<std::string> SentenceTexts(const Article& a) {
  std::vector<std::string> out;
  out.reserve(a.sentences.size());
  for (const Sentence& s : a.sentences) out.push_back(s.text);
  return out;
}

std::vector<std::string> SentenceIds(const Article& a) {
  std::vector<std::string> out;
  out.reserve(a.sentences.size());
  for (const Sentence& s : a.sentences) out.push_back(s.id);
  return out;
}

std::vector<SparseVector> TransformAll(const std::vector<TokenSeq>& docs, const TfIdfModel& model) {
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const TokenSeq& d : docs) out.push_back(model.Transform(d, true));
  return out;
}

// Token sequences of one document pair, grouped by role.
struct PairTokens {
  std::vector<TokenSeq> src_original;    // source space
  std::vector<TokenSeq> tgt_translated;  // source space
  std::vector<TokenSeq> src_translated;  // target space
  std::vector<TokenSeq> tgt_original;    // target space

  void AppendTo(std::vector<TokenSeq>* pool, bool to_pivot, bool from_pivot) const {
    if (to_pivot) {
      pool->insert(pool->end(), src_original.begin(), src_original.end());
      pool->insert(pool->end(), tgt_translated.begin(), tgt_translated.end());
    }
    if (from_pivot) {
      pool->insert(pool->end(), src_translated.begin(), src_translated.end());
      pool->insert(pool->end(), tgt_original.begin(), tgt_original.end());
    }
  }
};

PairTokens TokenizePair(const Article& src, const Article& tgt,
                        const TranslatedDocument* src_trans, const TranslatedDocument* tgt_trans,
                        AlignMethod method, const Featurizer& f) {
  PairTokens p;
  if (UsesToPivot(method)) {
    p.src_original = TokenizeAll(SentenceTexts(src), f.source_space);
    p.tgt_translated = TokenizeAll(tgt_trans->sentences, f.source_space);
  }
  if (UsesFromPivot(method)) {
    p.src_translated = TokenizeAll(src_trans->sentences, f.target_space);
    p.tgt_original = TokenizeAll(SentenceTexts(tgt), f.target_space);
  }
  return p;
}

std::pair<SideVectors, SideVectors> VectorizePair(const Article& src, const Article& tgt,
                                                  const PairTokens& tokens, AlignMethod method,
                                                  const TfIdfModel& model) {
  SideVectors s, t;
  s.ids = SentenceIds(src);
  t.ids = SentenceIds(tgt);
  if (UsesToPivot(method)) {
    s.original = TransformAll(tokens.src_original, model);
    t.translated = TransformAll(tokens.tgt_translated, model);
  }
  if (UsesFromPivot(method)) {
    s.translated = TransformAll(tokens.src_translated, model);
    t.original = TransformAll(tokens.tgt_original, model);
  }
  // ScoreVectors checks original counts against ids; from-only scoring never
  // reads src.original, to-only never reads tgt.original.
  if (s.original.empty()) s.original.resize(s.ids.size());
  if (t.original.empty()) t.original.resize(t.ids.size());
  return {std::move(s), std::move(t)};
}

void RequireTranslations(const Article& src, const Article& tgt,
                         const TranslatedDocument* src_trans, const TranslatedDocument* tgt_trans,
                         AlignMethod method) {
  if (UsesToPivot(method)) CheckTranslation(tgt, tgt_trans, "target-side");
  if (UsesFromPivot(method)) CheckTranslation(src, src_trans, "source-side");
}

TfIdfModel FitOrEmpty(const std::vector<TokenSeq>& pool) {
  // A pair whose texts all tokenize to nothing still yields an all-zero matrix.
  const bool any = std::any_of(pool.begin(), pool.end(), [](const TokenSeq& d) { return !d.empty(); });
  if (any) return FitTfIdf(pool);
  return FitTfIdf({TokenSeq{std::string()}});
}

}  // namespace

ScoreMatrix ScoreDocuments(const Article& src, const TranslatedDocument* src_trans,
                           const Article& tgt, const TranslatedDocument* tgt_trans,
                           const AlignConfig& config, const TfIdfModel& model,
                           const TokenizerConfig& tokenizer) {
  if (config.method == AlignMethod::kNaive || config.method == AlignMethod::kExternalEmbedding) {
    throw ConfigError("ScoreDocuments supports the translation-based methods only");
  }
  RequireTranslations(src, tgt, src_trans, tgt_trans, config.method);
  const Featurizer f{tokenizer, tokenizer};
  const PairTokens tokens = TokenizePair(src, tgt, src_trans, tgt_trans, config.method, f);
  const auto [s, t] = VectorizePair(src, tgt, tokens, config.method, model);
  return ScoreVectors(s, t, config);
}

AlignmentSet SelectPairs(const ScoreMatrix& matrix, const AlignConfig& config, AlignLevel level) {
  const double threshold = config.effective_threshold();
  const Grid& g = matrix.scores;
  AlignmentSet out;
  out.level = level;
  if (config.selection == Selection::kPerTargetArgmax) {
    out.mode = AlignMode::kPerTarget;
    for (std::size_t k = 0; k < g.cols; ++k) {
      if (g.rows == 0) break;
      std::size_t best = 0;
      for (std::size_t j = 1; j < g.rows; ++j) {
        if (g.at(j, k) > g.at(best, k)) best = j;
      }
      if (g.at(best, k) >= threshold) {
        out.pairs.push_back({matrix.src_ids[best], matrix.tgt_ids[k], g.at(best, k)});
      }
    }
    return out;
  }

  out.mode = AlignMode::kOneToOne;
  struct Cell {
    double score;
    std::size_t j, k;
  };
  std::vector<Cell> cells;
  for (std::size_t j = 0; j < g.rows; ++j) {
    for (std::size_t k = 0; k < g.cols; ++k) {
      if (g.at(j, k) >= threshold) cells.push_back({g.at(j, k), j, k});
    }
  }
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    return std::tie(b.score, a.j, a.k) < std::tie(a.score, b.j, b.k);
  });
  std::vector<bool> row_used(g.rows), col_used(g.cols);
  for (const Cell& c : cells) {
    if (row_used[c.j] || col_used[c.k]) continue;
    row_used[c.j] = col_used[c.k] = true;
    out.pairs.push_back({matrix.src_ids[c.j], matrix.tgt_ids[c.k], c.score});
  }
  return out;
}

Featurizer TrainFeaturizer(const std::vector<std::string>& source_space_texts,
                           const std::vector<std::string>& target_space_texts,
                           const FeatureConfig& config) {
  if (config.mode == TokenizerMode::kWhitespace) {
    TokenizerConfig t = WhitespaceTokenizer();
    t.lowercase = config.lowercase;
    return {t, t};
  }
  auto lower_all = [&](const std::vector<std::string>& texts) {
    if (!config.lowercase) return texts;
    std::vector<std::string> out;
    out.reserve(texts.size());
    for (const std::string& t : texts) out.push_back(AsciiLower(t));
    return out;
  };
  auto train = [&](const std::vector<std::string>& texts) {
    TokenizerConfig t = SubwordTokenizer(std::make_shared<const SubwordVocab>(
        texts.empty() ? SubwordVocab() : TrainSubword(lower_all(texts), config.vocab_size)));
    t.lowercase = config.lowercase;
    return t;
  };
  if (config.scope == VocabScope::kShared) {
    std::vector<std::string> all = source_space_texts;
    all.insert(all.end(), target_space_texts.begin(), target_space_texts.end());
    const TokenizerConfig t = train(all);
    return {t, t};
  }
  return {train(source_space_texts), train(target_space_texts)};
}

AlignmentSet NaiveAlign(const Article& src, const Article& tgt) {
  AlignmentSet out;
  out.level = AlignLevel::kSentence;
  out.mode = AlignMode::kOneToOne;
  const std::size_t n = std::min(src.sentences.size(), tgt.sentences.size());
  for (std::size_t i = 0; i < n; ++i) {
    out.pairs.push_back({src.sentences[i].id, tgt.sentences[i].id, 1.0});
  }
  return out;
}

AlignmentSet AlignSentences(const Article& src, const Article& tgt,
                            const TranslatedDocument* src_trans,
                            const TranslatedDocument* tgt_trans, const AlignConfig& config,
                            const FeatureConfig& features, const Featurizer* featurizer) {
  config.Validate();
  if (config.method == AlignMethod::kNaive) return NaiveAlign(src, tgt);
  if (config.method == AlignMethod::kExternalEmbedding) {
    throw ConfigError("external_embedding alignment needs an embedding table");
  }
  RequireTranslations(src, tgt, src_trans, tgt_trans, config.method);

  Featurizer trained;
  if (!featurizer) {
    std::vector<std::string> source_space, target_space;
    if (UsesToPivot(config.method)) {
      source_space = SentenceTexts(src);
      source_space.insert(source_space.end(), tgt_trans->sentences.begin(),
                          tgt_trans->sentences.end());
    }
    if (UsesFromPivot(config.method)) {
      target_space = src_trans->sentences;
      const auto t = SentenceTexts(tgt);
      target_space.insert(target_space.end(), t.begin(), t.end());
    }
    trained = TrainFeaturizer(source_space, target_space, features);
    featurizer = &trained;
  }
  const PairTokens tokens = TokenizePair(src, tgt, src_trans, tgt_trans, config.method, *featurizer);
  std::vector<TokenSeq> pool;
  tokens.AppendTo(&pool, UsesToPivot(config.method), UsesFromPivot(config.method));
  const TfIdfModel model = FitOrEmpty(pool);
  const auto [s, t] = VectorizePair(src, tgt, tokens, config.method, model);
  return SelectPairs(ScoreVectors(s, t, config), config, AlignLevel::kSentence);
}

namespace {

struct PairProblem {
  const Article* src;
  const Article* tgt;
  const TranslatedDocument* src_trans;
  const TranslatedDocument* tgt_trans;
};

const TranslatedDocument* Lookup(const TranslationMap& m, const std::string& id) {
  auto it = m.find(id);
  return it == m.end() ? nullptr : &it->second;
}

std::vector<double> MeansAgainst(const std::vector<SparseVector>& queries,
                                 const std::vector<SparseVector>& pool, std::size_t k,
                                 std::size_t jobs) {
  std::vector<double> out(queries.size());
  ParallelFor(queries.size(), jobs,
              [&](std::size_t i) { out[i] = NeighborhoodMean(queries[i], pool, k); });
  return out;
}

}  // namespace

AlignmentSet AlignSentencesInPairs(const Corpus& src, const Corpus& tgt,
                                   const AlignmentSet& article_pairs,
                                   const TranslationMap& src_trans,
                                   const TranslationMap& tgt_trans, const AlignConfig& config,
                                   const Featurizer& featurizer, PoolScope scope,
                                   std::size_t jobs) {
  config.Validate();
  if (config.method == AlignMethod::kExternalEmbedding) {
    throw ConfigError("external_embedding alignment needs an embedding table");
  }
  std::vector<PairProblem> problems;
  for (const AlignmentPair& p : article_pairs.pairs) {
    const auto si = src.find(p.src_id);
    const auto ti = tgt.find(p.tgt_id);
    if (!si) throw DataError("article pair references unknown source article '" + p.src_id + "'");
    if (!ti) throw DataError("article pair references unknown target article '" + p.tgt_id + "'");
    if (src.articles[*si].sentences.empty() || tgt.articles[*ti].sentences.empty()) {
      std::cerr << "warning: article pair (" << p.src_id << ", " << p.tgt_id
                << ") has an empty article; skipped\n";
      continue;
    }
    PairProblem prob{&src.articles[*si], &tgt.articles[*ti], Lookup(src_trans, p.src_id),
                     Lookup(tgt_trans, p.tgt_id)};
    if (config.method != AlignMethod::kNaive) {
      RequireTranslations(*prob.src, *prob.tgt, prob.src_trans, prob.tgt_trans, config.method);
    }
    problems.push_back(prob);
  }

  std::vector<AlignmentSet> results(problems.size());
  if (config.method == AlignMethod::kNaive || scope == PoolScope::kDocument) {
    ParallelFor(problems.size(), jobs, [&](std::size_t i) {
      const PairProblem& p = problems[i];
      results[i] = AlignSentences(*p.src, *p.tgt, p.src_trans, p.tgt_trans, config, {}, &featurizer);
    });
  } else {
    const bool to = UsesToPivot(config.method), from = UsesFromPivot(config.method);
    std::vector<PairTokens> tokens(problems.size());
    ParallelFor(problems.size(), jobs, [&](std::size_t i) {
      const PairProblem& p = problems[i];
      tokens[i] = TokenizePair(*p.src, *p.tgt, p.src_trans, p.tgt_trans, config.method, featurizer);
    });
    std::vector<TokenSeq> pool;
    for (const PairTokens& t : tokens) t.AppendTo(&pool, to, from);
    const TfIdfModel model = FitOrEmpty(pool);

    std::vector<std::pair<SideVectors, SideVectors>> vecs(problems.size());
    ParallelFor(problems.size(), jobs, [&](std::size_t i) {
      vecs[i] = VectorizePair(*problems[i].src, *problems[i].tgt, tokens[i], config.method, model);
    });
    // Neighborhoods over every sentence of the paired articles.
    auto gather = [&](auto member_of) {
      std::vector<SparseVector> all;
      for (auto& v : vecs) {
        const auto& part = member_of(v);
        all.insert(all.end(), part.begin(), part.end());
      }
      return all;
    };
    const std::size_t k = config.margin.k;
    ComponentMeans to_all, from_all;
    if (to && config.margin.variant != MarginVariant::kAbsolute) {
      const auto rows = gather([](auto& v) -> const auto& { return v.first.original; });
      const auto cols = gather([](auto& v) -> const auto& { return v.second.translated; });
      to_all = {MeansAgainst(rows, cols, k, jobs), MeansAgainst(cols, rows, k, jobs)};
    }
    if (from && config.margin.variant != MarginVariant::kAbsolute) {
      const auto rows = gather([](auto& v) -> const auto& { return v.first.translated; });
      const auto cols = gather([](auto& v) -> const auto& { return v.second.original; });
      from_all = {MeansAgainst(rows, cols, k, jobs), MeansAgainst(cols, rows, k, jobs)};
    }
    std::size_t row_off = 0, col_off = 0;
    std::vector<std::pair<std::size_t, std::size_t>> offsets;
    for (const auto& v : vecs) {
      offsets.emplace_back(row_off, col_off);
      row_off += v.first.ids.size();
      col_off += v.second.ids.size();
    }
    auto slice = [](const ComponentMeans& all, std::size_t r0, std::size_t nr, std::size_t c0,
                    std::size_t nc) -> ComponentMeans {
      if (all.rows.empty() && all.cols.empty()) {
        return {std::vector<double>(nr, 0.0), std::vector<double>(nc, 0.0)};
      }
      return {std::vector<double>(all.rows.begin() + r0, all.rows.begin() + r0 + nr),
              std::vector<double>(all.cols.begin() + c0, all.cols.begin() + c0 + nc)};
    };
    ParallelFor(problems.size(), jobs, [&](std::size_t i) {
      const auto& [s, t] = vecs[i];
      const auto [r0, c0] = offsets[i];
      const ComponentMeans tm = slice(to_all, r0, s.ids.size(), c0, t.ids.size());
      const ComponentMeans fm = slice(from_all, r0, s.ids.size(), c0, t.ids.size());
      results[i] = SelectPairs(ScoreVectors(s, t, config, to ? &tm : nullptr, from ? &fm : nullptr),
                               config, AlignLevel::kSentence);
    });
  }

  AlignmentSet out;
  out.level = AlignLevel::kSentence;
  out.mode = config.method == AlignMethod::kNaive || config.selection == Selection::kGlobalGreedy
                 ? AlignMode::kOneToOne
                 : AlignMode::kPerTarget;
  for (AlignmentSet& r : results) {
    out.pairs.insert(out.pairs.end(), std::make_move_iterator(r.pairs.begin()),
                     std::make_move_iterator(r.pairs.end()));
  }
  return out;
}

AlignmentSet AlignArticles(const Corpus& src, const Corpus& tgt, const TranslationMap& src_trans,
                           const TranslationMap& tgt_trans, const AlignConfig& config,
                           const Featurizer& featurizer) {
  config.Validate();
  if (config.method == AlignMethod::kNaive) {
    throw ConfigError("the naive method aligns sentences only");
  }
  if (config.method == AlignMethod::kExternalEmbedding) {
    throw ConfigError("external_embedding alignment needs an embedding table");
  }
  if (src.articles.empty() || tgt.articles.empty()) throw DataError("empty corpus");
  const bool to = UsesToPivot(config.method), from = UsesFromPivot(config.method);

  auto translated_tokens = [](const TranslatedDocument& t, const TokenizerConfig& tok) {
    TokenSeq tokens = ContentTokens(t.title, tok);
    for (const std::string& s : t.sentences) {
      TokenSeq part = ContentTokens(s, tok);
      tokens.insert(tokens.end(), part.begin(), part.end());
    }
    return tokens;
  };

  std::vector<TokenSeq> src_orig, src_tr, tgt_orig, tgt_tr;
  for (const Article& a : src.articles) {
    if (to) src_orig.push_back(ArticleTokens(a, featurizer.source_space));
    if (from) {
      const TranslatedDocument* t = Lookup(src_trans, a.id);
      CheckTranslation(a, t, "source-side");
      src_tr.push_back(translated_tokens(*t, featurizer.target_space));
    }
  }
  for (const Article& a : tgt.articles) {
    if (from) tgt_orig.push_back(ArticleTokens(a, featurizer.target_space));
    if (to) {
      const TranslatedDocument* t = Lookup(tgt_trans, a.id);
      CheckTranslation(a, t, "target-side");
      tgt_tr.push_back(translated_tokens(*t, featurizer.source_space));
    }
  }
  std::vector<TokenSeq> pool;
  for (const auto* part : {&src_orig, &tgt_tr, &src_tr, &tgt_orig}) {
    pool.insert(pool.end(), part->begin(), part->end());
  }
  const TfIdfModel model = FitOrEmpty(pool);

  SideVectors s, t;
  for (const Article& a : src.articles) s.ids.push_back(a.id);
  for (const Article& a : tgt.articles) t.ids.push_back(a.id);
  s.original = to ? TransformAll(src_orig, model) : std::vector<SparseVector>(s.ids.size());
  t.original = from ? TransformAll(tgt_orig, model) : std::vector<SparseVector>(t.ids.size());
  if (from) s.translated = TransformAll(src_tr, model);
  if (to) t.translated = TransformAll(tgt_tr, model);
  return SelectPairs(ScoreVectors(s, t, config), config, AlignLevel::kArticle);
}

std::string TitleId(std::string_view article_id) {
  std::string id(article_id);
  id += "#title";
  return id;
}

EmbeddingTable EmbeddingTable::Parse(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty embedding file");
  const std::string prefix = "emb v1 ";
  std::size_t dim = 0;
  try {
    if (line.rfind(prefix, 0) != 0) throw std::invalid_argument("header");
    dim = std::stoul(line.substr(prefix.size()));
  } catch (const std::exception&) {
    throw DataError("bad embedding header '" + line + "'");
  }
  if (dim == 0) throw DataError("embedding dimension must be positive");
  EmbeddingTable table(dim);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError("embedding line " + std::to_string(line_no) + ": expected id<TAB>values");
    }
    std::vector<double> values;
    for (const std::string& field : SplitChar(std::string_view(line).substr(tab + 1), ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
        if (used != field.size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw DataError("embedding line " + std::to_string(line_no) + ": bad value '" + field + "'");
      }
    }
    try {
      table.Add(line.substr(0, tab), std::move(values));
    } catch (const Error& e) {
      throw DataError("embedding line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return table;
}

EmbeddingTable EmbeddingTable::Load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embedding file '" + path + "'");
  return Parse(in);
}

void EmbeddingTable::Add(const std::string& id, std::vector<double> values) {
  if (values.size() != dim_) {
    throw DataError("dimension mismatch for '" + id + "': " + std::to_string(values.size()) +
                    " values, expected " + std::to_string(dim_));
  }
  table_[id] = std::move(values);
}

const std::vector<double>& EmbeddingTable::at(const std::string& id) const {
  auto it = table_.find(id);
  if (it == table_.end()) throw DataError("missing embedding for '" + id + "'");
  return it->second;
}

std::vector<double> MeanPooledArticle(const Article& article, const EmbeddingTable& table) {
  std::vector<double> sum(table.dim(), 0.0);
  std::size_t n = 0;
  auto add = [&](const std::vector<double>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) sum[i] += v[i];
    ++n;
  };
  if (const std::string tid = TitleId(article.id); table.contains(tid)) add(table.at(tid));
  for (const Sentence& s : article.sentences) add(table.at(s.id));
  if (n > 0) {
    for (double& x : sum) x /= static_cast<double>(n);
  }
  return sum;
}

namespace {

AlignConfig AsDirect(AlignConfig config) {
  config.method = AlignMethod::kExternalEmbedding;
  return config;
}

}  // namespace

AlignmentSet ExternalEmbeddingAlign(const Article& src, const Article& tgt,
                                    const EmbeddingTable& table, const AlignConfig& config) {
  SideVectors s, t;
  for (const Sentence& x : src.sentences) {
    s.ids.push_back(x.id);
    s.original.push_back(SparseVector::FromDense(table.at(x.id)));
  }
  for (const Sentence& x : tgt.sentences) {
    t.ids.push_back(x.id);
    t.original.push_back(SparseVector::FromDense(table.at(x.id)));
  }
  const AlignConfig direct = AsDirect(config);
  return SelectPairs(ScoreVectors(s, t, direct), direct, AlignLevel::kSentence);
}

AlignmentSet ExternalEmbeddingAlign(const Corpus& src, const Corpus& tgt,
                                    const EmbeddingTable& table, const AlignConfig& config) {
  SideVectors s, t;
  for (const Article& a : src.articles) {
    s.ids.push_back(a.id);
    s.original.push_back(SparseVector::FromDense(MeanPooledArticle(a, table)));
  }
  for (const Article& a : tgt.articles) {
    t.ids.push_back(a.id);
    t.original.push_back(SparseVector::FromDense(MeanPooledArticle(a, table)));
  }
  const AlignConfig direct = AsDirect(config);
  return SelectPairs(ScoreVectors(s, t, direct), direct, AlignLevel::kArticle);
}

HeaderFields AlignmentHeader(const AlignConfig& config, const FeatureConfig& features,
                             std::uint64_t seed) {
  return {
      {"method", std::string(ToString(config.method))},
      {"selection", std::string(ToString(config.selection))},
      {"k", std::to_string(config.margin.k)},
      {"variant", std::string(ToString(config.margin.variant))},
      {"threshold", FormatDouble(config.effective_threshold())},
      {"tokenizer", features.mode == TokenizerMode::kSubword ? "subword" : "whitespace"},
      {"vocab_size", std::to_string(features.vocab_size)},
      {"vocab_scope", std::string(ToString(features.scope))},
      {"seed", std::to_string(seed)},
  };
}

}  // namespace pivalign
