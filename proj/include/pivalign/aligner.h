#ifndef PIVALIGN_ALIGNER_H_
#define PIVALIGN_ALIGNER_H_

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pivalign/corpus.h"
#include "pivalign/similarity.h"
#include "pivalign/tfidf.h"
#include "pivalign/tokenizer.h"
#include "pivalign/translate.h"

namespace pivalign {

// to_pivot compares source originals with target sentences translated into
// the source language; from_pivot compares source sentences translated into
// the target language with target originals; bidi sums both.
enum class AlignMethod { kToPivot, kFromPivot, kBidi, kNaive, kExternalEmbedding };
enum class Selection { kGlobalGreedy, kPerTargetArgmax };
// Where tf-idf statistics and margin neighborhoods come from for sentences.
enum class PoolScope { kDocument, kCorpus };

std::string_view ToString(AlignMethod m);
std::string_view ToString(Selection s);
std::string_view ToString(PoolScope s);
AlignMethod ParseAlignMethod(std::string_view s);
Selection ParseSelection(std::string_view s);
PoolScope ParsePoolScope(std::string_view s);

inline constexpr double kDefaultThresholdPerComponent = 1.06;

struct AlignConfig {
  AlignMethod method = AlignMethod::kBidi;
  Selection selection = Selection::kGlobalGreedy;
  // Applies to the summed matrix entry. Unset means 1.06 per component.
  std::optional<double> threshold;
  MarginConfig margin;

  std::size_t components() const;
  double effective_threshold() const;
  void Validate() const;
};

struct ScoreMatrix {
  std::vector<std::string> src_ids;
  std::vector<std::string> tgt_ids;
  Grid scores;
  bool to_pivot = false;
  bool from_pivot = false;
  bool direct = false;

  double at(std::size_t j, std::size_t k) const { return scores.at(j, k); }
};

// One side of an alignment problem after vectorization. `translated` is
// empty when that side has no translation.
struct SideVectors {
  std::vector<std::string> ids;
  std::vector<SparseVector> original;
  std::vector<SparseVector> translated;
};

// Precomputed neighborhood means for one component (rows: source side,
// cols: target side), used when neighborhoods span more than one document.
struct ComponentMeans {
  std::vector<double> rows;
  std::vector<double> cols;
};

ScoreMatrix ScoreVectors(const SideVectors& src, const SideVectors& tgt, const AlignConfig& config,
                         const ComponentMeans* to_pivot_means = nullptr,
                         const ComponentMeans* from_pivot_means = nullptr);

// Sentence-level matrix for one document pair. A translation is required
// only for the components the method uses.
ScoreMatrix ScoreDocuments(const Article& src, const TranslatedDocument* src_trans,
                           const Article& tgt, const TranslatedDocument* tgt_trans,
                           const AlignConfig& config, const TfIdfModel& model,
                           const TokenizerConfig& tokenizer);

AlignmentSet SelectPairs(const ScoreMatrix& matrix, const AlignConfig& config, AlignLevel level);

enum class VocabScope { kShared, kPerComponent };
std::string_view ToString(VocabScope s);
VocabScope ParseVocabScope(std::string_view s);

struct FeatureConfig {
  TokenizerMode mode = TokenizerMode::kSubword;
  std::size_t vocab_size = 2000;
  VocabScope scope = VocabScope::kShared;
  bool lowercase = false;
};

// Tokenizers for the two comparison spaces: the source-language space (source
// originals, target-to-source translations) and the target-language space.
struct Featurizer {
  TokenizerConfig source_space;
  TokenizerConfig target_space;
};

// Trains the subword vocabularies (or sets up whitespace tokenization).
Featurizer TrainFeaturizer(const std::vector<std::string>& source_space_texts,
                           const std::vector<std::string>& target_space_texts,
                           const FeatureConfig& config);

using TranslationMap = std::unordered_map<std::string, TranslatedDocument>;

// Tokenize, fit tf-idf over both documents and their translations, score and
// select. Trains a featurizer on the pair's texts when none is given.
AlignmentSet AlignSentences(const Article& src, const Article& tgt,
                            const TranslatedDocument* src_trans,
                            const TranslatedDocument* tgt_trans, const AlignConfig& config,
                            const FeatureConfig& features = {},
                            const Featurizer* featurizer = nullptr);

// Sentence alignment inside each given article pair; results are concatenated
// in article-pair order.
AlignmentSet AlignSentencesInPairs(const Corpus& src, const Corpus& tgt,
                                   const AlignmentSet& article_pairs,
                                   const TranslationMap& src_trans,
                                   const TranslationMap& tgt_trans, const AlignConfig& config,
                                   const Featurizer& featurizer, PoolScope scope,
                                   std::size_t jobs = 1);

// Article vectors are built from title + body; neighborhoods span the full
// corpora.
AlignmentSet AlignArticles(const Corpus& src, const Corpus& tgt, const TranslationMap& src_trans,
                           const TranslationMap& tgt_trans, const AlignConfig& config,
                           const Featurizer& featurizer);

// Pairs sentence i with sentence i.
AlignmentSet NaiveAlign(const Article& src, const Article& tgt);

// Dense per-sentence embeddings: "emb v1 <dim>" then "id<TAB>v1,...,v_dim".
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}
  static EmbeddingTable Parse(std::istream& in);
  static EmbeddingTable Load(const std::string& path);

  std::size_t dim() const { return dim_; }
  void Add(const std::string& id, std::vector<double> values);
  bool contains(const std::string& id) const { return table_.count(id) > 0; }
  const std::vector<double>& at(const std::string& id) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

// Title embeddings are looked up under "<article id>#title".
std::string TitleId(std::string_view article_id);

std::vector<double> MeanPooledArticle(const Article& article, const EmbeddingTable& table);

AlignmentSet ExternalEmbeddingAlign(const Article& src, const Article& tgt,
                                    const EmbeddingTable& table, const AlignConfig& config);
AlignmentSet ExternalEmbeddingAlign(const Corpus& src, const Corpus& tgt,
                                    const EmbeddingTable& table, const AlignConfig& config);

// Header fields recorded in alignment outputs.
HeaderFields AlignmentHeader(const AlignConfig& config, const FeatureConfig& features,
                             std::uint64_t seed);

}  // namespace pivalign

#endif  // PIVALIGN_ALIGNER_H_
