#ifndef PIVALIGN_PIPELINE_H_
#define PIVALIGN_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "pivalign/aligner.h"
#include "pivalign/corpus.h"
#include "pivalign/dedup.h"
#include "pivalign/translate.h"

namespace pivalign {

inline constexpr const char* kVersion = "0.3.0";
inline constexpr const char* kJobsEnv = "PIVALIGN_JOBS";

enum class ArticleSource { kPredicted, kGold };

struct PipelineConfig {
  std::string src_corpus;
  std::string tgt_corpus;
  LangCode src_lang{"nk"};
  LangCode tgt_lang{"en"};
  // Language that target-side sentences are translated into for to_pivot.
  LangCode pivot_lang{"ko"};

  BackendConfig backend;
  // Relative to output_dir; must stay inside it.
  std::string cache_path = "translation_cache.log";

  AlignConfig align;
  FeatureConfig features;
  PoolScope sentence_pool = PoolScope::kDocument;
  // Required by external_embedding.
  std::string embeddings;

  ArticleSource article_source = ArticleSource::kPredicted;
  std::string gold_articles;
  std::string gold_sentences;
  // Manually aligned evaluation pairs. Aligned pairs touching any of their
  // sentences are dropped from train; the pairs themselves form dev and test.
  std::string eval_data;

  std::size_t n_dev = 500;
  std::size_t n_test = 500;
  std::uint64_t seed = 1;

  std::vector<std::size_t> dup_lengths{1, 2, 3, 5, 10, 15, 20, 30};
  LeakFilterConfig leak;
  // "tgt" measures the target-language side of pairs, "src" the source side.
  std::string measured_side = "tgt";

  std::string output_dir;
  std::size_t jobs = 1;
  bool record_timings = false;

  // Canonical JSON form; its digest is the config hash.
  std::string Canonical() const;
  std::string Hash() const;
  void Validate() const;
};

// Flat JSON config. Relative paths resolve against base_dir. Environment
// overrides (backend URL, jobs) are applied afterwards.
PipelineConfig ParsePipelineConfig(const std::string& json_text, const std::string& base_dir);
PipelineConfig LoadPipelineConfig(const std::string& path);

struct RunResult {
  std::vector<std::string> artifacts;  // relative to output_dir
  std::size_t article_pairs = 0;
  std::size_t sentence_pairs = 0;
  std::size_t train_pairs = 0;
  std::size_t dev_pairs = 0;
  std::size_t test_pairs = 0;
};

// translate -> train subwords -> align articles -> align sentences ->
// exclude eval sentences -> split -> dedup report -> evaluate. Writes run.json; on
// failure run.json names the failing stage and marks produced artifacts stale.
RunResult RunPipeline(const PipelineConfig& config);

// Writes <prefix>.tsv ("src_id<TAB>tgt_id<TAB>src_text<TAB>tgt_text") and the
// parallel plain-text files <prefix>.src.txt and <prefix>.tgt.txt. Tabs and
// line breaks inside texts become spaces.
std::vector<std::string> ExportPairs(const AlignmentSet& pairs, const Corpus& src,
                                     const Corpus& tgt, const std::string& prefix);

// Sentence id -> text over a corpus.
std::unordered_map<std::string, std::string> SentenceTextIndex(const Corpus& corpus);

}  // namespace pivalign

#endif  // PIVALIGN_PIPELINE_H_
