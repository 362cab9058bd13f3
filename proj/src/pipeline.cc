#include "pivalign/pipeline.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <optional>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "json.hpp"
#include "pivalign/digest.h"
#include "pivalign/error.h"
#include "pivalign/evaluation.h"
#include "pivalign/random.h"
#include "pivalign/text.h"
#include "pivalign/tokenizer.h"

namespace fs = std::filesystem;

namespace pivalign {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "src_corpus", "tgt_corpus", "src_lang", "tgt_lang", "pivot_lang",
      "backend_kind", "backend_path", "backend_timeout_ms", "backend_batch_size",
      "backend_max_inflight", "backend_retries", "backend_backoff_ms", "translate_titles",
      "cache_path", "method", "selection", "threshold", "margin_k", "margin_variant",
      "tokenizer", "vocab_size", "vocab_scope", "lowercase", "sentence_pool", "embeddings",
      "article_source", "gold_articles", "gold_sentences", "eval_data", "n_dev", "n_test",
      "seed", "dup_lengths", "leak_rule", "leak_min_len", "leak_count_window",
      "leak_min_count", "measured_side", "output_dir", "jobs", "timings"};
  return keys;
}

std::string ResolvePath(const std::string& base, const std::string& p) {
  if (p.empty()) return p;
  const fs::path path(p);
  if (path.is_absolute() || base.empty()) return path.lexically_normal().string();
  return (fs::path(base) / path).lexically_normal().string();
}

template <typename T>
T Get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

bool NeedsToPivot(AlignMethod m) { return m == AlignMethod::kToPivot || m == AlignMethod::kBidi; }
bool NeedsFromPivot(AlignMethod m) { return m == AlignMethod::kFromPivot || m == AlignMethod::kBidi; }

}  // namespace

PipelineConfig ParsePipelineConfig(const std::string& json_text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!KnownKeys().count(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  PipelineConfig c;
  auto has = [&](const char* key) { return j.contains(key) && !j.at(key).is_null(); };
  auto str = [&](const char* key) { return Get<std::string>(j, key); };
  auto count = [&](const char* key) {
    const auto v = Get<long long>(j, key);
    if (v < 0) throw ConfigError(std::string("config key '") + key + "' must be >= 0");
    return static_cast<std::size_t>(v);
  };

  if (has("src_corpus")) c.src_corpus = ResolvePath(base_dir, str("src_corpus"));
  if (has("tgt_corpus")) c.tgt_corpus = ResolvePath(base_dir, str("tgt_corpus"));
  if (has("src_lang")) c.src_lang = LangCode(str("src_lang"));
  if (has("tgt_lang")) c.tgt_lang = LangCode(str("tgt_lang"));
  if (has("pivot_lang")) c.pivot_lang = LangCode(str("pivot_lang"));

  if (has("backend_kind")) c.backend.kind = ParseBackendKind(str("backend_kind"));
  if (has("backend_path")) {
    c.backend.path_or_url = c.backend.kind == BackendKind::kFile
                                ? ResolvePath(base_dir, str("backend_path"))
                                : str("backend_path");
  }
  if (has("backend_timeout_ms")) c.backend.timeout_ms = count("backend_timeout_ms");
  if (has("backend_batch_size")) c.backend.batch_size = count("backend_batch_size");
  if (has("backend_max_inflight")) c.backend.max_inflight = count("backend_max_inflight");
  if (has("backend_retries")) c.backend.retries = count("backend_retries");
  if (has("backend_backoff_ms")) c.backend.backoff_ms = count("backend_backoff_ms");
  if (has("translate_titles")) c.backend.translate_titles = Get<bool>(j, "translate_titles");
  if (has("cache_path")) c.cache_path = str("cache_path");

  if (has("method")) c.align.method = ParseAlignMethod(str("method"));
  if (has("selection")) c.align.selection = ParseSelection(str("selection"));
  if (has("threshold")) c.align.threshold = Get<double>(j, "threshold");
  if (has("margin_k")) c.align.margin.k = count("margin_k");
  if (has("margin_variant")) c.align.margin.variant = ParseMarginVariant(str("margin_variant"));
  if (has("tokenizer")) {
    const std::string t = str("tokenizer");
    if (t == "subword") {
      c.features.mode = TokenizerMode::kSubword;
    } else if (t == "whitespace") {
      c.features.mode = TokenizerMode::kWhitespace;
    } else {
      throw ConfigError("unknown tokenizer '" + t + "'");
    }
  }
  if (has("vocab_size")) c.features.vocab_size = count("vocab_size");
  if (has("vocab_scope")) c.features.scope = ParseVocabScope(str("vocab_scope"));
  if (has("lowercase")) c.features.lowercase = Get<bool>(j, "lowercase");
  if (has("sentence_pool")) c.sentence_pool = ParsePoolScope(str("sentence_pool"));
  if (has("embeddings")) c.embeddings = ResolvePath(base_dir, str("embeddings"));

  if (has("article_source")) {
    const std::string s = str("article_source");
    if (s == "predicted") {
      c.article_source = ArticleSource::kPredicted;
    } else if (s == "gold") {
      c.article_source = ArticleSource::kGold;
    } else {
      throw ConfigError("article_source must be 'predicted' or 'gold'");
    }
  }
  if (has("gold_articles")) c.gold_articles = ResolvePath(base_dir, str("gold_articles"));
  if (has("gold_sentences")) c.gold_sentences = ResolvePath(base_dir, str("gold_sentences"));
  if (has("eval_data")) c.eval_data = ResolvePath(base_dir, str("eval_data"));
  if (has("n_dev")) c.n_dev = count("n_dev");
  if (has("n_test")) c.n_test = count("n_test");
  if (has("seed")) c.seed = Get<std::uint64_t>(j, "seed");
  if (has("dup_lengths")) c.dup_lengths = Get<std::vector<std::size_t>>(j, "dup_lengths");
  if (has("leak_rule")) {
    const std::string r = str("leak_rule");
    if (r == "long_window") {
      c.leak.rule = LeakRule::kLongWindow;
    } else if (r == "window_count") {
      c.leak.rule = LeakRule::kWindowCount;
    } else {
      throw ConfigError("leak_rule must be 'long_window' or 'window_count'");
    }
  }
  if (has("leak_min_len")) c.leak.min_len = count("leak_min_len");
  if (has("leak_count_window")) c.leak.count_window = count("leak_count_window");
  if (has("leak_min_count")) c.leak.min_count = count("leak_min_count");
  if (has("measured_side")) c.measured_side = str("measured_side");
  if (has("output_dir")) c.output_dir = ResolvePath(base_dir, str("output_dir"));
  if (has("jobs")) c.jobs = count("jobs");
  if (has("timings")) c.record_timings = Get<bool>(j, "timings");

  if (const char* url = std::getenv(kBackendUrlEnv); url && *url && c.backend.kind == BackendKind::kHttp) {
    c.backend.path_or_url = url;
  }
  if (const char* jobs = std::getenv(kJobsEnv); jobs && *jobs) {
    try {
      c.jobs = std::stoul(jobs);
    } catch (const std::exception&) {
      throw ConfigError(std::string(kJobsEnv) + " must be a non-negative integer");
    }
  }
  return c;
}

PipelineConfig LoadPipelineConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParsePipelineConfig(ss.str(), fs::path(path).parent_path().string());
}

std::string PipelineConfig::Canonical() const {
  ordered_json j;
  j["src_corpus"] = src_corpus;
  j["tgt_corpus"] = tgt_corpus;
  j["src_lang"] = src_lang.str();
  j["tgt_lang"] = tgt_lang.str();
  j["pivot_lang"] = pivot_lang.str();
  j["backend_kind"] = std::string(ToString(backend.kind));
  j["backend_path"] = backend.path_or_url;
  j["backend_batch_size"] = backend.batch_size;
  j["translate_titles"] = backend.translate_titles;
  j["cache_path"] = cache_path;
  j["method"] = std::string(ToString(align.method));
  j["selection"] = std::string(ToString(align.selection));
  j["threshold"] = align.effective_threshold();
  j["margin_k"] = align.margin.k;
  j["margin_variant"] = std::string(ToString(align.margin.variant));
  j["tokenizer"] = features.mode == TokenizerMode::kSubword ? "subword" : "whitespace";
  j["vocab_size"] = features.vocab_size;
  j["vocab_scope"] = std::string(ToString(features.scope));
  j["lowercase"] = features.lowercase;
  j["sentence_pool"] = std::string(ToString(sentence_pool));
  j["embeddings"] = embeddings;
  j["article_source"] = article_source == ArticleSource::kGold ? "gold" : "predicted";
  j["gold_articles"] = gold_articles;
  j["gold_sentences"] = gold_sentences;
  j["eval_data"] = eval_data;
  j["n_dev"] = n_dev;
  j["n_test"] = n_test;
  j["seed"] = seed;
  j["dup_lengths"] = dup_lengths;
  j["leak_rule"] = leak.rule == LeakRule::kLongWindow ? "long_window" : "window_count";
  j["leak_min_len"] = leak.min_len;
  j["leak_count_window"] = leak.count_window;
  j["leak_min_count"] = leak.min_count;
  j["measured_side"] = measured_side;
  return j.dump();
}

std::string PipelineConfig::Hash() const { return Digest128Hex(Canonical()); }

void PipelineConfig::Validate() const {
  auto require_file = [](const std::string& what, const std::string& path) {
    if (path.empty()) throw ConfigError(what + " is not set");
    if (!fs::exists(path)) throw ConfigError(what + " '" + path + "' does not exist");
  };
  require_file("src_corpus", src_corpus);
  require_file("tgt_corpus", tgt_corpus);
  if (src_lang == tgt_lang) throw ConfigError("src_lang and tgt_lang must differ");
  if (output_dir.empty()) throw ConfigError("output_dir is not set");
  align.Validate();
  if (NeedsToPivot(align.method) || NeedsFromPivot(align.method)) {
    backend.Validate();
    if (backend.kind == BackendKind::kFile) require_file("backend_path", backend.path_or_url);
    if (NeedsToPivot(align.method) && tgt_lang == pivot_lang) {
      throw ConfigError("pivot_lang must differ from tgt_lang");
    }
  }
  if (align.method == AlignMethod::kExternalEmbedding) require_file("embeddings", embeddings);
  if (article_source == ArticleSource::kGold) require_file("gold_articles", gold_articles);
  if (align.method == AlignMethod::kNaive && article_source != ArticleSource::kGold) {
    throw ConfigError("the naive method needs article_source 'gold'");
  }
  if (!gold_articles.empty()) require_file("gold_articles", gold_articles);
  if (!gold_sentences.empty()) require_file("gold_sentences", gold_sentences);
  if (!eval_data.empty()) require_file("eval_data", eval_data);
  if (features.mode == TokenizerMode::kSubword && features.vocab_size < kByteAlphabetSize) {
    throw ConfigError("vocab_size must be >= 256");
  }
  for (std::size_t len : dup_lengths) {
    if (len < 1) throw ConfigError("dup_lengths entries must be >= 1");
  }
  if (leak.min_len < 1) throw ConfigError("leak_min_len must be >= 1");
  if (measured_side != "src" && measured_side != "tgt") {
    throw ConfigError("measured_side must be 'src' or 'tgt'");
  }
  const fs::path cache = fs::path(cache_path).lexically_normal();
  if (cache.empty() || cache.is_absolute() || *cache.begin() == "..") {
    throw ConfigError("cache_path must be a relative path inside output_dir");
  }
}

std::unordered_map<std::string, std::string> SentenceTextIndex(const Corpus& corpus) {
  std::unordered_map<std::string, std::string> out;
  for (const Article& a : corpus.articles) {
    for (const Sentence& s : a.sentences) out.emplace(s.id, s.text);
  }
  return out;
}

namespace {

std::string Flatten(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

void WriteText(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

const std::string& TextOf(const std::unordered_map<std::string, std::string>& index,
                          const std::string& id) {
  auto it = index.find(id);
  if (it == index.end()) throw DataError("unknown sentence id '" + id + "'");
  return it->second;
}

std::string ArticleOf(const std::string& sentence_id) {
  const std::size_t hash = sentence_id.rfind('#');
  return hash == std::string::npos ? sentence_id : sentence_id.substr(0, hash);
}

}  // namespace

std::vector<std::string> ExportPairs(const AlignmentSet& pairs, const Corpus& src,
                                     const Corpus& tgt, const std::string& prefix) {
  const auto src_text = SentenceTextIndex(src);
  const auto tgt_text = SentenceTextIndex(tgt);
  std::string tsv, src_lines, tgt_lines;
  for (const AlignmentPair& p : pairs.pairs) {
    const std::string s = Flatten(TextOf(src_text, p.src_id));
    const std::string t = Flatten(TextOf(tgt_text, p.tgt_id));
    tsv += p.src_id + '\t' + p.tgt_id + '\t' + s + '\t' + t + '\n';
    src_lines += s + '\n';
    tgt_lines += t + '\n';
  }
  const std::vector<std::string> paths = {prefix + ".tsv", prefix + ".src.txt", prefix + ".tgt.txt"};
  WriteText(paths[0], tsv);
  WriteText(paths[1], src_lines);
  WriteText(paths[2], tgt_lines);
  return paths;
}

namespace {

class RunContext {
 public:
  explicit RunContext(const PipelineConfig& config)
      : config_(config), out_(config.output_dir), hash_(config.Hash()) {}

  const fs::path& out() const { return out_; }
  const std::string& hash() const { return hash_; }

  void Begin(const std::string& stage) {
    Finish();
    stage_ = stage;
    stage_start_ = std::chrono::steady_clock::now();
  }
  void Finish() {
    if (stage_.empty()) return;
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - stage_start_)
                        .count();
    timings_.emplace_back(stage_, ms);
    stages_.push_back(stage_);
    stage_.clear();
  }
  const std::string& stage() const { return stage_; }

  void Write(const std::string& rel, const std::string& content) {
    WriteText(out_ / rel, content);
    artifacts_.push_back(rel);
  }
  void Record(const std::string& rel) { artifacts_.push_back(rel); }
  // Run-specific statistics; reported only alongside timings.
  void Telemetry(const std::string& key, std::size_t value) { telemetry_.emplace_back(key, value); }

  void WriteAlignmentFile(const std::string& rel, const AlignmentSet& set, HeaderFields header) {
    header.emplace_back("config_hash", hash_);
    std::ostringstream ss;
    WriteAlignment(set, header, ss);
    Write(rel, ss.str());
  }

  void WriteManifest(const std::string& status, const std::string& error, const ordered_json& counts) {
    ordered_json j;
    j["version"] = kVersion;
    j["config_hash"] = hash_;
    j["seed"] = config_.seed;
    j["status"] = status;
    j["stages"] = stages_;
    if (status == "ok") {
      j["artifacts"] = artifacts_;
    } else {
      j["failed_stage"] = stage_;
      j["error"] = error;
      j["stale_artifacts"] = artifacts_;
    }
    j["counts"] = counts;
    if (config_.record_timings) {
      ordered_json t = ordered_json::object();
      for (const auto& [stage, ms] : timings_) t[stage] = ms;
      j["timings_ms"] = t;
      for (const auto& [key, value] : telemetry_) j[key] = value;
    }
    WriteText(out_ / "run.json", j.dump(2) + "\n");
  }

 private:
  const PipelineConfig& config_;
  fs::path out_;
  std::string hash_;
  std::string stage_;
  std::chrono::steady_clock::time_point stage_start_;
  std::vector<std::string> stages_;
  std::vector<std::pair<std::string, long long>> timings_;
  std::vector<std::string> artifacts_;
  std::vector<std::pair<std::string, std::size_t>> telemetry_;
};

std::string PairLines(const AlignmentSet& set, const std::vector<std::size_t>& idx) {
  std::string out;
  for (std::size_t i : idx) out += set.pairs[i].src_id + '\t' + set.pairs[i].tgt_id + '\n';
  return out;
}

}  // namespace

RunResult RunPipeline(const PipelineConfig& config) {
  config.Validate();
  RunContext ctx(config);
  fs::create_directories(ctx.out());
  RunResult result;
  ordered_json counts = ordered_json::object();
  ctx.WriteManifest("running", "", counts);
  try {
    ctx.Begin("load");
    const Corpus src = LoadCorpus(config.src_corpus, config.src_lang);
    const Corpus tgt = LoadCorpus(config.tgt_corpus, config.tgt_lang);
    counts["src_articles"] = src.articles.size();
    counts["tgt_articles"] = tgt.articles.size();

    ctx.Begin("translate");
    const AlignMethod method = config.align.method;
    TranslationMap src_trans, tgt_trans;
    if (NeedsToPivot(method) || NeedsFromPivot(method)) {
      const fs::path cache_path = ctx.out() / config.cache_path;
      if (cache_path.has_parent_path()) fs::create_directories(cache_path.parent_path());
      TranslationCache cache(cache_path.string());
      TranslationGateway gateway(MakeBackend(config.backend), &cache, config.backend);
      if (NeedsFromPivot(method)) {
        const Direction d(config.src_lang, config.tgt_lang);
        for (const Article& a : src.articles) src_trans.emplace(a.id, gateway.TranslateArticle(a, d));
      }
      if (NeedsToPivot(method)) {
        const Direction d(config.tgt_lang, config.pivot_lang);
        for (const Article& a : tgt.articles) tgt_trans.emplace(a.id, gateway.TranslateArticle(a, d));
      }
      ctx.Record(config.cache_path);
      ctx.Telemetry("backend_requests", gateway.backend_requests());
    }

    ctx.Begin("tokenize-train");
    std::vector<std::string> source_space, target_space;
    auto add_article = [](std::vector<std::string>* out, const Article& a) {
      if (!Trim(a.title).empty()) out->push_back(a.title);
      for (const Sentence& s : a.sentences) out->push_back(s.text);
    };
    auto add_translation = [](std::vector<std::string>* out, const TranslatedDocument& t) {
      if (!Trim(t.title).empty()) out->push_back(t.title);
      out->insert(out->end(), t.sentences.begin(), t.sentences.end());
    };
    if (NeedsToPivot(method)) {
      for (const Article& a : src.articles) add_article(&source_space, a);
      for (const Article& a : tgt.articles) add_translation(&source_space, tgt_trans.at(a.id));
    }
    if (NeedsFromPivot(method)) {
      for (const Article& a : src.articles) add_translation(&target_space, src_trans.at(a.id));
      for (const Article& a : tgt.articles) add_article(&target_space, a);
    }
    const Featurizer featurizer = TrainFeaturizer(source_space, target_space, config.features);
    if (config.features.mode == TokenizerMode::kSubword && (NeedsToPivot(method) || NeedsFromPivot(method))) {
      auto dump = [&](const std::string& rel, const TokenizerConfig& t) {
        std::ostringstream ss;
        WriteVocab(*t.vocab, ss);
        ctx.Write(rel, ss.str());
      };
      if (config.features.scope == VocabScope::kShared) {
        dump("vocab.bpe", featurizer.source_space);
      } else {
        if (NeedsToPivot(method)) dump("vocab.source.bpe", featurizer.source_space);
        if (NeedsFromPivot(method)) dump("vocab.target.bpe", featurizer.target_space);
      }
    }

    ctx.Begin("align-articles");
    const HeaderFields header = AlignmentHeader(config.align, config.features, config.seed);
    std::optional<EmbeddingTable> embeddings;
    if (method == AlignMethod::kExternalEmbedding) embeddings = EmbeddingTable::Load(config.embeddings);
    AlignmentSet article_pairs;
    if (config.article_source == ArticleSource::kGold) {
      article_pairs = LoadGold(config.gold_articles);
      if (article_pairs.level != AlignLevel::kArticle) {
        throw DataError("gold_articles must hold article ids");
      }
      ctx.WriteAlignmentFile("articles.tsv", article_pairs, {{"source", "gold"}});
    } else if (embeddings) {
      article_pairs = ExternalEmbeddingAlign(src, tgt, *embeddings, config.align);
      ctx.WriteAlignmentFile("articles.tsv", article_pairs, header);
    } else {
      article_pairs = AlignArticles(src, tgt, src_trans, tgt_trans, config.align, featurizer);
      ctx.WriteAlignmentFile("articles.tsv", article_pairs, header);
    }
    result.article_pairs = article_pairs.size();
    counts["article_pairs"] = article_pairs.size();

    ctx.Begin("align-sentences");
    AlignmentSet sentences;
    if (embeddings) {
      sentences.level = AlignLevel::kSentence;
      sentences.mode = config.align.selection == Selection::kGlobalGreedy ? AlignMode::kOneToOne
                                                                          : AlignMode::kPerTarget;
      for (const AlignmentPair& p : article_pairs.pairs) {
        const auto si = src.find(p.src_id), ti = tgt.find(p.tgt_id);
        if (!si || !ti) {
          throw DataError("article pair (" + p.src_id + ", " + p.tgt_id + ") references an unknown article");
        }
        AlignmentSet part = ExternalEmbeddingAlign(src.articles[*si], tgt.articles[*ti], *embeddings, config.align);
        sentences.pairs.insert(sentences.pairs.end(), part.pairs.begin(), part.pairs.end());
      }
    } else {
      sentences = AlignSentencesInPairs(src, tgt, article_pairs, src_trans, tgt_trans, config.align,
                                        featurizer, config.sentence_pool, config.jobs);
    }
    ctx.WriteAlignmentFile("sentences.tsv", sentences, header);
    result.sentence_pairs = sentences.size();
    counts["sentence_pairs"] = sentences.size();

    ctx.Begin("exclude-eval");
    std::optional<AlignmentSet> eval_data;
    AlignmentSet usable = sentences;
    if (!config.eval_data.empty()) {
      eval_data = LoadGold(config.eval_data);
      if (eval_data->level != AlignLevel::kSentence) throw DataError("eval_data must hold sentence ids");
      std::unordered_set<std::string> excluded_src, excluded_tgt;
      for (const AlignmentPair& p : eval_data->pairs) {
        excluded_src.insert(p.src_id);
        excluded_tgt.insert(p.tgt_id);
      }
      usable.pairs.clear();
      for (const AlignmentPair& p : sentences.pairs) {
        if (!excluded_src.count(p.src_id) && !excluded_tgt.count(p.tgt_id)) usable.pairs.push_back(p);
      }
    }
    counts["excluded_pairs"] = sentences.size() - usable.size();

    ctx.Begin("split");
    const std::uint64_t split_seed = DeriveSeed(config.seed, "split");
    AlignmentSet train, dev, test;
    if (eval_data) {
      EvalSplit s = SplitEval(*eval_data, config.n_dev, config.n_test, split_seed);
      dev = std::move(s.dev);
      test = std::move(s.test);
      train = std::move(usable);
    } else {
      EvalSplit s = SplitEval(usable, config.n_dev, config.n_test, split_seed);
      dev = std::move(s.dev);
      test = std::move(s.test);
      train = std::move(s.rest);
    }
    HeaderFields split_header = header;
    split_header.emplace_back("split_seed", std::to_string(split_seed));
    ctx.WriteAlignmentFile("train.tsv", train, split_header);
    ctx.WriteAlignmentFile("dev.tsv", dev, split_header);
    ctx.WriteAlignmentFile("test.tsv", test, split_header);
    for (const auto& [name, set] : {std::pair<std::string, const AlignmentSet*>{"train", &train},
                                    {"dev", &dev},
                                    {"test", &test}}) {
      for (const std::string& p : ExportPairs(*set, src, tgt, (ctx.out() / "export" / name).string())) {
        ctx.Record(fs::relative(p, ctx.out()).string());
      }
    }
    result.train_pairs = train.size();
    result.dev_pairs = dev.size();
    result.test_pairs = test.size();
    counts["train_pairs"] = train.size();
    counts["dev_pairs"] = dev.size();
    counts["test_pairs"] = test.size();

    ctx.Begin("dedup");
    const auto src_text = SentenceTextIndex(src);
    const auto tgt_text = SentenceTextIndex(tgt);
    const bool measure_tgt = config.measured_side == "tgt";
    auto measured = [&](const AlignmentSet& set) {
      std::vector<std::string> texts;
      for (const AlignmentPair& p : set.pairs) {
        texts.push_back(measure_tgt ? TextOf(tgt_text, p.tgt_id) : TextOf(src_text, p.src_id));
      }
      return WordTokens(texts);
    };
    const TokenCorpus train_side = measured(train);
    const TokenCorpus dev_side = measured(dev);
    const TokenCorpus test_side = measured(test);
    std::ostringstream csv;
    WriteProfileCsv({DupWithin(train_side, config.dup_lengths, "train"),
                     DupCross(dev_side, train_side, config.dup_lengths, "dev-train"),
                     DupCross(test_side, train_side, config.dup_lengths, "test-train")},
                    csv);
    ctx.Write("dedup.csv", csv.str());
    std::size_t removed = 0;
    for (const auto& [name, set, side] :
         {std::tuple<std::string, const AlignmentSet*, const TokenCorpus*>{"dev", &dev, &dev_side},
          {"test", &test, &test_side}}) {
      const LeakSplit leak = FilterLeaky(*side, train_side, config.leak);
      ctx.Write("leak/" + name + ".kept.txt", PairLines(*set, leak.kept));
      ctx.Write("leak/" + name + ".removed.txt", PairLines(*set, leak.removed));
      removed += leak.removed.size();
    }
    counts["leaky_eval_pairs"] = removed;

    ctx.Begin("evaluate");
    ordered_json report = ordered_json::object();
    if (!config.gold_articles.empty() && config.article_source == ArticleSource::kPredicted) {
      report["article"] = ordered_json::parse(ReportJson(Prf(article_pairs, LoadGold(config.gold_articles))));
    }
    if (!config.gold_sentences.empty()) {
      const AlignmentSet gold = LoadGold(config.gold_sentences);
      std::set<std::string> gold_articles;
      for (const AlignmentPair& p : gold.pairs) gold_articles.insert(ArticleOf(p.src_id));
      AlignmentSet scoped;
      scoped.level = sentences.level;
      scoped.mode = sentences.mode;
      for (const AlignmentPair& p : sentences.pairs) {
        if (gold_articles.count(ArticleOf(p.src_id))) scoped.pairs.push_back(p);
      }
      report["sentence"] = ordered_json::parse(ReportJson(Prf(scoped, gold)));
    }
    if (!report.empty()) ctx.Write("eval.json", report.dump(2) + "\n");

    ctx.Finish();
    result.artifacts.push_back("run.json");
    ctx.WriteManifest("ok", "", counts);
  } catch (const Error& e) {
    const std::string stage = ctx.stage();
    ctx.WriteManifest("failed", e.what(), counts);
    throw Error(e.kind(), "stage " + stage + ": " + e.what());
  } catch (const std::exception& e) {
    const std::string stage = ctx.stage();
    ctx.WriteManifest("failed", e.what(), counts);
    throw Error(ErrorKind::kIo, "stage " + stage + ": " + e.what());
  }
  return result;
}

}  // namespace pivalign
