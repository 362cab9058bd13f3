// pivalign command line: the full pipeline ("run") plus one subcommand per stage.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pivalign/aligner.h"
#include "pivalign/corpus.h"
#include "pivalign/dedup.h"
#include "pivalign/error.h"
#include "pivalign/evaluation.h"
#include "pivalign/pipeline.h"
#include "pivalign/random.h"
#include "pivalign/text.h"
#include "pivalign/tokenizer.h"
#include "pivalign/translate.h"

namespace fs = std::filesystem;
using namespace pivalign;

namespace {

std::vector<std::string> ReadLines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

fs::path OutDir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--out-dir is required");
  fs::create_directories(dir);
  return dir;
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << content;
}

struct AlignOptions {
  std::string src_corpus, tgt_corpus;
  std::string src_lang = "nk", tgt_lang = "en", pivot_lang = "ko";
  std::string translations;
  std::string method = "bidi", selection = "global_greedy";
  std::optional<double> threshold;
  std::size_t margin_k = 4;
  std::string margin_variant = "ratio";
  std::string tokenizer = "subword";
  std::size_t vocab_size = 2000;
  std::string vocab_scope = "shared";
  bool lowercase = false;
  std::string embeddings;
  std::string out_dir;
  std::uint64_t seed = 1;

  void Register(CLI::App* cmd) {
    cmd->add_option("--src-corpus", src_corpus, "Source-language corpus (JSONL)")->required();
    cmd->add_option("--tgt-corpus", tgt_corpus, "Target-language corpus (JSONL)")->required();
    cmd->add_option("--src-lang", src_lang);
    cmd->add_option("--tgt-lang", tgt_lang);
    cmd->add_option("--pivot-lang", pivot_lang);
    cmd->add_option("--translations", translations,
                    "Directory of <article>.<src>-<tgt>.txt translation files");
    cmd->add_option("--method", method, "to_pivot, from_pivot, bidi, naive or external_embedding");
    cmd->add_option("--selection", selection, "global_greedy or per_target_argmax");
    cmd->add_option("--threshold", threshold);
    cmd->add_option("--margin-k", margin_k);
    cmd->add_option("--margin-variant", margin_variant, "ratio, distance or absolute");
    cmd->add_option("--tokenizer", tokenizer, "subword or whitespace");
    cmd->add_option("--vocab-size", vocab_size);
    cmd->add_option("--vocab-scope", vocab_scope, "shared or per_component");
    cmd->add_flag("--lowercase", lowercase);
    cmd->add_option("--embeddings", embeddings, "Embedding table for external_embedding");
    cmd->add_option("--seed", seed, "Recorded in the output header");
    cmd->add_option("--out-dir", out_dir)->required();
  }

  AlignConfig Config() const {
    AlignConfig c;
    c.method = ParseAlignMethod(method);
    c.selection = ParseSelection(selection);
    c.threshold = threshold;
    c.margin.k = margin_k;
    c.margin.variant = ParseMarginVariant(margin_variant);
    c.Validate();
    return c;
  }

  FeatureConfig Features() const {
    FeatureConfig f;
    if (tokenizer == "subword") {
      f.mode = TokenizerMode::kSubword;
    } else if (tokenizer == "whitespace") {
      f.mode = TokenizerMode::kWhitespace;
    } else {
      throw ConfigError("unknown tokenizer '" + tokenizer + "'");
    }
    f.vocab_size = vocab_size;
    f.scope = ParseVocabScope(vocab_scope);
    f.lowercase = lowercase;
    return f;
  }
};

struct AlignInputs {
  Corpus src, tgt;
  TranslationMap src_trans, tgt_trans;
  AlignConfig config;
  FeatureConfig features;
  std::optional<Featurizer> featurizer;
  std::optional<EmbeddingTable> embeddings;
};

AlignInputs LoadAlignInputs(const AlignOptions& o) {
  AlignInputs in;
  in.config = o.Config();
  in.features = o.Features();
  const LangCode src_lang(o.src_lang), tgt_lang(o.tgt_lang), pivot_lang(o.pivot_lang);
  in.src = LoadCorpus(o.src_corpus, src_lang);
  in.tgt = LoadCorpus(o.tgt_corpus, tgt_lang);
  const AlignMethod m = in.config.method;
  const bool to = m == AlignMethod::kToPivot || m == AlignMethod::kBidi;
  const bool from = m == AlignMethod::kFromPivot || m == AlignMethod::kBidi;
  if (m == AlignMethod::kExternalEmbedding) {
    if (o.embeddings.empty()) throw ConfigError("--embeddings is required for external_embedding");
    in.embeddings = EmbeddingTable::Load(o.embeddings);
    return in;
  }
  if (!to && !from) return in;
  if (o.translations.empty()) throw ConfigError("--translations is required for " + o.method);
  BackendConfig backend;
  backend.kind = BackendKind::kFile;
  backend.path_or_url = o.translations;
  TranslationGateway gateway(MakeBackend(backend), nullptr, backend);
  std::vector<std::string> source_space, target_space;
  auto add = [](std::vector<std::string>* out, const std::string& title,
                const std::vector<std::string>& body) {
    if (!Trim(title).empty()) out->push_back(title);
    out->insert(out->end(), body.begin(), body.end());
  };
  auto originals = [](const Article& a) {
    std::vector<std::string> v;
    for (const Sentence& s : a.sentences) v.push_back(s.text);
    return v;
  };
  if (from) {
    const Direction d(src_lang, tgt_lang);
    for (const Article& a : in.src.articles) {
      const TranslatedDocument& t = in.src_trans.emplace(a.id, gateway.TranslateArticle(a, d)).first->second;
      add(&target_space, t.title, t.sentences);
    }
    for (const Article& a : in.tgt.articles) add(&target_space, a.title, originals(a));
  }
  if (to) {
    const Direction d(tgt_lang, pivot_lang);
    for (const Article& a : in.src.articles) add(&source_space, a.title, originals(a));
    for (const Article& a : in.tgt.articles) {
      const TranslatedDocument& t = in.tgt_trans.emplace(a.id, gateway.TranslateArticle(a, d)).first->second;
      add(&source_space, t.title, t.sentences);
    }
  }
  in.featurizer = TrainFeaturizer(source_space, target_space, in.features);
  return in;
}

void WriteAlignmentTo(const fs::path& path, const AlignmentSet& set, const HeaderFields& header) {
  std::ostringstream ss;
  WriteAlignment(set, header, ss);
  WriteFile(path, ss.str());
}

std::vector<std::size_t> ParseLengths(const std::string& s) {
  std::vector<std::size_t> out;
  for (const std::string& part : SplitChar(s, ',')) {
    try {
      out.push_back(std::stoul(std::string(Trim(part))));
    } catch (const std::exception&) {
      throw ConfigError("bad length list '" + s + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pivalign: pivot-translation alignment of comparable corpora"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  std::size_t jobs = 1;
  app.add_option("--jobs", jobs, "Worker cap")->envname(kJobsEnv);

  // run
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run the full pipeline from a JSON config");
  run->add_option("config", config_path)->required();

  // tokenize-train
  std::vector<std::string> tt_texts;
  std::string tt_corpus, tt_lang = "nk", tt_out;
  std::size_t tt_size = 2000;
  bool tt_lower = false;
  auto* tokenize_train = app.add_subcommand("tokenize-train", "Learn a byte-level BPE vocabulary");
  tokenize_train->add_option("--text", tt_texts, "Plain-text files, one sentence per line");
  tokenize_train->add_option("--corpus", tt_corpus, "JSONL corpus (titles and sentences)");
  tokenize_train->add_option("--lang", tt_lang, "Language of --corpus");
  tokenize_train->add_option("--vocab-size", tt_size);
  tokenize_train->add_flag("--lowercase", tt_lower);
  tokenize_train->add_option("--out-dir", tt_out)->required();

  // translate
  std::string tr_corpus, tr_src = "nk", tr_tgt = "en", tr_kind = "file", tr_path, tr_cache, tr_out;
  BackendConfig tr_backend;
  auto* translate = app.add_subcommand("translate", "Translate a corpus through the cached gateway");
  translate->add_option("--corpus", tr_corpus)->required();
  translate->add_option("--src", tr_src);
  translate->add_option("--tgt", tr_tgt);
  translate->add_option("--backend", tr_kind, "file or http");
  translate->add_option("--backend-path", tr_path, "Directory (file) or endpoint URL (http)")
      ->envname(kBackendUrlEnv);
  translate->add_option("--batch-size", tr_backend.batch_size);
  translate->add_option("--max-inflight", tr_backend.max_inflight);
  translate->add_option("--timeout-ms", tr_backend.timeout_ms);
  translate->add_option("--retries", tr_backend.retries);
  translate->add_flag("!--no-titles", tr_backend.translate_titles);
  translate->add_option("--cache", tr_cache, "Cache log, relative to --out-dir");
  translate->add_option("--out-dir", tr_out)->required();

  // align-articles / align-sentences
  AlignOptions aa;
  auto* align_articles = app.add_subcommand("align-articles", "Align articles across two corpora");
  aa.Register(align_articles);
  AlignOptions as;
  std::string as_articles, as_pool = "document";
  auto* align_sentences =
      app.add_subcommand("align-sentences", "Align sentences within aligned article pairs");
  as.Register(align_sentences);
  align_sentences->add_option("--articles", as_articles, "Article alignment or gold article pairs")
      ->required();
  align_sentences->add_option("--pool", as_pool, "document or corpus");

  // evaluate / significance
  std::string ev_pred, ev_gold, sig_a, sig_b, sig_gold;
  std::size_t sig_n = kDefaultResamples;
  std::uint64_t sig_seed = 1;
  auto* evaluate = app.add_subcommand("evaluate", "Precision, recall and F1 against gold pairs");
  evaluate->add_option("--pred", ev_pred)->required();
  evaluate->add_option("--gold", ev_gold)->required();
  auto* significance = app.add_subcommand("significance", "Paired approximate randomization test");
  significance->add_option("--pred-a", sig_a)->required();
  significance->add_option("--pred-b", sig_b)->required();
  significance->add_option("--gold", sig_gold)->required();
  significance->add_option("--resamples", sig_n);
  significance->add_option("--seed", sig_seed);

  // dedup-stats / filter-leaky
  std::string ds_train, ds_eval, ds_lengths = "1,2,3,5,10,15,20,30", ds_out;
  auto* dedup_stats = app.add_subcommand("dedup-stats", "Duplicated-substring profile as CSV");
  dedup_stats->add_option("--train", ds_train, "Plain text, one item per line")->required();
  dedup_stats->add_option("--eval", ds_eval, "Plain text, one item per line");
  dedup_stats->add_option("--lengths", ds_lengths, "Comma-separated window lengths");
  dedup_stats->add_option("--out-dir", ds_out, "Also write dedup.csv here");
  std::string fl_train, fl_eval, fl_rule = "long_window", fl_out;
  LeakFilterConfig fl_config;
  auto* filter_leaky = app.add_subcommand("filter-leaky", "Drop evaluation items overlapping train");
  filter_leaky->add_option("--train", fl_train)->required();
  filter_leaky->add_option("--eval", fl_eval, "One item per line; outputs list zero-based line numbers")
      ->required();
  filter_leaky->add_option("--rule", fl_rule, "long_window or window_count");
  filter_leaky->add_option("--min-len", fl_config.min_len);
  filter_leaky->add_option("--count-window", fl_config.count_window);
  filter_leaky->add_option("--min-count", fl_config.min_count);
  filter_leaky->add_option("--out-dir", fl_out)->required();

  // split / export
  std::string sp_pairs, sp_out;
  std::size_t sp_dev = 500, sp_test = 500;
  std::uint64_t sp_seed = 1;
  auto* split = app.add_subcommand("split", "Seeded train/dev/test split of aligned pairs");
  split->add_option("--pairs", sp_pairs)->required();
  split->add_option("--n-dev", sp_dev);
  split->add_option("--n-test", sp_test);
  split->add_option("--seed", sp_seed);
  split->add_option("--out-dir", sp_out)->required();
  std::string ex_pairs, ex_src, ex_tgt, ex_src_lang = "nk", ex_tgt_lang = "en", ex_out,
                        ex_name = "pairs";
  auto* export_cmd = app.add_subcommand("export", "TSV plus parallel plain-text files");
  export_cmd->add_option("--pairs", ex_pairs)->required();
  export_cmd->add_option("--src-corpus", ex_src)->required();
  export_cmd->add_option("--tgt-corpus", ex_tgt)->required();
  export_cmd->add_option("--src-lang", ex_src_lang);
  export_cmd->add_option("--tgt-lang", ex_tgt_lang);
  export_cmd->add_option("--name", ex_name, "Output file stem");
  export_cmd->add_option("--out-dir", ex_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ErrorKind::kConfig);
  }

  try {
    if (run->parsed()) {
      PipelineConfig config = LoadPipelineConfig(config_path);
      if (app.count("--jobs")) config.jobs = jobs;
      const RunResult r = RunPipeline(config);
      std::cout << "articles " << r.article_pairs << "\nsentences " << r.sentence_pairs << "\ntrain "
                << r.train_pairs << "\ndev " << r.dev_pairs << "\ntest " << r.test_pairs << "\n";
    } else if (tokenize_train->parsed()) {
      std::vector<std::string> sentences;
      for (const std::string& path : tt_texts) {
        for (std::string& line : ReadLines(path)) {
          if (!Trim(line).empty()) sentences.push_back(std::move(line));
        }
      }
      if (!tt_corpus.empty()) {
        for (const Article& a : LoadCorpus(tt_corpus, LangCode(tt_lang)).articles) {
          if (!Trim(a.title).empty()) sentences.push_back(a.title);
          for (const Sentence& s : a.sentences) sentences.push_back(s.text);
        }
      }
      if (tt_lower) {
        for (std::string& s : sentences) s = AsciiLower(s);
      }
      const SubwordVocab vocab = TrainSubword(sentences, tt_size);
      SaveVocab(vocab, (OutDir(tt_out) / "vocab.bpe").string());
      std::cout << "vocab_size " << vocab.size() << "\n";
    } else if (translate->parsed()) {
      tr_backend.kind = ParseBackendKind(tr_kind);
      tr_backend.path_or_url = tr_path;
      tr_backend.Validate();
      const Direction d{LangCode(tr_src), LangCode(tr_tgt)};
      const Corpus corpus = LoadCorpus(tr_corpus, d.src);
      const fs::path out = OutDir(tr_out);
      std::optional<TranslationCache> cache;
      if (!tr_cache.empty()) {
        const fs::path rel = fs::path(tr_cache).lexically_normal();
        if (rel.is_absolute() || *rel.begin() == "..") {
          throw ConfigError("--cache must be a relative path inside --out-dir");
        }
        cache.emplace((out / rel).string());
      }
      TranslationGateway gateway(MakeBackend(tr_backend), cache ? &*cache : nullptr, tr_backend);
      for (const Article& a : corpus.articles) {
        const TranslatedDocument t = gateway.TranslateArticle(a, d);
        std::string body;
        for (const std::string& s : t.sentences) body += s + "\n";
        WriteFile(FileBackend::SentencePath(out.string(), a.id, d), body);
        if (tr_backend.translate_titles && !Trim(a.title).empty()) {
          WriteFile(FileBackend::TitlePath(out.string(), a.id, d), t.title + "\n");
        }
      }
      std::cout << "articles " << corpus.articles.size() << "\nbackend_requests "
                << gateway.backend_requests() << "\n";
    } else if (align_articles->parsed()) {
      const AlignInputs in = LoadAlignInputs(aa);
      AlignmentSet set = in.embeddings
                             ? ExternalEmbeddingAlign(in.src, in.tgt, *in.embeddings, in.config)
                             : AlignArticles(in.src, in.tgt, in.src_trans, in.tgt_trans, in.config,
                                             *in.featurizer);
      WriteAlignmentTo(OutDir(aa.out_dir) / "articles.tsv", set,
                       AlignmentHeader(in.config, in.features, aa.seed));
      std::cout << "pairs " << set.size() << "\n";
    } else if (align_sentences->parsed()) {
      const AlignInputs in = LoadAlignInputs(as);
      const AlignmentSet articles = ReadAlignment(as_articles);
      if (articles.level != AlignLevel::kArticle) throw DataError("--articles must hold article ids");
      AlignmentSet set;
      set.level = AlignLevel::kSentence;
      const AlignMethod m = in.config.method;
      if (m == AlignMethod::kNaive || m == AlignMethod::kExternalEmbedding) {
        set.mode = m == AlignMethod::kNaive || in.config.selection == Selection::kGlobalGreedy
                       ? AlignMode::kOneToOne
                       : AlignMode::kPerTarget;
        for (const AlignmentPair& p : articles.pairs) {
          const auto si = in.src.find(p.src_id), ti = in.tgt.find(p.tgt_id);
          if (!si || !ti) throw DataError("article pair (" + p.src_id + ", " + p.tgt_id + ") is not in the corpora");
          const Article& a = in.src.articles[*si];
          const Article& b = in.tgt.articles[*ti];
          const AlignmentSet part = m == AlignMethod::kNaive
                                        ? NaiveAlign(a, b)
                                        : ExternalEmbeddingAlign(a, b, *in.embeddings, in.config);
          set.pairs.insert(set.pairs.end(), part.pairs.begin(), part.pairs.end());
        }
      } else {
        set = AlignSentencesInPairs(in.src, in.tgt, articles, in.src_trans, in.tgt_trans, in.config,
                                    *in.featurizer, ParsePoolScope(as_pool), jobs);
      }
      set.Validate();
      WriteAlignmentTo(OutDir(as.out_dir) / "sentences.tsv", set,
                       AlignmentHeader(in.config, in.features, as.seed));
      std::cout << "pairs " << set.size() << "\n";
    } else if (evaluate->parsed()) {
      std::cout << ReportJson(Prf(ReadAlignment(ev_pred), LoadGold(ev_gold))) << "\n";
    } else if (significance->parsed()) {
      const AlignmentSet a = ReadAlignment(sig_a), b = ReadAlignment(sig_b), gold = LoadGold(sig_gold);
      const double p = Significance(a, b, gold, sig_n, sig_seed, jobs);
      nlohmann::ordered_json j;
      j["f1_a"] = Prf(a, gold).f1;
      j["f1_b"] = Prf(b, gold).f1;
      j["p_value"] = p;
      j["resamples"] = sig_n;
      j["seed"] = sig_seed;
      std::cout << j.dump() << "\n";
    } else if (dedup_stats->parsed()) {
      const std::vector<std::size_t> lengths = ParseLengths(ds_lengths);
      const TokenCorpus train = WordTokens(ReadLines(ds_train));
      std::vector<DupProfile> profiles = {DupWithin(train, lengths, "within")};
      if (!ds_eval.empty()) profiles.push_back(DupCross(WordTokens(ReadLines(ds_eval)), train, lengths, "cross"));
      std::ostringstream csv;
      WriteProfileCsv(profiles, csv);
      std::cout << csv.str();
      if (!ds_out.empty()) WriteFile(OutDir(ds_out) / "dedup.csv", csv.str());
    } else if (filter_leaky->parsed()) {
      if (fl_rule == "long_window") {
        fl_config.rule = LeakRule::kLongWindow;
      } else if (fl_rule == "window_count") {
        fl_config.rule = LeakRule::kWindowCount;
      } else {
        throw ConfigError("--rule must be long_window or window_count");
      }
      const std::vector<std::string> eval = ReadLines(fl_eval);
      const LeakSplit split_result = FilterLeaky(WordTokens(eval), WordTokens(ReadLines(fl_train)), fl_config);
      std::string kept, removed;
      for (std::size_t i : split_result.kept) kept += std::to_string(i) + "\n";
      for (std::size_t i : split_result.removed) removed += std::to_string(i) + "\n";
      const fs::path out = OutDir(fl_out);
      WriteFile(out / "kept.txt", kept);
      WriteFile(out / "removed.txt", removed);
      std::cout << "kept " << split_result.kept.size() << "\nremoved " << split_result.removed.size() << "\n";
    } else if (split->parsed()) {
      const AlignmentSet pairs = ReadAlignment(sp_pairs);
      const std::uint64_t seed = DeriveSeed(sp_seed, "split");
      const EvalSplit s = SplitEval(pairs, sp_dev, sp_test, seed);
      const fs::path out = OutDir(sp_out);
      const HeaderFields header = {{"seed", std::to_string(sp_seed)},
                                   {"split_seed", std::to_string(seed)}};
      WriteAlignmentTo(out / "train.tsv", s.rest, header);
      WriteAlignmentTo(out / "dev.tsv", s.dev, header);
      WriteAlignmentTo(out / "test.tsv", s.test, header);
      std::cout << "train " << s.rest.size() << "\ndev " << s.dev.size() << "\ntest " << s.test.size()
                << "\n";
    } else if (export_cmd->parsed()) {
      const Corpus src = LoadCorpus(ex_src, LangCode(ex_src_lang));
      const Corpus tgt = LoadCorpus(ex_tgt, LangCode(ex_tgt_lang));
      for (const std::string& p :
           ExportPairs(ReadAlignment(ex_pairs), src, tgt, (OutDir(ex_out) / ex_name).string())) {
        std::cout << p << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kIo);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
