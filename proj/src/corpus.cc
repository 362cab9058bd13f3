#include "pivalign/corpus.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "pivalign/error.h"
#include "pivalign/random.h"
#include "pivalign/text.h"

namespace pivalign {

using nlohmann::json;
using nlohmann::ordered_json;

LangCode::LangCode(std::string code) : code_(std::move(code)) {
  const bool ok = code_.size() >= 2 && code_.size() <= 8 &&
                  std::all_of(code_.begin(), code_.end(),
                              [](char c) { return c >= 'a' && c <= 'z'; });
  if (!ok) throw ConfigError("invalid language code '" + code_ + "'");
}

std::string SentenceId(std::string_view article_id, std::size_t index) {
  std::string id(article_id);
  id += '#';
  id += std::to_string(index);
  return id;
}

std::size_t Corpus::sentence_count() const {
  std::size_t n = 0;
  for (const Article& a : articles) n += a.sentences.size();
  return n;
}

std::optional<std::size_t> Corpus::find(std::string_view article_id) const {
  for (std::size_t i = 0; i < articles.size(); ++i) {
    if (articles[i].id == article_id) return i;
  }
  return std::nullopt;
}

Article MakeArticle(std::string id, LangCode lang, std::string title,
                    const std::vector<std::string>& sentences,
                    std::optional<std::string> date) {
  Article a;
  a.id = std::move(id);
  a.lang = std::move(lang);
  a.title = std::move(title);
  a.date = std::move(date);
  a.sentences.reserve(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    a.sentences.push_back({SentenceId(a.id, i), sentences[i]});
  }
  return a;
}

namespace {

bool ValidArticleId(std::string_view id) {
  if (id.empty()) return false;
  return std::none_of(id.begin(), id.end(), [](char c) {
    return c == '#' || c == '\t' || c == '\n' || c == '\r';
  });
}

Error LineError(std::size_t line_no, const std::string& what) {
  return DataError("line " + std::to_string(line_no) + ": " + what);
}

Article ParseArticleLine(const std::string& line, std::size_t line_no,
                         const LangCode& lang) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw LineError(line_no, std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw LineError(line_no, "record is not a JSON object");

  auto field = [&](const char* key) -> const json* {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
  };

  const json* id = field("id");
  if (!id || !id->is_string()) throw LineError(line_no, "missing string field 'id'");
  const std::string article_id = id->get<std::string>();
  if (!ValidArticleId(article_id)) {
    throw LineError(line_no, "invalid article id '" + article_id + "'");
  }

  const json* lang_field = field("lang");
  if (!lang_field || !lang_field->is_string()) {
    throw LineError(line_no, "missing string field 'lang'");
  }
  if (lang_field->get<std::string>() != lang.str()) {
    throw LineError(line_no, "language mismatch: article '" + article_id + "' has lang '" +
                                 lang_field->get<std::string>() + "', expected '" +
                                 lang.str() + "'");
  }

  std::string title;
  if (const json* t = field("title"); t && !t->is_null()) {
    if (!t->is_string()) throw LineError(line_no, "'title' must be a string");
    title = t->get<std::string>();
  }

  std::optional<std::string> date;
  if (const json* d = field("date"); d && !d->is_null()) {
    if (!d->is_string()) throw LineError(line_no, "'date' must be a string or null");
    date = d->get<std::string>();
  }

  const json* sents = field("sentences");
  if (!sents || !sents->is_array()) throw LineError(line_no, "missing array field 'sentences'");
  if (sents->empty()) throw LineError(line_no, "article '" + article_id + "' has no sentences");
  std::vector<std::string> texts;
  texts.reserve(sents->size());
  for (const json& s : *sents) {
    if (!s.is_string()) throw LineError(line_no, "sentences must be strings");
    std::string text = s.get<std::string>();
    if (Trim(text).empty()) {
      throw LineError(line_no, "article '" + article_id + "' has an empty sentence");
    }
    texts.push_back(std::move(text));
  }
  return MakeArticle(article_id, lang, std::move(title), texts, std::move(date));
}

}  // namespace

Corpus ParseCorpus(std::istream& in, const LangCode& lang) {
  Corpus corpus;
  corpus.lang = lang;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    Article a = ParseArticleLine(line, line_no, lang);
    if (!seen.insert(a.id).second) {
      throw LineError(line_no, "duplicate article id '" + a.id + "'");
    }
    corpus.articles.push_back(std::move(a));
  }
  if (corpus.articles.empty()) throw DataError("no articles");
  return corpus;
}

Corpus LoadCorpus(const std::string& path, const LangCode& lang) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file '" + path + "'");
  try {
    return ParseCorpus(in, lang);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string SerializeArticle(const Article& article) {
  ordered_json j;
  j["id"] = article.id;
  j["lang"] = article.lang.str();
  j["title"] = article.title;
  j["date"] = article.date ? ordered_json(*article.date) : ordered_json(nullptr);
  ordered_json sents = ordered_json::array();
  for (const Sentence& s : article.sentences) sents.push_back(s.text);
  j["sentences"] = std::move(sents);
  return j.dump();
}

void WriteCorpus(const Corpus& corpus, std::ostream& out) {
  for (const Article& a : corpus.articles) out << SerializeArticle(a) << '\n';
}

std::string_view ToString(AlignLevel level) {
  return level == AlignLevel::kSentence ? "sentence" : "article";
}

std::string_view ToString(AlignMode mode) {
  return mode == AlignMode::kOneToOne ? "one_to_one" : "per_target";
}

AlignLevel ParseLevel(std::string_view s) {
  if (s == "sentence") return AlignLevel::kSentence;
  if (s == "article") return AlignLevel::kArticle;
  throw ConfigError("unknown alignment level '" + std::string(s) + "'");
}

AlignMode ParseMode(std::string_view s) {
  if (s == "one_to_one") return AlignMode::kOneToOne;
  if (s == "per_target") return AlignMode::kPerTarget;
  throw ConfigError("unknown alignment mode '" + std::string(s) + "'");
}

void AlignmentSet::Validate() const {
  std::set<std::pair<std::string, std::string>> seen_pairs;
  std::unordered_set<std::string> srcs, tgts;
  for (const AlignmentPair& p : pairs) {
    if (!seen_pairs.emplace(p.src_id, p.tgt_id).second) {
      throw DataError("duplicate pair (" + p.src_id + ", " + p.tgt_id + ")");
    }
    if (mode != AlignMode::kOneToOne) continue;
    if (!srcs.insert(p.src_id).second) {
      throw DataError("one-to-one violation: source id '" + p.src_id + "' repeated");
    }
    if (!tgts.insert(p.tgt_id).second) {
      throw DataError("one-to-one violation: target id '" + p.tgt_id + "' repeated");
    }
  }
}

namespace {

struct RawAlignment {
  std::optional<AlignLevel> level;
  std::optional<AlignMode> mode;
  std::vector<AlignmentPair> pairs;
};

RawAlignment ParseAlignmentRows(std::istream& in, bool allow_score) {
  RawAlignment raw;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string_view body = Trim(std::string_view(line).substr(1));
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) continue;
      const std::string_view key = body.substr(0, eq);
      const std::string_view value = body.substr(eq + 1);
      try {
        if (key == "level") raw.level = ParseLevel(value);
        if (key == "mode") raw.mode = ParseMode(value);
      } catch (const Error& e) {
        throw LineError(line_no, e.what());
      }
      continue;
    }
    const std::vector<std::string> cols = SplitChar(line, '\t');
    if (cols.size() < 2 || cols.size() > (allow_score ? 3u : 2u)) {
      throw LineError(line_no, "expected " + std::string(allow_score ? "2 or 3" : "2") +
                                   " tab-separated columns");
    }
    if (cols[0].empty() || cols[1].empty()) throw LineError(line_no, "empty id");
    AlignmentPair p{cols[0], cols[1], 1.0};
    if (cols.size() == 3) {
      try {
        std::size_t used = 0;
        p.score = std::stod(cols[2], &used);
        if (used != cols[2].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw LineError(line_no, "bad score '" + cols[2] + "'");
      }
    }
    raw.pairs.push_back(std::move(p));
  }
  return raw;
}

AlignLevel InferLevel(const std::vector<AlignmentPair>& pairs) {
  std::size_t with_hash = 0;
  for (const AlignmentPair& p : pairs) {
    const bool a = p.src_id.find('#') != std::string::npos;
    const bool b = p.tgt_id.find('#') != std::string::npos;
    if (a != b) throw DataError("pair (" + p.src_id + ", " + p.tgt_id + ") mixes levels");
    with_hash += a;
  }
  if (with_hash != 0 && with_hash != pairs.size()) {
    throw DataError("alignment file mixes sentence and article ids");
  }
  return (with_hash == 0 && !pairs.empty()) ? AlignLevel::kArticle : AlignLevel::kSentence;
}

AlignmentSet OpenAndParse(const std::string& path, AlignmentSet (*parse)(std::istream&)) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open alignment file '" + path + "'");
  try {
    return parse(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace

AlignmentSet ParseGold(std::istream& in) {
  RawAlignment raw = ParseAlignmentRows(in, false);
  AlignmentSet set;
  set.level = InferLevel(raw.pairs);
  set.mode = AlignMode::kOneToOne;
  set.pairs = std::move(raw.pairs);
  set.Validate();
  return set;
}

AlignmentSet LoadGold(const std::string& path) { return OpenAndParse(path, &ParseGold); }

AlignmentSet ParseAlignment(std::istream& in) {
  RawAlignment raw = ParseAlignmentRows(in, true);
  AlignmentSet set;
  set.level = raw.level ? *raw.level : InferLevel(raw.pairs);
  set.mode = raw.mode.value_or(AlignMode::kOneToOne);
  set.pairs = std::move(raw.pairs);
  set.Validate();
  return set;
}

AlignmentSet ReadAlignment(const std::string& path) {
  return OpenAndParse(path, &ParseAlignment);
}

void WriteAlignment(const AlignmentSet& set, const HeaderFields& header, std::ostream& out) {
  out << "# level=" << ToString(set.level) << '\n';
  out << "# mode=" << ToString(set.mode) << '\n';
  for (const auto& [key, value] : header) out << "# " << key << '=' << value << '\n';
  std::vector<const AlignmentPair*> rows;
  rows.reserve(set.pairs.size());
  for (const AlignmentPair& p : set.pairs) rows.push_back(&p);
  std::stable_sort(rows.begin(), rows.end(),
                   [](const AlignmentPair* a, const AlignmentPair* b) { return a->score > b->score; });
  for (const AlignmentPair* p : rows) {
    out << p->src_id << '\t' << p->tgt_id << '\t' << FormatDouble(p->score) << '\n';
  }
}

EvalSplit SplitEval(const AlignmentSet& pairs, std::size_t n_dev, std::size_t n_test,
                    std::uint64_t seed) {
  if (n_dev + n_test > pairs.size()) {
    throw DataError("insufficient pairs: requested " + std::to_string(n_dev) + " dev + " +
                    std::to_string(n_test) + " test from " + std::to_string(pairs.size()));
  }
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Xorshift64Star rng(seed);
  rng.Shuffle(order);

  auto take = [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(order.begin() + begin, order.begin() + end);
    std::sort(idx.begin(), idx.end());
    AlignmentSet out;
    out.level = pairs.level;
    out.mode = pairs.mode;
    for (std::size_t i : idx) out.pairs.push_back(pairs.pairs[i]);
    return out;
  };
  EvalSplit split;
  split.dev = take(0, n_dev);
  split.test = take(n_dev, n_dev + n_test);
  split.rest = take(n_dev + n_test, order.size());
  return split;
}

}  // namespace pivalign
