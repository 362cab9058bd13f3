#include "synthetic.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pivalign/random.h"
#include "pivalign/text.h"

namespace fs = std::filesystem;

namespace pivalign::testing {

std::string SourceWord(std::size_t i) {
  std::string out;
  AppendUtf8(0xAC00 + static_cast<char32_t>((i % 100) * 37), &out);
  AppendUtf8(0xAC00 + static_cast<char32_t>((i / 100) * 53 + 11), &out);
  return out;
}

std::string TargetWord(std::size_t i) {
  std::string out = "w";
  for (int d = 0; d < 3; ++d) {
    out.push_back(static_cast<char>('a' + i % 26));
    i /= 26;
  }
  return out;
}

namespace {

class Zipf {
 public:
  Zipf(std::size_t n, double s) : cdf_(n) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cdf_[r] = total;
    }
    for (double& c : cdf_) c /= total;
  }
  std::size_t Sample(Xorshift64Star& rng) const {
    const double u = rng.Uniform();
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(it - cdf_.begin(), cdf_.size() - 1);
  }

 private:
  std::vector<double> cdf_;
};

std::vector<std::size_t> Words(const Zipf& zipf, Xorshift64Star& rng, std::size_t lo,
                               std::size_t hi) {
  const std::size_t n = lo + rng.Below(hi - lo + 1);
  std::vector<std::size_t> w(n);
  for (std::size_t& x : w) x = zipf.Sample(rng);
  return w;
}

std::string Render(const std::vector<std::size_t>& words, std::string (*word)(std::size_t)) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += word(words[i]);
  }
  return out;
}

std::vector<std::size_t> Drop(const std::vector<std::size_t>& words, double p, Xorshift64Star& rng) {
  std::vector<std::size_t> kept;
  for (std::size_t w : words) {
    if (rng.Uniform() >= p) kept.push_back(w);
  }
  if (kept.empty() && !words.empty()) kept.push_back(words[rng.Below(words.size())]);
  return kept;
}

std::vector<std::size_t> Identity(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), 0);
  return v;
}

std::string Id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%03zu", prefix, i);
  return buf;
}

}  // namespace

SyntheticCorpus MakeSynthetic(const SyntheticSpec& spec) {
  Xorshift64Star rng(spec.seed);
  Xorshift64Star noise_rng(DeriveSeed(spec.seed, "noise"));
  const Zipf zipf(spec.vocab, spec.zipf_s);
  const std::size_t n = spec.articles;

  std::vector<std::size_t> article_perm = Identity(n);  // src article a -> tgt position
  if (spec.shuffle_articles) rng.Shuffle(article_perm);

  SyntheticCorpus out;
  out.src.lang = kSrcLang;
  out.tgt.lang = kTgtLang;
  out.gold_articles.level = AlignLevel::kArticle;
  out.gold_sentences.level = AlignLevel::kSentence;
  std::vector<Article> tgt_articles(n);
  std::vector<TranslatedDocument> tgt_docs(n);

  for (std::size_t a = 0; a < n; ++a) {
    const std::vector<std::size_t> title = Words(zipf, rng, 3, 6);
    std::vector<std::vector<std::size_t>> body(spec.sentences);
    for (auto& s : body) s = Words(zipf, rng, spec.min_words, spec.max_words);
    std::vector<std::size_t> sent_perm = Identity(spec.sentences);  // src j -> tgt position
    if (spec.shuffle_sentences) rng.Shuffle(sent_perm);

    const std::string src_id = Id("nk", a);
    const std::string tgt_id = Id("en", article_perm[a]);
    std::vector<std::string> src_text, tgt_text(spec.sentences);
    for (std::size_t j = 0; j < spec.sentences; ++j) {
      src_text.push_back(Render(body[j], SourceWord));
      tgt_text[sent_perm[j]] = Render(body[j], TargetWord);
    }
    out.src.articles.push_back(MakeArticle(src_id, kSrcLang, Render(title, SourceWord), src_text));
    tgt_articles[article_perm[a]] = MakeArticle(tgt_id, kTgtLang, Render(title, TargetWord), tgt_text);

    TranslatedDocument fwd;
    fwd.source_article_id = src_id;
    fwd.direction = Direction(kSrcLang, kTgtLang);
    fwd.title = Render(Drop(title, spec.noise, noise_rng), TargetWord);
    for (std::size_t j = 0; j < spec.sentences; ++j) {
      fwd.sentences.push_back(Render(Drop(body[j], spec.noise, noise_rng), TargetWord));
    }
    out.src_trans.emplace(src_id, std::move(fwd));

    TranslatedDocument back;
    back.source_article_id = tgt_id;
    back.direction = Direction(kTgtLang, kPivotLang);
    back.title = Render(Drop(title, spec.noise, noise_rng), SourceWord);
    back.sentences.resize(spec.sentences);
    for (std::size_t j = 0; j < spec.sentences; ++j) {
      back.sentences[sent_perm[j]] = Render(Drop(body[j], spec.noise, noise_rng), SourceWord);
    }
    tgt_docs[article_perm[a]] = std::move(back);

    out.gold_articles.pairs.push_back({src_id, tgt_id, 1.0});
    for (std::size_t j = 0; j < spec.sentences; ++j) {
      out.gold_sentences.pairs.push_back({SentenceId(src_id, j), SentenceId(tgt_id, sent_perm[j]), 1.0});
    }
  }
  out.tgt.articles = std::move(tgt_articles);
  for (TranslatedDocument& d : tgt_docs) {
    std::string id = d.source_article_id;
    out.tgt_trans.emplace(std::move(id), std::move(d));
  }
  return out;
}

void WriteText(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> ReadTree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).generic_string()] = ReadText(e.path());
  }
  return out;
}

void WriteSynthetic(const SyntheticCorpus& corpus, const fs::path& dir) {
  fs::create_directories(dir);
  std::ostringstream src, tgt;
  WriteCorpus(corpus.src, src);
  WriteCorpus(corpus.tgt, tgt);
  WriteText(dir / "src.jsonl", src.str());
  WriteText(dir / "tgt.jsonl", tgt.str());
  const fs::path tr = dir / "translations";
  for (const TranslationMap* map : {&corpus.src_trans, &corpus.tgt_trans}) {
    for (const auto& [id, doc] : *map) {
      std::string body;
      for (const std::string& s : doc.sentences) body += s + "\n";
      WriteText(FileBackend::SentencePath(tr.string(), id, doc.direction), body);
      WriteText(FileBackend::TitlePath(tr.string(), id, doc.direction), doc.title + "\n");
    }
  }
  auto gold = [](const AlignmentSet& set) {
    std::string out;
    for (const AlignmentPair& p : set.pairs) out += p.src_id + "\t" + p.tgt_id + "\n";
    return out;
  };
  WriteText(dir / "gold_articles.tsv", gold(corpus.gold_articles));
  WriteText(dir / "gold_sentences.tsv", gold(corpus.gold_sentences));
}

LeakFixture MakeLeakFixture(std::uint64_t seed, std::size_t planted_len, std::size_t near_len) {
  Xorshift64Star rng(seed);
  std::size_t next = 0;
  auto fresh = [&next] { return "t" + std::to_string(next++); };
  LeakFixture f;
  for (int i = 0; i < 200; ++i) {
    TokenSeq s(15 + rng.Below(11));
    for (std::string& t : s) t = fresh();
    f.train.push_back(std::move(s));
  }
  for (std::size_t i = 0; i < 120; ++i) {
    TokenSeq s;
    for (std::size_t k = 0, n = 3 + rng.Below(6); k < n; ++k) s.push_back(fresh());
    const std::size_t kind = i % 3;  // 0 planted, 1 near miss, 2 clean
    if (kind != 2) {
      const std::size_t span = kind == 0 ? planted_len : near_len;
      const TokenSeq& src = f.train[rng.Below(f.train.size())];
      const std::size_t start = rng.Below(src.size() - span + 1);
      s.insert(s.end(), src.begin() + start, src.begin() + start + span);
      if (kind == 0) f.planted.push_back(i);
    }
    for (std::size_t k = 0, n = 2 + rng.Below(5); k < n; ++k) s.push_back(fresh());
    f.eval.push_back(std::move(s));
  }
  return f;
}

}  // namespace pivalign::testing
