#ifndef PIVALIGN_CORPUS_H_
#define PIVALIGN_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pivalign {

// Short lowercase language tag such as "nk", "en" or "ja".
class LangCode {
 public:
  LangCode() = default;
  // Throws a config error unless code is 2-8 ASCII lowercase letters.
  explicit LangCode(std::string code);

  const std::string& str() const { return code_; }
  bool empty() const { return code_.empty(); }

  friend bool operator==(const LangCode&, const LangCode&) = default;
  friend auto operator<=>(const LangCode&, const LangCode&) = default;

 private:
  std::string code_;
};

// Sentence ids are "<article id>#<zero-based index>".
std::string SentenceId(std::string_view article_id, std::size_t index);

struct Sentence {
  std::string id;
  std::string text;
};

struct Article {
  std::string id;
  LangCode lang;
  std::string title;
  std::vector<Sentence> sentences;
  std::optional<std::string> date;
};

struct Corpus {
  LangCode lang;
  std::vector<Article> articles;

  std::size_t sentence_count() const;
  // Index of the article with the given id, or nullopt.
  std::optional<std::size_t> find(std::string_view article_id) const;
};

// Builds an article, assigning sentence ids from positions.
Article MakeArticle(std::string id, LangCode lang, std::string title,
                    const std::vector<std::string>& sentences,
                    std::optional<std::string> date = std::nullopt);

// One JSON object per line:
//   {"id":..,"lang":..,"title":..,"date":..|null,"sentences":[..]}
Corpus ParseCorpus(std::istream& in, const LangCode& lang);
Corpus LoadCorpus(const std::string& path, const LangCode& lang);
std::string SerializeArticle(const Article& article);
void WriteCorpus(const Corpus& corpus, std::ostream& out);

enum class AlignLevel { kSentence, kArticle };
enum class AlignMode { kOneToOne, kPerTarget };

std::string_view ToString(AlignLevel level);
std::string_view ToString(AlignMode mode);
AlignLevel ParseLevel(std::string_view s);
AlignMode ParseMode(std::string_view s);

struct AlignmentPair {
  std::string src_id;
  std::string tgt_id;
  double score = 1.0;
};

struct AlignmentSet {
  AlignLevel level = AlignLevel::kSentence;
  AlignMode mode = AlignMode::kOneToOne;
  std::vector<AlignmentPair> pairs;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
  // Throws a data error on duplicate pairs or, in one-to-one mode, on a
  // repeated source or target id.
  void Validate() const;
};

// Gold TSV: "src_id<TAB>tgt_id" per line, '#' lines are comments. The level
// is inferred from the ids (sentence ids contain '#').
AlignmentSet ParseGold(std::istream& in);
AlignmentSet LoadGold(const std::string& path);

// Reads an alignment TSV with an optional third score column. Header
// comments of the form "# level=..." and "# mode=..." are honored.
AlignmentSet ParseAlignment(std::istream& in);
AlignmentSet ReadAlignment(const std::string& path);

using HeaderFields = std::vector<std::pair<std::string, std::string>>;

// Writes "src<TAB>tgt<TAB>score" rows sorted by descending score (stable), led
// by "# key=value" comment lines: level, mode, then the caller's fields.
void WriteAlignment(const AlignmentSet& set, const HeaderFields& header,
                    std::ostream& out);

struct EvalSplit {
  AlignmentSet dev;
  AlignmentSet test;
  AlignmentSet rest;
};

// Seeded shuffle, then the first n_dev pairs form dev and the next n_test
// form test. Each output keeps the input's relative order.
EvalSplit SplitEval(const AlignmentSet& pairs, std::size_t n_dev,
                    std::size_t n_test, std::uint64_t seed);

}  // namespace pivalign

#endif  // PIVALIGN_CORPUS_H_
