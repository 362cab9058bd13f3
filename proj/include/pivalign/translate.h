#ifndef PIVALIGN_TRANSLATE_H_
#define PIVALIGN_TRANSLATE_H_

#include <atomic>
#include <cstddef>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pivalign/corpus.h"

namespace pivalign {

struct Direction {
  LangCode src;
  LangCode tgt;

  Direction() = default;
  // Throws a config error when src == tgt.
  Direction(LangCode s, LangCode t);
  std::string str() const { return src.str() + "-" + tgt.str(); }

  friend bool operator==(const Direction&, const Direction&) = default;
};

enum class BackendKind { kFile, kHttp };

BackendKind ParseBackendKind(std::string_view s);
std::string_view ToString(BackendKind kind);

struct BackendConfig {
  BackendKind kind = BackendKind::kFile;
  // Directory of translation files, or the HTTP endpoint URL.
  std::string path_or_url;
  std::size_t timeout_ms = 30000;
  std::size_t batch_size = 32;
  std::size_t max_inflight = 4;
  std::size_t retries = 2;
  std::size_t backoff_ms = 200;
  // Translate non-empty titles as one extra text unit.
  bool translate_titles = true;

  void Validate() const;
};

// Environment variable that overrides path_or_url for HTTP backends.
inline constexpr const char* kBackendUrlEnv = "PIVALIGN_BACKEND_URL";

struct TranslatedDocument {
  std::string source_article_id;
  Direction direction;
  std::string title;
  // Position i translates source sentence i.
  std::vector<std::string> sentences;
};

enum class TextUnit { kSentences, kTitle };

struct TranslationRequest {
  std::string article_id;
  Direction direction;
  TextUnit unit = TextUnit::kSentences;
  // Every text of the unit, in order.
  const std::vector<std::string>* texts = nullptr;
  // Positions in texts to translate; the reply is aligned with this list.
  std::vector<std::size_t> wanted;
};

class TranslationBackend {
 public:
  virtual ~TranslationBackend() = default;
  // Identifies the backend in cache keys.
  virtual std::string id() const = 0;
  virtual std::vector<std::string> Translate(const TranslationRequest& request) = 0;
};

// Pre-computed translations: "<dir>/<article_id>.<src>-<tgt>.txt" with one line
// per sentence, and "<article_id>.<src>-<tgt>.title.txt" for the title.
class FileBackend : public TranslationBackend {
 public:
  explicit FileBackend(std::string directory) : directory_(std::move(directory)) {}
  std::string id() const override { return "file:" + directory_; }
  std::vector<std::string> Translate(const TranslationRequest& request) override;

  static std::string SentencePath(const std::string& dir, const std::string& article_id,
                                  const Direction& d);
  static std::string TitlePath(const std::string& dir, const std::string& article_id,
                               const Direction& d);

 private:
  std::string directory_;
};

// POST {"src":..,"tgt":..,"texts":[..]} -> {"translations":[..]}.
class HttpBackend : public TranslationBackend {
 public:
  HttpBackend(std::string url, std::size_t timeout_ms);
  std::string id() const override { return "http:" + url_; }
  std::vector<std::string> Translate(const TranslationRequest& request) override;

 private:
  std::string url_;
  std::string origin_;
  std::string path_;
  std::size_t timeout_ms_;
};

std::shared_ptr<TranslationBackend> MakeBackend(const BackendConfig& config);

// 128-bit digest (hex) of the trimmed text, the direction and the backend id.
std::string CacheKey(std::string_view text, const Direction& direction,
                     std::string_view backend_id);

// Append-only "key<TAB>value" log, loaded fully on open. Values escape
// backslash, tab, newline and carriage return. A torn final line is ignored.
class TranslationCache {
 public:
  TranslationCache() = default;  // memory only
  explicit TranslationCache(std::string path);

  std::optional<std::string> Get(const std::string& key) const;
  void PutBatch(const std::vector<std::pair<std::string, std::string>>& entries);
  std::size_t size() const;
  const std::string& path() const { return path_; }

  static std::string Escape(std::string_view s);
  static std::string Unescape(std::string_view s);

 private:
  std::string path_;
  mutable std::shared_mutex mu_;
  std::unordered_map<std::string, std::string> entries_;
};

class TranslationGateway {
 public:
  TranslationGateway(std::shared_ptr<TranslationBackend> backend, TranslationCache* cache,
                     BackendConfig config);

  TranslatedDocument TranslateArticle(const Article& article, const Direction& direction);

  // Number of Translate calls issued to the backend, retries included.
  std::size_t backend_requests() const { return requests_.load(); }

 private:
  std::vector<std::string> TranslateUnit(const std::string& article_id, const Direction& d,
                                         TextUnit unit, const std::vector<std::string>& texts);

  std::shared_ptr<TranslationBackend> backend_;
  TranslationCache* cache_;
  BackendConfig config_;
  std::atomic<std::size_t> requests_{0};
};

TranslatedDocument TranslateArticle(const Article& article, const Direction& direction,
                                    const BackendConfig& backend, TranslationCache* cache);

}  // namespace pivalign

#endif  // PIVALIGN_TRANSLATE_H_
