#include "pivalign/translate.h"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <mutex>
#include <thread>

#include "pivalign/digest.h"
#include "pivalign/error.h"
#include "pivalign/text.h"

namespace pivalign {

Direction::Direction(LangCode s, LangCode t) : src(std::move(s)), tgt(std::move(t)) {
  if (src == tgt) throw ConfigError("translation direction needs distinct languages, got " + str());
}

BackendKind ParseBackendKind(std::string_view s) {
  if (s == "file") return BackendKind::kFile;
  if (s == "http") return BackendKind::kHttp;
  throw ConfigError("unknown backend kind '" + std::string(s) + "'");
}

std::string_view ToString(BackendKind kind) { return kind == BackendKind::kFile ? "file" : "http"; }

void BackendConfig::Validate() const {
  if (batch_size < 1) throw ConfigError("backend batch_size must be >= 1");
  if (max_inflight < 1) throw ConfigError("backend max_inflight must be >= 1");
  if (path_or_url.empty()) throw ConfigError("backend path_or_url is empty");
}

std::string FileBackend::SentencePath(const std::string& dir, const std::string& article_id,
                                      const Direction& d) {
  return (std::filesystem::path(dir) / (article_id + "." + d.str() + ".txt")).string();
}

std::string FileBackend::TitlePath(const std::string& dir, const std::string& article_id,
                                   const Direction& d) {
  return (std::filesystem::path(dir) / (article_id + "." + d.str() + ".title.txt")).string();
}

std::vector<std::string> FileBackend::Translate(const TranslationRequest& request) {
  const std::string path = request.unit == TextUnit::kTitle
                               ? TitlePath(directory_, request.article_id, request.direction)
                               : SentencePath(directory_, request.article_id, request.direction);
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw BackendError("article " + request.article_id + ": missing translation file '" + path +
                       "'");
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  if (lines.size() != request.texts->size()) {
    throw DataError("article " + request.article_id + ": length mismatch in '" + path + "': " +
                    std::to_string(lines.size()) + " lines for " +
                    std::to_string(request.texts->size()) + " source texts");
  }
  std::vector<std::string> out;
  out.reserve(request.wanted.size());
  for (std::size_t i : request.wanted) out.push_back(lines[i]);
  return out;
}

std::shared_ptr<TranslationBackend> MakeBackend(const BackendConfig& config) {
  config.Validate();
  if (config.kind == BackendKind::kFile) return std::make_shared<FileBackend>(config.path_or_url);
  return std::make_shared<HttpBackend>(config.path_or_url, config.timeout_ms);
}

std::string CacheKey(std::string_view text, const Direction& direction,
                     std::string_view backend_id) {
  const std::string_view normalized = Trim(text);
  // Length-prefixed fields keep the encoding unambiguous.
  std::string material;
  for (std::string_view field : {normalized, std::string_view(direction.src.str()),
                                 std::string_view(direction.tgt.str()), backend_id}) {
    material += std::to_string(field.size());
    material += ':';
    material += field;
  }
  return Digest128Hex(material);
}

std::string TranslationCache::Escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string TranslationCache::Unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out.push_back(s[i]);
      continue;
    }
    switch (s[++i]) {
      case 't': out.push_back('\t'); break;
      case 'n': out.push_back('\n'); break;
      case 'r': out.push_back('\r'); break;
      default: out.push_back(s[i]);
    }
  }
  return out;
}

namespace {

bool IsCacheKey(std::string_view key) {
  if (key.size() != 32) return false;
  for (char c : key) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

TranslationCache::TranslationCache(std::string path) : path_(std::move(path)) {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0;
  while (start < content.size()) {
    const std::size_t end = content.find('\n', start);
    if (end == std::string::npos) break;  // torn write
    const std::string_view line(content.data() + start, end - start);
    start = end + 1;
    const std::size_t tab = line.find('\t');
    if (tab == std::string_view::npos || !IsCacheKey(line.substr(0, tab))) continue;
    entries_[std::string(line.substr(0, tab))] = Unescape(line.substr(tab + 1));
  }
  if (!content.empty() && content.back() != '\n') {
    // Terminate the torn line so later appends start on a fresh line.
    std::ofstream fix(path_, std::ios::binary | std::ios::app);
    fix << '\n';
  }
}

std::optional<std::string> TranslationCache::Get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void TranslationCache::PutBatch(const std::vector<std::pair<std::string, std::string>>& entries) {
  if (entries.empty()) return;
  std::unique_lock lock(mu_);
  if (!path_.empty()) {
    std::string block;
    for (const auto& [key, value] : entries) {
      block += key;
      block += '\t';
      block += Escape(value);
      block += '\n';
    }
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot append to translation cache '" + path_ + "'");
    out << block;
    out.flush();
    if (!out) throw IoError("write to translation cache '" + path_ + "' failed");
  }
  for (const auto& [key, value] : entries) entries_[key] = value;
}

std::size_t TranslationCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

TranslationGateway::TranslationGateway(std::shared_ptr<TranslationBackend> backend,
                                       TranslationCache* cache, BackendConfig config)
    : backend_(std::move(backend)), cache_(cache), config_(std::move(config)) {
  if (config_.batch_size < 1) throw ConfigError("backend batch_size must be >= 1");
  if (config_.max_inflight < 1) throw ConfigError("backend max_inflight must be >= 1");
}

std::vector<std::string> TranslationGateway::TranslateUnit(const std::string& article_id,
                                                           const Direction& d, TextUnit unit,
                                                           const std::vector<std::string>& texts) {
  const std::string backend_id = backend_->id();
  std::vector<std::string> out(texts.size());
  std::vector<std::string> keys(texts.size());
  std::vector<std::size_t> misses;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = CacheKey(texts[i], d, backend_id);
    std::optional<std::string> hit = cache_ ? cache_->Get(keys[i]) : std::nullopt;
    if (hit) {
      out[i] = std::move(*hit);
    } else {
      misses.push_back(i);
    }
  }
  if (misses.empty()) return out;

  std::vector<TranslationRequest> batches;
  for (std::size_t b = 0; b < misses.size(); b += config_.batch_size) {
    TranslationRequest req;
    req.article_id = article_id;
    req.direction = d;
    req.unit = unit;
    req.texts = &texts;
    const std::size_t end = std::min(misses.size(), b + config_.batch_size);
    req.wanted.assign(misses.begin() + static_cast<std::ptrdiff_t>(b),
                      misses.begin() + static_cast<std::ptrdiff_t>(end));
    batches.push_back(std::move(req));
  }

  auto run_batch = [this, &article_id](const TranslationRequest& req) {
    for (std::size_t attempt = 0;; ++attempt) {
      ++requests_;
      try {
        std::vector<std::string> got = backend_->Translate(req);
        if (got.size() != req.wanted.size()) {
          throw DataError("article " + article_id + ": backend returned " +
                          std::to_string(got.size()) + " translations for " +
                          std::to_string(req.wanted.size()) + " texts");
        }
        return got;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::kBackend || attempt >= config_.retries) throw;
        const auto wait = std::chrono::milliseconds(config_.backoff_ms << attempt);
        std::this_thread::sleep_for(wait);
      }
    }
  };

  // Results are committed in batch order so cold runs write identical logs.
  std::vector<std::optional<std::vector<std::string>>> results(batches.size());
  std::exception_ptr failure;
  for (std::size_t wave = 0; wave < batches.size(); wave += config_.max_inflight) {
    const std::size_t wave_end = std::min(batches.size(), wave + config_.max_inflight);
    std::vector<std::future<std::vector<std::string>>> futures;
    if (wave_end - wave == 1) {
      try {
        results[wave] = run_batch(batches[wave]);
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
      continue;
    }
    for (std::size_t b = wave; b < wave_end; ++b) {
      futures.push_back(std::async(std::launch::async, run_batch, std::cref(batches[b])));
    }
    for (std::size_t b = wave; b < wave_end; ++b) {
      try {
        results[b] = futures[b - wave].get();
      } catch (...) {
        if (!failure) failure = std::current_exception();
      }
    }
  }

  for (std::size_t b = 0; b < batches.size(); ++b) {
    if (!results[b]) continue;
    std::vector<std::pair<std::string, std::string>> entries;
    for (std::size_t j = 0; j < batches[b].wanted.size(); ++j) {
      const std::size_t i = batches[b].wanted[j];
      out[i] = (*results[b])[j];
      entries.emplace_back(keys[i], out[i]);
    }
    if (cache_) cache_->PutBatch(entries);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

TranslatedDocument TranslationGateway::TranslateArticle(const Article& article,
                                                        const Direction& direction) {
  if (article.lang != direction.src) {
    throw ConfigError("article " + article.id + " is '" + article.lang.str() +
                      "' but the direction is " + direction.str());
  }
  TranslatedDocument doc;
  doc.source_article_id = article.id;
  doc.direction = direction;
  std::vector<std::string> texts;
  texts.reserve(article.sentences.size());
  for (const Sentence& s : article.sentences) texts.push_back(s.text);
  doc.sentences = TranslateUnit(article.id, direction, TextUnit::kSentences, texts);
  if (config_.translate_titles && !Trim(article.title).empty()) {
    const std::vector<std::string> title{article.title};
    doc.title = TranslateUnit(article.id, direction, TextUnit::kTitle, title).front();
  }
  return doc;
}

TranslatedDocument TranslateArticle(const Article& article, const Direction& direction,
                                    const BackendConfig& backend, TranslationCache* cache) {
  TranslationGateway gateway(MakeBackend(backend), cache, backend);
  return gateway.TranslateArticle(article, direction);
}

}  // namespace pivalign
