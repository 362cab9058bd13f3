#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"
#include "pivalign/error.h"
#include "pivalign/translate.h"

namespace pivalign {

HttpBackend::HttpBackend(std::string url, std::size_t timeout_ms)
    : url_(std::move(url)), timeout_ms_(timeout_ms) {
  const std::string scheme = "http://";
  if (url_.rfind(scheme, 0) != 0) {
    throw ConfigError("HTTP backend URL must start with http:// (got '" + url_ + "')");
  }
  const std::size_t slash = url_.find('/', scheme.size());
  origin_ = url_.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : url_.substr(slash);
}

std::vector<std::string> HttpBackend::Translate(const TranslationRequest& request) {
  nlohmann::json body;
  body["src"] = request.direction.src.str();
  body["tgt"] = request.direction.tgt.str();
  body["texts"] = nlohmann::json::array();
  for (std::size_t i : request.wanted) body["texts"].push_back((*request.texts)[i]);

  httplib::Client client(origin_);
  const auto sec = static_cast<time_t>(timeout_ms_ / 1000);
  const auto usec = static_cast<time_t>((timeout_ms_ % 1000) * 1000);
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);

  const std::string where = "article " + request.article_id + ": ";
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) {
    throw BackendError(where + "request to " + url_ + " failed (" +
                       httplib::to_string(res.error()) + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(where + "HTTP status " + std::to_string(res->status) + " from " + url_);
  }
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(where + "malformed JSON reply: " + e.what());
  }
  if (!reply.is_object() || !reply.contains("translations") || !reply["translations"].is_array()) {
    throw BackendError(where + "reply lacks a 'translations' array");
  }
  std::vector<std::string> out;
  for (const auto& t : reply["translations"]) {
    if (!t.is_string()) throw BackendError(where + "non-string translation in reply");
    out.push_back(t.get<std::string>());
  }
  if (out.size() != request.wanted.size()) {
    throw DataError(where + "length mismatch: " + std::to_string(out.size()) +
                    " translations for " + std::to_string(request.wanted.size()) + " texts");
  }
  return out;
}

}  // namespace pivalign
