// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>

#include "agentkit/common/error.hpp"

namespace agentkit::tools {

class FetchError : public Error {
 public:
  using Error::Error;
};

/// Retrieves a URL body. Search and paper toolkits go through this so tests can stay offline.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual std::string get(const std::string& url, double timeout_s) = 0;
};

/// Plain HTTP(S) GET following redirects; non-2xx statuses throw FetchError.
class HttpFetcher : public Fetcher {
 public:
  std::string get(const std::string& url, double timeout_s) override;
};

/// Serves canned bodies keyed by exact URL.
class MapFetcher : public Fetcher {
 public:
  explicit MapFetcher(std::map<std::string, std::string> pages) : pages_(std::move(pages)) {}
  std::string get(const std::string& url, double timeout_s) override;

 private:
  std::map<std::string, std::string> pages_;
};

std::string url_encode(std::string_view s);

/// Visible text of an HTML document: scripts/styles dropped, block tags become
/// line breaks, common entities decoded, blank runs collapsed.
std::string html_to_text(std::string_view html);

}  // namespace agentkit::tools
