// SPDX-License-Identifier: Apache-2.0
#include "agentkit/tools/fetcher.hpp"

#include <httplib.h>

#include <cctype>
#include <cstring>
#include <regex>

#include "agentkit/common/text.hpp"

namespace agentkit::tools {

std::string HttpFetcher::get(const std::string& url, double timeout_s) {
  static const std::regex split(R"(^(https?://[^/?#]+)([^#]*))");
  std::smatch m;
  if (!std::regex_search(url, m, split)) throw FetchError("unsupported url: " + url);
  httplib::Client cli(m[1].str());
  cli.set_follow_location(true);
  const auto t = std::chrono::milliseconds(static_cast<long long>(std::max(0.1, timeout_s) * 1000));
  cli.set_connection_timeout(t);
  cli.set_read_timeout(t);
  std::string path = m[2].str().empty() ? "/" : m[2].str();
  auto res = cli.Get(path);
  if (!res) throw FetchError("fetch " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw FetchError("fetch " + url + " returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

std::string MapFetcher::get(const std::string& url, double) {
  auto it = pages_.find(url);
  if (it == pages_.end()) throw FetchError("no fixture page for " + url);
  return it->second;
}

std::string url_encode(std::string_view s) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

std::string html_to_text(std::string_view html) {
  std::string s(html);
  static const std::regex drop(R"(<(script|style|noscript)[^>]*>[\s\S]*?</\1\s*>)", std::regex::icase);
  static const std::regex comments(R"(<!--[\s\S]*?-->)");
  static const std::regex block(R"(<\s*/?\s*(p|div|br|li|ul|ol|tr|h[1-6]|section|article|header|footer|table|pre)\b[^>]*>)",
                                std::regex::icase);
  static const std::regex tag(R"(<[^>]*>)");
  s = std::regex_replace(s, comments, " ");
  s = std::regex_replace(s, drop, " ");
  s = std::regex_replace(s, block, "\n");
  s = std::regex_replace(s, tag, " ");
  static const std::pair<const char*, const char*> entities[] = {
      {"&nbsp;", " "}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&#39;", "'"}, {"&apos;", "'"}, {"&amp;", "&"}};
  for (auto [from, to] : entities) {
    for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + std::strlen(to))) {
      s.replace(pos, std::strlen(from), to);
    }
  }
  std::string out;
  std::size_t start = 0;
  bool last_blank = true;
  while (start <= s.size()) {
    auto end = s.find('\n', start);
    if (end == std::string::npos) end = s.size();
    std::string line;
    bool space = false;
    for (char c : s.substr(start, end - start)) {
      if (std::isspace(static_cast<unsigned char>(c))) {
        space = !line.empty();
      } else {
        if (space) line += ' ';
        space = false;
        line += c;
      }
    }
    if (!line.empty()) {
      out += line;
      out += '\n';
      last_blank = false;
    } else if (!last_blank) {
      out += '\n';
      last_blank = true;
    }
    start = end + 1;
  }
  return text::trim(out);
}

}  // namespace agentkit::tools
