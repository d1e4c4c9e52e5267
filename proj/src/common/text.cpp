// SPDX-License-Identifier: Apache-2.0
#include "agentkit/common/text.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace agentkit::text {

namespace {
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
}  // namespace

std::string trim(std::string_view s) {
  auto b = s.begin();
  auto e = s.end();
  while (b != e && is_space(*b)) ++b;
  while (e != b && is_space(*(e - 1))) --e;
  return {b, e};
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : s) {
    if (is_space(c)) {
      if (!cur.empty()) words.push_back(std::move(cur)), cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

std::size_t word_count(std::string_view s) { return split_words(s).size(); }

std::vector<std::string> search_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    if (cur.size() > 3 && cur.back() == 's' && cur[cur.size() - 2] != 's') cur.pop_back();
    tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (char c : s) {
    if (is_alnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::set<std::string> search_token_set(std::string_view s) {
  auto v = search_tokens(s);
  return {v.begin(), v.end()};
}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<FencedBlock> fenced_blocks(std::string_view s) {
  std::vector<FencedBlock> blocks;
  std::size_t pos = 0;
  while (true) {
    std::size_t open = s.find("```", pos);
    if (open == std::string_view::npos) break;
    std::size_t eol = s.find('\n', open);
    if (eol == std::string_view::npos) break;
    std::size_t close = s.find("\n```", eol);
    FencedBlock block;
    block.info = trim(s.substr(open + 3, eol - open - 3));
    if (close == std::string_view::npos) break;
    block.body = std::string(s.substr(eol + 1, close - eol - 1));
    blocks.push_back(std::move(block));
    std::size_t after = s.find('\n', close + 4);
    pos = after == std::string_view::npos ? s.size() : after;
  }
  return blocks;
}

std::optional<std::string> first_fenced(std::string_view s, std::string_view lang) {
  auto want = to_lower(lang);
  for (auto& b : fenced_blocks(s)) {
    if (to_lower(b.info) == want) return b.body;
  }
  return std::nullopt;
}

std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out(tmpl);
  for (const auto& [key, value] : vars) {
    const std::string needle = "{{" + key + "}}";
    std::size_t pos = 0;
    while ((pos = out.find(needle, pos)) != std::string::npos) {
      out.replace(pos, needle.size(), value);
      pos += value.size();
    }
  }
  return out;
}

std::string truncate_utf8(std::string_view s, std::size_t max_bytes) {
  if (s.size() <= max_bytes) return std::string(s);
  std::size_t cut = max_bytes;
  while (cut > 0 && (static_cast<unsigned char>(s[cut]) & 0xC0) == 0x80) --cut;
  return std::string(s.substr(0, cut));
}

}  // namespace agentkit::text
