// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace agentkit::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::vector<std::string> split_words(std::string_view s);
std::size_t word_count(std::string_view s);

/// Lowercased alphanumeric tokens with a light plural strip ("papers" -> "paper").
std::vector<std::string> search_tokens(std::string_view s);
std::set<std::string> search_token_set(std::string_view s);

std::size_t edit_distance(std::string_view a, std::string_view b);

struct FencedBlock {
  std::string info;  // text after the opening fence, e.g. "json" or "python"
  std::string body;
};

/// All ``` fenced blocks in order of appearance.
std::vector<FencedBlock> fenced_blocks(std::string_view s);

/// First block whose info string equals `lang` (case-insensitive).
std::optional<std::string> first_fenced(std::string_view s, std::string_view lang);

/// Replaces every `{{key}}` occurrence with the mapped value.
std::string render_template(std::string_view tmpl,
                            const std::vector<std::pair<std::string, std::string>>& vars);

std::string truncate_utf8(std::string_view s, std::size_t max_bytes);

}  // namespace agentkit::text
