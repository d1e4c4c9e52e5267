// SPDX-License-Identifier: Apache-2.0
#include "agentkit/autogen/prompts.hpp"

#include <stdexcept>
#include <string>

namespace agentkit::prompts {

std::string_view get(std::string_view name) {
  for (const auto& [key, text] : detail::table()) {
    if (key == name) return text;
  }
  throw std::out_of_range("no prompt named '" + std::string(name) + "'");
}

std::vector<std::string_view> names() {
  std::vector<std::string_view> out;
  for (const auto& [key, _] : detail::table()) out.push_back(key);
  return out;
}

}  // namespace agentkit::prompts
