// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace agentkit::prompts {

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& table();
}

/// Text of prompts/<name>.md, compiled in. Throws std::out_of_range if absent.
std::string_view get(std::string_view name);

std::vector<std::string_view> names();

}  // namespace agentkit::prompts
