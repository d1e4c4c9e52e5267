// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

namespace agentkit {
using Json = nlohmann::json;
}  // namespace agentkit
