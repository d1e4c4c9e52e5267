// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "agentkit/common/json.hpp"

namespace agentkit::tools {

struct SchemaViolation {
  /// JSON pointer into the instance, "" for the root.
  std::string path;
  std::string message;
};

/// Validates `instance` against a JSON Schema (draft-07 keyword subset:
/// type, enum, const, properties, required, additionalProperties,
/// patternProperties, min/maxProperties, items, additionalItems, min/maxItems,
/// uniqueItems, contains, min/maxLength, pattern, minimum, maximum,
/// exclusiveMinimum, exclusiveMaximum, multipleOf, allOf, anyOf, oneOf, not).
/// Unknown keywords are ignored. Returns every violation found.
std::vector<SchemaViolation> validate_instance(const Json& schema, const Json& instance);

inline bool conforms(const Json& schema, const Json& instance) { return validate_instance(schema, instance).empty(); }

}  // namespace agentkit::tools
