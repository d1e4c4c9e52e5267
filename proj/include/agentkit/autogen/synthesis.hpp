// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentkit/autogen/library.hpp"
#include "agentkit/env/environment.hpp"
#include "agentkit/llm/gateway.hpp"

namespace agentkit::autogen {

inline constexpr int kSynthesisRounds = 3;

class SynthesisFailed : public GenerationError {
 public:
  SynthesisFailed(SynthesizedTool attempt, const std::string& message);
  const SynthesizedTool& attempt() const { return attempt_; }
  const TestReport& report() const { return attempt_.report; }

 private:
  SynthesizedTool attempt_;
};

struct PyParam {
  std::string name;
  std::string annotation;
  bool has_default = false;
};

struct PySignature {
  std::string name;
  std::vector<PyParam> params;
  std::string return_annotation;
  /// First nonblank docstring line.
  std::string summary;
  /// Descriptions from the docstring's "Args:" section.
  std::map<std::string, std::string> arg_docs;
};

/// The first top-level `def` in `source`.
std::optional<PySignature> parse_python_function(const std::string& source);

/// Object schema: str->string, int->integer, float->number, bool->boolean,
/// list/tuple->array, dict->object, other annotations untyped; parameters
/// without defaults are required; extra properties are rejected.
Json schema_from_signature(const PySignature& sig);

struct SynthesisOptions {
  int max_rounds = kSynthesisRounds;
  double test_timeout_s = 10;
  std::optional<double> temperature;
};

/// Generates a tool (source, docstring, self-test) for `need`, runs the
/// self-test in `sandbox` and re-prompts with the error output until it passes
/// or max_rounds are used. Throws SynthesisFailed carrying the last attempt.
/// Does not register the tool.
SynthesizedTool synthesize_tool(const std::string& need, const ToolLibrary& lib, llm::Gateway& gw,
                                env::Environment& sandbox, const SynthesisOptions& options = {});

/// The Python program that calls the tool's function with `args` and prints the result.
std::string script_for_call(const SynthesizedTool& tool, const Json& args);

/// Catalog entry running the synthesized function through the episode environment's exec_code.
tools::ToolkitFactory script_toolkit(const SynthesizedTool& tool);

}  // namespace agentkit::autogen
