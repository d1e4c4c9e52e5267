// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "agentkit/common/error.hpp"

namespace agentkit::rollout {

class GroupTooSmall : public Error {
 public:
  using Error::Error;
};

enum class Estimator { grpo_std, mean_baseline };

const char* to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

/// grpo_std: (r_i - mean) / population std, all zeros when std is 0.
/// mean_baseline: r_i - mean.
std::vector<double> compute_advantages(const std::vector<double>& rewards, Estimator estimator);

}  // namespace agentkit::rollout
