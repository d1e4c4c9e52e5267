// SPDX-License-Identifier: Apache-2.0
#include "agentkit/rollout/advantages.hpp"

#include <cmath>
#include <stdexcept>

namespace agentkit::rollout {

const char* to_string(Estimator e) { return e == Estimator::grpo_std ? "grpo_std" : "mean_baseline"; }

Estimator estimator_from_string(const std::string& s) {
  if (s == "grpo_std") return Estimator::grpo_std;
  if (s == "mean_baseline") return Estimator::mean_baseline;
  throw std::invalid_argument("unknown estimator: " + s);
}

std::vector<double> compute_advantages(const std::vector<double>& rewards, Estimator estimator) {
  const auto n = rewards.size();
  if (n < 2) throw GroupTooSmall("advantages need a group of at least 2, got " + std::to_string(n));
  bool flat = true;
  for (double r : rewards) flat = flat && r == rewards.front();
  if (flat) return std::vector<double>(n, 0.0);
  double sum = 0.0;
  for (double r : rewards) sum += r;
  const double mean = sum / static_cast<double>(n);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rewards[i] - mean;
  if (estimator == Estimator::mean_baseline) return out;

  double ss = 0.0;
  for (double d : out) ss += d * d;
  const double sd = std::sqrt(ss / static_cast<double>(n));
  if (sd == 0.0) return std::vector<double>(n, 0.0);
  for (auto& a : out) a /= sd;
  return out;
}

}  // namespace agentkit::rollout
