// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <chrono>
#include <condition_variable>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <thread>

namespace agentkit {

using SteadyClock = std::chrono::steady_clock;
using TimePoint = SteadyClock::time_point;

inline std::chrono::milliseconds to_millis(double seconds) {
  return std::chrono::milliseconds(static_cast<long long>(seconds * 1000.0 + 0.5));
}

inline double seconds_until(TimePoint deadline) {
  return std::chrono::duration<double>(deadline - SteadyClock::now()).count();
}

inline long long elapsed_ms(TimePoint since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(SteadyClock::now() - since).count();
}

/// Runs `fn` on a helper thread and waits for it until `deadline`.
///
/// Returns the result if it arrives in time, otherwise requests a stop and
/// returns nullopt. The helper is detached on timeout: it owns its state and
/// finishes in the background, so `fn` must only capture values or shared
/// ownership. Exceptions thrown by `fn` are rethrown in the caller.
template <class T>
std::optional<T> run_until(TimePoint deadline, std::function<T(std::stop_token)> fn) {
  struct State {
    std::mutex mu;
    std::condition_variable cv;
    std::optional<T> value;
    std::exception_ptr error;
    bool done = false;
    std::stop_source stop;
  };
  auto state = std::make_shared<State>();
  std::thread worker([state, fn = std::move(fn)]() mutable {
    std::optional<T> value;
    std::exception_ptr error;
    try {
      value.emplace(fn(state->stop.get_token()));
    } catch (...) {
      error = std::current_exception();
    }
    std::lock_guard lock(state->mu);
    state->value = std::move(value);
    state->error = error;
    state->done = true;
    state->cv.notify_all();
  });

  std::unique_lock lock(state->mu);
  bool finished = state->cv.wait_until(lock, deadline, [&] { return state->done; });
  if (!finished) {
    state->stop.request_stop();
    lock.unlock();
    worker.detach();
    return std::nullopt;
  }
  lock.unlock();
  worker.join();
  if (state->error) std::rethrow_exception(state->error);
  return std::move(state->value);
}

/// Sleeps until `deadline` or until a stop is requested. Returns true if the
/// full duration elapsed.
inline bool interruptible_sleep_until(TimePoint deadline, std::stop_token stop) {
  std::mutex mu;
  std::condition_variable_any cv;
  std::unique_lock lock(mu);
  return !cv.wait_until(lock, stop, deadline, [] { return false; }) && !stop.stop_requested();
}

}  // namespace agentkit
