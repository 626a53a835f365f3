#pragma once

// Runs an engine under a Schedule on a single simulated clock.
//
// Every directed message channel keeps its full (time, message) history.
// At step t an active vertex reads each input as of tau(t), recomputes its
// outgoing messages and posts them at time t + 1. Inactive vertices post
// nothing, so readers keep seeing their older messages.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "minsum/errors.hpp"
#include "minsum/hyper_engine.hpp"
#include "minsum/model.hpp"
#include "minsum/piecewise_engine.hpp"
#include "minsum/quadratic_engine.hpp"
#include "minsum/schedule.hpp"
#include "minsum/trace.hpp"

namespace minsum {

template <class Msg>
class Mailbox {
 public:
  explicit Mailbox(std::size_t channels) : history_(channels) {}

  std::size_t channels() const noexcept { return history_.size(); }

  /// Appends; a post at the same time as the last entry replaces it.
  void post(Index channel, std::size_t time, Msg message) {
    auto& h = history_.at(channel);
    if (!h.empty() && time < h.back().first) throw ValidationError("mailbox posts must move forward in time");
    if (!h.empty() && time == h.back().first) {
      h.back().second = std::move(message);
    } else {
      h.emplace_back(time, std::move(message));
    }
  }

  /// Latest message posted at or before tau. `now` is the reader's clock;
  /// reading the future is an error.
  const Msg& read(Index channel, std::size_t tau, std::size_t now) const {
    if (tau > now) {
      std::ostringstream os;
      os << "stale-read violation: tau=" << tau << " exceeds t=" << now;
      throw ValidationError(os.str());
    }
    const auto& h = history_.at(channel);
    auto it = std::upper_bound(h.begin(), h.end(), tau,
                               [](std::size_t value, const auto& entry) { return value < entry.first; });
    if (it == h.begin()) throw ValidationError("mailbox read before the first post");
    return std::prev(it)->second;
  }

  const Msg& latest(Index channel) const { return history_.at(channel).back().second; }

 private:
  std::vector<std::vector<std::pair<std::size_t, Msg>>> history_;
};

enum class EngineKind { Quadratic, Piecewise, Hyper };

const char* to_string(EngineKind kind);
EngineKind parse_engine_kind(std::string_view name);

/// Row t + 1 holds the estimates after step t; row 0 the initial estimates.
Trace run_scheduled_quadratic(const Program& program, const Schedule& schedule, QuadraticState initial);
Trace run_scheduled_piecewise(const Program& program, const Grid& grid, const Schedule& schedule,
                              PiecewiseState initial);
Trace run_scheduled_hyper(const Program& program, const Schedule& schedule);

/// Dispatch with default initial messages. Piecewise runs need `grid`.
Trace run_scheduled(EngineKind engine, const Program& program, const Schedule& schedule,
                    const std::optional<Grid>& grid = std::nullopt);

}  // namespace minsum
