#pragma once

// Update times and communication lags for simulated asynchronous execution.
//
// Step t runs from 0 to horizon - 1. At step t a vertex in T^i recomputes;
// data it receives from j is read as of time tau_{j->i}(t) <= t.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "minsum/model.hpp"

namespace minsum {

enum class ScheduleKind { Synchronous, RandomTotalAsync, AdversarialScript };

const char* to_string(ScheduleKind kind);
/// Accepts "synchronous", "random-total-async", "adversarial-script".
ScheduleKind parse_schedule_kind(std::string_view name);

using Channel = std::pair<Index, Index>;  // (from, to)

class Schedule {
 public:
  Schedule(ScheduleKind kind, std::size_t vertices, std::size_t horizon, std::uint64_t seed);

  ScheduleKind kind() const noexcept { return kind_; }
  std::size_t vertices() const noexcept { return updates_.size(); }
  std::size_t horizon() const noexcept { return horizon_; }
  std::uint64_t seed() const noexcept { return seed_; }

  bool updates(Index i, std::size_t t) const { return updates_.at(i).at(t) != 0; }
  /// Sorted update times T^i.
  std::vector<std::size_t> update_times(Index i) const;

  /// tau_{from->to}(t). Channels without an override read fresh data (tau = t).
  std::size_t lag(Index from, Index to, std::size_t t) const;

  const std::map<Channel, std::vector<std::size_t>>& lag_overrides() const noexcept { return lags_; }

  void set_update(Index i, std::size_t t, bool on);
  /// `tau` has one entry per step; throws ValidationError if some tau[t] > t.
  void set_lags(Channel channel, std::vector<std::size_t> tau);

 private:
  ScheduleKind kind_;
  std::size_t horizon_;
  std::uint64_t seed_;
  std::vector<std::vector<char>> updates_;
  std::map<Channel, std::vector<std::size_t>> lags_;
};

/// Synchronous: every vertex updates at every step with tau = t.
/// Random total asynchrony: vertex i updates at step t with probability 1/W,
/// and is forced to when it has been idle for W - 1 steps, so every window of
/// W consecutive steps contains an update. Each listed channel draws tau
/// uniformly from [max(0, t - L), t]. With no channels given, every ordered
/// vertex pair gets lags. Deterministic in `seed`.
Schedule make_schedule(ScheduleKind kind, std::size_t vertices, std::size_t horizon, std::uint64_t seed,
                       std::size_t window = 1, std::size_t lag_bound = 0, const std::vector<Channel>& channels = {});

/// Ordered pairs (j, i) along which i reads data from j.
std::vector<Channel> communication_channels(const Program& program);

/// Script format:
///   {"horizon": T,
///    "update_times": [[t, ...], ...],          // one list per vertex
///    "lags": [{"from": j, "to": i, "tau": [tau(0), ..., tau(T-1)]}, ...]}
/// Throws ParseError for malformed documents, ValidationError for illegal
/// content (tau > t, times outside [0, T), wrong vertex count).
Schedule parse_schedule_script(std::string_view text, std::size_t vertices);
Schedule load_schedule_script(const std::filesystem::path& path, std::size_t vertices);

struct WitnessReport {
  bool windows_ok = true;
  bool lags_ok = true;
  std::vector<std::string> problems;

  bool ok() const noexcept { return windows_ok && lags_ok; }
};

/// Finite-horizon asynchrony check: each vertex updates in every window of W
/// consecutive steps, and every lag t - tau is at most L.
WitnessReport check_witness(const Schedule& schedule, std::size_t window, std::size_t lag_bound);

}  // namespace minsum
