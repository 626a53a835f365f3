#include "minsum/schedule.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "minsum/errors.hpp"
#include "minsum/io.hpp"

namespace minsum {

const char* to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Synchronous:
      return "synchronous";
    case ScheduleKind::RandomTotalAsync:
      return "random-total-async";
    case ScheduleKind::AdversarialScript:
      return "adversarial-script";
  }
  return "?";
}

ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "synchronous" || name == "sync") return ScheduleKind::Synchronous;
  if (name == "random-total-async" || name == "async") return ScheduleKind::RandomTotalAsync;
  if (name == "adversarial-script" || name == "script") return ScheduleKind::AdversarialScript;
  throw ValidationError("unknown schedule kind '" + std::string(name) + "'");
}

Schedule::Schedule(ScheduleKind kind, std::size_t vertices, std::size_t horizon, std::uint64_t seed)
    : kind_(kind), horizon_(horizon), seed_(seed), updates_(vertices, std::vector<char>(horizon, 0)) {}

std::vector<std::size_t> Schedule::update_times(Index i) const {
  std::vector<std::size_t> out;
  const auto& row = updates_.at(i);
  for (std::size_t t = 0; t < row.size(); ++t) {
    if (row[t]) out.push_back(t);
  }
  return out;
}

std::size_t Schedule::lag(Index from, Index to, std::size_t t) const {
  const auto it = lags_.find({from, to});
  if (it == lags_.end()) return t;
  return it->second.at(t);
}

void Schedule::set_update(Index i, std::size_t t, bool on) { updates_.at(i).at(t) = on ? 1 : 0; }

void Schedule::set_lags(Channel channel, std::vector<std::size_t> tau) {
  if (channel.first >= vertices() || channel.second >= vertices()) {
    throw ValidationError("lag channel names a vertex outside the program");
  }
  if (tau.size() != horizon_) {
    std::ostringstream os;
    os << "lags for " << channel.first << "->" << channel.second << " need " << horizon_ << " entries, got "
       << tau.size();
    throw ValidationError(os.str());
  }
  for (std::size_t t = 0; t < tau.size(); ++t) {
    if (tau[t] > t) {
      std::ostringstream os;
      os << "lag for " << channel.first << "->" << channel.second << " at t=" << t << " reads the future (tau="
         << tau[t] << ")";
      throw ValidationError(os.str());
    }
  }
  lags_[channel] = std::move(tau);
}

Schedule make_schedule(ScheduleKind kind, std::size_t vertices, std::size_t horizon, std::uint64_t seed,
                       std::size_t window, std::size_t lag_bound, const std::vector<Channel>& channels) {
  if (window < 1) throw ValidationError("window W must be at least 1");
  Schedule schedule(kind, vertices, horizon, seed);
  switch (kind) {
    case ScheduleKind::Synchronous:
      for (Index i = 0; i < vertices; ++i) {
        for (std::size_t t = 0; t < horizon; ++t) schedule.set_update(i, t, true);
      }
      return schedule;
    case ScheduleKind::AdversarialScript:
      throw ValidationError("adversarial schedules come from a script file");
    case ScheduleKind::RandomTotalAsync:
      break;
  }

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution fire(1.0 / static_cast<double>(window));
  for (Index i = 0; i < vertices; ++i) {
    std::size_t idle = 0;
    for (std::size_t t = 0; t < horizon; ++t) {
      const bool on = fire(rng) || idle + 1 >= window;
      schedule.set_update(i, t, on);
      idle = on ? 0 : idle + 1;
    }
  }

  std::vector<Channel> all = channels;
  if (all.empty()) {
    for (Index a = 0; a < vertices; ++a) {
      for (Index b = 0; b < vertices; ++b) {
        if (a != b) all.emplace_back(a, b);
      }
    }
  }
  for (const auto& ch : all) {
    std::vector<std::size_t> tau(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const std::size_t lo = t > lag_bound ? t - lag_bound : 0;
      tau[t] = std::uniform_int_distribution<std::size_t>(lo, t)(rng);
    }
    schedule.set_lags(ch, std::move(tau));
  }
  return schedule;
}

std::vector<Channel> communication_channels(const Program& program) {
  std::vector<Channel> out;
  for (Index i = 0; i < program.size(); ++i) {
    for (Index j : program.communication_neighbors(i)) out.emplace_back(j, i);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::size_t as_count(const nlohmann::json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) throw ParseError("expected a nonnegative integer", 0, path);
  return j.get<std::size_t>();
}

}  // namespace

Schedule parse_schedule_script(std::string_view text, std::size_t vertices) {
  const nlohmann::json doc = parse_json_document(text);
  if (!doc.is_object()) throw ParseError("schedule script must be a JSON object", 0, "$");
  if (!doc.contains("horizon")) throw ParseError("missing field", 0, "$.horizon");
  const std::size_t horizon = as_count(doc["horizon"], "$.horizon");
  Schedule schedule(ScheduleKind::AdversarialScript, vertices, horizon, 0);

  if (!doc.contains("update_times") || !doc["update_times"].is_array()) {
    throw ParseError("missing array", 0, "$.update_times");
  }
  const auto& times = doc["update_times"];
  if (times.size() != vertices) {
    std::ostringstream os;
    os << "update_times has " << times.size() << " lists for " << vertices << " vertices";
    throw ValidationError(os.str());
  }
  for (Index i = 0; i < vertices; ++i) {
    const std::string path = "$.update_times[" + std::to_string(i) + "]";
    if (!times[i].is_array()) throw ParseError("expected an array", 0, path);
    for (std::size_t k = 0; k < times[i].size(); ++k) {
      const std::size_t t = as_count(times[i][k], path + "[" + std::to_string(k) + "]");
      if (t >= horizon) throw ValidationError("update time " + std::to_string(t) + " is outside the horizon");
      schedule.set_update(i, t, true);
    }
  }

  if (doc.contains("lags")) {
    if (!doc["lags"].is_array()) throw ParseError("expected an array", 0, "$.lags");
    for (std::size_t k = 0; k < doc["lags"].size(); ++k) {
      const auto& rec = doc["lags"][k];
      const std::string path = "$.lags[" + std::to_string(k) + "]";
      if (!rec.is_object() || !rec.contains("from") || !rec.contains("to") || !rec.contains("tau")) {
        throw ParseError("lag record needs from, to and tau", 0, path);
      }
      if (!rec["tau"].is_array()) throw ParseError("expected an array", 0, path + ".tau");
      std::vector<std::size_t> tau;
      for (std::size_t t = 0; t < rec["tau"].size(); ++t) {
        tau.push_back(as_count(rec["tau"][t], path + ".tau[" + std::to_string(t) + "]"));
      }
      schedule.set_lags({as_count(rec["from"], path + ".from"), as_count(rec["to"], path + ".to")}, std::move(tau));
    }
  }
  return schedule;
}

Schedule load_schedule_script(const std::filesystem::path& path, std::size_t vertices) {
  return parse_schedule_script(read_text_file(path), vertices);
}

WitnessReport check_witness(const Schedule& schedule, std::size_t window, std::size_t lag_bound) {
  WitnessReport report;
  for (Index i = 0; i < schedule.vertices(); ++i) {
    std::size_t idle = 0;
    for (std::size_t t = 0; t < schedule.horizon(); ++t) {
      idle = schedule.updates(i, t) ? 0 : idle + 1;
      if (idle >= window) {
        report.windows_ok = false;
        report.problems.push_back("vertex " + std::to_string(i) + " idles through the window ending at t=" +
                                  std::to_string(t));
        break;
      }
    }
  }
  for (const auto& [ch, tau] : schedule.lag_overrides()) {
    for (std::size_t t = 0; t < tau.size(); ++t) {
      if (tau[t] > t || t - tau[t] > lag_bound) {
        report.lags_ok = false;
        report.problems.push_back("channel " + std::to_string(ch.first) + "->" + std::to_string(ch.second) +
                                  " lags by " + std::to_string(t - std::min(t, tau[t])) + " at t=" +
                                  std::to_string(t));
        break;
      }
    }
  }
  return report;
}

}  // namespace minsum
