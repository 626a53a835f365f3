#include "minsum/scheduler.hpp"

#include <cmath>
#include <string>

namespace minsum {

const char* to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::Quadratic:
      return "quadratic";
    case EngineKind::Piecewise:
      return "piecewise";
    case EngineKind::Hyper:
      return "hyper";
  }
  return "?";
}

EngineKind parse_engine_kind(std::string_view name) {
  if (name == "quadratic") return EngineKind::Quadratic;
  if (name == "piecewise") return EngineKind::Piecewise;
  if (name == "hyper") return EngineKind::Hyper;
  throw ValidationError("unknown engine '" + std::string(name) + "'");
}

namespace {

void check_vertices(const Program& program, const Schedule& schedule) {
  if (schedule.vertices() != program.size()) {
    throw DimensionError("schedule has " + std::to_string(schedule.vertices()) + " vertices, program has " +
                         std::to_string(program.size()));
  }
}

std::vector<Index> active_at(const Schedule& schedule, std::size_t t) {
  std::vector<Index> out;
  for (Index i = 0; i < schedule.vertices(); ++i) {
    if (schedule.updates(i, t)) out.push_back(i);
  }
  return out;
}

// Tracks the largest staleness seen during one step.
struct LagMeter {
  const Schedule& schedule;
  std::size_t t;
  std::size_t worst = 0;

  std::size_t tau(Index from, Index to) {
    const std::size_t s = schedule.lag(from, to, t);
    if (s <= t) worst = std::max(worst, t - s);
    return s;
  }
};

}  // namespace

Trace run_scheduled_quadratic(const Program& program, const Schedule& schedule, QuadraticState initial) {
  check_vertices(program, schedule);
  const auto& directed = program.directed_edges();
  Mailbox<QuadraticMessage> box(directed.size());
  for (Index d = 0; d < directed.size(); ++d) box.post(d, 0, initial.messages[d]);
  Mailbox<double> estimates(program.size());
  for (Index i = 0; i < program.size(); ++i) estimates.post(i, 0, initial.estimate[i]);

  Trace trace;
  trace.scheduled = true;
  trace.rows.push_back({0, 0.0, estimate(program, initial), std::nullopt, {}, 0});
  std::vector<double> x = initial.estimate;

  for (std::size_t t = 0; t < schedule.horizon(); ++t) {
    const auto active = active_at(schedule, t);
    LagMeter lag{schedule, t};
    std::vector<std::pair<Index, QuadraticMessage>> posts;
    for (Index i : active) {
      const MessageReader read = [&](Index d) -> const QuadraticMessage& {
        return box.read(d, lag.tau(directed[d].from, i), t);
      };
      for (const auto& nb : program.neighbors(i)) {
        const Index d = *program.directed_index(i, nb.vertex);
        const double x_to = estimates.read(nb.vertex, lag.tau(nb.vertex, i), t);
        posts.emplace_back(d, directed_update(program, d, x[i], x_to, read));
      }
    }
    double delta = 0.0;
    for (auto& [d, m] : posts) {
      const QuadraticMessage& old = box.latest(d);
      delta = std::max({delta, std::abs(m.a - old.a), std::abs(m.b - old.b)});
      box.post(d, t + 1, m);
    }
    const MessageReader latest = [&box](Index d) -> const QuadraticMessage& { return box.latest(d); };
    std::vector<double> next = x;
    for (Index i : active) {
      next[i] = local_estimate(program, i, x[i], latest);
      estimates.post(i, t + 1, next[i]);
    }
    x = std::move(next);
    trace.rows.push_back({t + 1, delta, x, std::nullopt, active, lag.worst});
  }
  return trace;
}

Trace run_scheduled_piecewise(const Program& program, const Grid& grid, const Schedule& schedule,
                              PiecewiseState initial) {
  check_vertices(program, schedule);
  const auto& directed = program.directed_edges();
  Mailbox<PiecewiseMessage> box(directed.size());
  for (Index d = 0; d < directed.size(); ++d) box.post(d, 0, initial.messages[d]);

  Trace trace;
  trace.scheduled = true;
  trace.grid_m = grid.size();
  std::vector<double> x = estimates_pw(program, initial, grid);
  trace.rows.push_back({0, 0.0, x, std::nullopt, {}, 0});

  for (std::size_t t = 0; t < schedule.horizon(); ++t) {
    const auto active = active_at(schedule, t);
    LagMeter lag{schedule, t};
    std::vector<std::pair<Index, PiecewiseMessage>> posts;
    for (Index i : active) {
      // Envelopes of every incoming message as seen by i at this step.
      std::vector<ChordEnvelope> seen;
      std::vector<Index> from;
      for (const auto& nb : program.neighbors(i)) {
        const Index d = *program.directed_index(nb.vertex, i);
        seen.emplace_back(box.read(d, lag.tau(nb.vertex, i), t), grid);
        from.push_back(nb.vertex);
      }
      for (const auto& nb : program.neighbors(i)) {
        std::vector<const ChordEnvelope*> in;
        for (std::size_t k = 0; k < from.size(); ++k) {
          if (from[k] != nb.vertex) in.push_back(&seen[k]);
        }
        const Index d = *program.directed_index(i, nb.vertex);
        posts.emplace_back(d, update_message_pw(program, directed[d], std::span<const ChordEnvelope* const>(in), grid));
      }
    }
    double delta = 0.0;
    for (auto& [d, m] : posts) {
      delta = std::max(delta, max_abs_difference(m.values, box.latest(d).values));
      box.post(d, t + 1, std::move(m));
    }
    for (Index i : active) {
      std::vector<ChordEnvelope> in;
      for (const auto& nb : program.neighbors(i)) in.emplace_back(box.latest(*program.directed_index(nb.vertex, i)), grid);
      std::vector<const ChordEnvelope*> ptrs;
      for (const auto& e : in) ptrs.push_back(&e);
      x[i] = estimate_pw(program, i, std::span<const ChordEnvelope* const>(ptrs), grid);
    }
    trace.rows.push_back({t + 1, delta, x, std::nullopt, active, lag.worst});
  }
  return trace;
}

Trace run_scheduled_hyper(const Program& program, const Schedule& schedule) {
  check_vertices(program, schedule);
  const HyperLayout layout(program);
  const auto& incidences = layout.incidences();
  HyperState state = init_hyper(layout);
  auto& f2v = state.factor_to_var;
  const MessageReader own = [&f2v](Index k) -> const QuadraticMessage& { return f2v[k]; };

  Mailbox<QuadraticMessage> v2f(incidences.size());
  for (Index k = 0; k < incidences.size(); ++k) v2f.post(k, 0, update_var_to_factor(layout, k, own));

  Trace trace;
  trace.scheduled = true;
  std::vector<double> x = state.estimate;
  trace.rows.push_back({0, 0.0, x, std::nullopt, {}, 0});

  for (std::size_t t = 0; t < schedule.horizon(); ++t) {
    const auto active = active_at(schedule, t);
    LagMeter lag{schedule, t};
    for (Index i : active) {
      for (Index k : layout.incident(i)) v2f.post(k, t, update_var_to_factor(layout, k, own));
    }
    double delta = 0.0;
    std::vector<std::pair<Index, QuadraticMessage>> posts;
    for (Index i : active) {
      const MessageReader read = [&](Index k) -> const QuadraticMessage& {
        return v2f.read(k, lag.tau(incidences[k].vertex, i), t);
      };
      for (Index k : layout.incident(i)) posts.emplace_back(k, update_factor_to_var(layout, k, read));
    }
    for (auto& [k, m] : posts) {
      delta = std::max({delta, std::abs(m.a - f2v[k].a), std::abs(m.b - f2v[k].b)});
      f2v[k] = m;
    }
    for (Index i : active) x[i] = hyper_estimate(layout, i, own);
    trace.rows.push_back({t + 1, delta, x, std::nullopt, active, lag.worst});
  }
  return trace;
}

Trace run_scheduled(EngineKind engine, const Program& program, const Schedule& schedule,
                    const std::optional<Grid>& grid) {
  switch (engine) {
    case EngineKind::Quadratic:
      if (!program.is_pairwise()) throw ValidationError("the quadratic engine needs a pairwise program");
      return run_scheduled_quadratic(program, schedule, init_messages(program));
    case EngineKind::Piecewise:
      if (!program.is_pairwise()) throw ValidationError("the piecewise engine needs a pairwise program");
      if (!grid) throw ValidationError("the piecewise engine needs a grid");
      return run_scheduled_piecewise(program, *grid, schedule, init_messages_pw(program, *grid));
    case EngineKind::Hyper:
      return run_scheduled_hyper(program, schedule);
  }
  throw ValidationError("unknown engine");
}

}  // namespace minsum
