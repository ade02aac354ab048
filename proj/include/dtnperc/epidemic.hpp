#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "dtnperc/field.hpp"
#include "dtnperc/geometry.hpp"
#include "dtnperc/model.hpp"

namespace dtnperc {

/// Outcome of one epidemic realization. A censored sample reached the cap
/// s_max and is interpreted as percolating at that scale; extinction_time is
/// the last acquisition time and is meaningful only when not censored.
struct ClusterSample {
  std::uint64_t size = 1;
  bool censored = false;
  std::uint64_t seed = 0;
  double extinction_time = 0.0;
};

struct TraceEntry {
  NodeId id;
  double t_acquire = 0.0;
};
/// Marking sequence of one realization, in acquisition order (times
/// nondecreasing); the first entry is the source at time 0.
using Trace = std::vector<TraceEntry>;

namespace detail {

/// Scheduled first-exchange opportunity. Kept by pointer into the owning
/// world's stable storage; ordered by (time, receiver id, sender id) so that
/// simultaneous contacts resolve the same way on every run.
struct ContactEvent {
  double t = 0.0;
  const Cylinder* to = nullptr;
  const Cylinder* from = nullptr;
};

struct LaterEvent {
  bool operator()(const ContactEvent& a, const ContactEvent& b) const {
    if (a.t != b.t) return a.t > b.t;
    if (a.to->id != b.to->id) return b.to->id < a.to->id;
    return b.from->id < a.from->id;
  }
};

}  // namespace detail

/// Event-driven growth of the directed space-time cluster from the source.
///
/// Every marked node schedules, for each cylinder in the 27-box neighborhood
/// of its home box, the earliest feasible exchange time at or after its own
/// acquisition time. Events pop in time order; a popped target that is still
/// unmarked is marked and expanded in turn (stale events are dropped at pop
/// time). Growth stops when the queue drains or the marked count reaches
/// s_max.
///
/// World must provide params(), place_source(), for_each_neighbor_box() and
/// cylinder_count(), with pointer-stable cylinder storage and per-box spans
/// sorted by arrival time; FieldWorld is the production implementation.
template <class World>
ClusterSample grow_cluster(World& world, std::uint64_t s_max, Trace* trace = nullptr) {
  if (s_max < 1) throw std::invalid_argument("grow_cluster: s_max must be >= 1");
  const ModelParams& prm = world.params();
  // A pair can meet only if their initial positions differ by less than
  // 2*ell + d (= 1 under the canonical scaling).
  const double reach = 2.0 * prm.ell + prm.d;
  const double reach2 = reach * reach;

  const Cylinder& source = world.place_source();

  std::vector<char> has_msg(world.cylinder_count(), 0);
  std::priority_queue<detail::ContactEvent, std::vector<detail::ContactEvent>,
                      detail::LaterEvent>
      queue;

  const auto schedule_from = [&](const Cylinder& c, double t_acq) {
    const BoxCoords home{c.id.i, c.id.j, c.id.k};
    world.for_each_neighbor_box(home, [&](std::span<const Cylinder> box) {
      if (has_msg.size() < world.cylinder_count())
        has_msg.resize(world.cylinder_count(), 0);
      // Arrival-time window that can still overlap c's remaining lifetime.
      const double lo = t_acq - prm.t_life;
      const double hi = c.t_arrive + prm.t_life;
      const Cylinder* end = box.data() + box.size();
      const Cylinder* cand = std::lower_bound(
          box.data(), end, lo,
          [](const Cylinder& x, double v) { return x.t_arrive < v; });
      for (; cand != end && cand->t_arrive <= hi; ++cand) {
        if (cand == &c || has_msg[cand->slot]) continue;
        const double dx = cand->p0.x() - c.p0.x();
        const double dy = cand->p0.y() - c.p0.y();
        if (dx * dx + dy * dy > reach2) continue;
        if (const auto t1 = first_contact_at_or_after(c, *cand, prm, t_acq))
          queue.push({*t1, cand, &c});
      }
    });
  };

  ClusterSample out;
  out.size = 1;
  if (trace) trace->push_back({source.id, 0.0});
  has_msg[source.slot] = 1;
  double last_t = 0.0;

  if (out.size < s_max) {
    schedule_from(source, 0.0);
    while (!queue.empty()) {
      const detail::ContactEvent ev = queue.top();
      queue.pop();
      if (has_msg[ev.to->slot]) continue;  // stale: marked since scheduling
      has_msg[ev.to->slot] = 1;
      ++out.size;
      last_t = ev.t;
      if (trace) trace->push_back({ev.to->id, ev.t});
      if (out.size >= s_max) break;
      schedule_from(*ev.to, ev.t);
    }
  }

  out.censored = out.size >= s_max;
  out.extinction_time = last_t;
  return out;
}

/// One full realization on a fresh Poisson world: a pure function of
/// (params, seed, s_max).
ClusterSample sample_cluster(const ModelParams& params, std::uint64_t seed,
                             std::uint64_t s_max);

/// Same, on a Bernoulli-thinned world (used by the monotone-coupling checks).
ClusterSample sample_cluster(const ModelParams& params, std::uint64_t seed,
                             std::uint64_t s_max, const Thinning& thinning);

/// Re-runs the identical simulation recording the marking sequence.
Trace acquisition_trace(const ModelParams& params, std::uint64_t seed,
                        std::uint64_t s_max);

}  // namespace dtnperc
