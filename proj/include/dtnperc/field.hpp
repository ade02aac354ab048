#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dtnperc/geometry.hpp"
#include "dtnperc/model.hpp"
#include "dtnperc/rng.hpp"

namespace dtnperc {

/// Unit cube [i,i+1) x [j,j+1) x [k,k+1) in (x, y, time).
struct BoxCoords {
  std::int32_t i = 0;
  std::int32_t j = 0;
  std::int32_t k = 0;

  friend auto operator<=>(const BoxCoords&, const BoxCoords&) = default;
};

/// Box containing a space-time point, with true floor semantics for negative
/// coordinates.
inline BoxCoords box_of(double x, double y, double t) {
  return BoxCoords{static_cast<std::int32_t>(std::floor(x)),
                   static_cast<std::int32_t>(std::floor(y)),
                   static_cast<std::int32_t>(std::floor(t))};
}

/// Independent Bernoulli thinning of the Poisson field: every non-source
/// cylinder is kept with probability keep_prob, decided by a dedicated random
/// stream so the surviving cylinders are bit-identical to their counterparts
/// in the unthinned world with the same seed.
struct Thinning {
  double keep_prob = 1.0;
  std::uint64_t salt = 0;
};

namespace detail {
/// Bump allocator returning contiguous, pointer-stable cylinder blocks.
class CylinderArena {
 public:
  Cylinder* allocate(std::size_t count);
  std::size_t size() const { return total_; }

 private:
  static constexpr std::size_t kChunk = 1 << 14;
  std::vector<std::unique_ptr<Cylinder[]>> chunks_;
  std::size_t used_ = kChunk;
  std::size_t capacity_ = kChunk;
  std::size_t total_ = 0;
};

/// One generated box: contents live in the arena, sorted by arrival time.
struct BoxRecord {
  std::int32_t k = 0;
  std::uint32_t count = 0;
  const Cylinder* data = nullptr;
};

/// Open-addressing map from packed (i, j) columns to their generated boxes,
/// keyed per column because the growth kernel always probes the three time
/// layers of a column back to back: one cold lookup covers all three.
class ColumnMap {
 public:
  struct Column {
    std::vector<BoxRecord> boxes;  // sorted by k
  };

  ColumnMap() : slots_(kInitialSlots) {}

  Column& get_or_create(std::uint64_t key) {
    if ((filled_ + 1) * 2 > slots_.size()) grow();
    std::size_t idx = mix64(key) & (slots_.size() - 1);
    for (;;) {
      Slot& s = slots_[idx];
      if (!s.used) {
        s.used = true;
        s.key = key;
        ++filled_;
        return s.column;
      }
      if (s.key == key) return s.column;
      idx = (idx + 1) & (slots_.size() - 1);
    }
  }

  bool empty() const { return filled_ == 0; }

 private:
  struct Slot {
    std::uint64_t key = 0;
    Column column;
    bool used = false;
  };
  static constexpr std::size_t kInitialSlots = 1 << 10;

  void grow() {
    std::vector<Slot> old = std::move(slots_);
    slots_.assign(old.size() * 4, Slot{});
    for (Slot& s : old) {
      if (!s.used) continue;
      std::size_t idx = mix64(s.key) & (slots_.size() - 1);
      while (slots_[idx].used) idx = (idx + 1) & (slots_.size() - 1);
      slots_[idx] = std::move(s);
    }
  }

  std::vector<Slot> slots_;
  std::size_t filled_ = 0;
};
}  // namespace detail

/// Lazily materialized Poisson world of cylinders, partitioned into unit
/// boxes. Box contents are a pure function of (seed, box coordinates, params):
/// counts are Poisson with mean params.n, positions and arrival times are
/// uniform in the box, headings isotropic. Each box is generated at most once
/// per world instance and cached.
///
/// A world is single-writer: one cluster simulation owns it. Parallel
/// campaigns use one world per sample.
class FieldWorld {
 public:
  FieldWorld(const ModelParams& params, std::uint64_t seed)
      : FieldWorld(params, seed, Thinning{}) {}
  FieldWorld(const ModelParams& params, std::uint64_t seed, const Thinning& thinning);

  /// Contents of box b, sorted by arrival time, generating them on first
  /// access. The returned span stays valid for the world's lifetime.
  std::span<const Cylinder> populate_box(BoxCoords b);

  /// Concatenated contents of the 3x3x3 block centered at b, in (box order,
  /// within-box order).
  std::vector<Cylinder> neighborhood(BoxCoords b);

  /// Visits the 27 boxes around b in deterministic box order without copying.
  /// The dk loop is innermost on purpose: the three time layers of a column
  /// share one map probe's locality.
  template <class F>
  void for_each_neighbor_box(BoxCoords b, F&& visit) {
    for (std::int32_t di = -1; di <= 1; ++di)
      for (std::int32_t dj = -1; dj <= 1; ++dj)
        for (std::int32_t dk = -1; dk <= 1; ++dk)
          visit(populate_box(BoxCoords{b.i + di, b.j + dj, b.k + dk}));
  }

  /// Inserts the distinguished source node at (0.5, 0.5), arrival time 0,
  /// random isotropic heading, into box (0,0,0), in addition to the Poisson
  /// points there. Must be the first access on a fresh world; throws
  /// std::logic_error otherwise or when called twice.
  const Cylinder& place_source();

  const ModelParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  const Cylinder* source() const { return source_; }

  /// Number of boxes generated so far (drives the memory bound: population
  /// happens only through cluster growth).
  std::size_t populated_box_count() const { return populated_boxes_; }
  /// Total cylinders materialized, usable as a dense slot upper bound.
  std::size_t cylinder_count() const { return arena_.size(); }

 private:
  static std::uint64_t pack_column(std::int32_t i, std::int32_t j);
  detail::BoxRecord generate_box(BoxCoords b, bool with_source);

  ModelParams params_;
  std::uint64_t seed_;
  Thinning thinning_;
  detail::ColumnMap columns_;
  std::size_t populated_boxes_ = 0;
  detail::CylinderArena arena_;
  const Cylinder* source_ = nullptr;
  std::vector<Cylinder> scratch_;
};

inline std::span<const Cylinder> populate_box(FieldWorld& world, BoxCoords b) {
  return world.populate_box(b);
}
inline std::vector<Cylinder> neighborhood(FieldWorld& world, BoxCoords b) {
  return world.neighborhood(b);
}
inline const Cylinder& place_source(FieldWorld& world) { return world.place_source(); }

}  // namespace dtnperc
