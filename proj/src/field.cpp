#include "dtnperc/field.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace dtnperc {
namespace detail {

Cylinder* CylinderArena::allocate(std::size_t count) {
  if (used_ + count > capacity_) {
    capacity_ = std::max(kChunk, count);
    chunks_.push_back(std::make_unique<Cylinder[]>(capacity_));
    used_ = 0;
  }
  Cylinder* block = chunks_.back().get() + used_;
  used_ += count;
  total_ += count;
  return block;
}

}  // namespace detail

namespace {
constexpr std::uint64_t kContentSalt = 0xB0;
constexpr std::uint64_t kThinSalt = 0x71;
constexpr std::uint64_t kSourceSalt = 0x50;

constexpr std::uint64_t as_word(std::int32_t v) {
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(v));
}
}  // namespace

FieldWorld::FieldWorld(const ModelParams& params, std::uint64_t seed,
                       const Thinning& thinning)
    : params_(params), seed_(seed), thinning_(thinning) {
  if (!(thinning.keep_prob >= 0.0 && thinning.keep_prob <= 1.0))
    throw std::invalid_argument("FieldWorld: keep_prob outside [0, 1]");
}

// 21-bit packing per axis; the supported range is far beyond any reachable
// cluster extent, and exceeding it fails loudly instead of aliasing two
// columns onto one key.
std::uint64_t FieldWorld::pack_column(std::int32_t i, std::int32_t j) {
  constexpr std::int64_t kRange = std::int64_t{1} << 20;
  if (i < -kRange || i >= kRange || j < -kRange || j >= kRange)
    throw std::out_of_range("FieldWorld: box coordinates exceed supported range");
  const std::uint64_t ui = static_cast<std::uint64_t>(i + kRange);
  const std::uint64_t uj = static_cast<std::uint64_t>(j + kRange);
  return (ui << 21) | uj;
}

std::span<const Cylinder> FieldWorld::populate_box(BoxCoords b) {
  detail::ColumnMap::Column& col = columns_.get_or_create(pack_column(b.i, b.j));
  const auto it = std::lower_bound(
      col.boxes.begin(), col.boxes.end(), b.k,
      [](const detail::BoxRecord& r, std::int32_t k) { return r.k < k; });
  if (it != col.boxes.end() && it->k == b.k) return {it->data, it->count};
  const detail::BoxRecord rec = generate_box(b, /*with_source=*/false);
  col.boxes.insert(it, rec);
  ++populated_boxes_;
  return {rec.data, rec.count};
}

detail::BoxRecord FieldWorld::generate_box(BoxCoords b, bool with_source) {
  RandomStream gen(
      derive_key({seed_, as_word(b.i), as_word(b.j), as_word(b.k), kContentSalt}));
  const std::uint32_t drawn = gen.next_poisson(params_.n);

  scratch_.clear();
  scratch_.reserve(drawn);
  for (std::uint32_t idx = 0; idx < drawn; ++idx) {
    Cylinder c;
    c.p0.x() = b.i + gen.next_unit();
    c.p0.y() = b.j + gen.next_unit();
    c.t_arrive = b.k + gen.next_unit();
    gen.next_heading(c.heading.x(), c.heading.y());
    scratch_.push_back(c);
  }

  if (thinning_.keep_prob < 1.0) {
    RandomStream thin(derive_key(
        {seed_, as_word(b.i), as_word(b.j), as_word(b.k), kThinSalt, thinning_.salt}));
    std::size_t kept = 0;
    for (std::size_t idx = 0; idx < scratch_.size(); ++idx) {
      const bool keep = thin.next_unit() < thinning_.keep_prob;
      if (keep) scratch_[kept++] = scratch_[idx];
    }
    scratch_.resize(kept);
  }

  // Arrival order is the canonical within-box order; ids are assigned after
  // sorting so they are stable across worlds regardless of thinning draws or
  // source placement.
  std::sort(scratch_.begin(), scratch_.end(), [](const Cylinder& a, const Cylinder& c) {
    if (a.t_arrive != c.t_arrive) return a.t_arrive < c.t_arrive;
    if (a.p0.x() != c.p0.x()) return a.p0.x() < c.p0.x();
    return a.p0.y() < c.p0.y();
  });
  for (std::size_t idx = 0; idx < scratch_.size(); ++idx)
    scratch_[idx].id = NodeId{b.i, b.j, b.k, static_cast<std::int32_t>(idx)};

  const std::size_t total = scratch_.size() + (with_source ? 1 : 0);
  detail::BoxRecord rec;
  rec.k = b.k;
  rec.count = static_cast<std::uint32_t>(total);
  if (total == 0) return rec;

  Cylinder* block = arena_.allocate(total);
  Cylinder* out = block;
  if (with_source) {
    // Arrival time 0 sorts at or before every Poisson arrival in box k = 0.
    Cylinder src;
    src.id = NodeId{b.i, b.j, b.k, kSourceIndex};
    src.t_arrive = 0.0;
    src.p0 = Eigen::Vector2d{0.5, 0.5};
    RandomStream hs(derive_key({seed_, kSourceSalt}));
    hs.next_heading(src.heading.x(), src.heading.y());
    *out++ = src;
  }
  std::copy(scratch_.begin(), scratch_.end(), out);

  const std::size_t base = arena_.size() - total;
  for (std::size_t idx = 0; idx < total; ++idx)
    block[idx].slot = static_cast<std::uint32_t>(base + idx);
  rec.data = block;
  return rec;
}

std::vector<Cylinder> FieldWorld::neighborhood(BoxCoords b) {
  std::vector<Cylinder> all;
  for_each_neighbor_box(b, [&](std::span<const Cylinder> box) {
    all.insert(all.end(), box.begin(), box.end());
  });
  return all;
}

const Cylinder& FieldWorld::place_source() {
  if (source_ != nullptr) throw std::logic_error("place_source: source already placed");
  if (!columns_.empty())
    throw std::logic_error("place_source: world already has populated boxes");
  const detail::BoxRecord rec = generate_box(BoxCoords{0, 0, 0}, /*with_source=*/true);
  columns_.get_or_create(pack_column(0, 0)).boxes.push_back(rec);
  ++populated_boxes_;
  source_ = rec.data;  // source sorts first in its box
  return *source_;
}

}  // namespace dtnperc
