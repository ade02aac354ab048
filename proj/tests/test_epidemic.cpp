#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "dtnperc/epidemic.hpp"
#include "dtnperc/field.hpp"
#include "dtnperc/model.hpp"
#include "dtnperc/rng.hpp"
#include "oracles.hpp"

using namespace dtnperc;
using dtnperc::testing::brute_force_epidemic;
using dtnperc::testing::FrozenWorld;
using dtnperc::testing::UnionFind;

TEST_SUITE_BEGIN("epidemic");

TEST_CASE("near-empty field leaves the source alone") {
  const ModelParams p = derive_params(0.0, 0.001);
  int singles = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const ClusterSample s = sample_cluster(p, seed, 1024);
    CHECK(s.size >= 1);
    CHECK_FALSE(s.censored);
    singles += s.size == 1 ? 1 : 0;
  }
  CHECK(singles >= 195);
}

TEST_CASE("identical inputs give identical samples and traces") {
  const ModelParams p = derive_params(1.0, 0.27);
  const ClusterSample a = sample_cluster(p, 9001, 4096);
  const ClusterSample b = sample_cluster(p, 9001, 4096);
  CHECK(a.size == b.size);
  CHECK(a.censored == b.censored);
  CHECK(a.extinction_time == b.extinction_time);
  CHECK(a.seed == 9001);

  const Trace t1 = acquisition_trace(p, 9001, 4096);
  const Trace t2 = acquisition_trace(p, 9001, 4096);
  REQUIRE(t1.size() == t2.size());
  CHECK(t1.size() == a.size);
  for (std::size_t i = 0; i < t1.size(); ++i) {
    CHECK(t1[i].id == t2[i].id);
    CHECK(t1[i].t_acquire == t2[i].t_acquire);
  }
}

TEST_CASE("trace is causal and inside alive intervals") {
  const ModelParams p = derive_params(0.5, 0.30);
  for (const std::uint64_t seed : {11ULL, 22ULL, 33ULL, 44ULL}) {
    const Trace trace = acquisition_trace(p, seed, 8192);
    REQUIRE(!trace.empty());
    CHECK(trace.front().id.index == kSourceIndex);
    CHECK(trace.front().t_acquire == 0.0);

    FieldWorld world(p, seed);
    const Cylinder& src = world.place_source();
    (void)src;
    double prev = 0.0;
    for (const TraceEntry& e : trace) {
      CHECK(e.t_acquire >= prev);
      prev = e.t_acquire;
      const auto box = world.populate_box(BoxCoords{e.id.i, e.id.j, e.id.k});
      const auto it = std::find_if(box.begin(), box.end(), [&](const Cylinder& c) {
        return c.id == e.id;
      });
      REQUIRE(it != box.end());
      CHECK(e.t_acquire >= it->t_arrive);
      CHECK(e.t_acquire <= it->t_arrive + p.t_life);
    }
  }
}

TEST_CASE("matches the brute-force fixed point on frozen random worlds") {
  for (const double gamma : {0.0, 1.0, 3.0}) {
    const ModelParams p = derive_params(gamma, 0.25);
    RandomStream s(derive_key({808, static_cast<std::uint64_t>(gamma * 2)}));
    for (int trial = 0; trial < 25; ++trial) {
      FrozenWorld world(p);
      world.add_source();
      const int n = 10 + static_cast<int>(s.next_unit() * 40);
      for (int i = 0; i < n; ++i) {
        double hx = 0.0, hy = 0.0;
        s.next_heading(hx, hy);
        world.add(s.next_unit() * 3.0, (s.next_unit() - 0.5) * 4.0 + 0.5,
                  (s.next_unit() - 0.5) * 4.0 + 0.5, hx, hy);
      }
      world.freeze();

      Trace trace;
      const ClusterSample sample = grow_cluster(world, 1 << 20, &trace);
      const std::vector<Cylinder> all = world.all();
      const auto src = std::find_if(all.begin(), all.end(), [](const Cylinder& c) {
        return c.id.index == kSourceIndex;
      });
      REQUIRE(src != all.end());
      const Trace expected = brute_force_epidemic(all, *src, p, 1 << 20);

      REQUIRE(trace.size() == expected.size());
      CHECK(sample.size == expected.size());
      for (std::size_t i = 0; i < trace.size(); ++i) {
        CHECK(trace[i].id == expected[i].id);
        CHECK(trace[i].t_acquire == doctest::Approx(expected[i].t_acquire).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("matches the brute-force fixed point on lazily grown fields") {
  const ModelParams p = derive_params(1.0, 0.15);
  for (const std::uint64_t seed : {3ULL, 14ULL, 15ULL, 92ULL, 65ULL, 35ULL}) {
    const Trace trace = acquisition_trace(p, seed, 1 << 16);

    // Materialize a region comfortably containing the observed cluster, then
    // run the oracle over every cylinder in it.
    std::int32_t max_abs_space = 0, max_k = 0;
    for (const TraceEntry& e : trace) {
      max_abs_space = std::max({max_abs_space, std::abs(e.id.i), std::abs(e.id.j)});
      max_k = std::max(max_k, e.id.k);
    }
    const std::int32_t r_space = max_abs_space + 2;
    const std::int32_t r_time = max_k + 2;
    REQUIRE(r_space <= 6);  // keep the oracle tractable at these seeds
    REQUIRE(r_time <= 8);

    FieldWorld world(p, seed);
    const Cylinder& src = world.place_source();
    std::vector<Cylinder> all;
    for (std::int32_t i = -r_space; i <= r_space; ++i)
      for (std::int32_t j = -r_space; j <= r_space; ++j)
        for (std::int32_t k = -1; k <= r_time; ++k) {
          const auto box = world.populate_box(BoxCoords{i, j, k});
          all.insert(all.end(), box.begin(), box.end());
        }

    const Trace expected = brute_force_epidemic(all, src, p, 1 << 16);
    REQUIRE(trace.size() == expected.size());
    for (std::size_t i = 0; i < trace.size(); ++i) {
      CHECK(trace[i].id == expected[i].id);
      CHECK(trace[i].t_acquire == doctest::Approx(expected[i].t_acquire).epsilon(1e-12));
    }
  }
}

TEST_CASE("directed cluster is contained in the undirected component") {
  const ModelParams p = derive_params(2.0, 0.20);
  RandomStream s(derive_key({31, 41}));
  for (int trial = 0; trial < 20; ++trial) {
    FrozenWorld world(p);
    world.add_source();
    for (int i = 0; i < 60; ++i) {
      double hx = 0.0, hy = 0.0;
      s.next_heading(hx, hy);
      world.add(s.next_unit() * 3.0, (s.next_unit() - 0.5) * 5.0 + 0.5,
                (s.next_unit() - 0.5) * 5.0 + 0.5, hx, hy);
    }
    world.freeze();

    Trace trace;
    grow_cluster(world, 1 << 20, &trace);

    const std::vector<Cylinder> all = world.all();
    UnionFind uf(all.size());
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = a + 1; b < all.size(); ++b)
        if (contact_interval(all[a], all[b], p)) uf.unite(a, b);

    std::map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < all.size(); ++i) index[all[i].id] = i;
    std::size_t src_idx = 0;
    for (std::size_t i = 0; i < all.size(); ++i)
      if (all[i].id.index == kSourceIndex) src_idx = i;

    for (const TraceEntry& e : trace)
      CHECK(uf.find(index.at(e.id)) == uf.find(src_idx));
  }
}

TEST_CASE("thinning the field never enlarges the cluster") {
  const ModelParams p = derive_params(0.0, 0.36);
  for (std::uint64_t seed = 100; seed < 300; ++seed) {
    const ClusterSample full = sample_cluster(p, seed, 2048);
    const ClusterSample thin = sample_cluster(p, seed, 2048, Thinning{0.85, 7});
    CHECK(thin.size <= full.size);
  }
}

TEST_CASE("late contact cannot relay the message") {
  // gamma = 1: d = 1/3, ell = 1/3. The relay b acquires mid-life at t = 0.6
  // from the approaching source; its onetime neighbor c was only in range
  // during [0, 0.05] and must stay unmarked.
  const ModelParams p = derive_params(1.0, 0.25);
  const double gap = 1.0 / 3.0 + 0.4;

  FrozenWorld world(p);
  world.add_source(0.5, 0.5, 0.0, 1.0);               // moves up
  world.add(0.0, 0.5, 0.5 + gap, 0.0, -1.0);          // b moves down
  world.add(0.0, 0.5, 0.5 + gap + 0.3, 0.0, 1.0);     // c escapes up
  world.freeze();

  NodeId c_id{};
  for (const Cylinder& cyl : world.all())
    if (cyl.p0.y() > 0.5 + gap + 0.1) c_id = cyl.id;

  Trace trace;
  const ClusterSample sample = grow_cluster(world, 1 << 10, &trace);
  CHECK(sample.size == 2);
  REQUIRE(trace.size() == 2);
  CHECK(trace[1].t_acquire == doctest::Approx(0.6).epsilon(1e-9));
  for (const TraceEntry& e : trace) CHECK(e.id != c_id);

  // Inverse scenario: if c followed b instead of escaping, it gets marked.
  FrozenWorld world2(p);
  world2.add_source(0.5, 0.5, 0.0, 1.0);
  world2.add(0.0, 0.5, 0.5 + gap, 0.0, -1.0);
  world2.add(0.0, 0.5, 0.5 + gap + 0.3, 0.0, -1.0);  // constant 0.3 < d gap
  world2.freeze();
  const ClusterSample follow = grow_cluster(world2, 1 << 10);
  CHECK(follow.size == 3);
}

TEST_CASE("clamped first contact marks at the neighbor arrival") {
  const ModelParams p = derive_params(0.0, 0.3);
  FrozenWorld world(p);
  world.add_source();
  world.add(0.4, 0.6, 0.5, 1.0, 0.0);  // stationary, within range, arrives later
  world.freeze();
  Trace trace;
  grow_cluster(world, 16, &trace);
  REQUIRE(trace.size() == 2);
  CHECK(trace[1].t_acquire == 0.4);
}

TEST_CASE("size cap censors and halts growth") {
  const ModelParams p = derive_params(0.0, 0.3);
  FrozenWorld world(p);
  world.add_source();
  for (int i = 1; i <= 9; ++i)
    world.add(0.05 * i, 0.5 + 0.01 * i, 0.5, 1.0, 0.0);  // all mutually in range
  world.freeze();

  const ClusterSample full = grow_cluster(world, 1 << 10);
  CHECK(full.size == 10);
  CHECK_FALSE(full.censored);
  CHECK(full.extinction_time > 0.0);

  const ClusterSample capped = grow_cluster(world, 4);
  CHECK(capped.size == 4);
  CHECK(capped.censored);

  const ClusterSample lone = grow_cluster(world, 1);
  CHECK(lone.size == 1);
  CHECK(lone.censored);

  CHECK_THROWS_AS(grow_cluster(world, 0), std::invalid_argument);
}

TEST_CASE("population stays within the growth-driven bound") {
  const ModelParams p = derive_params(0.0, 0.379);
  FieldWorld world(p, 4242);
  const ClusterSample s = grow_cluster(world, 4096);
  CHECK(world.populated_box_count() <= 27 * s.size);
}

TEST_SUITE_END();
