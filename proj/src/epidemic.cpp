#include "dtnperc/epidemic.hpp"

namespace dtnperc {

ClusterSample sample_cluster(const ModelParams& params, std::uint64_t seed,
                             std::uint64_t s_max) {
  FieldWorld world(params, seed);
  ClusterSample out = grow_cluster(world, s_max);
  out.seed = seed;
  return out;
}

ClusterSample sample_cluster(const ModelParams& params, std::uint64_t seed,
                             std::uint64_t s_max, const Thinning& thinning) {
  FieldWorld world(params, seed, thinning);
  ClusterSample out = grow_cluster(world, s_max);
  out.seed = seed;
  return out;
}

Trace acquisition_trace(const ModelParams& params, std::uint64_t seed,
                        std::uint64_t s_max) {
  FieldWorld world(params, seed);
  Trace trace;
  grow_cluster(world, s_max, &trace);
  return trace;
}

}  // namespace dtnperc
