#include "dtnperc/campaign.hpp"

#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "dtnperc/io.hpp"
#include "dtnperc/rng.hpp"

namespace dtnperc {

namespace {

constexpr std::uint64_t kCampaignSalt = 0xCA;
constexpr std::uint64_t kEstimateSalt = 0xE5;

// Checkpoint granularity: a block is computed in parallel, then its rows are
// flushed in index order before the next block starts.
constexpr std::uint64_t kBlockSize = 256;

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void compute_range(const ModelParams& params, std::uint64_t s_max,
                   const std::function<std::uint64_t(std::uint64_t)>& seed_of,
                   std::vector<ClusterSample>& out, std::uint64_t lo,
                   std::uint64_t hi, int workers) {
  workers = resolve_workers(workers);
  if (workers <= 1 || hi - lo <= 1) {
    for (std::uint64_t i = lo; i < hi; ++i)
      out[i] = sample_cluster(params, seed_of(i), s_max);
    return;
  }
  std::atomic<std::uint64_t> next{lo};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::uint64_t i = next.fetch_add(1);
        if (i >= hi) return;
        out[i] = sample_cluster(params, seed_of(i), s_max);
      }
    });
  for (std::thread& t : pool) t.join();
}

}  // namespace

CampaignConfig parse_campaign_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse_campaign_config(in, path.string());
}

CampaignConfig parse_campaign_config(std::istream& in, const std::string& name) {
  CampaignConfig cfg;
  std::string line;
  int lineno = 0;
  const auto fail = [&](const std::string& what) {
    throw ConfigError(name + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    try {
      if (key == "gamma") {
        cfg.gamma = io::parse_double(value);
      } else if (key == "eta") {
        cfg.etas.clear();
        std::size_t pos = 0;
        while (pos <= value.size()) {
          const std::size_t comma = value.find(',', pos);
          const std::string item =
              trim(value.substr(pos, comma == std::string::npos ? std::string::npos
                                                                : comma - pos));
          if (!item.empty()) cfg.etas.push_back(io::parse_double(item));
          if (comma == std::string::npos) break;
          pos = comma + 1;
        }
      } else if (key == "samples") {
        cfg.samples = std::stoull(value);
      } else if (key == "smax") {
        cfg.s_max = std::stoull(value);
      } else if (key == "seed") {
        cfg.master_seed = std::stoull(value);
      } else if (key == "workers") {
        cfg.workers = std::stoi(value);
      } else if (key == "outdir") {
        cfg.outdir = value;
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      fail("bad value for '" + key + "': " + e.what());
    }
  }
  return cfg;
}

std::uint64_t sample_seed(std::uint64_t master_seed, std::uint64_t point_index,
                          std::uint64_t sample_index) {
  return derive_key({master_seed, point_index, sample_index, kCampaignSalt});
}

std::vector<ClusterSample> parallel_samples(
    const ModelParams& params, std::uint64_t s_max,
    const std::function<std::uint64_t(std::uint64_t)>& seed_of,
    std::uint64_t count, int workers) {
  std::vector<ClusterSample> out(count);
  compute_range(params, s_max, seed_of, out, 0, count, workers);
  return out;
}

PointSampler make_point_sampler(double gamma, std::uint64_t s_max,
                                std::uint64_t master_seed, int workers) {
  return [gamma, s_max, master_seed, workers](double eta, std::uint64_t count,
                                              std::uint64_t salt) {
    const ModelParams params = derive_params(gamma, eta);
    const auto seed_of = [master_seed, salt](std::uint64_t i) {
      return derive_key({master_seed, salt, i, kEstimateSalt});
    };
    return parallel_samples(params, s_max, seed_of, count, workers);
  };
}

std::filesystem::path resolve_outdir(const std::string& configured) {
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("DTNPERC_OUTDIR"); env != nullptr && *env != '\0')
    return env;
  return ".";
}

CampaignResult run_campaign(const CampaignConfig& cfg) {
  if (cfg.etas.empty()) throw std::invalid_argument("run_campaign: empty eta list");
  if (cfg.samples < 1) throw std::invalid_argument("run_campaign: samples must be >= 1");
  if (cfg.s_max < 1) throw std::invalid_argument("run_campaign: s_max must be >= 1");
  for (std::size_t a = 0; a < cfg.etas.size(); ++a)
    for (std::size_t b = a + 1; b < cfg.etas.size(); ++b)
      if (cfg.etas[a] == cfg.etas[b])
        throw std::invalid_argument("run_campaign: duplicate eta in the point list");

  const std::filesystem::path outdir = resolve_outdir(cfg.outdir);
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec)
    throw std::runtime_error("run_campaign: cannot create output directory " +
                             outdir.string() + ": " + ec.message());

  // Hash-derived seeds collide only by accident; fail loudly if they ever do.
  {
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(cfg.etas.size() * cfg.samples);
    for (std::uint64_t p = 0; p < cfg.etas.size(); ++p)
      for (std::uint64_t i = 0; i < cfg.samples; ++i)
        if (!seen.insert(sample_seed(cfg.master_seed, p, i)).second)
          throw std::runtime_error("run_campaign: seed collision detected");
  }

  CampaignResult result;
  for (std::uint64_t p = 0; p < cfg.etas.size(); ++p) {
    const double eta = cfg.etas[p];
    const ModelParams params = derive_params(cfg.gamma, eta);

    char name[32];
    std::snprintf(name, sizeof name, "point%02llu.samples.csv",
                  static_cast<unsigned long long>(p));
    const std::filesystem::path records = outdir / name;

    PointResult point;
    point.gamma = cfg.gamma;
    point.eta = eta;
    point.records_path = records;
    point.samples.resize(cfg.samples);

    // Recover any completed prefix from a previous run of the same campaign.
    std::uint64_t done = 0;
    if (std::filesystem::exists(records)) {
      const io::SamplesFile prior = io::read_samples_csv(records);
      if (prior.gamma != cfg.gamma || prior.eta != eta ||
          prior.s_max != cfg.s_max || prior.master_seed != cfg.master_seed ||
          prior.point_index != p)
        throw std::runtime_error("run_campaign: checkpoint " + records.string() +
                                 " does not match this campaign");
      done = std::min<std::uint64_t>(prior.samples.size(), cfg.samples);
      for (std::uint64_t i = 0; i < done; ++i) {
        if (prior.samples[i].seed != sample_seed(cfg.master_seed, p, i))
          throw std::runtime_error("run_campaign: checkpoint " + records.string() +
                                   " has unexpected seeds");
        point.samples[i] = prior.samples[i];
      }
    }
    point.resumed_samples = done;

    io::SamplesFile meta;
    meta.gamma = cfg.gamma;
    meta.eta = eta;
    meta.s_max = cfg.s_max;
    meta.master_seed = cfg.master_seed;
    meta.point_index = p;
    meta.samples.assign(point.samples.begin(),
                        point.samples.begin() + static_cast<std::ptrdiff_t>(done));
    io::SamplesWriter writer(records, meta);
    writer.flush();

    const auto seed_of = [&](std::uint64_t i) {
      return sample_seed(cfg.master_seed, p, i);
    };
    for (std::uint64_t lo = done; lo < cfg.samples; lo += kBlockSize) {
      const std::uint64_t hi = std::min(cfg.samples, lo + kBlockSize);
      compute_range(params, cfg.s_max, seed_of, point.samples, lo, hi, cfg.workers);
      for (std::uint64_t i = lo; i < hi; ++i) writer.append(point.samples[i]);
      writer.flush();
    }

    point.bins = bin_sizes(point.samples, cfg.s_max);
    point.strength = strength_estimate(point.samples);
    double total = 0.0;
    for (const ClusterSample& s : point.samples)
      total += static_cast<double>(s.size);
    point.mean_size = total / static_cast<double>(cfg.samples);

    result.emplace(std::make_pair(cfg.gamma, eta), std::move(point));
  }
  return result;
}

}  // namespace dtnperc
