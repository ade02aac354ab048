#include "dtnperc/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "dtnperc/fluid.hpp"

namespace dtnperc::io {

using nlohmann::json;

namespace {

constexpr const char* kSamplesSchema = "# dtnperc-schema: samples v1";
constexpr const char* kCdfSchema = "# dtnperc-schema: cdf v1";
constexpr const char* kBinsSchema = "# dtnperc-schema: bins v1";
constexpr const char* kTailSchema = "# dtnperc-schema: tailstat v1";
constexpr const char* kTraceSchema = "# dtnperc-schema: trace v1";
constexpr const char* kCurveSchema = "# dtnperc-schema: threshold-curve v1";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return in;
}

std::uint64_t parse_u64(const std::string& text) {
  std::size_t pos = 0;
  const unsigned long long v = std::stoull(text, &pos);
  if (pos != text.size()) throw std::invalid_argument("trailing garbage in integer");
  return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, sep)) out.push_back(field);
  return out;
}

// "# key = value" metadata comment, or empty key when the line is other text.
std::pair<std::string, std::string> parse_meta(const std::string& line) {
  if (line.rfind("# ", 0) != 0) return {};
  const auto eq = line.find(" = ");
  if (eq == std::string::npos) return {};
  return {line.substr(2, eq - 2), line.substr(eq + 3)};
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& text) {
  std::size_t pos = 0;
  const double v = std::stod(text, &pos);
  if (pos != text.size()) throw std::invalid_argument("trailing garbage in number");
  return v;
}

struct SamplesWriter::Impl {
  std::ofstream out;
};

SamplesWriter::SamplesWriter(const std::filesystem::path& path, const SamplesFile& meta)
    : impl_(new Impl{open_out(path)}), gamma_(meta.gamma), eta_(meta.eta) {
  auto& out = impl_->out;
  out << kSamplesSchema << '\n';
  out << "# gamma = " << format_double(meta.gamma) << '\n';
  out << "# eta = " << format_double(meta.eta) << '\n';
  out << "# s_max = " << meta.s_max << '\n';
  out << "# master_seed = " << meta.master_seed << '\n';
  out << "# point_index = " << meta.point_index << '\n';
  out << "seed,gamma,eta,size,censored\n";
  for (const ClusterSample& s : meta.samples) append(s);
}

SamplesWriter::~SamplesWriter() = default;

void SamplesWriter::append(const ClusterSample& sample) {
  impl_->out << sample.seed << ',' << format_double(gamma_) << ','
             << format_double(eta_) << ',' << sample.size << ','
             << (sample.censored ? 1 : 0) << '\n';
}

void SamplesWriter::flush() { impl_->out.flush(); }

SamplesFile read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  SamplesFile file;
  std::string line;
  if (!std::getline(in, line) || line != kSamplesSchema)
    throw std::runtime_error(path.string() + ": not a samples v1 file");

  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto [key, value] = parse_meta(line);
      if (key == "gamma") file.gamma = parse_double(value);
      else if (key == "eta") file.eta = parse_double(value);
      else if (key == "s_max") file.s_max = parse_u64(value);
      else if (key == "master_seed") file.master_seed = parse_u64(value);
      else if (key == "point_index") file.point_index = parse_u64(value);
      continue;
    }
    if (!header_seen) {
      if (line != "seed,gamma,eta,size,censored")
        throw std::runtime_error(path.string() + ": unexpected column header");
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != 5) break;  // truncated final line: resumable prefix
    ClusterSample s;
    try {
      s.seed = parse_u64(fields[0]);
      s.size = parse_u64(fields[3]);
      s.censored = parse_u64(fields[4]) != 0;
    } catch (const std::exception&) {
      break;
    }
    file.samples.push_back(s);
  }
  return file;
}

void write_cdf_csv(const std::filesystem::path& path, const EmpiricalCdf& cdf,
                   std::uint64_t n_samples) {
  std::ofstream out = open_out(path);
  out << kCdfSchema << '\n';
  out << "# n_samples = " << n_samples << '\n';
  out << "# s_max = " << cdf.s_max << '\n';
  out << "# censored_atom_at_s_max = " << format_double(cdf.censored_atom) << '\n';
  out << "s,p_below\n";
  for (const auto& p : cdf.points)
    out << p.s << ',' << format_double(p.p_below) << '\n';
}

void write_bins_csv(const std::filesystem::path& path, const BinTable& bins) {
  std::ofstream out = open_out(path);
  out << kBinsSchema << '\n';
  out << "# n_samples = " << bins.n_samples << '\n';
  out << "# censored = " << bins.censored_count << '\n';
  out << "# s_max = " << bins.s_max << '\n';
  out << "k,s,b_k,fraction\n";
  for (std::size_t k = 0; k < bins.counts.size(); ++k) {
    const double frac = static_cast<double>(bins.counts[k]) /
                        static_cast<double>(bins.n_samples);
    out << k << ',' << (std::uint64_t{1} << k) << ',' << bins.counts[k] << ','
        << format_double(frac) << '\n';
  }
}

void write_tailstat_csv(const std::filesystem::path& path,
                        std::span<const TailPoint> stat,
                        const UniversalExponents& exps) {
  std::ofstream out = open_out(path);
  out << kTailSchema << '\n';
  out << "# tau = " << format_double(exps.tau) << '\n';
  out << "# sigma = " << format_double(exps.sigma) << '\n';
  out << "k,s,x,y\n";
  for (const TailPoint& p : stat)
    out << p.k << ',' << format_double(p.s) << ',' << format_double(p.x) << ','
        << format_double(p.y) << '\n';
}

void write_trace_csv(const std::filesystem::path& path, const Trace& trace) {
  std::ofstream out = open_out(path);
  out << kTraceSchema << '\n';
  out << "i,j,k,index,t_acquire\n";
  for (const TraceEntry& e : trace)
    out << e.id.i << ',' << e.id.j << ',' << e.id.k << ',' << e.id.index << ','
        << format_double(e.t_acquire) << '\n';
}

std::string cluster_sample_json(const ClusterSample& sample, double gamma,
                                double eta, std::uint64_t s_max) {
  json doc;
  doc["schema"] = "dtnperc-sample v1";
  doc["gamma"] = gamma;
  doc["eta"] = eta;
  doc["s_max"] = s_max;
  doc["seed"] = sample.seed;
  doc["size"] = sample.size;
  doc["censored"] = sample.censored;
  if (sample.censored)
    doc["extinction_time"] = nullptr;
  else
    doc["extinction_time"] = sample.extinction_time;
  return doc.dump(2) + "\n";
}

std::string estimate_result_json(const EstimateResult& result) {
  json doc;
  doc["schema"] = "dtnperc-estimate v1";
  doc["gamma"] = result.gamma;
  doc["eta_lo"] = result.eta_lo;
  doc["eta_hi"] = result.eta_hi;
  doc["eta_c_hat"] = result.eta_c_hat;
  doc["nu_c_hat"] = 4.0 * result.eta_c_hat;
  doc["stopped_on_indeterminate"] = result.stopped_on_indeterminate;
  json probes = json::array();
  for (const EstimateProbe& p : result.probes) {
    json jp;
    jp["eta"] = p.eta;
    jp["n_samples"] = p.n_samples;
    jp["slope"] = p.slope;  // non-finite dumps as null
    jp["slope_error"] = p.slope_error;
    jp["verdict"] = p.verdict;
    jp["strength"] = p.strength;
    jp["role"] = p.role;
    probes.push_back(jp);
  }
  doc["probes"] = probes;
  return doc.dump(2) + "\n";
}

EstimateResult read_estimate_json(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  json doc = json::parse(in);
  if (doc.value("schema", "") != "dtnperc-estimate v1")
    throw std::runtime_error(path.string() + ": not an estimate v1 document");
  EstimateResult r;
  r.gamma = doc.at("gamma").get<double>();
  r.eta_lo = doc.at("eta_lo").get<double>();
  r.eta_hi = doc.at("eta_hi").get<double>();
  r.eta_c_hat = doc.at("eta_c_hat").get<double>();
  r.stopped_on_indeterminate = doc.value("stopped_on_indeterminate", false);
  for (const json& jp : doc.value("probes", json::array())) {
    EstimateProbe p;
    p.eta = jp.at("eta").get<double>();
    p.n_samples = jp.at("n_samples").get<std::uint64_t>();
    p.slope = jp.at("slope").is_null() ? std::nan("") : jp.at("slope").get<double>();
    p.slope_error = jp.at("slope_error").is_null()
                        ? std::nan("")
                        : jp.at("slope_error").get<double>();
    p.verdict = jp.at("verdict").get<int>();
    p.strength = jp.at("strength").get<double>();
    p.role = jp.value("role", "");
    r.probes.push_back(p);
  }
  return r;
}

std::vector<ThresholdPoint> read_threshold_csv(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<ThresholdPoint> points;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (fields.size() < 2) continue;
    ThresholdPoint p;
    try {
      p.gamma = parse_double(fields[0]);
      p.eta_c = parse_double(fields[1]);
    } catch (const std::exception&) {
      continue;  // header row or stray text
    }
    points.push_back(p);
  }
  if (points.empty())
    throw std::runtime_error(path.string() + ": no (gamma, eta_c) rows found");
  return points;
}

void write_threshold_curve_csv(std::ostream& out, std::vector<ThresholdPoint> points) {
  std::sort(points.begin(), points.end(),
            [](const ThresholdPoint& a, const ThresholdPoint& b) {
              return a.gamma < b.gamma;
            });
  out << kCurveSchema << '\n';
  out << "gamma,eta_c,nu_c,nu_c_fluid\n";
  for (const ThresholdPoint& p : points) {
    out << format_double(p.gamma) << ',' << format_double(p.eta_c) << ','
        << format_double(4.0 * p.eta_c) << ',';
    if (p.gamma > 0.0) out << format_double(fluid_bound_nu(p.gamma));
    out << '\n';
  }
}

void write_threshold_curve_csv(const std::filesystem::path& path,
                               std::vector<ThresholdPoint> points) {
  std::ofstream out = open_out(path);
  write_threshold_curve_csv(out, std::move(points));
}

}  // namespace dtnperc::io
