#include "granular/io.hpp"

#include "granular/config.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <span>
#include <sstream>

namespace granular {

namespace {

using nlohmann::json;

// nlohmann writes non-finite numbers as null; keep them readable instead
json number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json numbers(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

std::string csv_number(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "binary output assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

template <typename T>
bool get_le(std::istream& in, T& value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof value));
}

}  // namespace

std::string content_hash(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(blob.data(), blob.size(), digest, &length, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  std::ostringstream os;
  for (unsigned char b : std::span(digest, length)) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(b);
  return os.str();
}

std::string short_hash(const SimConfig& config) { return content_hash(serialize_config(config)).substr(0, 12); }

json to_json(const ConditionReport& r) {
  json constants = json::object();
  for (const auto& [k, v] : r.fitted_constants) constants[k] = number(v);
  return {{"condition_name", r.condition_name},
          {"fitted_constants", constants},
          {"worst_violation", number(r.worst_violation)},
          {"probe_count", r.probe_count},
          {"probe_extent", number(r.probe_extent)}};
}

json to_json(const ChaosScanResult& r) {
  return {{"N_values", r.n_values},
          {"errors", numbers(r.errors)},
          {"stderr", numbers(r.std_errors)},
          {"argmax_times", numbers(r.argmax_times)},
          {"dynamic_errors", numbers(r.dynamic_errors)},
          {"fitted_slope", number(r.fitted_slope)},
          {"fitted_intercept", number(r.fitted_intercept)},
          {"predicted_slope", number(r.predicted_slope)},
          {"fitted_K", number(r.fitted_K)},
          {"reference_size_M", r.m_reference},
          {"runs_per_N", r.runs_per_n},
          {"doubling_runs", r.doubling_runs},
          {"proxy_bias", number(r.proxy_bias)},
          {"proxy_warning", r.proxy_warning},
          {"decreasing", r.decreasing},
          {"warnings", r.warnings}};
}

json to_json(const DecayResult& r) {
  return {{"times", numbers(r.times)},
          {"xi", numbers(r.xi)},
          {"xi_stderr", numbers(r.xi_std_error)},
          {"envelope_poly", numbers(r.envelope_poly)},
          {"envelope_exp", numbers(r.envelope_exp)},
          {"A", number(r.A)},
          {"alpha", number(r.alpha)},
          {"A_alpha", number(r.A_alpha)},
          {"B_alpha", number(r.B_alpha)},
          {"t1_bound", number(r.t1_bound)},
          {"t1_empirical", number(r.t1_empirical)},
          {"monotonicity_defect", number(r.monotonicity_defect)},
          {"monotonicity_tolerance", number(r.monotonicity_tolerance)},
          {"monotone", r.monotone},
          {"envelope_holds", r.envelope_holds},
          {"first_violation_time", number(r.first_violation_time)},
          {"tail_slope", number(r.tail_slope)},
          {"tail_window", {number(r.tail_window_lo), number(r.tail_window_hi)}},
          {"tail_points", r.tail_points},
          {"exp_rate", number(r.exp_rate)},
          {"exp_window", {number(r.exp_window_lo), number(r.exp_window_hi)}},
          {"exp_points", r.exp_points},
          {"fit_skipped", r.fit_skipped},
          {"runs", r.runs},
          {"dt", number(r.dt)}};
}

json to_json(const ConcentrationResult& r) {
  std::vector<bool> reliable(r.reliable.begin(), r.reliable.end());
  return {{"N", r.n},
          {"T", number(r.T)},
          {"trials", r.trials},
          {"lipschitz_f", std::string(to_string(r.function))},
          {"clamp_radius", number(r.clamp_radius)},
          {"r_grid", numbers(r.r_grid)},
          {"empirical_tail", numbers(r.empirical_tail)},
          {"tail_stderr", numbers(r.tail_std_error)},
          {"reliable", reliable},
          {"bound_fitted", numbers(r.bound_fitted)},
          {"bound_pipeline", numbers(r.bound_pipeline)},
          {"shifted_tail", numbers(r.shifted_tail)},
          {"reference", number(r.reference)},
          {"reference_stderr", number(r.reference_std_error)},
          {"c_fitted", number(r.c_fitted)},
          {"c_pipeline_total", number(r.c_pipeline_total)},
          {"c_pipeline_per_particle", number(r.c_pipeline_per_particle)},
          {"pipeline_delta", number(r.pipeline_delta)},
          {"pipeline_moment_bound", number(r.pipeline_moment_bound)},
          {"pipeline_constants",
           {{"lambda", number(r.pipeline_constants.lambda)},
            {"C", number(r.pipeline_constants.C)},
            {"diffusion_bound_A", number(r.pipeline_constants.diffusion_bound_A)},
            {"dim", number(r.pipeline_constants.dim)}}},
          {"stationary_reference", number(r.stationary_reference)},
          {"stationary_stderr", number(r.stationary_std_error)},
          {"offsets", {{"chaos", number(r.chaos_offset)}, {"decay", number(r.decay_offset)}}},
          {"pipeline_coverage", number(r.pipeline_coverage)},
          {"fitted_holds", r.fitted_holds},
          {"pipeline_holds", r.pipeline_holds},
          {"tail_monotone", r.tail_monotone}};
}

json to_json(const ExpMomentSeries& r) {
  json est = json::array();
  for (const auto& e : r.estimates)
    est.push_back({{"value", number(e.value)},
                   {"stderr", number(e.std_error)},
                   {"mean", number(e.mean)},
                   {"mean_stderr", number(e.mean_std_error)},
                   {"max_share", number(e.max_share)},
                   {"heavy_tail", e.heavy_tail},
                   {"batches", e.batches}});
  return {{"times", numbers(r.times)},
          {"estimates", est},
          {"bound", numbers(r.bound)},
          {"delta", number(r.delta)},
          {"lambda", number(r.constants.lambda)},
          {"C", number(r.constants.C)},
          {"diffusion_bound_A", number(r.constants.diffusion_bound_A)},
          {"samples", r.samples},
          {"per_particle", r.per_particle}};
}

json to_json(const MomentTrendResult& r) {
  return {{"times", numbers(r.times)},
          {"second_moment", numbers(r.second_moment)},
          {"second_moment_stderr", numbers(r.second_moment_std_error)},
          {"run_slopes", numbers(r.run_slopes)},
          {"window", {number(r.window_lo), number(r.window_hi)}},
          {"trend",
           {{"mean", number(r.trend.mean)},
            {"stderr", number(r.trend.std_error)},
            {"t", number(r.trend.t)},
            {"critical", number(r.trend.critical)},
            {"accepted", r.trend.accepted}}}};
}

std::string chaos_csv(const ChaosScanResult& r) {
  // one row per N; "time" carries the maximising snapshot time
  std::ostringstream os;
  os << "time,value,stderr,method,p,N,predicted_slope\n";
  for (std::size_t k = 0; k < r.n_values.size(); ++k)
    os << csv_number(r.argmax_times[k]) << ',' << csv_number(r.errors[k]) << ',' << csv_number(r.std_errors[k])
       << ",coupled-upper,2," << r.n_values[k] << ',' << csv_number(r.predicted_slope) << '\n';
  return os.str();
}

std::string decay_csv(const DecayResult& r) {
  std::ostringstream os;
  os << "time,value,stderr,method,p,envelope_poly,envelope_exp\n";
  for (std::size_t k = 0; k < r.times.size(); ++k)
    os << csv_number(r.times[k]) << ',' << csv_number(r.xi[k]) << ',' << csv_number(r.xi_std_error[k])
       << ",coupled-upper,2," << csv_number(r.envelope_poly[k]) << ',' << csv_number(r.envelope_exp[k]) << '\n';
  return os.str();
}

std::string concentration_csv(const ConcentrationResult& r) {
  // the abscissa is r; "time" is the fixed observation time T
  std::ostringstream os;
  os << "time,value,stderr,method,p,r,bound_fitted,bound_pipeline,shifted_tail,reliable\n";
  for (std::size_t k = 0; k < r.r_grid.size(); ++k)
    os << csv_number(r.T) << ',' << csv_number(r.empirical_tail[k]) << ',' << csv_number(r.tail_std_error[k])
       << ",empirical-tail,1," << csv_number(r.r_grid[k]) << ',' << csv_number(r.bound_fitted[k]) << ','
       << csv_number(r.bound_pipeline[k]) << ',' << csv_number(r.shifted_tail[k]) << ','
       << (r.reliable[k] ? "true" : "false") << '\n';
  return os.str();
}

void write_snapshot_csv_row(std::ostream& out, const Snapshot& s) {
  const Observables& o = s.observables;
  out << csv_number(s.ensemble.time) << ',' << csv_number(o.second_moment) << ",,second-moment,2," << s.run << ','
      << s.index << ',' << csv_number(o.pairwise_second_moment) << ',' << csv_number(o.center_of_mass) << ','
      << csv_number(o.max_norm) << '\n';
}

void write_snapshot_jsonl(std::ostream& out, const Snapshot& s) {
  const Positions& x = s.ensemble.positions;
  json rows = json::array();
  for (Index i = 0; i < x.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < x.cols(); ++k) row.push_back(x(i, k));
    rows.push_back(std::move(row));
  }
  const json line = {{"run", s.run},
                     {"index", s.index},
                     {"time", s.ensemble.time},
                     {"steps", s.ensemble.steps_taken},
                     {"centered", s.ensemble.centered},
                     {"second_moment", s.observables.second_moment},
                     {"pairwise_second_moment", s.observables.pairwise_second_moment},
                     {"center_of_mass", s.observables.center_of_mass},
                     {"max_norm", s.observables.max_norm},
                     {"positions", rows}};
  out << line.dump() << '\n';
}

void write_snapshot_bin(std::ostream& out, const Snapshot& s) {
  const Positions& x = s.ensemble.positions;
  out.write("GMPE", 4);
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.cols()));
  put_le<double>(out, s.ensemble.time);
  out.write(reinterpret_cast<const char*>(x.data()), static_cast<std::streamsize>(sizeof(double) * x.size()));
}

bool read_snapshot_bin(std::istream& in, BinRecord& record) {
  char magic[4];
  if (!in.read(magic, 4)) return false;
  if (std::memcmp(magic, "GMPE", 4) != 0) throw std::runtime_error("bad snapshot magic");
  std::uint64_t n = 0, d = 0;
  if (!get_le(in, record.version) || !get_le(in, n) || !get_le(in, d) || !get_le(in, record.time))
    throw std::runtime_error("truncated snapshot header");
  record.positions.resize(static_cast<Index>(n), static_cast<Index>(d));
  if (!in.read(reinterpret_cast<char*>(record.positions.data()), static_cast<std::streamsize>(sizeof(double) * n * d)))
    throw std::runtime_error("truncated snapshot body");
  return true;
}

json summary_json(const std::string& experiment, const SimConfig& config, const json& flags, const json& result) {
  const std::string text = serialize_config(config);
  return {{"experiment", experiment},
          {"config", text},
          {"config_hash", content_hash(text)},
          {"flags", flags},
          {"passed", summary_passed({{"flags", flags}})},
          {"result", result}};
}

std::vector<std::string> verify_summary(const json& summary) {
  std::vector<std::string> problems;
  if (!summary.contains("config") || !summary["config"].is_string()) return {"summary has no config echo"};
  if (!summary.contains("config_hash") || !summary["config_hash"].is_string()) return {"summary has no config hash"};
  const std::string text = summary["config"].get<std::string>();
  if (content_hash(text) != summary["config_hash"].get<std::string>())
    problems.push_back("config hash does not match the config echo");
  try {
    const SimConfig c = parse_config(text, ParseOptions{false});
    if (serialize_config(c) != text) problems.push_back("config echo is not in canonical form");
  } catch (const ConfigError& e) {
    problems.push_back(std::string("config echo does not parse: ") + e.what());
  }
  if (!summary.contains("flags") || !summary["flags"].is_object()) problems.push_back("summary has no flags");
  return problems;
}

bool summary_passed(const json& summary) {
  if (!summary.contains("flags")) return false;
  for (const auto& [name, value] : summary["flags"].items())
    if (!value.is_boolean() || !value.get<bool>()) return false;
  return true;
}

std::filesystem::path write_output(const std::filesystem::path& directory, const std::string& name,
                                   const std::string& contents) {
  const std::filesystem::path file(name);
  if (name.empty() || file.has_parent_path() || file.filename() != file || name == "." || name == "..")
    throw std::invalid_argument("output name must be a bare file name: '" + name + "'");
  std::filesystem::create_directories(directory);
  const auto path = directory / file;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
  return path;
}

}  // namespace granular
