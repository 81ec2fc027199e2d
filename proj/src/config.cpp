#include "granular/config.hpp"

#include "granular/conditions.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace granular {

namespace {

template <typename Enum, std::size_t K>
Enum enum_from(std::string_view name, const Enum (&all)[K], const char* what) {
  for (Enum e : all)
    if (to_string(e) == name) return e;
  std::string valid;
  for (Enum e : all) valid += (valid.empty() ? "" : ", ") + std::string(to_string(e));
  throw std::invalid_argument("unknown " + std::string(what) + " '" + std::string(name) + "' (valid: " + valid + ")");
}

constexpr Mode kModes[] = {Mode::Raw, Mode::Projected};
constexpr OutputFormat kFormats[] = {OutputFormat::Csv, OutputFormat::Jsonl, OutputFormat::Bin};
constexpr Coupling kCouplings[] = {Coupling::Independent, Coupling::Comonotone, Coupling::Optimal};
constexpr TestFunction kFunctions[] = {TestFunction::ClampedCoordinate, TestFunction::ClampedNorm,
                                       TestFunction::SinCoordinate, TestFunction::Constant};

const std::vector<std::pair<std::string, std::vector<std::string>>>& schema() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>> s = {
      {"system", {"N", "dim", "mode", "seed", "runs"}},
      {"potential.V",
       {"kind", "stiffness", "exponent", "amplitude", "radius", "spacing", "profile", "m", "lambda", "C", "A", "alpha"}},
      {"potential.W",
       {"kind", "stiffness", "exponent", "amplitude", "radius", "spacing", "profile", "m", "lambda", "C", "A", "alpha"}},
      {"dynamics", {"scheme", "dt", "drift_cap", "dt_min", "horizon"}},
      {"observe", {"times", "stride", "count"}},
      {"initial", {"kind", "mean", "variance", "half_width", "point_a", "point_b", "weight", "path", "center"}},
      {"initial.b", {"kind", "mean", "variance", "half_width", "point_a", "point_b", "weight", "path", "center"}},
      {"check", {"probes", "extent", "seed", "eps"}},
      {"output", {"directory", "formats"}},
      {"experiment",
       {"n_values", "m_reference", "runs_per_n", "coupling", "function", "clamp", "T", "r_grid", "trials", "chaos_K",
        "delta"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string nearest(std::string_view word, const std::vector<std::string>& candidates) {
  std::string best;
  std::size_t best_d = std::string::npos;
  for (const auto& c : candidates) {
    const std::size_t d = edit_distance(word, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

// Typed access to one section; conversion failures become error messages.
class Reader {
 public:
  Reader(const Section* section, std::string name, std::vector<std::string>& errors)
      : section_(section), name_(std::move(name)), errors_(errors) {}

  bool has(const std::string& key) const { return section_ && section_->count(key); }

  double real(const std::string& key, double fallback) {
    if (!has(key)) return fallback;
    return parse_real(key, section_->at(key).value, fallback);
  }

  template <typename Int>
  Int integer(const std::string& key, Int fallback) {
    if (!has(key)) return fallback;
    const std::string& v = section_->at(key).value;
    Int out{};
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      fail(key, "expected an integer, got '" + v + "'");
      return fallback;
    }
    return out;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    return has(key) ? section_->at(key).value : fallback;
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string& v = section_->at(key).value;
    if (v == "true") return true;
    if (v == "false") return false;
    fail(key, "expected true or false, got '" + v + "'");
    return fallback;
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) {
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const auto& item : items(section_->at(key).value)) out.push_back(parse_real(key, item, 0.0));
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) {
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (const auto& item : items(section_->at(key).value)) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size()) fail(key, "expected an integer, got '" + item + "'");
      out.push_back(v);
    }
    return out;
  }

  std::vector<std::string> words(const std::string& key, std::vector<std::string> fallback) {
    return has(key) ? items(section_->at(key).value) : fallback;
  }

  template <typename Fn>
  auto convert(const std::string& key, const std::string& value, Fn&& fn, decltype(fn(value)) fallback) {
    try {
      return fn(value);
    } catch (const std::invalid_argument& e) {
      fail(key, e.what());
      return fallback;
    }
  }

  void fail(const std::string& key, const std::string& message) {
    std::ostringstream os;
    os << "[" << name_ << "] " << key;
    if (has(key)) os << " (line " << section_->at(key).line << ")";
    os << ": " << message;
    errors_.push_back(os.str());
  }

 private:
  static std::vector<std::string> items(const std::string& v) {
    std::vector<std::string> out;
    if (trim(v).empty()) return out;
    std::string item;
    std::istringstream is(v);
    while (std::getline(is, item, ',')) out.push_back(trim(item));
    return out;
  }

  double parse_real(const std::string& key, const std::string& v, double fallback) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || std::isnan(out)) {
      fail(key, "expected a number, got '" + v + "'");
      return fallback;
    }
    return out;
  }

  const Section* section_;
  std::string name_;
  std::vector<std::string>& errors_;
};

Potential read_potential(Reader r) {
  const std::string kind_name = r.text("kind", "zero");
  const PotentialKind kind = r.convert("kind", kind_name, potential_kind_from_string, PotentialKind::Zero);
  Potential p;
  try {
    switch (kind) {
      case PotentialKind::Zero: p = Potential::zero(); break;
      case PotentialKind::Quadratic: p = Potential::quadratic(r.real("stiffness", 1.0)); break;
      case PotentialKind::PowerLaw: p = Potential::power_law(r.real("exponent", 4.0)); break;
      case PotentialKind::UniformPlusBump:
        p = Potential::uniform_plus_bump(r.real("stiffness", 1.0), r.real("amplitude", 0.0), r.real("radius", 1.0));
        break;
      case PotentialKind::Sampled: p = Potential::sampled(r.real("spacing", 0.0), r.reals("profile", {})); break;
    }
  } catch (const std::invalid_argument& e) {
    r.fail("kind", e.what());
  }
  p.growth_m = r.integer("m", p.growth_m);
  p.declared_lambda = r.real("lambda", p.declared_lambda);
  p.declared_C = r.real("C", p.declared_C);
  p.declared_A = r.real("A", p.declared_A);
  p.declared_alpha = r.real("alpha", p.declared_alpha);
  return p;
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out(static_cast<Index>(k)) = v[k];
  return out;
}

InitialLaw read_law(Reader r) {
  InitialLaw law;
  law.kind = r.convert("kind", r.text("kind", "gaussian"), initial_kind_from_string, InitialKind::Gaussian);
  law.mean = to_vector(r.reals("mean", {0.0}));
  law.variance = r.real("variance", law.variance);
  law.half_width = r.real("half_width", law.half_width);
  law.point_a = to_vector(r.reals("point_a", {0.0}));
  law.point_b = to_vector(r.reals("point_b", {0.0}));
  law.weight = r.real("weight", law.weight);
  law.path = r.text("path", "");
  law.center_to_zero = r.boolean("center", false);
  return law;
}

// shortest round-trip decimal form
std::string num(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += num(v[k]);
    } else {
      out += std::to_string(v[k]);
    }
  }
  return out;
}

std::string join_vector(const Vector& v) {
  return join(std::vector<double>(v.data(), v.data() + v.size()));
}

void write_potential(std::ostream& os, const char* name, const Potential& p) {
  os << "[" << name << "]\n";
  os << "kind = " << to_string(p.kind) << "\n";
  switch (p.kind) {
    case PotentialKind::Zero: break;
    case PotentialKind::Quadratic: os << "stiffness = " << num(p.stiffness) << "\n"; break;
    case PotentialKind::PowerLaw: os << "exponent = " << num(p.exponent) << "\n"; break;
    case PotentialKind::UniformPlusBump:
      os << "stiffness = " << num(p.stiffness) << "\namplitude = " << num(p.bump_amplitude)
         << "\nradius = " << num(p.bump_radius) << "\n";
      break;
    case PotentialKind::Sampled: os << "spacing = " << num(p.spacing) << "\nprofile = " << join(p.profile) << "\n"; break;
  }
  os << "m = " << p.growth_m << "\nlambda = " << num(p.declared_lambda) << "\nC = " << num(p.declared_C)
     << "\nA = " << num(p.declared_A) << "\nalpha = " << num(p.declared_alpha) << "\n\n";
}

void write_law(std::ostream& os, const char* name, const InitialLaw& law) {
  os << "[" << name << "]\n";
  os << "kind = " << to_string(law.kind) << "\nmean = " << join_vector(law.mean) << "\nvariance = " << num(law.variance)
     << "\nhalf_width = " << num(law.half_width) << "\npoint_a = " << join_vector(law.point_a)
     << "\npoint_b = " << join_vector(law.point_b) << "\nweight = " << num(law.weight) << "\npath = " << law.path
     << "\ncenter = " << (law.center_to_zero ? "true" : "false") << "\n\n";
}

void validate_law(const InitialLaw& law, Index dim, const char* name, std::vector<std::string>& errors) {
  auto sized = [&](const Vector& v, const char* key) {
    if (v.size() != 1 && v.size() != dim)
      errors.push_back(std::string("[") + name + "] " + key + ": needs 1 or dim = " + std::to_string(dim) + " entries");
  };
  switch (law.kind) {
    case InitialKind::Gaussian:
      sized(law.mean, "mean");
      if (!(law.variance >= 0.0)) errors.push_back(std::string("[") + name + "] variance: must be >= 0");
      break;
    case InitialKind::Uniform:
      if (!(law.half_width > 0.0)) errors.push_back(std::string("[") + name + "] half_width: must be > 0");
      break;
    case InitialKind::TwoPoint:
      sized(law.point_a, "point_a");
      sized(law.point_b, "point_b");
      if (!(law.weight >= 0.0 && law.weight <= 1.0))
        errors.push_back(std::string("[") + name + "] weight: must lie in [0, 1]");
      break;
    case InitialKind::SampleFile:
      if (law.path.empty()) errors.push_back(std::string("[") + name + "] path: sample_file needs a path");
      break;
  }
}

}  // namespace

std::string_view to_string(Mode mode) { return mode == Mode::Raw ? "raw" : "projected"; }

std::string_view to_string(OutputFormat format) {
  switch (format) {
    case OutputFormat::Csv: return "csv";
    case OutputFormat::Jsonl: return "jsonl";
    case OutputFormat::Bin: return "bin";
  }
  return "csv";
}

std::string_view to_string(Coupling coupling) {
  switch (coupling) {
    case Coupling::Independent: return "independent";
    case Coupling::Comonotone: return "comonotone";
    case Coupling::Optimal: return "optimal";
  }
  return "independent";
}

std::string_view to_string(TestFunction function) {
  switch (function) {
    case TestFunction::ClampedCoordinate: return "clamped_coordinate";
    case TestFunction::ClampedNorm: return "clamped_norm";
    case TestFunction::SinCoordinate: return "sin_coordinate";
    case TestFunction::Constant: return "constant";
  }
  return "clamped_coordinate";
}

Mode mode_from_string(std::string_view name) { return enum_from(name, kModes, "mode"); }
OutputFormat output_format_from_string(std::string_view name) { return enum_from(name, kFormats, "output format"); }
Coupling coupling_from_string(std::string_view name) { return enum_from(name, kCouplings, "coupling"); }
TestFunction test_function_from_string(std::string_view name) { return enum_from(name, kFunctions, "test function"); }

bool operator==(const SimConfig& a, const SimConfig& b) {
  return a.V == b.V && a.W == b.W && a.n == b.n && a.dim == b.dim && a.mode == b.mode && a.step == b.step &&
         a.horizon == b.horizon && a.observe == b.observe && a.initial == b.initial && a.initial_b == b.initial_b &&
         a.seed == b.seed && a.runs == b.runs && a.output_directory == b.output_directory && a.formats == b.formats &&
         a.checks == b.checks && a.experiment == b.experiment;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::invalid_argument([&] {
        std::string msg = std::to_string(errors.size()) + " config error(s):";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

SimConfig parse_config(std::string_view text, const ParseOptions& options) {
  std::vector<std::string> errors;
  std::map<std::string, Section> sections;
  std::vector<std::string> section_names;
  for (const auto& [name, keys] : schema()) section_names.push_back(name);

  std::string current;
  bool current_known = false;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(line_no) + ": malformed section header '" + line + "'");
        current_known = false;
        continue;
      }
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      current_known = std::find(section_names.begin(), section_names.end(), current) != section_names.end();
      if (!current_known)
        errors.push_back("line " + std::to_string(line_no) + ": unknown section [" + current + "]; did you mean [" +
                         nearest(current, section_names) + "]?");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
      continue;
    }
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (current.empty()) {
      errors.push_back("line " + std::to_string(line_no) + ": key '" + key + "' appears before any [section]");
      continue;
    }
    if (!current_known) continue;
    const auto& keys = std::find_if(schema().begin(), schema().end(), [&](const auto& s) { return s.first == current; })->second;
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      errors.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "' in [" + current +
                       "]; did you mean '" + nearest(key, keys) + "'?");
      continue;
    }
    if (sections[current].count(key)) {
      errors.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "' in [" + current + "]");
      continue;
    }
    sections[current][key] = Entry{value, line_no};
  }

  auto reader = [&](const std::string& name) {
    const auto it = sections.find(name);
    return Reader(it == sections.end() ? nullptr : &it->second, name, errors);
  };

  SimConfig c;
  {
    Reader r = reader("system");
    c.n = r.integer<Index>("N", c.n);
    c.dim = r.integer<Index>("dim", c.dim);
    c.mode = r.convert("mode", r.text("mode", "raw"), mode_from_string, Mode::Raw);
    c.seed = r.integer<std::uint64_t>("seed", c.seed);
    c.runs = r.integer<int>("runs", c.runs);
  }
  c.V = read_potential(reader("potential.V"));
  c.W = read_potential(reader("potential.W"));
  {
    Reader r = reader("dynamics");
    c.step.scheme = r.convert("scheme", r.text("scheme", "tamed_euler"), scheme_from_string, Scheme::TamedEuler);
    // without an explicit dt, resolve a few steps per relaxation time 1/lambda
    const double lambda_hat = std::max(c.V.declared_lambda, c.W.declared_lambda);
    const double dt_default = lambda_hat > 0.0 ? std::min(0.01, 0.1 / lambda_hat) : 0.01;
    c.step.dt = r.real("dt", dt_default);
    c.step.adaptive_drift_cap = r.real("drift_cap", c.step.adaptive_drift_cap);
    c.step.dt_min = r.real("dt_min", c.step.dt_min);
    c.horizon = r.real("horizon", c.horizon);
  }
  {
    Reader r = reader("observe");
    c.observe.times = r.reals("times", {});
    c.observe.stride = r.real("stride", 0.0);
    c.observe.count = r.integer<int>("count", 0);
  }
  c.initial = read_law(reader("initial"));
  c.initial_b = read_law(reader("initial.b"));
  {
    Reader r = reader("check");
    c.checks.probes = r.integer<long>("probes", c.checks.probes);
    c.checks.extent = r.real("extent", c.checks.extent);
    c.checks.seed = r.integer<std::uint64_t>("seed", c.checks.seed);
    c.checks.eps_grid = r.reals("eps", c.checks.eps_grid);
  }
  {
    Reader r = reader("output");
    c.output_directory = r.text("directory", c.output_directory);
    std::vector<OutputFormat> formats;
    for (const auto& w : r.words("formats", {"csv"}))
      formats.push_back(r.convert("formats", w, output_format_from_string, OutputFormat::Csv));
    c.formats = formats;
  }
  {
    Reader r = reader("experiment");
    ExperimentSpec& e = c.experiment;
    e.n_values = r.integers("n_values", e.n_values);
    e.m_reference = r.integer<int>("m_reference", e.m_reference);
    e.runs_per_n = r.integer<int>("runs_per_n", e.runs_per_n);
    e.coupling = r.convert("coupling", r.text("coupling", "independent"), coupling_from_string, Coupling::Independent);
    e.function = r.convert("function", r.text("function", "clamped_coordinate"), test_function_from_string,
                           TestFunction::ClampedCoordinate);
    e.clamp_radius = r.real("clamp", e.clamp_radius);
    e.concentration_time = r.real("T", e.concentration_time);
    e.r_grid = r.reals("r_grid", {});
    e.trials = r.integer<int>("trials", e.trials);
    e.chaos_K = r.real("chaos_K", e.chaos_K);
    e.delta = r.real("delta", e.delta);
  }

  if (errors.empty()) {
    for (auto& e : validate_config(c)) errors.push_back(std::move(e));
  }
  if (errors.empty() && options.check_conditions) {
    for (auto& e : check_declared_conditions(c)) errors.push_back(std::move(e));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

SimConfig load_config(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), options);
}

std::string serialize_config(const SimConfig& c) {
  std::ostringstream os;
  os << "[system]\nN = " << c.n << "\ndim = " << c.dim << "\nmode = " << to_string(c.mode) << "\nseed = " << c.seed
     << "\nruns = " << c.runs << "\n\n";
  write_potential(os, "potential.V", c.V);
  write_potential(os, "potential.W", c.W);
  os << "[dynamics]\nscheme = " << to_string(c.step.scheme) << "\ndt = " << num(c.step.dt)
     << "\ndrift_cap = " << num(c.step.adaptive_drift_cap) << "\ndt_min = " << num(c.step.dt_min)
     << "\nhorizon = " << num(c.horizon) << "\n\n";
  os << "[observe]\ntimes = " << join(c.observe.times) << "\nstride = " << num(c.observe.stride)
     << "\ncount = " << c.observe.count << "\n\n";
  write_law(os, "initial", c.initial);
  write_law(os, "initial.b", c.initial_b);
  os << "[check]\nprobes = " << c.checks.probes << "\nextent = " << num(c.checks.extent) << "\nseed = " << c.checks.seed
     << "\neps = " << join(c.checks.eps_grid) << "\n\n";
  std::vector<std::string> formats;
  for (auto f : c.formats) formats.emplace_back(to_string(f));
  std::string fmt;
  for (std::size_t k = 0; k < formats.size(); ++k) fmt += (k ? ", " : "") + formats[k];
  os << "[output]\ndirectory = " << c.output_directory << "\nformats = " << fmt << "\n\n";
  const ExperimentSpec& e = c.experiment;
  os << "[experiment]\nn_values = " << join(e.n_values) << "\nm_reference = " << e.m_reference
     << "\nruns_per_n = " << e.runs_per_n << "\ncoupling = " << to_string(e.coupling)
     << "\nfunction = " << to_string(e.function) << "\nclamp = " << num(e.clamp_radius)
     << "\nT = " << num(e.concentration_time) << "\nr_grid = " << join(e.r_grid) << "\ntrials = " << e.trials
     << "\nchaos_K = " << num(e.chaos_K) << "\ndelta = " << num(e.delta) << "\n";
  return os.str();
}

std::vector<std::string> validate_config(const SimConfig& c) {
  std::vector<std::string> errors;
  auto need = [&](bool ok, const std::string& message) {
    if (!ok) errors.push_back(message);
  };
  need(c.n >= 2, "[system] N: must be >= 2");
  need(c.dim >= 1, "[system] dim: must be >= 1");
  need(c.runs >= 1, "[system] runs: must be >= 1");
  need(c.mode != Mode::Projected || c.V.is_zero(),
       "[system] mode = projected requires [potential.V] kind = zero (the projected system is defined only "
       "without confinement)");
  need(c.W.growth_m >= 0 && c.V.growth_m >= 0, "[potential] m: must be >= 0");
  for (const Potential* p : {&c.V, &c.W})
    need(p->declared_lambda >= 0.0 && p->declared_C >= 0.0 && p->declared_A >= 0.0 && p->declared_alpha >= 0.0,
         "[potential] lambda, C, A, alpha: must be >= 0");
  try {
    c.step.validate();
  } catch (const std::invalid_argument& e) {
    errors.push_back(std::string("[dynamics] ") + e.what());
  }
  need(c.horizon >= 0.0 && std::isfinite(c.horizon), "[dynamics] horizon: must be finite and >= 0");
  const auto& times = c.observe.times;
  for (std::size_t k = 0; k < times.size(); ++k) {
    need(times[k] >= 0.0 && times[k] <= c.horizon, "[observe] times: every time must lie in [0, horizon]");
    if (k > 0) need(times[k] > times[k - 1], "[observe] times: must be sorted and unique");
  }
  if (times.empty() && c.observe.count > 0) {
    need(c.observe.stride > 0.0, "[observe] stride: must be > 0 when count is set");
    need(c.observe.stride * (c.observe.count - 1) <= c.horizon * (1.0 + 1e-12),
         "[observe] stride * (count - 1): must not exceed the horizon");
  }
  need(c.observe.count >= 0, "[observe] count: must be >= 0");
  validate_law(c.initial, c.dim, "initial", errors);
  validate_law(c.initial_b, c.dim, "initial.b", errors);
  need(c.checks.probes >= 1, "[check] probes: must be >= 1");
  need(c.checks.extent > 0.0, "[check] extent: must be > 0");
  need(!c.checks.eps_grid.empty(), "[check] eps: must not be empty");
  for (double e : c.checks.eps_grid) need(e > 0.0 && e < 1.0, "[check] eps: every value must lie in (0, 1)");
  need(!c.formats.empty(), "[output] formats: must name at least one format");
  need(!c.output_directory.empty(), "[output] directory: must not be empty");
  const ExperimentSpec& e = c.experiment;
  need(!e.n_values.empty(), "[experiment] n_values: must not be empty");
  for (std::size_t k = 0; k < e.n_values.size(); ++k) {
    need(e.n_values[k] >= 2, "[experiment] n_values: every N must be >= 2");
    if (k > 0) need(e.n_values[k] > e.n_values[k - 1], "[experiment] n_values: must be strictly increasing");
  }
  need(e.m_reference >= 1, "[experiment] m_reference: must be >= 1");
  need(e.runs_per_n >= 2, "[experiment] runs_per_n: must be >= 2");
  need(e.clamp_radius > 0.0, "[experiment] clamp: must be > 0");
  need(e.concentration_time > 0.0, "[experiment] T: must be > 0");
  need(e.trials >= 1, "[experiment] trials: must be >= 1");
  need(e.chaos_K >= 0.0, "[experiment] chaos_K: must be >= 0");
  need(e.delta > 0.0, "[experiment] delta: must be > 0");
  for (double r : e.r_grid) need(r >= 0.0, "[experiment] r_grid: values must be >= 0");
  return errors;
}

std::vector<std::string> check_declared_conditions(const SimConfig& c) {
  std::vector<std::string> errors;
  const ProbeOptions opts{c.dim, c.checks.seed, 1e-9};
  auto check = [&](const Potential& p, const char* name) {
    if (p.is_zero()) return;
    double extent = c.checks.extent;
    if (p.kind == PotentialKind::Sampled) extent = std::min(extent, p.sampled_range() / std::sqrt(double(c.dim)) / 2.0);
    auto report = [&](const ConditionReport& r, const std::string& what) {
      if (r.satisfied()) return;
      std::ostringstream os;
      os << "[" << name << "] " << what << " fails on the probe set (worst violation " << r.worst_violation
         << ", " << r.probe_count << " probes in [-" << r.probe_extent << ", " << r.probe_extent
         << "]); fix the declared constants or pass --unchecked";
      errors.push_back(os.str());
    };
    try {
      report(check_polynomial_growth(p, p.growth_m, c.checks.probes, extent, opts),
             "polynomial growth with m = " + std::to_string(p.growth_m));
      if (p.declared_lambda > 0.0 || p.declared_C > 0.0)
        report(check_convexity_at_infinity(p, p.declared_lambda, p.declared_C, c.checks.probes, extent, opts),
               "convexity at infinity with the declared (lambda, C)");
      if (p.declared_A > 0.0)
        report(check_condition_C(p, p.declared_A, p.declared_alpha, c.checks.probes, extent, c.checks.eps_grid, opts),
               "condition C(A, alpha) with the declared (A, alpha)");
    } catch (const std::exception& e) {
      errors.push_back(std::string("[") + name + "] condition check failed: " + e.what());
    }
  };
  check(c.V, "potential.V");
  check(c.W, "potential.W");
  return errors;
}

}  // namespace granular
