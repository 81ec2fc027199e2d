#include "granular/cli.hpp"

#include "granular/config.hpp"
#include "granular/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <sstream>

namespace granular {

namespace {

using nlohmann::json;

struct Options {
  std::string config;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out;
  bool unchecked = false;
  std::string format;
  std::vector<std::string> files;
};

void add_common(CLI::App* cmd, Options& o, bool with_format = false) {
  cmd->add_option("--config", o.config, "experiment config file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed (all randomness derives from it)")->required();
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 256));
  cmd->add_option("--out", o.out, "output directory (overrides [output] directory)");
  cmd->add_flag("--unchecked", o.unchecked, "skip the condition checkers during validation");
  if (with_format)
    cmd->add_option("--format", o.format, "snapshot format")->check(CLI::IsMember({"csv", "jsonl", "bin"}));
}

SimConfig load(const Options& o, bool check_conditions) {
  SimConfig c = load_config(o.config, ParseOptions{check_conditions && !o.unchecked});
  c.seed = o.seed;
  if (!o.out.empty()) c.output_directory = o.out;
  if (!o.format.empty()) c.formats = {output_format_from_string(o.format)};
  return c;
}

int finish(const std::string& experiment, const SimConfig& c, const json& flags, const json& result,
           const std::string& csv, std::ostream& out, std::ostream& err) {
  const std::string stem = experiment + "-" + short_hash(c);
  const json summary = summary_json(experiment, c, flags, result);
  write_output(c.output_directory, stem + ".json", summary.dump(2) + "\n");
  if (!csv.empty()) write_output(c.output_directory, stem + ".csv", csv);
  out << summary.dump(2) << "\n";
  if (summary_passed(summary)) return kExitOk;
  for (const auto& [name, value] : flags.items())
    if (!value.get<bool>()) err << experiment << ": bound check '" << name << "' failed\n";
  return kExitBoundViolation;
}

int cmd_check_potential(const Options& o, std::ostream& out, std::ostream& err) {
  const SimConfig c = load(o, false);
  const ProbeOptions opts{c.dim, c.checks.seed, 1e-9};
  json doc = json::object();
  bool ok = true;
  for (const auto& [name, p] : {std::pair{"V", &c.V}, std::pair{"W", &c.W}}) {
    json reports = json::array();
    if (!p->is_zero()) {
      double extent = c.checks.extent;
      if (p->kind == PotentialKind::Sampled) extent = std::min(extent, p->sampled_range() / 2.0);
      std::vector<ConditionReport> rs;
      rs.push_back(check_polynomial_growth(*p, p->growth_m, c.checks.probes, extent, opts));
      rs.push_back(check_convexity_at_infinity(*p, c.checks.probes, extent, opts));
      if (p->declared_lambda > 0.0 || p->declared_C > 0.0)
        rs.push_back(check_convexity_at_infinity(*p, p->declared_lambda, p->declared_C, c.checks.probes, extent, opts));
      if (p->declared_A > 0.0)
        rs.push_back(check_condition_C(*p, p->declared_A, p->declared_alpha, c.checks.probes, extent,
                                       c.checks.eps_grid, opts));
      for (const auto& r : rs) {
        if (!r.satisfied()) {
          ok = false;
          err << "potential " << name << ": " << r.condition_name << " violated (worst " << r.worst_violation << ")\n";
        }
        reports.push_back(to_json(r));
      }
    }
    doc[name] = reports;
  }
  out << doc.dump(2) << "\n";
  return ok ? kExitOk : kExitBoundViolation;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream&) {
  const SimConfig c = load(o, true);
  const std::string stem = "simulate-" + short_hash(c);
  std::ostringstream csv, jsonl, bin;
  csv << kSnapshotCsvHeader << "\n";
  long snapshots = 0;
  double last_m2 = 0.0;
  simulate(
      c,
      [&](const Snapshot& s) {
        ++snapshots;
        last_m2 = s.observables.second_moment;
        for (OutputFormat f : c.formats) {
          switch (f) {
            case OutputFormat::Csv: write_snapshot_csv_row(csv, s); break;
            case OutputFormat::Jsonl: write_snapshot_jsonl(jsonl, s); break;
            case OutputFormat::Bin: write_snapshot_bin(bin, s); break;
          }
        }
      },
      o.threads);
  for (OutputFormat f : c.formats) {
    switch (f) {
      case OutputFormat::Csv: write_output(c.output_directory, stem + ".csv", csv.str()); break;
      case OutputFormat::Jsonl: write_output(c.output_directory, stem + ".jsonl", jsonl.str()); break;
      case OutputFormat::Bin: write_output(c.output_directory, stem + ".bin", bin.str()); break;
    }
  }
  const json result = {{"snapshots", snapshots}, {"runs", c.runs}, {"final_second_moment_last_run", last_m2}};
  const json summary = summary_json("simulate", c, json::object(), result);
  write_output(c.output_directory, stem + ".json", summary.dump(2) + "\n");
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int cmd_decay(const Options& o, std::ostream& out, std::ostream& err) {
  const SimConfig c = load(o, true);
  const bool uniform = c.W.declared_alpha == 0.0;
  const DecayResult r =
      uniform ? uniform_convex_decay(c, c.horizon, c.runs, o.threads)
              : decay_experiment(c, c.initial, c.initial_b, c.experiment.coupling, c.horizon, c.runs, o.threads);
  json flags = {{"monotone", r.monotone}, {"envelope_holds", r.envelope_holds}};
  if (uniform && !r.fit_skipped) flags["exp_rate_matches"] = exponential_rate_matches(r);
  return finish("decay", c, flags, to_json(r), decay_csv(r), out, err);
}

int cmd_chaos(const Options& o, std::ostream& out, std::ostream& err) {
  const SimConfig c = load(o, true);
  const ExperimentSpec& e = c.experiment;
  const ChaosScanResult r = chaos_scan(c, e.n_values, e.m_reference, e.runs_per_n, o.threads);
  for (const auto& w : r.warnings) err << "chaos-scan: warning: " << w << "\n";
  const json flags = {{"decreasing", r.decreasing},
                      {"slope_within_bound", r.n_values.size() < 2 || r.fitted_slope <= r.predicted_slope + 0.15}};
  return finish("chaos-scan", c, flags, to_json(r), chaos_csv(r), out, err);
}

int cmd_concentration(const Options& o, std::ostream& out, std::ostream& err) {
  const SimConfig c = load(o, true);
  const ConcentrationResult r = concentration_suite(c, o.threads);
  const json flags = {
      {"fitted_holds", r.fitted_holds}, {"pipeline_holds", r.pipeline_holds}, {"tail_monotone", r.tail_monotone}};
  return finish("concentration", c, flags, to_json(r), concentration_csv(r), out, err);
}

int cmd_report(const Options& o, std::ostream& out, std::ostream& err) {
  int code = kExitOk;
  for (const auto& file : o.files) {
    std::ifstream in(file);
    json summary;
    try {
      if (!in) throw std::runtime_error("cannot read");
      summary = json::parse(in);
    } catch (const std::exception& e) {
      err << file << ": " << e.what() << "\n";
      return kExitUsage;
    }
    const auto problems = verify_summary(summary);
    for (const auto& p : problems) err << file << ": " << p << "\n";
    const bool passed = summary_passed(summary);
    out << file << ": " << (problems.empty() && passed ? "ok" : "failed") << "\n";
    if (!problems.empty() || !passed) code = kExitBoundViolation;
  }
  return code;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"granular-media particle simulator and experiment harness", "granular"};
  app.require_subcommand(1);
  Options o;
  CLI::App* check = app.add_subcommand("check-potential", "check the declared potential conditions");
  CLI::App* sim = app.add_subcommand("simulate", "simulate the particle system and write snapshots");
  CLI::App* decay = app.add_subcommand("decay", "coupled W2 decay experiment");
  CLI::App* chaos = app.add_subcommand("chaos-scan", "propagation-of-chaos scan over N");
  CLI::App* conc = app.add_subcommand("concentration", "deviation inequality experiment");
  CLI::App* report = app.add_subcommand("report", "re-validate experiment summaries");
  add_common(check, o);
  add_common(sim, o, true);
  add_common(decay, o);
  add_common(chaos, o);
  add_common(conc, o);
  report->add_option("files", o.files, "JSON summaries")->required()->check(CLI::ExistingFile);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "granular: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (check->parsed()) return cmd_check_potential(o, out, err);
    if (sim->parsed()) return cmd_simulate(o, out, err);
    if (decay->parsed()) return cmd_decay(o, out, err);
    if (chaos->parsed()) return cmd_chaos(o, out, err);
    if (conc->parsed()) return cmd_concentration(o, out, err);
    if (report->parsed()) return cmd_report(o, out, err);
  } catch (const ConfigError& e) {
    err << "granular: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "granular: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace granular
