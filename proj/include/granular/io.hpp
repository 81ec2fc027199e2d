#pragma once

#include "granular/conditions.hpp"
#include "granular/experiments.hpp"
#include "granular/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <ostream>
#include <string>

namespace granular {

/// Git blob hash (SHA-1 of "blob <length>\0" + text), lowercase hex.
std::string content_hash(const std::string& text);

/// First 12 hex digits of the canonical config's content hash.
std::string short_hash(const SimConfig& config);

nlohmann::json to_json(const ConditionReport& report);
nlohmann::json to_json(const ChaosScanResult& result);
nlohmann::json to_json(const DecayResult& result);
nlohmann::json to_json(const ConcentrationResult& result);
nlohmann::json to_json(const ExpMomentSeries& result);
nlohmann::json to_json(const MomentTrendResult& result);

/// CSV time series; every header starts with time,value,stderr,method,p.
std::string chaos_csv(const ChaosScanResult& result);
std::string decay_csv(const DecayResult& result);
std::string concentration_csv(const ConcentrationResult& result);

inline constexpr const char* kSnapshotCsvHeader =
    "time,value,stderr,method,p,run,index,pairwise_second_moment,center_of_mass,max_norm";

void write_snapshot_csv_row(std::ostream& out, const Snapshot& s);
void write_snapshot_jsonl(std::ostream& out, const Snapshot& s);

/// Binary snapshot record: 32-byte header (magic "GMPE", u32 version 1,
/// u64 N, u64 d, f64 time) followed by N*d little-endian f64, row-major.
void write_snapshot_bin(std::ostream& out, const Snapshot& s);

struct BinRecord {
  std::uint32_t version = 0;
  double time = 0.0;
  Positions positions;
};

/// Reads one record; false at clean end of stream.
bool read_snapshot_bin(std::istream& in, BinRecord& record);

/// Summary document written next to each experiment's CSV.
nlohmann::json summary_json(const std::string& experiment, const SimConfig& config, const nlohmann::json& flags,
                            const nlohmann::json& result);

/// Re-validates a summary: the config echo parses, re-serializes to itself
/// and matches the stored hash. Returns the problems found.
std::vector<std::string> verify_summary(const nlohmann::json& summary);

/// True iff every flag of the summary is true.
bool summary_passed(const nlohmann::json& summary);

/// Writes `contents` to directory/name. `name` must be a bare file name, so
/// nothing escapes the directory.
std::filesystem::path write_output(const std::filesystem::path& directory, const std::string& name,
                                   const std::string& contents);

}  // namespace granular
