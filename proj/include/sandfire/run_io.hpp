#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sandfire/errors.hpp"
#include "sandfire/prng.hpp"
#include "sandfire/sandpile.hpp"
#include "sandfire/text.hpp"
#include "sandfire/version.hpp"

namespace sandfire {

inline constexpr std::string_view kRunCsvHeader = "event_index,topplings,area,dissipated";

inline std::uint64_t config_digest(const LatticeConfig& config) {
  std::uint64_t h = kFnv1aOffset;
  h = fnv1a_u64(h, static_cast<std::uint64_t>(config.width));
  h = fnv1a_u64(h, static_cast<std::uint64_t>(config.height));
  h = fnv1a_u64(h, static_cast<std::uint64_t>(config.threshold));
  h = fnv1a_u64(h, config.seed);
  h = fnv1a_u64(h, config.warmup_deposits);
  h = fnv1a_u64(h, config.measured_deposits);
  const std::string policy = to_string(config.deposition);
  h = fnv1a_bytes(h, policy.begin(), policy.end());
  const std::string intervention = to_string(config.intervention);
  h = fnv1a_bytes(h, intervention.begin(), intervention.end());
  return h;
}

inline std::string render_run_csv(const SimulationRun& run, bool banner = true) {
  std::string out;
  if (banner) {
    out += "# sandfire ";
    out += kVersion;
    out += " input_digest=";
    out += hex16(config_digest(run.config));
    out += '\n';
  }
  out += kRunCsvHeader;
  out += '\n';
  for (std::size_t i = 0; i < run.events.size(); ++i) {
    const AvalancheEvent& ev = run.events[i];
    out += std::to_string(i);
    out += ',' + std::to_string(ev.topplings);
    out += ',' + std::to_string(ev.area);
    out += ',' + std::to_string(ev.dissipated);
    out += '\n';
  }
  return out;
}

inline std::string render_run_json(const SimulationRun& run) {
  nlohmann::ordered_json j;
  j["config"] = {
      {"width", run.config.width},
      {"height", run.config.height},
      {"threshold", run.config.threshold},
      {"seed", run.config.seed},
      {"warmup_deposits", run.config.warmup_deposits},
      {"measured_deposits", run.config.measured_deposits},
      {"policy", to_string(run.config.deposition)},
      {"intervention", to_string(run.config.intervention)},
  };
  j["checksum"] = hex16(run.final_checksum);
  std::uint64_t nonzero = 0;
  for (const AvalancheEvent& ev : run.events) {
    if (ev.topplings > 0) ++nonzero;
  }
  j["totals"] = {
      {"deposited", run.totals.deposited},
      {"dissipated", run.totals.dissipated},
      {"removed", run.totals.removed},
      {"remaining_grains", run.totals.remaining_grains},
      {"events", run.events.size()},
      {"nonzero_events", nonzero},
  };
  return j.dump(2) + "\n";
}

// Reads back the event list written by render_run_csv. Comment lines are
// skipped, so banners do not matter.
inline std::vector<AvalancheEvent> parse_run_csv(std::string_view csv) {
  std::vector<AvalancheEvent> events;
  bool header_seen = false;
  const auto lines = split(csv, '\n');
  for (std::size_t li = 0; li < lines.size(); ++li) {
    const std::string_view line = lines[li];
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      if (line != kRunCsvHeader) {
        throw ParseError("row " + std::to_string(li + 1) + ": header must be exactly '" +
                         std::string(kRunCsvHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    const std::string row_name = "row " + std::to_string(li + 1);
    if (fields.size() != 4) {
      throw ParseError(row_name + ": expected 4 fields, found " + std::to_string(fields.size()));
    }
    AvalancheEvent ev;
    parse_number<std::uint64_t>(fields[0], row_name + ", column event_index");
    ev.topplings = parse_number<std::uint64_t>(fields[1], row_name + ", column topplings");
    ev.area = parse_number<std::uint64_t>(fields[2], row_name + ", column area");
    ev.dissipated = parse_number<std::uint64_t>(fields[3], row_name + ", column dissipated");
    events.push_back(ev);
  }
  if (!header_seen) throw ParseError("run CSV has no header row");
  return events;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw IoError("failed writing file: " + path.string());
}

}  // namespace sandfire
