#pragma once

#include <string>
#include <vector>

#include "varicon/skate.hpp"

namespace varicon {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitSingular = 2;
inline constexpr int kExitSchema = 3;

struct ScenarioOutcome {
  int exit_code = kExitOk;
  std::string name;
  std::string summary;                 // one console line
  std::vector<std::string> artifacts;  // files written, in write order
};

// Runs one scenario configuration and writes its artifacts under out_dir.
// Every schema check (JSON shape, expression parsing, object construction)
// happens before the first artifact file is opened, so a rejected
// configuration leaves nothing behind.  Outcome exit codes: 0 success,
// 1 computation error, 2 singular halt (the partial trajectory is still
// written), 3 schema violation.
ScenarioOutcome run_scenario_text(const std::string& json_text, const std::string& name,
                                  const std::string& out_dir);
ScenarioOutcome run_scenario_file(const std::string& path, const std::string& out_dir);

struct CatalogEntry {
  std::string name;  // file stem, unique across the catalog
  std::string kind;
  std::string description;
  std::string path;
};

// Catalog of every *.json below the given directories, sorted by name.
// Directories that do not exist contribute nothing; duplicate names are a
// configuration error.
std::vector<CatalogEntry> list_scenarios(const std::vector<std::string>& dirs);

// Fixed-format trajectory table shared by the scenario runner and the direct
// `skate` subcommand: header row plus one %.17g line per sample.
void write_trajectory_csv(const std::string& path, const Trajectory& tr);

}  // namespace varicon
