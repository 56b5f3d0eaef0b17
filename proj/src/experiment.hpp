#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "json.hpp"

#include "common.hpp"

namespace rwre {

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::string started_utc;
  std::string ended_utc;
  std::string out_dir;
  std::map<std::string, std::string> files;  // relative path -> sha256

  nlohmann::json to_json() const;
};

// Validates and dispatches one experiment described by a JSON document, writes
// its data files plus manifest into the run directory, and streams result rows
// (CSV with wall-clock time) to `stream` as they complete. Data files carry no
// timing, so identical (config, seed) reruns are byte-identical at any thread
// count; wall time lives on the stream and in the manifest timestamps only.
RunManifest run_experiment(const nlohmann::json& config, const std::string& out_dir_override = "",
                           int threads_override = 0, const uint64_t* seed_override = nullptr,
                           std::ostream* stream = nullptr);

// Report bundle for a finished run: report.md, tables, and (for decay runs)
// regenerated SVG plots when missing. Throws MissingManifest without a run.
nlohmann::json emit_report(const std::string& run_dir);

nlohmann::json error_to_json(const Error& e);
int error_exit_code(const Error& e);

inline constexpr const char* kStreamHeader =
    "experiment_id,estimand,mode,n_env,n_walk,estimate,ci_lo,ci_hi,seed,wall_time_s";

}  // namespace rwre
