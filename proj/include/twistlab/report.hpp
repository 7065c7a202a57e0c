#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "twistlab/centralizer.hpp"
#include "twistlab/twisted.hpp"

namespace twistlab::report {

using json = nlohmann::ordered_json;

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentConfig {
  std::string kind;  // norm | dual | centralizer | delta | duality | dn | growth |
                     // commutator | jl | lsd
  json params = json::object();
  std::uint64_t seed = 1;
  std::string outputPath;
  std::string format = "json";
  int capDim = 8;
  double tolerance = 1e-9;

  void validate() const;  // field-level diagnostics via ConfigError
};

struct ExperimentReport {
  json config;
  std::vector<json> rows;
  json provenance;  // engine version + tolerances; volatile part (timestamp,
                    // runtime) is isolated under provenance["volatile"]
  int exitCode = 0;  // nonzero when a flagged violation occurred
};

/// Dispatches the config to the corresponding module operation. Rows are a
/// pure function of (config, seed); re-running byte-reproduces them.
ExperimentReport run(const ExperimentConfig& cfg);

/// Builds a `norm` report row from a memoized exact value ("p/q" string)
/// without running the engine; used by the CLI cache.
ExperimentReport synthesizeNormRowFromCache(const ExperimentConfig& cfg,
                                            const std::string& exactValue);

/// Atomic write (temp file + rename). Format "json" emits the single-document
/// report; "csv" emits the rows as RFC-4180 with a header line.
void writeReport(const ExperimentReport& rep, const std::string& path, const std::string& format);

std::string reportJsonText(const ExperimentReport& rep);
std::string reportCsvText(const ExperimentReport& rep);

// --- serialization helpers (sparse coordinate-indexed maps, 1-based keys) ---
json toJson(const DVec& v);
json toJson(const twisted::TwistedVector& v);
DVec dvecFromJson(const json& j);
QVec qvecFromJson(const json& j);
twisted::TwistedVector twistedFromJson(const json& j);

/// Centralizer from its JSON spec ({"kind": "zero"|"kalton-peck"|"tp"|
/// "factorization", ...}) or one of the shortcut strings ("zero", "kp-id",
/// "kp-sqrt", "tp:<p>", "fact-T2", "fact-l1linf", "fact-l2l2").
centralizer::CentralizerSpec omegaFromJson(const json& j, int capDim);

}  // namespace twistlab::report
