#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "cmnl/experiment.hpp"

namespace cmnl {

inline constexpr const char* kCsvHeader =
    "t,seed,policy,instant_regret,cum_regret,est_error,kappa_diag";

/// One row per record in the given order; doubles use 17 significant digits.
void write_csv(const std::vector<TrajectoryRecord>& records, std::ostream& out);
void write_csv(const std::vector<TrajectoryRecord>& records, const std::string& path);

std::vector<TrajectoryRecord> parse_csv(std::istream& in);
std::vector<TrajectoryRecord> read_csv(const std::string& path);

/// Library version string.
std::string version();

/// Resolved config, version, wall time, per-seed status and diagnostics.
std::string sidecar_json(const RunResult& run);
void write_sidecar(const RunResult& run, const std::string& path);

struct LabeledSummary {
  std::string label;
  std::vector<SummaryRow> rows;
};

/// `t,<label>_mean,<label>_std,...` joined on t; each summary must hold a
/// single policy. Missing periods are left empty.
void write_joined_summary(const std::vector<LabeledSummary>& summaries, std::ostream& out);
void write_joined_summary(const std::vector<LabeledSummary>& summaries,
                          const std::string& path);

}  // namespace cmnl
