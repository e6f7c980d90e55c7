#include "cmnl/report.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cmnl/error.hpp"

#ifndef CMNL_VERSION
#define CMNL_VERSION "0.0.0"
#endif

namespace cmnl {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace

void write_csv(const std::vector<TrajectoryRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << r.t << ',' << r.seed << ',' << r.policy << ',' << fmt(r.instant_regret) << ','
        << fmt(r.cum_regret) << ',' << fmt(r.est_error) << ',' << fmt(r.kappa_diag) << '\n';
  }
}

void write_csv(const std::vector<TrajectoryRecord>& records, const std::string& path) {
  auto out = open_out(path);
  write_csv(records, out);
  finish(out, path);
}

std::vector<TrajectoryRecord> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error("csv: missing or unexpected header");
  }
  std::vector<TrajectoryRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw Error("csv line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      TrajectoryRecord r;
      r.t = std::stoull(cells[0]);
      r.seed = std::stoull(cells[1]);
      r.policy = cells[2];
      r.instant_regret = std::stod(cells[3]);
      r.cum_regret = std::stod(cells[4]);
      r.est_error = std::stod(cells[5]);
      r.kappa_diag = std::stod(cells[6]);
      records.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error("csv line " + std::to_string(lineno) + ": malformed number");
    }
  }
  return records;
}

std::vector<TrajectoryRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return parse_csv(in);
}

std::string version() { return CMNL_VERSION; }

std::string sidecar_json(const RunResult& run) {
  nlohmann::ordered_json j;
  j["version"] = version();
  j["wall_seconds"] = run.wall_seconds;
  nlohmann::ordered_json config;
  for (const auto& [key, value] : to_key_values(run.config)) config[key] = value;
  j["config"] = config;
  if (run.config.policy == PolicyKind::onsp) {
    j["notes"] = "onsp is a reconstruction of the exp-concavity ONS baseline";
  }
  nlohmann::ordered_json reps = nlohmann::ordered_json::array();
  for (const auto& r : run.replications) {
    nlohmann::ordered_json rep;
    rep["seed"] = r.seed;
    rep["ok"] = r.ok;
    if (!r.ok) rep["error"] = r.error;
    if (!r.records.empty()) rep["final_cum_regret"] = r.records.back().cum_regret;
    nlohmann::ordered_json diag;
    for (const auto& [key, value] : r.diagnostics) diag[key] = value;
    rep["diagnostics"] = diag;
    reps.push_back(rep);
  }
  j["replications"] = reps;
  return j.dump(2) + "\n";
}

void write_sidecar(const RunResult& run, const std::string& path) {
  auto out = open_out(path);
  out << sidecar_json(run);
  finish(out, path);
}

void write_joined_summary(const std::vector<LabeledSummary>& summaries, std::ostream& out) {
  std::set<std::size_t> periods;
  std::vector<std::map<std::size_t, const SummaryRow*>> index(summaries.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    std::set<std::string> policies;
    for (const auto& row : summaries[i].rows) {
      policies.insert(row.policy);
      periods.insert(row.t);
      index[i][row.t] = &row;
    }
    if (policies.size() > 1) {
      throw Error("summary '" + summaries[i].label + "' mixes several policies");
    }
  }
  out << 't';
  for (const auto& s : summaries) out << ',' << s.label << "_mean," << s.label << "_std";
  out << '\n';
  for (const std::size_t t : periods) {
    out << t;
    for (const auto& idx : index) {
      const auto it = idx.find(t);
      if (it == idx.end()) {
        out << ",,";
      } else {
        out << ',' << fmt(it->second->mean_cum_regret) << ',' << fmt(it->second->std_cum_regret);
      }
    }
    out << '\n';
  }
}

void write_joined_summary(const std::vector<LabeledSummary>& summaries,
                          const std::string& path) {
  auto out = open_out(path);
  write_joined_summary(summaries, out);
  finish(out, path);
}

}  // namespace cmnl
