#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "seqpred/divergence.hpp"
#include "seqpred/process.hpp"

namespace seqpred {

// Knobs shared by every experiment and CLI invocation.
struct RunConfig {
  std::uint64_t seed = 1;
  std::string out_dir;         // empty: nothing is written
  std::string format = "csv";  // series payloads: "csv" | "json" (manifests are always JSON)
  int jobs = 1;
  int budget_log2 = kDefaultBudgetLog2;
};

// One checked inequality. `detail` carries the numbers that went into the
// decision so the verdict can be recomputed from the report alone.
struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct NamedSeries {
  std::string name;  // file stem within the experiment's output set
  DivergenceSeries series;
};

struct ExperimentResult {
  std::string name;
  nlohmann::json spec_echo;  // measures, horizons, sample counts, seeds
  std::vector<NamedSeries> series;
  std::vector<Verdict> verdicts;
  nlohmann::json extra;  // experiment-specific payloads (audits, classifications, ...)

  bool all_pass() const {
    for (const auto& v : verdicts)
      if (!v.pass) return false;
    return true;
  }

  void add_verdict(std::string vname, bool pass, std::string detail) {
    verdicts.push_back(Verdict{std::move(vname), pass, std::move(detail)});
  }
};

// Write via a temp file in the same directory so readers never observe a
// half-written report.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline nlohmann::json verdicts_json(const std::vector<Verdict>& verdicts) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& v : verdicts) out.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  return out;
}

// Emits one file per series plus a manifest. Series files are byte-stable
// for fixed config; the manifest additionally carries wall-clock metadata.
// Returns the paths written.
inline std::vector<std::string> write_experiment_files(const ExperimentResult& r, const RunConfig& cfg,
                                                       double wall_ms) {
  std::vector<std::string> written;
  if (cfg.out_dir.empty()) return written;
  std::filesystem::path dir(cfg.out_dir);
  std::filesystem::create_directories(dir);
  std::vector<std::string> series_files;
  for (const auto& s : r.series) {
    std::string stem = r.name + "_" + s.name;
    if (cfg.format == "json") {
      auto p = dir / (stem + ".json");
      atomic_write_file(p, s.series.to_json().dump(2) + "\n");
      written.push_back(p.string());
      series_files.push_back(p.filename().string());
    } else {
      auto p = dir / (stem + ".csv");
      atomic_write_file(p, s.series.to_csv());
      written.push_back(p.string());
      series_files.push_back(p.filename().string());
    }
  }
  nlohmann::json manifest = {{"experiment", r.name},
                             {"config",
                              {{"seed", cfg.seed},
                               {"format", cfg.format},
                               {"jobs", cfg.jobs},
                               {"budget_log2", cfg.budget_log2}}},
                             {"spec", r.spec_echo},
                             {"verdicts", verdicts_json(r.verdicts)},
                             {"all_pass", r.all_pass()},
                             {"series_files", series_files},
                             {"extra", r.extra},
                             {"wall_clock_ms", wall_ms}};
  auto mp = dir / (r.name + "_manifest.json");
  atomic_write_file(mp, manifest.dump(2) + "\n");
  written.push_back(mp.string());
  return written;
}

}  // namespace seqpred
