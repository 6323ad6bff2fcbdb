#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdlab/active_learning.hpp"
#include "sdlab/dae.hpp"
#include "sdlab/eql.hpp"
#include "sdlab/expr.hpp"
#include "sdlab/io.hpp"
#include "sdlab/vae.hpp"

namespace sdlab::pipe {

inline constexpr const char* kVersion = "0.1.0";

// Four-stage chain; which stages apply depends on the exemplar (the Ising
// chain skips straight from measurements to the equation learner).
struct PipelineConfig {
  std::string exemplar;  // projectile | ising | surrogate
  std::uint64_t seed = 1;
  std::string run_dir;          // explicit run directory (resumable)
  std::string base_dir = "runs";  // used when run_dir is empty

  bool stage_vae = true;
  bool stage_al = true;
  bool stage_dae = true;
  bool stage_eql = true;

  // vae stage
  std::size_t vae_epochs = 2000;
  double vae_recon_stop = 4e-3;

  // al stage
  std::size_t al_n_init = 100;
  std::size_t al_budget = 500;
  opt::AcquisitionSpec acq = opt::AcquisitionSpec::ei();

  // ising measurement stage
  std::size_t ising_n_temps = 12;
  double ising_beta_lo = 0.45;
  double ising_beta_hi = 1.2;
  std::size_t ising_repeats = 5;
  int ising_burn_in = 4000;
  int ising_sample_sweeps = 20000;

  // dae stage
  std::size_t dae_epochs = 1200;
  double dae_dist_weight = 1.0;
  double accel_keep_threshold = 40.0;  // m/s^2 RMS deviation filter (smoothed decode)
  double mean_accel_keep = 3.0;        // |mean accel + g| filter (raw decode)

  // eql stage
  double eql_sparsity = 0.90;
  double eql_prune_fraction = 0.02;
  std::size_t eql_retrain_epochs = 10;
  std::size_t eql_init_epochs = 1500;
  bool eql_balance = true;
  double simplify_tol = 0.05;

  void validate() const;  // throws std::invalid_argument on bad combinations
};

PipelineConfig config_from_kv(const io::KvConfig& kv);

struct StageRecord {
  std::string name;
  std::vector<std::string> artifacts;  // relative to the run directory
  std::vector<std::string> checksums;
  double wall_ms = 0.0;
  bool skipped = false;  // resumed from existing artifacts
};

struct RunManifest {
  std::string version;
  std::string exemplar;
  std::uint64_t seed = 0;
  std::string config_snapshot;
  std::vector<StageRecord> stages;
};

void save_manifest(const RunManifest& m, const std::string& path);
RunManifest load_manifest(const std::string& path);

struct PipelineResult {
  RunManifest manifest;
  std::string run_dir;
  int exit_code = 0;       // 0 ok, 2 stage failure, 3 invalid config
  std::string message;

  // in-memory results for callers that want them (always set for the
  // stages that ran or were resumed)
  std::optional<eql::SymbolicExpr> equation;
  std::vector<double> spearman_per_pair;
};

PipelineResult run_pipeline(const PipelineConfig& config);

// Table-style gain factor arithmetic.
struct GainInputs {
  double n_human = 0.0, n_auto = 0.0;
  double variety_human = 0.0, variety_auto = 0.0;
  double value_human = 0.0, value_auto = 0.0;
};

struct GainReport {
  GainInputs inputs;
  double experiments_ratio = 0.0;
  double variety_ratio = 0.0;
  double value_ratio = 0.0;
  double gain = 0.0;
};

GainReport gain_factor(const GainInputs& in);

// one report per data row: name,n_human,n_auto,variety_human,variety_auto,
// value_human,value_auto
std::vector<std::pair<std::string, GainReport>> gain_from_csv(const std::string& path);

// plot-ready CSV extraction from a finished run directory
void export_plot_data(const std::string& run_dir, const std::string& which,
                      const std::string& out_path);

// symbolic expression (de)serialization shared by artifacts
std::string expr_to_json(const eql::SymbolicExpr& expr);
eql::SymbolicExpr expr_from_json(const std::string& text);

// jsonl helpers for AL run logs
void write_run_jsonl(const std::string& path, const std::vector<opt::ExperimentRecord>& records,
                     const std::string& acq_kind, const std::vector<double>& elapsed_ms);
struct RunLogRow {
  std::size_t iter;
  std::vector<double> z;
  double y;
  std::string acq_kind;
  double elapsed_ms;
};
std::vector<RunLogRow> read_run_jsonl(const std::string& path);

}  // namespace sdlab::pipe
