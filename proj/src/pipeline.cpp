#include "sdlab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sdlab/ising.hpp"
#include "sdlab/photonics.hpp"
#include "sdlab/projectile.hpp"
#include "sdlab/rng.hpp"

namespace sdlab::pipe {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::validate() const {
  if (exemplar != "projectile" && exemplar != "ising" && exemplar != "surrogate")
    throw std::invalid_argument("pipeline: unknown exemplar '" + exemplar + "'");
  if (exemplar == "projectile" && stage_dae && !stage_al)
    throw std::invalid_argument("pipeline: the dae stage needs the al stage's records");
  if (stage_eql && !stage_al)
    throw std::invalid_argument("pipeline: the eql stage needs an upstream dataset source");
  if (al_budget <= al_n_init)
    throw std::invalid_argument("pipeline: al budget must exceed n_init");
  if (eql_sparsity <= 0.0 || eql_sparsity >= 1.0)
    throw std::invalid_argument("pipeline: eql sparsity must be in (0,1)");
}

PipelineConfig config_from_kv(const io::KvConfig& kv) {
  PipelineConfig c;
  c.exemplar = kv.get_string("", "exemplar", kv.get_string("run", "exemplar", ""));
  c.seed = static_cast<std::uint64_t>(kv.get_int("", "seed", kv.get_int("run", "seed", 1)));
  c.run_dir = kv.get_string("", "run_dir", kv.get_string("run", "run_dir", ""));
  c.base_dir = kv.get_string("", "base_dir", kv.get_string("run", "base_dir", "runs"));

  c.stage_vae = kv.get_bool("stages", "vae", c.exemplar == "projectile");
  c.stage_al = kv.get_bool("stages", "al", true);
  c.stage_dae = kv.get_bool("stages", "dae", c.exemplar == "projectile");
  c.stage_eql = kv.get_bool("stages", "eql", true);

  c.vae_epochs = static_cast<std::size_t>(kv.get_int("vae", "epochs", 2000));
  c.vae_recon_stop = kv.get_double("vae", "recon_stop", 4e-3);

  c.al_n_init = static_cast<std::size_t>(kv.get_int(
      "al", "n_init", c.exemplar == "surrogate" ? 200 : (c.exemplar == "ising" ? 10 : 100)));
  c.al_budget = static_cast<std::size_t>(kv.get_int(
      "al", "budget", c.exemplar == "surrogate" ? 1000 : (c.exemplar == "ising" ? 50 : 500)));
  const std::string acq = kv.get_string("al", "acq", "ei");
  if (acq == "ei") {
    c.acq = opt::AcquisitionSpec::ei();
  } else if (acq == "ucb") {
    c.acq = opt::AcquisitionSpec::ucb(kv.get_double("al", "lambda", 0.5));
  } else {
    throw std::invalid_argument("pipeline: unknown acquisition '" + acq + "'");
  }

  c.ising_n_temps = static_cast<std::size_t>(kv.get_int("ising", "n_temps", 12));
  c.ising_beta_lo = kv.get_double("ising", "beta_lo", 0.45);
  c.ising_beta_hi = kv.get_double("ising", "beta_hi", 1.2);
  c.ising_repeats = static_cast<std::size_t>(kv.get_int("ising", "repeats", 5));
  c.ising_burn_in = static_cast<int>(kv.get_int("ising", "burn_in", 4000));
  c.ising_sample_sweeps = static_cast<int>(kv.get_int("ising", "sample_sweeps", 20000));

  c.dae_epochs = static_cast<std::size_t>(kv.get_int("dae", "epochs", 1200));
  c.dae_dist_weight = kv.get_double("dae", "dist_weight", 1.0);
  c.accel_keep_threshold = kv.get_double("dae", "accel_keep", 40.0);
  c.mean_accel_keep = kv.get_double("dae", "mean_accel_keep", 3.0);

  c.eql_sparsity = kv.get_double("eql", "sparsity", 0.90);
  c.eql_prune_fraction = kv.get_double("eql", "prune_fraction", 0.02);
  c.eql_retrain_epochs = static_cast<std::size_t>(kv.get_int("eql", "retrain_epochs", 10));
  c.eql_init_epochs = static_cast<std::size_t>(kv.get_int("eql", "init_epochs", 1500));
  c.eql_balance = kv.get_bool("eql", "balance", c.exemplar != "ising");
  c.simplify_tol = kv.get_double("eql", "simplify_tol", 0.05);

  c.validate();
  return c;
}

namespace {

std::string config_to_snapshot(const PipelineConfig& c) {
  std::ostringstream ss;
  ss << "exemplar=" << c.exemplar << ";seed=" << c.seed << ";vae_epochs=" << c.vae_epochs
     << ";al_n_init=" << c.al_n_init << ";al_budget=" << c.al_budget
     << ";acq=" << (c.acq.kind == opt::AcquisitionSpec::Kind::Ei ? "ei" : "ucb")
     << ";lambda=" << c.acq.lambda << ";n_temps=" << c.ising_n_temps
     << ";dae_epochs=" << c.dae_epochs << ";gamma=" << c.dae_dist_weight
     << ";sparsity=" << c.eql_sparsity << ";balance=" << c.eql_balance;
  return ss.str();
}

json factor_to_json(const eql::Factor& f);

json poly_to_json(const eql::Polynomial& p) {
  json terms = json::array();
  for (const auto& t : p.terms) {
    json jt;
    jt["coeff"] = t.coeff;
    json fs = json::array();
    for (const auto& f : t.factors) fs.push_back(factor_to_json(f));
    jt["factors"] = fs;
    terms.push_back(jt);
  }
  return terms;
}

json factor_to_json(const eql::Factor& f) {
  json j;
  j["power"] = f.power;
  if (f.kind == eql::Factor::Kind::Var) {
    j["kind"] = "var";
    j["index"] = f.var;
  } else {
    j["kind"] = "fn";
    j["fn"] = eql::fn_name(f.fn);
    j["arg"] = poly_to_json(*f.arg);
  }
  return j;
}

eql::Factor factor_from_json(const json& j);

eql::Polynomial poly_from_json(const json& terms) {
  eql::Polynomial p;
  for (const auto& jt : terms) {
    eql::Term t;
    t.coeff = jt.at("coeff");
    for (const auto& jf : jt.at("factors")) t.factors.push_back(factor_from_json(jf));
    p.terms.push_back(std::move(t));
  }
  return p;
}

eql::Factor factor_from_json(const json& j) {
  eql::Factor f;
  f.power = j.at("power");
  if (j.at("kind") == "var") {
    f.kind = eql::Factor::Kind::Var;
    f.var = j.at("index");
  } else {
    f.kind = eql::Factor::Kind::Func;
    const std::string fn = j.at("fn");
    if (fn == "sin") {
      f.fn = eql::Fn::Sin;
    } else if (fn == "cos") {
      f.fn = eql::Fn::Cos;
    } else if (fn == "sinh") {
      f.fn = eql::Fn::Sinh;
    } else {
      throw std::runtime_error("expr json: unknown fn " + fn);
    }
    f.arg = std::make_shared<const eql::Polynomial>(poly_from_json(j.at("arg")));
  }
  return f;
}

}  // namespace

std::string expr_to_json(const eql::SymbolicExpr& expr) {
  json j;
  j["format"] = "sdlab.expr";
  j["version"] = 1;
  j["vars"] = expr.var_names;
  j["terms"] = poly_to_json(expr.poly);
  return j.dump();
}

eql::SymbolicExpr expr_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "sdlab.expr") throw std::runtime_error("not an expression file");
  eql::SymbolicExpr e;
  e.var_names = j.at("vars").get<std::vector<std::string>>();
  e.poly = poly_from_json(j.at("terms"));
  return e;
}

void write_run_jsonl(const std::string& path, const std::vector<opt::ExperimentRecord>& records,
                     const std::string& acq_kind, const std::vector<double>& elapsed_ms) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_run_jsonl: cannot open " + path);
  for (std::size_t i = 0; i < records.size(); ++i) {
    json j;
    j["iter"] = i;
    j["z"] = records[i].z;
    if (records[i].ok) {
      j["y"] = records[i].y;
    } else {
      j["y"] = nullptr;  // objective returned a non-finite value
    }
    j["acq_kind"] = acq_kind;
    j["elapsed_ms"] = i < elapsed_ms.size() ? elapsed_ms[i] : 0.0;
    out << j.dump() << "\n";
  }
}

std::vector<RunLogRow> read_run_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_run_jsonl: cannot open " + path);
  std::vector<RunLogRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    RunLogRow r;
    r.iter = j.at("iter");
    r.z = j.at("z").get<std::vector<double>>();
    r.y = j.at("y").is_null() ? std::nan("") : j.at("y").get<double>();
    r.acq_kind = j.at("acq_kind");
    r.elapsed_ms = j.at("elapsed_ms");
    rows.push_back(std::move(r));
  }
  return rows;
}

void save_manifest(const RunManifest& m, const std::string& path) {
  json j;
  j["format"] = "sdlab.manifest";
  j["version"] = 1;
  j["software_version"] = m.version;
  j["exemplar"] = m.exemplar;
  j["seed"] = m.seed;
  j["config"] = m.config_snapshot;
  json stages = json::array();
  for (const auto& s : m.stages) {
    stages.push_back({{"name", s.name},
                      {"artifacts", s.artifacts},
                      {"checksums", s.checksums},
                      {"wall_ms", s.wall_ms},
                      {"skipped", s.skipped}});
  }
  j["stages"] = stages;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_manifest: cannot open " + path);
  out << j.dump(2);
}

RunManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
  json j;
  in >> j;
  if (j.value("format", "") != "sdlab.manifest")
    throw std::runtime_error("load_manifest: not a manifest");
  RunManifest m;
  m.version = j.at("software_version");
  m.exemplar = j.at("exemplar");
  m.seed = j.at("seed");
  m.config_snapshot = j.at("config");
  for (const auto& js : j.at("stages")) {
    StageRecord s;
    s.name = js.at("name");
    s.artifacts = js.at("artifacts").get<std::vector<std::string>>();
    s.checksums = js.at("checksums").get<std::vector<std::string>>();
    s.wall_ms = js.at("wall_ms");
    s.skipped = js.at("skipped");
    m.stages.push_back(std::move(s));
  }
  return m;
}

GainReport gain_factor(const GainInputs& in) {
  const double vals[] = {in.n_human,      in.n_auto,      in.variety_human,
                         in.variety_auto, in.value_human, in.value_auto};
  for (double v : vals)
    if (!(v > 0.0)) throw std::invalid_argument("gain_factor: inputs must be positive");
  GainReport r;
  r.inputs = in;
  r.experiments_ratio = in.n_human / in.n_auto;
  r.variety_ratio = in.variety_auto / in.variety_human;
  r.value_ratio = in.value_auto / in.value_human;
  r.gain = r.experiments_ratio * r.variety_ratio * r.value_ratio;
  return r;
}

std::vector<std::pair<std::string, GainReport>> gain_from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("gain_from_csv: cannot open " + path);
  std::vector<std::pair<std::string, GainReport>> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {  // header
      first = false;
      continue;
    }
    std::stringstream ss(line);
    std::string name, cell;
    std::getline(ss, name, ',');
    GainInputs g;
    double* slots[] = {&g.n_human,      &g.n_auto,      &g.variety_human,
                       &g.variety_auto, &g.value_human, &g.value_auto};
    for (double* slot : slots) {
      if (!std::getline(ss, cell, ',')) throw std::runtime_error("gain_from_csv: short row");
      *slot = std::stod(cell);
    }
    out.emplace_back(name, gain_factor(g));
  }
  return out;
}

namespace {

struct StageRunner {
  RunManifest& manifest;
  const std::string& dir;

  // true when a prior manifest recorded this stage with artifacts that are
  // all still present and checksum-identical
  bool resumable(const RunManifest& prior, const std::string& name,
                 const std::vector<std::string>& artifacts) const {
    for (const auto& s : prior.stages) {
      if (s.name != name || s.artifacts != artifacts) continue;
      if (s.checksums.size() != s.artifacts.size()) return false;
      for (std::size_t i = 0; i < s.artifacts.size(); ++i) {
        const std::string p = dir + "/" + s.artifacts[i];
        if (!io::file_exists(p) || io::file_checksum(p) != s.checksums[i]) return false;
      }
      return true;
    }
    return false;
  }

  void record(const std::string& name, const std::vector<std::string>& artifacts, double wall_ms,
              bool skipped) {
    StageRecord s;
    s.name = name;
    s.artifacts = artifacts;
    for (const auto& a : artifacts) s.checksums.push_back(io::file_checksum(dir + "/" + a));
    s.wall_ms = wall_ms;
    s.skipped = skipped;
    manifest.stages.push_back(std::move(s));
  }
};

double now_ms() {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string timestamp_name(std::uint64_t seed) {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", std::localtime(&t));
  return std::string(buf) + "_seed" + std::to_string(seed);
}

eql::EqlSpec polynomial_eql_spec(std::size_t n_inputs, const PipelineConfig& cfg) {
  eql::EqlSpec spec;
  spec.n_inputs = n_inputs;
  for (int r = 0; r < 4; ++r) {
    spec.layer1.push_back(eql::Unit::Identity);
    spec.layer1.push_back(eql::Unit::Square);
    spec.layer1.push_back(eql::Unit::Product);
    spec.layer2.push_back(eql::Unit::Identity);
    if (r % 2 == 0) spec.layer2.push_back(eql::Unit::Product);
  }
  spec.layer1.push_back(eql::Unit::Identity);
  spec.target_sparsity = cfg.eql_sparsity;
  spec.prune_fraction = cfg.eql_prune_fraction;
  spec.retrain_epochs = cfg.eql_retrain_epochs;
  return spec;
}

void write_equation_artifacts(const std::string& dir, const std::string& target_name,
                              const eql::SymbolicExpr& expr) {
  std::ofstream txt(dir + "/equation.txt");
  txt << target_name << " = " << expr.to_string() << "\n";
  std::ofstream js(dir + "/equation.json");
  js << expr_to_json(expr);
}

eql::SymbolicExpr load_equation(const std::string& dir) {
  std::ifstream in(dir + "/equation.json");
  std::stringstream ss;
  ss << in.rdbuf();
  return expr_from_json(ss.str());
}

// ---- projectile chain ------------------------------------------------------

void run_projectile(const PipelineConfig& cfg, const std::string& dir, StageRunner& runner,
                    const RunManifest& prior, PipelineResult& result) {
  const ex::ProjectileDataset dataset = ex::make_projectile_dataset();
  vae::VaeParams vae_params;
  std::vector<RunLogRow> al_rows;
  std::vector<dae::DistilledRow> distilled;

  const std::vector<std::string> vae_arts{"vae.ckpt.json"};
  if (cfg.stage_vae) {
    const double t0 = now_ms();
    if (runner.resumable(prior, "vae", vae_arts)) {
      vae_params = vae::load_checkpoint(dir + "/vae.ckpt.json");
      runner.record("vae", vae_arts, now_ms() - t0, true);
    } else {
      vae::VaeTrainOptions opt;
      opt.recon_stop = cfg.vae_recon_stop;
      opt.lr_halve_every = 400;
      opt.recon_weight = 4.0 * ex::kTrajectorySamples;
      auto res =
          vae::train_vae(vae::VaeSpec::projectile(), dataset.normalized, cfg.vae_epochs, cfg.seed, opt);
      vae_params = std::move(res.params);
      vae::save_checkpoint(vae_params, dir + "/vae.ckpt.json");
      runner.record("vae", vae_arts, now_ms() - t0, false);
    }
  }

  const std::vector<std::string> al_arts{"al_run.jsonl"};
  if (cfg.stage_al) {
    const double t0 = now_ms();
    if (runner.resumable(prior, "al", al_arts)) {
      al_rows = read_run_jsonl(dir + "/al_run.jsonl");
      runner.record("al", al_arts, now_ms() - t0, true);
    } else {
      auto objective = [&](const std::vector<double>& z) {
        // decoder roughness swamps raw second differences; the smoothing
        // window passes true parabolas through exactly
        const auto smooth = dae::savitzky_golay(vae::generate(vae_params, z), 21, 3);
        return -ex::accel_objective(ex::denormalize_trajectory(dataset, smooth));
      };
      const opt::Bounds bounds = opt::symmetric_box(vae_params.spec.latent_dim, 3.0);
      const auto res = opt::al_loop(objective, vae_params.spec.latent_dim, bounds, cfg.al_n_init,
                                    cfg.al_budget, cfg.acq, cfg.seed);
      const std::vector<double> stamps(res.records.size(), 0.0);
      const std::string kind = cfg.acq.kind == opt::AcquisitionSpec::Kind::Ei ? "ei" : "ucb";
      write_run_jsonl(dir + "/al_run.jsonl", res.records, kind, stamps);
      al_rows = read_run_jsonl(dir + "/al_run.jsonl");
      runner.record("al", al_arts, now_ms() - t0, false);
    }
  }

  const std::vector<std::string> dae_arts{"distilled.csv", "dae.ckpt.json"};
  if (cfg.stage_dae) {
    const double t0 = now_ms();
    if (runner.resumable(prior, "dae", dae_arts)) {
      const auto table = io::read_csv(dir + "/distilled.csv");
      const std::size_t zc1 = table.column("z_1"), zc2 = table.column("z_2");
      const std::size_t uc = table.column("attr_initial_velocity"), yc = table.column("y");
      for (const auto& row : table.rows)
        distilled.push_back({{row[zc1], row[zc2]}, {row[uc]}, row[yc]});
      runner.record("dae", dae_arts, now_ms() - t0, true);
    } else {
      // decode the AL-selected points; keep near-constant-acceleration ones
      struct Cand {
        std::vector<double> pattern;  // normalized decode (dae input)
        double u;                     // physical launch speed
        double height;                // physical maximum height
        double accel_dev;             // RMS criterion on the smoothed curve
        double mean_dev;              // |mean accel + g| on the raw curve
      };
      std::vector<Cand> all;
      for (const auto& row : al_rows) {
        if (!std::isfinite(row.y)) continue;
        const auto decoded = vae::generate(vae_params, row.z);
        const auto physical = ex::denormalize_trajectory(dataset, decoded);
        const auto smooth =
            ex::denormalize_trajectory(dataset, dae::savitzky_golay(decoded, 21, 3));
        all.push_back({decoded, ex::launch_speed(physical), ex::max_height(physical),
                       ex::accel_objective(smooth),
                       std::abs(ex::mean_acceleration(physical) + ex::kGravity)});
      }
      // the RMS criterion has a decoder-noise floor; the telescoping mean
      // catches smooth arcs whose constant acceleration is simply wrong
      std::vector<std::size_t> keep;
      for (std::size_t i = 0; i < all.size(); ++i)
        if (all[i].accel_dev <= cfg.accel_keep_threshold &&
            all[i].mean_dev <= cfg.mean_accel_keep)
          keep.push_back(i);
      if (keep.size() < 100) {
        // thresholds too strict for this run; fall back to the best hundred
        std::vector<std::size_t> order(all.size());
        for (std::size_t i = 0; i < all.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
          return std::max(all[a].accel_dev / 10.0, all[a].mean_dev) <
                 std::max(all[b].accel_dev / 10.0, all[b].mean_dev);
        });
        keep.assign(order.begin(), order.begin() + std::min<std::size_t>(100, order.size()));
      }

      std::vector<std::vector<double>> experiments, attrs;
      std::vector<double> heights;
      for (std::size_t i : keep) {
        experiments.push_back(all[i].pattern);
        attrs.push_back({all[i].u});
        heights.push_back(all[i].height);
      }
      dae::DaeSpec spec;
      spec.input_dim = ex::kTrajectorySamples;
      spec.latent_dim = 2;
      spec.hidden = {64, 32};
      spec.pairs = {{0, dae::Attribute::InitialVelocity}};
      spec.dist_weight = cfg.dae_dist_weight;
      auto res = dae::train_dae_with_attributes(spec, experiments, attrs, heights, cfg.dae_epochs,
                                                cfg.seed);
      distilled = res.distilled;
      result.spearman_per_pair = res.spearman_per_pair;
      dae::save_checkpoint(res.params, dir + "/dae.ckpt.json");

      // standardize the reported latent per dimension; downstream fits see
      // well-scaled inputs and rank statistics are unchanged
      for (std::size_t d = 0; d < 2; ++d) {
        double mean = 0.0, var = 0.0;
        for (const auto& row : distilled) mean += row.z[d];
        mean /= static_cast<double>(distilled.size());
        for (const auto& row : distilled) var += (row.z[d] - mean) * (row.z[d] - mean);
        var /= static_cast<double>(distilled.size());
        const double sd = var > 1e-24 ? std::sqrt(var) : 1.0;
        for (auto& row : distilled) row.z[d] = (row.z[d] - mean) / sd;
      }

      io::CsvTable table;
      table.header = {"z_1", "z_2", "attr_initial_velocity", "y"};
      for (const auto& row : distilled)
        table.rows.push_back({row.z[0], row.z[1], row.attributes[0], row.y});
      io::write_csv(dir + "/distilled.csv", table);
      runner.record("dae", dae_arts, now_ms() - t0, false);
    }
  }

  const std::vector<std::string> eql_arts{"equation.txt", "equation.json"};
  if (cfg.stage_eql) {
    const double t0 = now_ms();
    if (runner.resumable(prior, "eql", eql_arts)) {
      result.equation = load_equation(dir);
      runner.record("eql", eql_arts, now_ms() - t0, true);
    } else {
      // the regularized latent is the discovered relevant variable; the
      // unregularized one is collinear with it on the filtered set
      eql::Dataset data;
      for (const auto& row : distilled) {
        data.X.push_back({row.z[0]});
        data.y.push_back(row.y);
      }
      eql::Dataset fit_data = cfg.eql_balance ? eql::balance_dataset(data) : data;
      eql::EqlSpec spec = polynomial_eql_spec(1, cfg);
      eql::EqlTrainOptions opt;
      opt.init_epochs = cfg.eql_init_epochs;
      auto fit = eql::train_prune_loop(spec, fit_data, cfg.seed, opt);
      auto expr = eql::readout_equation(fit.net, {"z1"});
      eql::SimplifyOptions sopt;
      sopt.tol = cfg.simplify_tol;
      auto simplified = eql::simplify_equation(expr, fit_data, sopt);
      result.equation = simplified;
      write_equation_artifacts(dir, "H", simplified);
      runner.record("eql", eql_arts, now_ms() - t0, false);
    }
  }
}

// ---- ising chain -------------------------------------------------------------

void run_ising(const PipelineConfig& cfg, const std::string& dir, StageRunner& runner,
               const RunManifest& prior, PipelineResult& result) {
  const std::vector<std::string> al_arts{"measurements.csv"};
  io::CsvTable measurements;
  if (cfg.stage_al) {
    const double t0 = now_ms();
    if (runner.resumable(prior, "ising-al", al_arts)) {
      measurements = io::read_csv(dir + "/measurements.csv");
      runner.record("ising-al", al_arts, now_ms() - t0, true);
    } else {
      measurements.header = {"beta", "repeat", "m_init_best", "m_abs",
                             "y",    "tsol_al", "tsol_zero"};
      const ex::TsolOptions topt;
      for (std::size_t ti = 0; ti < cfg.ising_n_temps; ++ti) {
        const double frac = cfg.ising_n_temps == 1
                                ? 0.0
                                : static_cast<double>(ti) /
                                      static_cast<double>(cfg.ising_n_temps - 1);
        const double beta = cfg.ising_beta_lo + (cfg.ising_beta_hi - cfg.ising_beta_lo) * frac;
        const std::uint64_t beta_seed = Rng::mix(cfg.seed, 0xbe7a00 + ti);
        auto objective = [&](const std::vector<double>& z) {
          return ex::ising_al_objective(z[0], beta, beta_seed, 3, topt);
        };
        opt::Bounds bounds;
        bounds.lo = {-1.0};
        bounds.hi = {1.0};
        const auto res =
            opt::al_loop(objective, 1, bounds, cfg.al_n_init, cfg.al_budget, cfg.acq, beta_seed);
        const double m_best = res.best_z[0];
        const double tsol_al = -res.best_y;
        const double tsol_zero = -ex::ising_al_objective(0.0, beta, beta_seed, 3, topt);
        for (std::size_t r = 0; r < cfg.ising_repeats; ++r) {
          const auto stats = ex::sample_magnetization(
              beta, m_best, cfg.ising_burn_in, cfg.ising_sample_sweeps, Rng::mix(beta_seed, 0x9e0 + r));
          const double m8 = std::pow(stats.mean_abs_m, 8.0);
          const double y = std::pow(1.0 / std::max(1e-12, 1.0 - m8), 0.25);
          measurements.rows.push_back({beta, static_cast<double>(r), m_best, stats.mean_abs_m, y,
                                       tsol_al, tsol_zero});
        }
      }
      io::write_csv(dir + "/measurements.csv", measurements);
      runner.record("ising-al", al_arts, now_ms() - t0, false);
    }
  }

  const std::vector<std::string> eql_arts{"equation.txt", "equation.json"};
  if (cfg.stage_eql) {
    const double t0 = now_ms();
    if (runner.resumable(prior, "eql", eql_arts)) {
      result.equation = load_equation(dir);
      runner.record("eql", eql_arts, now_ms() - t0, true);
    } else {
      eql::Dataset data;
      const std::size_t bc = measurements.column("beta"), yc = measurements.column("y");
      for (const auto& row : measurements.rows) {
        data.X.push_back({row[bc]});
        data.y.push_back(row[yc]);
      }
      if (cfg.eql_balance) data = eql::balance_dataset(data);
      eql::EqlSpec spec;
      spec.n_inputs = 1;
      spec.layer1 = {eql::Unit::Sinh, eql::Unit::Sinh, eql::Unit::Sinh, eql::Unit::Identity,
                     eql::Unit::Identity};
      spec.layer2 = {eql::Unit::Identity, eql::Unit::Identity, eql::Unit::Identity};
      spec.target_sparsity = cfg.eql_sparsity;
      spec.prune_fraction = cfg.eql_prune_fraction;
      spec.retrain_epochs = cfg.eql_retrain_epochs;
      eql::EqlTrainOptions opt;
      opt.init_epochs = cfg.eql_init_epochs;
      auto fit = eql::train_prune_loop(spec, data, cfg.seed, opt);
      auto expr = eql::readout_equation(fit.net, {"beta"});
      eql::SimplifyOptions sopt;
      sopt.tol = cfg.simplify_tol;
      auto simplified = eql::simplify_equation(expr, data, sopt);
      result.equation = simplified;
      write_equation_artifacts(dir, "y", simplified);
      runner.record("eql", eql_arts, now_ms() - t0, false);
    }
  }
}

// ---- surrogate chain ---------------------------------------------------------

void run_surrogate(const PipelineConfig& cfg, const std::string& dir, StageRunner& runner,
                   const RunManifest& prior, PipelineResult& result) {
  const std::vector<std::string> al_arts{"al_run.jsonl"};
  if (cfg.stage_al) {
    const double t0 = now_ms();
    if (runner.resumable(prior, "al", al_arts)) {
      runner.record("al", al_arts, now_ms() - t0, true);
    } else {
      auto objective = [](const std::vector<double>& z) { return ex::directivity_surrogate(z); };
      const opt::Bounds bounds = opt::symmetric_box(4, 3.0);
      const auto res =
          opt::al_loop(objective, 4, bounds, cfg.al_n_init, cfg.al_budget, cfg.acq, cfg.seed);
      const std::vector<double> stamps(res.records.size(), 0.0);
      const std::string kind = cfg.acq.kind == opt::AcquisitionSpec::Kind::Ei ? "ei" : "ucb";
      write_run_jsonl(dir + "/al_run.jsonl", res.records, kind, stamps);
      runner.record("al", al_arts, now_ms() - t0, false);
    }
  }

  const std::vector<std::string> eql_arts{"eql_dataset.csv", "equation.txt", "equation.json"};
  if (cfg.stage_eql) {
    const double t0 = now_ms();
    if (runner.resumable(prior, "eql", eql_arts)) {
      result.equation = load_equation(dir);
      runner.record("eql", eql_arts, now_ms() - t0, true);
    } else {
      // 1000 seeded uniform probes of the surrogate across the box
      eql::Dataset data;
      Rng rng(Rng::mix(cfg.seed, 0x5a3ull));
      io::CsvTable table;
      table.header = {"z1", "z2", "z3", "z4", "y"};
      for (int i = 0; i < 1000; ++i) {
        std::vector<double> z(4);
        for (auto& v : z) v = rng.uniform(-3, 3);
        const double y = ex::directivity_surrogate(z);
        data.X.push_back(z);
        data.y.push_back(y);
        table.rows.push_back({z[0], z[1], z[2], z[3], y});
      }
      io::write_csv(dir + "/eql_dataset.csv", table);

      eql::Dataset fit_data = cfg.eql_balance ? eql::balance_dataset(data) : data;
      eql::EqlSpec spec = polynomial_eql_spec(4, cfg);
      eql::EqlTrainOptions opt;
      opt.init_epochs = cfg.eql_init_epochs;
      auto fit = eql::train_prune_loop(spec, fit_data, cfg.seed, opt);
      auto expr = eql::readout_equation(fit.net, {"z1", "z2", "z3", "z4"});
      eql::SimplifyOptions sopt;
      sopt.tol = cfg.simplify_tol;
      auto simplified = eql::simplify_equation(expr, data, sopt);
      result.equation = simplified;
      write_equation_artifacts(dir, "De", simplified);
      runner.record("eql", eql_arts, now_ms() - t0, false);
    }
  }
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
  PipelineResult result;
  try {
    config.validate();
  } catch (const std::exception& e) {
    result.exit_code = 3;
    result.message = e.what();
    return result;
  }

  std::string dir = config.run_dir;
  if (dir.empty())
    dir = config.base_dir + "/" + config.exemplar + "_" + timestamp_name(config.seed);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    result.exit_code = 3;
    result.message = "cannot create run directory " + dir;
    return result;
  }
  result.run_dir = dir;

  RunManifest prior;
  const std::string manifest_path = dir + "/manifest.json";
  if (io::file_exists(manifest_path)) {
    try {
      prior = load_manifest(manifest_path);
    } catch (const std::exception&) {
      prior = RunManifest{};  // unreadable manifest: recompute everything
    }
  }

  result.manifest.version = kVersion;
  result.manifest.exemplar = config.exemplar;
  result.manifest.seed = config.seed;
  result.manifest.config_snapshot = config_to_snapshot(config);

  StageRunner runner{result.manifest, dir};
  try {
    if (config.exemplar == "projectile") {
      run_projectile(config, dir, runner, prior, result);
    } else if (config.exemplar == "ising") {
      run_ising(config, dir, runner, prior, result);
    } else {
      run_surrogate(config, dir, runner, prior, result);
    }
  } catch (const std::exception& e) {
    // artifacts of completed stages stay on disk for resume
    save_manifest(result.manifest, manifest_path);
    result.exit_code = 2;
    result.message = e.what();
    return result;
  }
  save_manifest(result.manifest, manifest_path);
  return result;
}

void export_plot_data(const std::string& run_dir, const std::string& which,
                      const std::string& out_path) {
  if (which == "al") {
    if (!io::file_exists(run_dir + "/al_run.jsonl"))
      throw std::runtime_error("export_plot_data: no al artifact in " + run_dir);
    const auto rows = read_run_jsonl(run_dir + "/al_run.jsonl");
    io::CsvTable t;
    t.header = {"iter", "y", "best_so_far"};
    double best = -1e300;
    for (const auto& r : rows) {
      if (std::isfinite(r.y)) best = std::max(best, r.y);
      t.rows.push_back({static_cast<double>(r.iter), r.y, best});
    }
    io::write_csv(out_path, t);
    return;
  }
  if (which == "dae") {
    if (!io::file_exists(run_dir + "/distilled.csv"))
      throw std::runtime_error("export_plot_data: no dae artifact in " + run_dir);
    io::write_csv(out_path, io::read_csv(run_dir + "/distilled.csv"));
    return;
  }
  if (which == "eql") {
    std::string data_csv;
    if (io::file_exists(run_dir + "/eql_dataset.csv")) {
      data_csv = run_dir + "/eql_dataset.csv";
    } else if (io::file_exists(run_dir + "/distilled.csv")) {
      data_csv = run_dir + "/distilled.csv";
    } else if (io::file_exists(run_dir + "/measurements.csv")) {
      data_csv = run_dir + "/measurements.csv";
    } else {
      throw std::runtime_error("export_plot_data: no dataset artifact in " + run_dir);
    }
    std::ifstream in(run_dir + "/equation.json");
    if (!in) throw std::runtime_error("export_plot_data: no equation artifact in " + run_dir);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto expr = expr_from_json(ss.str());
    const auto t = io::read_csv(data_csv);
    const std::size_t yc = t.column("y");
    // map the expression variables onto dataset columns by name, with the
    // distilled z_i spelling as a fallback
    std::vector<std::size_t> in_cols;
    for (std::size_t v = 0; v < expr.var_names.size(); ++v) {
      const std::string& name = expr.var_names[v];
      bool found = false;
      for (std::size_t c = 0; c < t.header.size() && !found; ++c) {
        if (t.header[c] == name) {
          in_cols.push_back(c);
          found = true;
        }
      }
      if (!found && name.size() >= 2 && name[0] == 'z') {
        const std::string alt = "z_" + name.substr(1);
        for (std::size_t c = 0; c < t.header.size() && !found; ++c)
          if (t.header[c] == alt) {
            in_cols.push_back(c);
            found = true;
          }
      }
      if (!found) throw std::runtime_error("export_plot_data: no column for variable " + name);
    }
    io::CsvTable out;
    out.header = expr.var_names;
    out.header.push_back("y");
    out.header.push_back("equation");
    out.header.push_back("abs_err");
    for (const auto& row : t.rows) {
      std::vector<double> x;
      for (std::size_t c : in_cols) x.push_back(row[c]);
      const double pred = expr.eval(x);
      std::vector<double> orow = x;
      orow.push_back(row[yc]);
      orow.push_back(pred);
      orow.push_back(std::abs(pred - row[yc]));
      out.rows.push_back(std::move(orow));
    }
    io::write_csv(out_path, out);
    return;
  }
  throw std::invalid_argument("export_plot_data: unknown kind '" + which + "'");
}

}  // namespace sdlab::pipe
