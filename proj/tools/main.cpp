#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdlab/active_learning.hpp"
#include "sdlab/dae.hpp"
#include "sdlab/eql.hpp"
#include "sdlab/ising.hpp"
#include "sdlab/photonics.hpp"
#include "sdlab/pipeline.hpp"
#include "sdlab/projectile.hpp"
#include "sdlab/rng.hpp"
#include "sdlab/vae.hpp"

using namespace sdlab;

namespace {

int cmd_train_vae(const std::string& exemplar, std::size_t epochs, std::uint64_t seed,
                  const std::string& out) {
  vae::VaeSpec spec;
  std::vector<std::vector<double>> data;
  if (exemplar == "projectile") {
    spec = vae::VaeSpec::projectile();
    data = ex::make_projectile_dataset().normalized;
  } else if (exemplar == "pump") {
    spec = vae::VaeSpec::pump_pattern();
    // wrapped aperiodic pump curves over the published sweep boxes
    Rng rng(Rng::mix(seed, 0x9b2ull));
    for (int i = 0; i < 2000; ++i) {
      const double a = rng.uniform(-800, 800);
      const double b = rng.uniform(-400, 400);
      const double c = rng.uniform(-200, 200);
      data.push_back(ex::wrap_pattern(ex::pump_pattern(a, b, c).raw));
    }
  } else {
    std::fprintf(stderr, "unknown exemplar '%s' (projectile|pump)\n", exemplar.c_str());
    return 3;
  }
  vae::VaeTrainOptions opt;
  opt.lr_halve_every = 400;
  auto res = vae::train_vae(spec, data, epochs, seed, opt);
  vae::save_checkpoint(res.params, out);
  std::printf("trained %zu epochs, final recon mse %.6g, checkpoint %s\n",
              res.recon_history.size(), res.recon_history.back(), out.c_str());
  if (!res.smooth_decreasing)
    std::printf("warning: loss history is not monotone under a 10-epoch window\n");
  return 0;
}

opt::Objective named_objective(const std::string& name, const std::string& vae_ckpt,
                               std::shared_ptr<void>& keepalive, std::size_t& dim,
                               opt::Bounds& bounds) {
  if (name == "grating") {
    dim = 1;
    bounds.lo = {1.0};
    bounds.hi = {160.0};
    return [](const std::vector<double>& z) {
      return ex::grating_signal(static_cast<int>(std::lround(z[0])));
    };
  }
  if (name == "surrogate") {
    dim = 4;
    bounds = opt::symmetric_box(4, 3.0);
    return [](const std::vector<double>& z) { return ex::directivity_surrogate(z); };
  }
  if (name == "sphere") {
    dim = 4;
    bounds = opt::symmetric_box(4, 3.0);
    return [](const std::vector<double>& z) {
      double s = 0.0;
      for (double v : z) s += v * v;
      return -s;
    };
  }
  if (name.rfind("ising", 0) == 0) {
    double beta = 1.0;  // ising or ising@beta
    const auto at = name.find('@');
    if (at != std::string::npos) beta = std::stod(name.substr(at + 1));
    dim = 1;
    bounds.lo = {-1.0};
    bounds.hi = {1.0};
    return [beta](const std::vector<double>& z) {
      return ex::ising_al_objective(z[0], beta, 7701);
    };
  }
  if (name == "projectile-accel") {
    if (vae_ckpt.empty())
      throw std::invalid_argument("objective projectile-accel needs --vae <checkpoint>");
    auto ctx = std::make_shared<std::pair<ex::ProjectileDataset, vae::VaeParams>>(
        ex::make_projectile_dataset(), vae::load_checkpoint(vae_ckpt));
    keepalive = ctx;
    dim = ctx->second.spec.latent_dim;
    bounds = opt::symmetric_box(dim, 3.0);
    return [ctx](const std::vector<double>& z) {
      const auto smooth = dae::savitzky_golay(vae::generate(ctx->second, z), 21, 3);
      return -ex::accel_objective(ex::denormalize_trajectory(ctx->first, smooth));
    };
  }
  throw std::invalid_argument("unknown objective '" + name + "'");
}

int cmd_active_learn(const std::string& objective_name, const std::string& acq, double lambda,
                     std::size_t n_init, std::size_t budget, std::uint64_t seed,
                     const std::string& vae_ckpt, const std::string& out) {
  std::shared_ptr<void> keepalive;
  std::size_t dim = 0;
  opt::Bounds bounds;
  const auto objective = named_objective(objective_name, vae_ckpt, keepalive, dim, bounds);
  const opt::AcquisitionSpec spec =
      acq == "ucb" ? opt::AcquisitionSpec::ucb(lambda) : opt::AcquisitionSpec::ei();
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = opt::al_loop(objective, dim, bounds, n_init, budget, spec, seed);
  const double total_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  std::vector<double> stamps(res.records.size(), total_ms / res.records.size());
  pipe::write_run_jsonl(out, res.records, acq, stamps);
  std::printf("budget %zu spent, best y %.6g at z = [", res.records.size(), res.best_y);
  for (std::size_t i = 0; i < res.best_z.size(); ++i)
    std::printf("%s%.4f", i ? ", " : "", res.best_z[i]);
  std::printf("], log %s\n", out.c_str());
  return 0;
}

int cmd_distill(const std::string& run_jsonl, const std::string& vae_ckpt,
                const std::string& attrs_csv, std::size_t latent_dim, std::size_t epochs,
                std::uint64_t seed, const std::string& out) {
  const auto rows = pipe::read_run_jsonl(run_jsonl);
  const auto vp = vae::load_checkpoint(vae_ckpt);
  std::vector<dae::Attribute> attrs;
  std::stringstream ss(attrs_csv);
  std::string name;
  while (std::getline(ss, name, ',')) attrs.push_back(dae::attribute_from_name(name));
  if (attrs.empty()) {
    std::fprintf(stderr, "no attributes given\n");
    return 3;
  }
  std::vector<std::vector<double>> experiments;
  std::vector<double> ys;
  for (const auto& r : rows) {
    if (!std::isfinite(r.y)) continue;
    experiments.push_back(vae::generate(vp, r.z));
    ys.push_back(r.y);
  }
  dae::DaeSpec spec;
  spec.input_dim = vp.spec.input_dim;
  spec.latent_dim = latent_dim;
  spec.hidden = {64, 32};
  for (std::size_t i = 0; i < attrs.size(); ++i) spec.pairs.push_back({i, attrs[i]});
  auto res = dae::train_dae(spec, experiments, ys, epochs, seed);
  io::CsvTable table;
  for (std::size_t d = 0; d < latent_dim; ++d) table.header.push_back("z_" + std::to_string(d + 1));
  for (auto a : attrs) table.header.push_back(std::string("attr_") + dae::attribute_name(a));
  table.header.push_back("y");
  for (const auto& row : res.distilled) {
    std::vector<double> r = row.z;
    r.insert(r.end(), row.attributes.begin(), row.attributes.end());
    r.push_back(row.y);
    table.rows.push_back(std::move(r));
  }
  io::write_csv(out, table);
  for (std::size_t i = 0; i < res.spearman_per_pair.size(); ++i)
    std::printf("spearman(z_%zu, %s) = %.4f\n", spec.pairs[i].latent_index + 1,
                dae::attribute_name(spec.pairs[i].attribute), res.spearman_per_pair[i]);
  std::printf("distilled %zu rows to %s\n", table.rows.size(), out.c_str());
  return 0;
}

int cmd_learn_equation(const std::string& data_csv, const std::string& target,
                       const std::string& dict, double sparsity, std::uint64_t seed,
                       const std::string& out) {
  const auto table = io::read_csv(data_csv);
  const std::size_t yc = table.column(target);
  std::vector<std::string> var_names;
  std::vector<std::size_t> var_cols;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c == yc || table.header[c].rfind("attr_", 0) == 0) continue;
    var_cols.push_back(c);
    var_names.push_back(table.header[c]);
  }
  eql::Dataset data;
  for (const auto& row : table.rows) {
    std::vector<double> x;
    for (std::size_t c : var_cols) x.push_back(row[c]);
    data.X.push_back(std::move(x));
    data.y.push_back(row[yc]);
  }

  bool want_sin = false, want_sinh = false, want_sq = false, want_prod = false;
  {
    std::stringstream sd(dict);
    std::string u;
    while (std::getline(sd, u, ',')) {
      const eql::Unit unit = eql::unit_from_name(u);
      if (unit == eql::Unit::Sin || unit == eql::Unit::Cos) want_sin = true;
      if (unit == eql::Unit::Sinh) want_sinh = true;
      if (unit == eql::Unit::Square) want_sq = true;
      if (unit == eql::Unit::Product) want_prod = true;
    }
  }
  eql::EqlSpec spec;
  spec.n_inputs = var_cols.size();
  for (int r = 0; r < 4; ++r) {
    spec.layer1.push_back(eql::Unit::Identity);
    if (want_sq) spec.layer1.push_back(eql::Unit::Square);
    if (want_prod) spec.layer1.push_back(eql::Unit::Product);
    if (want_sin) spec.layer1.push_back(eql::Unit::Sin);
    if (want_sinh) spec.layer1.push_back(eql::Unit::Sinh);
    spec.layer2.push_back(eql::Unit::Identity);
    if (want_prod && r % 2 == 0) spec.layer2.push_back(eql::Unit::Product);
  }
  spec.target_sparsity = sparsity;
  auto fit = eql::train_prune_loop(spec, data, seed);
  auto expr = eql::readout_equation(fit.net, var_names);
  auto simplified = eql::simplify_equation(expr, data);
  std::ofstream txt(out);
  txt << target << " = " << simplified.to_string() << "\n";
  std::printf("%s = %s\n", target.c_str(), simplified.to_string().c_str());
  std::printf("baseline val mse %.6g, final val mse %.6g, sparsity %.3f, equation mse %.6g\n",
              fit.baseline_val_mse, fit.final_val_mse, fit.net.sparsity(),
              eql::dataset_mse(simplified, data));
  return 0;
}

int cmd_exemplar_ising(double beta, int sweeps, std::uint64_t seed, const std::string& out) {
  ex::IsingLattice lat = ex::IsingLattice::random_with_magnetization(32, 0.0, seed);
  Rng rng(Rng::mix(seed, 0x771));
  io::CsvTable t;
  t.header = {"sweep", "m", "abs_m", "energy"};
  for (int s = 1; s <= sweeps; ++s) {
    lat.metropolis_sweep(beta, rng);
    t.rows.push_back({static_cast<double>(s), lat.magnetization(), std::abs(lat.magnetization()),
                      lat.energy()});
  }
  if (!out.empty()) io::write_csv(out, t);
  std::printf("beta %.4f: final m %.5f, onsager %.5f\n", beta, lat.magnetization(),
              ex::onsager_magnetization(beta));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"self-driving discovery toolkit"};
  app.require_subcommand(1);

  auto* tv = app.add_subcommand("train-vae", "train a generative model on an exemplar corpus");
  std::string tv_exemplar = "projectile", tv_out = "vae.ckpt.json";
  std::size_t tv_epochs = 1200;
  std::uint64_t tv_seed = 1;
  tv->add_option("--exemplar", tv_exemplar, "projectile|pump");
  tv->add_option("--epochs", tv_epochs);
  tv->add_option("--seed", tv_seed);
  tv->add_option("--out", tv_out);

  auto* al = app.add_subcommand("active-learn", "run the GP active-learning loop");
  std::string al_obj = "grating", al_acq = "ei", al_out = "run.jsonl", al_vae;
  double al_lambda = 0.5;
  std::size_t al_init = 10, al_budget = 25;
  std::uint64_t al_seed = 1;
  al->add_option("--objective", al_obj, "grating|surrogate|sphere|ising[@beta]|projectile-accel");
  al->add_option("--acq", al_acq, "ei|ucb");
  al->add_option("--lambda", al_lambda);
  al->add_option("--n-init", al_init);
  al->add_option("--budget", al_budget);
  al->add_option("--seed", al_seed);
  al->add_option("--vae", al_vae, "vae checkpoint for decoded objectives");
  al->add_option("--out", al_out);

  auto* di = app.add_subcommand("distill", "directional-autoencoder distillation of an AL run");
  std::string di_run = "run.jsonl", di_vae = "vae.ckpt.json", di_attrs = "slope",
              di_out = "distilled.csv";
  std::size_t di_latent = 4, di_epochs = 1200;
  std::uint64_t di_seed = 1;
  di->add_option("--run", di_run);
  di->add_option("--vae", di_vae);
  di->add_option("--attrs", di_attrs, "comma list: slope,curvature,amplitude,frequency,velocity");
  di->add_option("--latent-dim", di_latent);
  di->add_option("--epochs", di_epochs);
  di->add_option("--seed", di_seed);
  di->add_option("--out", di_out);

  auto* le = app.add_subcommand("learn-equation", "prunable equation learner on a csv dataset");
  std::string le_data = "distilled.csv", le_target = "y", le_dict = "sq,prod", le_out = "eq.txt";
  double le_sparsity = 0.90;
  std::uint64_t le_seed = 1;
  le->add_option("--data", le_data);
  le->add_option("--target", le_target);
  le->add_option("--dict", le_dict, "comma list: id,sq,prod,sin,cos,sinh");
  le->add_option("--sparsity", le_sparsity);
  le->add_option("--seed", le_seed);
  le->add_option("--out", le_out);

  auto* exc = app.add_subcommand("exemplar", "ground-truth generators and objectives");
  auto* exi = exc->add_subcommand("ising", "metropolis chain at fixed temperature");
  double exi_beta = 1.0;
  int exi_sweeps = 10000;
  std::uint64_t exi_seed = 1;
  std::string exi_out;
  exi->add_option("--beta", exi_beta);
  exi->add_option("--sweeps", exi_sweeps);
  exi->add_option("--seed", exi_seed);
  exi->add_option("--out", exi_out);
  auto* expj = exc->add_subcommand("projectile", "trajectory corpus generator");
  bool expj_make = false;
  std::string expj_out = "trajectories.csv";
  expj->add_flag("--make-dataset", expj_make);
  expj->add_option("--out", expj_out);
  auto* exs = exc->add_subcommand("surrogate", "directivity polynomial");
  std::string exs_eval;
  exs->add_option("--eval", exs_eval, "z1,z2,z3,z4");

  auto* pl = app.add_subcommand("pipeline", "orchestrated discovery runs");
  auto* plr = pl->add_subcommand("run", "run a configured pipeline");
  std::string plr_config;
  plr->add_option("--config", plr_config)->required();
  auto* plg = pl->add_subcommand("gain", "gain-factor arithmetic from a csv");
  std::string plg_inputs;
  plg->add_option("--inputs", plg_inputs)->required();
  auto* ple = pl->add_subcommand("export", "plot-ready csv extraction from a run directory");
  std::string ple_run, ple_which = "al", ple_out = "plot.csv";
  ple->add_option("--run-dir", ple_run)->required();
  ple->add_option("--which", ple_which, "al|dae|eql");
  ple->add_option("--out", ple_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (tv->parsed()) return cmd_train_vae(tv_exemplar, tv_epochs, tv_seed, tv_out);
    if (al->parsed())
      return cmd_active_learn(al_obj, al_acq, al_lambda, al_init, al_budget, al_seed, al_vae,
                              al_out);
    if (di->parsed())
      return cmd_distill(di_run, di_vae, di_attrs, di_latent, di_epochs, di_seed, di_out);
    if (le->parsed())
      return cmd_learn_equation(le_data, le_target, le_dict, le_sparsity, le_seed, le_out);
    if (exc->parsed()) {
      if (exi->parsed()) return cmd_exemplar_ising(exi_beta, exi_sweeps, exi_seed, exi_out);
      if (expj->parsed()) {
        if (!expj_make) {
          std::fprintf(stderr, "nothing to do; pass --make-dataset\n");
          return 3;
        }
        const auto ds = ex::make_projectile_dataset();
        io::CsvTable t;
        t.header = {"u", "theta_deg", "beta", "gamma"};
        for (int i = 0; i < ex::kTrajectorySamples; ++i)
          t.header.push_back("y" + std::to_string(i));
        for (const auto& tr : ds.trajectories) {
          std::vector<double> row{tr.u, tr.theta_deg, tr.beta, tr.gamma};
          row.insert(row.end(), tr.y.begin(), tr.y.end());
          t.rows.push_back(std::move(row));
        }
        io::write_csv(expj_out, t);
        std::printf("wrote %zu trajectories to %s\n", t.rows.size(), expj_out.c_str());
        return 0;
      }
      if (exs->parsed()) {
        std::array<double, 4> z{};
        std::stringstream ss(exs_eval);
        std::string cell;
        std::size_t i = 0;
        while (std::getline(ss, cell, ',') && i < 4) z[i++] = std::stod(cell);
        std::printf("De(%g, %g, %g, %g) = %.6f\n", z[0], z[1], z[2], z[3],
                    ex::directivity_surrogate(z));
        return 0;
      }
      std::fprintf(stderr, "pick an exemplar subcommand\n");
      return 3;
    }
    if (pl->parsed()) {
      if (plr->parsed()) {
        pipe::PipelineConfig cfg;
        try {
          cfg = pipe::config_from_kv(io::KvConfig::parse_file(plr_config));
        } catch (const std::exception& e) {
          std::fprintf(stderr, "config error: %s\n", e.what());
          return 3;
        }
        const auto res = pipe::run_pipeline(cfg);
        if (res.exit_code != 0) {
          std::fprintf(stderr, "pipeline failed (%d): %s\n", res.exit_code, res.message.c_str());
          return res.exit_code;
        }
        std::printf("run complete: %s\n", res.run_dir.c_str());
        for (const auto& s : res.manifest.stages)
          std::printf("  stage %-8s %8.0f ms%s\n", s.name.c_str(), s.wall_ms,
                      s.skipped ? " (resumed)" : "");
        if (res.equation) std::printf("  equation: %s\n", res.equation->to_string().c_str());
        return 0;
      }
      if (plg->parsed()) {
        for (const auto& [name, report] : pipe::gain_from_csv(plg_inputs))
          std::printf("%s: gain = %.6g (n %.3g, variety %.3g, value %.3g)\n", name.c_str(),
                      report.gain, report.experiments_ratio, report.variety_ratio,
                      report.value_ratio);
        return 0;
      }
      if (ple->parsed()) {
        pipe::export_plot_data(ple_run, ple_which, ple_out);
        std::printf("wrote %s\n", ple_out.c_str());
        return 0;
      }
      std::fprintf(stderr, "pick a pipeline subcommand\n");
      return 3;
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
