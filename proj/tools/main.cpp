#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "ssmkit/checkpoint.hpp"
#include "ssmkit/config.hpp"
#include "ssmkit/engines.hpp"
#include "ssmkit/errors.hpp"
#include "ssmkit/parallel.hpp"
#include "ssmkit/train.hpp"

namespace {

using namespace ssm;
using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << text;
  if (!out) throw DataError("write failed: " + path);
}

std::string window_label(const EvalWindow& w) {
  if (w.start == 0 && w.end == -1) return "full";
  std::string e = w.end == -1 ? "end" : std::to_string(w.end);
  return std::to_string(w.start) + "_" + e;
}

const char* role_name(Role r) {
  switch (r) {
    case Role::Train: return "train";
    case Role::Val: return "val";
    case Role::Test: return "test";
    default: return "untagged";
  }
}

Engine auto_engine(const SsModel& sys) {
  for (const SsLayer& l : sys.layers)
    if (l.lti.structure == LtiStructure::Dense) return Engine::Sequential;
  return Engine::Scan;
}

MatrixXd predict(const SsModel& sys, const MatrixXd& u_raw,
                 const std::optional<NormalizationStats>& norm, Engine engine) {
  const MatrixXd u = norm ? normalize_u(u_raw, *norm) : u_raw;
  MatrixXd y = ssm_forward(sys, u, engine);
  if (norm) y = denormalize_y(y, *norm);
  return y;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochRecord>& hist) {
  std::ostringstream os;
  os << std::setprecision(16);
  os << "epoch,train_loss,val_loss,lr,grad_norm,lr_cut,new_best\n";
  for (const EpochRecord& r : hist)
    os << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.lr
       << ',' << r.grad_norm << ',' << (r.lr_cut ? 1 : 0) << ','
       << (r.new_best ? 1 : 0) << '\n';
  write_text(path, os.str());
}

void write_residuals_csv(const std::string& path, const MatrixXd& y_true,
                         const MatrixXd& y_pred) {
  std::ostringstream os;
  os << std::setprecision(16);
  os << "t";
  for (Eigen::Index c = 0; c < y_true.cols(); ++c)
    os << ",y_true_" << c << ",y_pred_" << c << ",error_" << c;
  os << '\n';
  for (Eigen::Index t = 0; t < y_true.rows(); ++t) {
    os << t;
    for (Eigen::Index c = 0; c < y_true.cols(); ++c)
      os << ',' << y_true(t, c) << ',' << y_pred(t, c) << ','
         << (y_true(t, c) - y_pred(t, c));
    os << '\n';
  }
  write_text(path, os.str());
}

void write_spectrum_csv(const std::string& path, const ParamModel& model) {
  std::ostringstream os;
  os << std::setprecision(16);
  os << "layer,index,re_lambda_c,im_lambda_c,re_lambda_d,im_lambda_d,"
        "modulus,arg,beyond_nyquist\n";
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto entries = spectrum_report(model.layers[l], model.method);
    for (std::size_t j = 0; j < entries.size(); ++j) {
      const SpectrumEntry& e = entries[j];
      os << l << ',' << j << ',';
      if (e.lambda_c)
        os << e.lambda_c->real() << ',' << e.lambda_c->imag();
      else
        os << ',';
      os << ',' << e.lambda_d.real() << ',' << e.lambda_d.imag() << ','
         << e.modulus << ',' << e.arg << ',' << (e.beyond_nyquist ? 1 : 0)
         << '\n';
    }
  }
  write_text(path, os.str());
}

/// Runs the model over every sequence of the requested role (falling back
/// test -> val -> everything), reports metrics per eval window, and dumps the
/// first sequence's residual trace.
void run_evaluation(const SsModel& sys,
                    const std::optional<NormalizationStats>& norm,
                    const Dataset& raw, std::vector<EvalWindow> windows,
                    double unit_scale, Engine engine,
                    const std::string& out_dir, const std::string& role) {
  std::vector<const Sequence*> seqs;
  std::string used_role = role;
  auto pick = [&](Role r) { seqs = raw.with_role(r); };
  if (role == "test")
    pick(Role::Test);
  else if (role == "val")
    pick(Role::Val);
  else if (role == "train")
    pick(Role::Train);
  if (seqs.empty() && role == "test") {
    pick(Role::Val);
    used_role = "val";
  }
  if (seqs.empty()) {
    for (const Sequence& s : raw.sequences) seqs.push_back(&s);
    used_role = "all";
  }
  if (seqs.empty()) throw DataError("no sequences to evaluate");
  if (windows.empty()) windows.push_back(EvalWindow{});

  std::ostringstream txt;
  txt << std::setprecision(16);
  bool wrote_residuals = false;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const Sequence& s = *seqs[i];
    const MatrixXd y_pred = predict(sys, s.u, norm, engine);
    for (const EvalWindow& w : windows) {
      const MetricsReport m = metrics(s.y, y_pred, w.start, w.end, unit_scale);
      const std::string key =
          used_role + "_" + std::to_string(i) + "_" + window_label(w);
      txt << key << "_rmse=" << m.rmse << '\n';
      txt << key << "_fit=" << m.fit << '\n';
      std::cout << key << "  rmse " << std::setprecision(6) << m.rmse
                << "  fit " << m.fit << "%\n"
                << std::setprecision(16);
    }
    if (!wrote_residuals) {
      write_residuals_csv(join_path(out_dir, "residuals.csv"), s.y, y_pred);
      wrote_residuals = true;
    }
  }
  write_text(join_path(out_dir, "metrics.txt"), txt.str());
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir = "out";
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

RunConfig load_with_overrides(const CommonOpts& c,
                              std::optional<int> max_epochs = {},
                              const std::string& engine = "") {
  RunConfig cfg = load_config(c.config_path);
  if (c.seed) cfg.seed = *c.seed;
  if (max_epochs) cfg.train.max_epochs = *max_epochs;
  if (!engine.empty()) cfg.train.engine = engine;
  cfg.validate();
  return cfg;
}

int cmd_train(const CommonOpts& c, std::optional<int> max_epochs,
              const std::string& engine, bool quiet) {
  const RunConfig cfg = load_with_overrides(c, max_epochs, engine);
  ensure_dir(c.out_dir);
  write_text(join_path(c.out_dir, "resolved_config.json"),
             resolved_config_json(cfg) + "\n");

  Dataset raw = build_dataset(cfg.data, cfg.seed);
  Dataset ds = cfg.data.normalize ? normalize(raw) : raw;
  const ParamModel init = build_model(cfg.model, cfg.seed);
  const TrainConfig tc = make_train_config(cfg);

  const auto t0 = Clock::now();
  EpochCallback cb;
  if (!quiet) {
    cb = [&](const EpochRecord& r) {
      if (r.epoch % cfg.train.log_every != 0 && !r.new_best && !r.lr_cut)
        return;
      std::cout << "epoch " << std::setw(5) << r.epoch << "  train "
                << std::scientific << std::setprecision(6) << r.train_loss
                << "  val " << r.val_loss << "  lr " << std::setprecision(2)
                << r.lr << "  |g| " << r.grad_norm << std::defaultfloat
                << (r.new_best ? "  [best]" : "") << (r.lr_cut ? "  [cut]" : "")
                << '\n';
    };
  }
  const TrainResult res = train(init, ds, tc, cb);
  const double train_ms = elapsed_ms(t0);

  Checkpoint ck;
  ck.model = res.best_model;
  ck.norm = ds.norm;
  ck.epoch = res.best_epoch;
  ck.best_val_loss = res.best_val_loss;
  ck.seed = cfg.seed;
  save_checkpoint(join_path(c.out_dir, "checkpoint.json"), ck);
  write_history_csv(join_path(c.out_dir, "history.csv"), res.history);
  write_spectrum_csv(join_path(c.out_dir, "spectrum.csv"), res.best_model);

  std::cout << "trained " << res.epochs_run << " epochs in " << std::fixed
            << std::setprecision(1) << train_ms / 1000.0 << " s"
            << std::defaultfloat << "; best val loss "
            << std::setprecision(10) << res.best_val_loss << " at epoch "
            << res.best_epoch << (res.early_stopped ? " (early stop)" : "")
            << '\n';

  const SsModel sys = realize_model(res.best_model);
  run_evaluation(sys, ds.norm, raw, cfg.eval_windows, cfg.data.unit_scale,
                 auto_engine(sys), c.out_dir, "test");
  return 0;
}

int cmd_eval(const CommonOpts& c, const std::string& checkpoint_path,
             const std::string& role, const std::string& engine) {
  const RunConfig cfg = load_with_overrides(c);
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  ensure_dir(c.out_dir);
  const Dataset raw = build_dataset(cfg.data, cfg.seed);
  const SsModel sys = realize_model(ck.model);
  const Engine eng = engine == "auto" ? auto_engine(sys) : parse_engine(engine);
  run_evaluation(sys, ck.norm, raw, cfg.eval_windows, cfg.data.unit_scale, eng,
                 c.out_dir, role);
  return 0;
}

int cmd_bench(const CommonOpts& c, std::vector<long long> lengths,
              std::vector<std::string> engines, int repeats) {
  const RunConfig cfg = load_with_overrides(c);
  ensure_dir(c.out_dir);
  const ParamModel pm = build_model(cfg.model, cfg.seed);
  const SsModel sys = realize_model(pm);
  if (lengths.empty()) lengths = {1 << 13, 1 << 16};
  if (engines.empty()) engines = {"sequential", "scan", "conv", "fft"};

  struct Point {
    std::string engine;
    long long T = 0;
    bool ok = false;
    std::string note;
    MatrixXd u;
    std::vector<double> times;
  };
  std::vector<Point> points;
  Rng rng = Rng::stream(cfg.seed, 71);
  for (long long T : lengths) {
    if (T < 2) throw ConfigError("bench lengths must be >= 2");
    MatrixXd u(T, sys.n_u());
    for (Eigen::Index t = 0; t < u.rows(); ++t)
      for (Eigen::Index j = 0; j < u.cols(); ++j) u(t, j) = rng.normal();
    for (const std::string& name : engines) {
      Point p;
      p.engine = name;
      p.T = T;
      p.u = u;
      points.push_back(std::move(p));
    }
  }
  // Warm-up pass (also triggers plan/filter setup), then interleaved repeats
  // so slow machine phases hit every point instead of one length.
  for (Point& p : points) {
    try {
      ssm_forward(sys, p.u, parse_engine(p.engine));
      p.ok = true;
    } catch (const std::exception& e) {
      p.note = e.what();
    }
  }
  for (int r = 0; r < repeats; ++r) {
    for (Point& p : points) {
      if (!p.ok) continue;
      const auto t0 = Clock::now();
      ssm_forward(sys, p.u, parse_engine(p.engine));
      p.times.push_back(elapsed_ms(t0) / 1000.0);
    }
  }

  std::ostringstream csv;
  csv << "engine,T,median_s,mad_s\n";
  std::cout << std::left << std::setw(12) << "engine" << std::right
            << std::setw(10) << "T" << std::setw(14) << "median_s"
            << std::setw(14) << "mad_s" << '\n';
  for (Point& p : points) {
    if (!p.ok) {
      csv << p.engine << ',' << p.T << ",unsupported,unsupported\n";
      std::cout << std::left << std::setw(12) << p.engine << std::right
                << std::setw(10) << p.T << std::setw(14) << "unsupported"
                << "   (" << p.note << ")\n";
      continue;
    }
    std::sort(p.times.begin(), p.times.end());
    const double med = p.times[p.times.size() / 2];
    std::vector<double> dev;
    dev.reserve(p.times.size());
    for (double t : p.times) dev.push_back(std::abs(t - med));
    std::sort(dev.begin(), dev.end());
    const double mad = dev[dev.size() / 2];
    csv << p.engine << ',' << p.T << ',' << std::setprecision(9) << med << ','
        << mad << '\n';
    std::cout << std::left << std::setw(12) << p.engine << std::right
              << std::setw(14) << std::setprecision(9) << std::defaultfloat;
    std::cout << std::right << std::setw(10) << p.T << std::setw(14) << med
              << std::setw(14) << mad << '\n';
  }
  write_text(join_path(c.out_dir, "bench.csv"), csv.str());
  return 0;
}

int cmd_inspect(const CommonOpts& c, const std::string& checkpoint_path) {
  ParamModel model;
  std::uint64_t seed = 1;
  if (!checkpoint_path.empty()) {
    const Checkpoint ck = load_checkpoint(checkpoint_path);
    model = ck.model;
    seed = ck.seed;
    std::cout << "checkpoint " << checkpoint_path << " (epoch " << ck.epoch
              << ", best val loss " << ck.best_val_loss << ")\n";
  } else {
    const RunConfig cfg = load_with_overrides(c);
    model = build_model(cfg.model, cfg.seed);
    seed = cfg.seed;
    std::cout << "fresh model from " << c.config_path << '\n';
  }
  ensure_dir(c.out_dir);
  const FlatLayout layout = flat_layout(model);
  std::cout << "seed " << seed << ", " << model.layers.size() << " layers, "
            << layout.total << " parameters\n";
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const auto entries = spectrum_report(model.layers[l], model.method);
    double rho = 0.0;
    int beyond = 0;
    for (const SpectrumEntry& e : entries) {
      rho = std::max(rho, e.modulus);
      beyond += e.beyond_nyquist ? 1 : 0;
    }
    std::cout << "  layer " << l << ": " << parametrization_name(model.layers[l])
              << ", n_lambda " << entries.size() << ", spectral radius "
              << std::setprecision(6) << rho;
    if (beyond > 0) std::cout << ", " << beyond << " modes beyond nyquist";
    std::cout << '\n';
  }
  for (const ParamBlock& b : layout.blocks)
    std::cout << "    " << std::left << std::setw(24) << b.name << std::right
              << std::setw(8) << b.size << " @ " << b.offset << '\n';
  write_spectrum_csv(join_path(c.out_dir, "spectrum.csv"), model);
  return 0;
}

int cmd_synth(const CommonOpts& c) {
  const RunConfig cfg = load_with_overrides(c);
  const DataConfig& dc = cfg.data;
  ensure_dir(c.out_dir);
  const Eigen::Index total =
      dc.synth_n_train + dc.synth_n_val + dc.synth_n_test;
  const SynthDataset sd =
      synth_wiener(dc.synth_order, dc.synth_nonlinearity, dc.synth_T, total,
                   dc.synth_noise_std, cfg.seed);
  std::ostringstream header;
  header << "u_0,y_0\n";
  for (Eigen::Index i = 0; i < total; ++i) {
    const Sequence& s = sd.data.sequences[static_cast<std::size_t>(i)];
    const char* role = i < dc.synth_n_train             ? "train"
                       : i < dc.synth_n_train + dc.synth_n_val ? "val"
                                                               : "test";
    std::ostringstream os;
    os << std::setprecision(16) << header.str();
    for (Eigen::Index t = 0; t < s.u.rows(); ++t)
      os << s.u(t, 0) << ',' << s.y(t, 0) << '\n';
    const std::string name =
        std::string("synth_") + role + "_" + std::to_string(i) + ".csv";
    write_text(join_path(c.out_dir, name), os.str());
  }
  nlohmann::json truth;
  truth["nonlinearity"] = sd.truth.nonlinearity;
  truth["input_bandwidth"] = sd.truth.input_bandwidth;
  truth["pre_gain"] = sd.truth.pre_gain;
  truth["output_scale"] = sd.truth.output_scale;
  truth["noise_std"] = sd.truth.noise_std;
  auto poles = nlohmann::json::array();
  for (Eigen::Index j = 0; j < sd.truth.poles.size(); ++j)
    poles.push_back(nlohmann::json::array(
        {sd.truth.poles[j].real(), sd.truth.poles[j].imag()}));
  truth["poles"] = poles;
  write_text(join_path(c.out_dir, "truth.json"), truth.dump(2) + "\n");
  std::cout << "wrote " << total << " sequences (" << dc.synth_T
            << " samples each) to " << c.out_dir << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ssmkit: deep structured state-space models for system "
               "identification"};
  app.set_version_flag("--version", "ssmkit 0.1.0");
  app.require_subcommand(1);

  CommonOpts common;
  std::uint64_t seed_arg = 0;
  bool has_seed = false;
  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("-c,--config", common.config_path,
                                "run configuration (json)");
    // Missing files surface as DataError (exit 3), not as a usage error.
    if (needs_config) opt->required();
    sub->add_option("-o,--out", common.out_dir, "output directory");
    sub->add_option("--threads", common.threads, "worker thread budget");
    sub->add_option("--seed", seed_arg, "override the config seed")
        ->each([&](const std::string&) { has_seed = true; });
  };

  auto* t_train = app.add_subcommand("train", "fit a model to data");
  std::optional<int> max_epochs;
  std::string train_engine;
  bool quiet = false;
  add_common(t_train, true);
  t_train->add_option("--max-epochs", max_epochs, "cap the epoch count");
  t_train->add_option("--engine", train_engine,
                      "forward engine for evaluation passes");
  t_train->add_flag("-q,--quiet", quiet, "suppress per-epoch logging");

  auto* t_eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string checkpoint_path;
  std::string eval_role = "test";
  std::string eval_engine = "auto";
  add_common(t_eval, true);
  t_eval->add_option("-k,--checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  t_eval->add_option("--role", eval_role, "sequence role to evaluate")
      ->check(CLI::IsMember({"test", "val", "train", "all"}));
  t_eval->add_option("--engine", eval_engine, "forward engine or 'auto'");

  auto* t_bench = app.add_subcommand("bench", "time the simulation engines");
  std::vector<long long> bench_lengths;
  std::vector<std::string> bench_engines;
  int repeats = 5;
  add_common(t_bench, true);
  t_bench->add_option("--lengths", bench_lengths, "sequence lengths")
      ->delimiter(',');
  t_bench->add_option("--engines", bench_engines, "engines to time")
      ->delimiter(',');
  t_bench->add_option("--repeats", repeats, "timed runs per point")
      ->check(CLI::PositiveNumber);

  auto* t_inspect =
      app.add_subcommand("inspect", "summarize a model or checkpoint");
  std::string inspect_ck;
  add_common(t_inspect, false);
  t_inspect->add_option("-k,--checkpoint", inspect_ck, "checkpoint file");

  auto* t_synth = app.add_subcommand("synth", "generate synthetic data files");
  add_common(t_synth, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (has_seed) common.seed = seed_arg;
  if (common.threads > 0) set_num_threads(common.threads);

  try {
    if (t_train->parsed())
      return cmd_train(common, max_epochs, train_engine, quiet);
    if (t_eval->parsed())
      return cmd_eval(common, checkpoint_path, eval_role, eval_engine);
    if (t_bench->parsed())
      return cmd_bench(common, bench_lengths, bench_engines, repeats);
    if (t_inspect->parsed()) {
      if (inspect_ck.empty() && common.config_path.empty())
        throw ConfigError("inspect needs --checkpoint or --config");
      return cmd_inspect(common, inspect_ck);
    }
    if (t_synth->parsed()) return cmd_synth(common);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
