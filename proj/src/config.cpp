#include "ssmkit/config.hpp"

#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ssmkit/errors.hpp"

namespace ssm {

namespace {

using nlohmann::json;
using cd = std::complex<double>;

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok) throw ConfigError("unknown config key " + path + "." + it.key());
  }
}

template <typename T>
void read_if(const json& j, const char* key, const std::string& path, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception&) {
    throw ConfigError("config key " + path + "." + key + " has the wrong type");
  }
}

void read_files(const json& j, const char* key, const std::string& path,
                std::vector<std::string>& out) {
  if (!j.contains(key)) return;
  if (!j.at(key).is_array())
    throw ConfigError("config key " + path + "." + key +
                      " must be an array of file paths");
  out.clear();
  for (const auto& e : j.at(key)) {
    if (!e.is_string())
      throw ConfigError("config key " + path + "." + key +
                        " must contain only strings");
    out.push_back(e.get<std::string>());
  }
}

InitConfig parse_init(const json& j, const std::string& path) {
  check_keys(j, path,
             {"kind", "r_min", "r_max", "theta_min", "theta_max", "gamma",
              "gamma_min", "gamma_max", "nyquist"});
  InitConfig ic;
  std::string kind = "ring";
  read_if(j, "kind", path, kind);
  if (kind == "ring")
    ic.kind = InitKind::Ring;
  else if (kind == "hippo")
    ic.kind = InitKind::Hippo;
  else
    throw ConfigError(path + ".kind must be 'ring' or 'hippo'");
  read_if(j, "r_min", path, ic.r_min);
  read_if(j, "r_max", path, ic.r_max);
  read_if(j, "theta_min", path, ic.theta_min);
  read_if(j, "theta_max", path, ic.theta_max);
  if (j.contains("gamma")) {
    double g = 0.0;
    read_if(j, "gamma", path, g);
    ic.gamma = g;
  }
  if (j.contains("gamma_min")) {
    double g = 0.0;
    read_if(j, "gamma_min", path, g);
    ic.gamma_min = g;
  }
  if (j.contains("gamma_max")) {
    double g = 0.0;
    read_if(j, "gamma_max", path, g);
    ic.gamma_max = g;
  }
  std::string ny = "warn";
  read_if(j, "nyquist", path, ny);
  if (ny == "warn")
    ic.nyquist = NyquistMode::Warn;
  else if (ny == "rescale")
    ic.nyquist = NyquistMode::RescaleGamma;
  else
    throw ConfigError(path + ".nyquist must be 'warn' or 'rescale'");
  return ic;
}

json dump_init(const InitConfig& ic) {
  json j;
  j["kind"] = ic.kind == InitKind::Ring ? "ring" : "hippo";
  j["r_min"] = ic.r_min;
  j["r_max"] = ic.r_max;
  j["theta_min"] = ic.theta_min;
  j["theta_max"] = ic.theta_max;
  if (ic.gamma) j["gamma"] = *ic.gamma;
  if (ic.gamma_min) j["gamma_min"] = *ic.gamma_min;
  if (ic.gamma_max) j["gamma_max"] = *ic.gamma_max;
  j["nyquist"] = ic.nyquist == NyquistMode::Warn ? "warn" : "rescale";
  return j;
}

}  // namespace

Engine parse_engine(const std::string& name) {
  if (name == "sequential") return Engine::Sequential;
  if (name == "scan") return Engine::Scan;
  if (name == "conv") return Engine::Conv;
  if (name == "fft") return Engine::Fft;
  throw ConfigError("unknown engine '" + name +
                    "' (expected sequential, scan, conv or fft)");
}

ActivationKind parse_activation(const std::string& name) {
  if (name == "tanh") return ActivationKind::Tanh;
  if (name == "elu") return ActivationKind::Elu;
  if (name == "swish") return ActivationKind::Swish;
  throw ConfigError("unknown activation '" + name +
                    "' (expected tanh, elu or swish)");
}

DiscretizationMethod parse_discretization(const std::string& name) {
  if (name == "zoh") return DiscretizationMethod::Zoh;
  if (name == "bilinear") return DiscretizationMethod::Bilinear;
  if (name == "forward_euler") return DiscretizationMethod::ForwardEuler;
  throw ConfigError("unknown discretization '" + name +
                    "' (expected zoh, bilinear or forward_euler)");
}

void RunConfig::validate() const {
  parse_activation(model.activation);
  const DiscretizationMethod dm = parse_discretization(model.discretization);
  if (dm == DiscretizationMethod::ForwardEuler && !model.allow_forward_euler)
    throw ConfigError(
        "discretization forward_euler requires model.allow_forward_euler");
  if (model.parametrization != "lru" && model.parametrization != "ct_diag" &&
      model.parametrization != "dplr")
    throw ConfigError("model.parametrization must be lru, ct_diag or dplr");
  if (model.n_layers < 1) throw ConfigError("model.n_layers must be >= 1");
  if (model.n_lambda < 1) throw ConfigError("model.n_lambda must be >= 1");
  if (model.n_u < 1 || model.n_y < 1 || model.inter_size < 1)
    throw ConfigError("model widths must be >= 1");
  if (!(model.tau > 0.0)) throw ConfigError("model.tau must be positive");
  if (model.dplr_rank < 1) throw ConfigError("model.dplr_rank must be >= 1");
  if (model.init.kind == InitKind::Hippo && model.parametrization == "lru")
    throw ConfigError(
        "hippo initialization is continuous-time and does not apply to lru");
  if (model.init.kind == InitKind::Hippo &&
      model.parametrization == "dplr" && model.dplr_rank != 1)
    throw ConfigError("hippo initialization produces a rank-1 dplr factor");
  if (model.init.gamma && (model.init.gamma_min || model.init.gamma_max))
    throw ConfigError("init.gamma conflicts with init.gamma_min/gamma_max");
  if (model.init.gamma_min.has_value() != model.init.gamma_max.has_value())
    throw ConfigError("init.gamma_min and init.gamma_max come as a pair");
  if (model.init.gamma && !(*model.init.gamma > 0.0))
    throw ConfigError("init.gamma must be positive");
  if (model.init.gamma_min &&
      !(*model.init.gamma_min > 0.0 && *model.init.gamma_min < *model.init.gamma_max))
    throw ConfigError("init gamma range must satisfy 0 < min < max");

  if (data.n_u < 1 || data.n_y < 1)
    throw ConfigError("data channel counts must be >= 1");
  if (data.n_u != model.n_u || data.n_y != model.n_y)
    throw ConfigError("data channel counts must match the model widths");
  if (!(data.tau > 0.0)) throw ConfigError("data.tau must be positive");
  if ((data.subseq_length > 0) != (data.subseq_count > 0))
    throw ConfigError(
        "data.subseq_length and data.subseq_count come as a pair");
  if (data.subseq_policy != "stride" && data.subseq_policy != "disjoint")
    throw ConfigError("data.subseq_policy must be 'stride' or 'disjoint'");
  if (!(data.unit_scale > 0.0))
    throw ConfigError("data.unit_scale must be positive");
  if (data.synth_order != 1 && data.synth_order != 2)
    throw ConfigError("data.synth_order must be 1 or 2");
  if (data.synth_T < 8) throw ConfigError("data.synth_T must be >= 8");
  if (data.synth_n_train < 1 || data.synth_n_val < 1 || data.synth_n_test < 0)
    throw ConfigError("synthetic sequence counts are too small");
  if (data.synth_noise_std < 0.0)
    throw ConfigError("data.synth_noise_std must be non-negative");

  if (!(train.lr > 0.0)) throw ConfigError("train.lr must be positive");
  if (train.max_epochs < 1) throw ConfigError("train.max_epochs must be >= 1");
  if (train.batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (train.plateau_patience < 1 || train.early_stop_patience < 1)
    throw ConfigError("patience values must be >= 1");
  if (!(train.plateau_factor > 0.0 && train.plateau_factor < 1.0))
    throw ConfigError("train.plateau_factor must lie in (0, 1)");
  parse_engine(train.engine);
  if (train.log_every < 1) throw ConfigError("train.log_every must be >= 1");

  for (const EvalWindow& w : eval_windows) {
    if (w.start < 0) throw ConfigError("eval window start must be >= 0");
    if (w.end != -1 && w.end <= w.start)
      throw ConfigError("eval window end must be -1 or greater than start");
  }
}

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid json: ") + e.what());
  }
  check_keys(j, "$", {"seed", "model", "data", "train", "eval_windows"});
  RunConfig cfg;
  read_if(j, "seed", "$", cfg.seed);
  if (j.contains("model")) {
    const json& m = j.at("model");
    check_keys(m, "$.model",
               {"parametrization", "n_layers", "n_lambda", "n_u", "n_y",
                "inter_size", "activation", "discretization",
                "allow_forward_euler", "tau", "dplr_rank", "init"});
    read_if(m, "parametrization", "$.model", cfg.model.parametrization);
    read_if(m, "n_layers", "$.model", cfg.model.n_layers);
    read_if(m, "n_lambda", "$.model", cfg.model.n_lambda);
    read_if(m, "n_u", "$.model", cfg.model.n_u);
    read_if(m, "n_y", "$.model", cfg.model.n_y);
    read_if(m, "inter_size", "$.model", cfg.model.inter_size);
    read_if(m, "activation", "$.model", cfg.model.activation);
    read_if(m, "discretization", "$.model", cfg.model.discretization);
    read_if(m, "allow_forward_euler", "$.model",
            cfg.model.allow_forward_euler);
    read_if(m, "tau", "$.model", cfg.model.tau);
    read_if(m, "dplr_rank", "$.model", cfg.model.dplr_rank);
    if (m.contains("init")) cfg.model.init = parse_init(m.at("init"), "$.model.init");
  }
  if (j.contains("data")) {
    const json& d = j.at("data");
    check_keys(d, "$.data",
               {"train_files", "val_files", "test_files", "n_u", "n_y", "tau",
                "subseq_length", "subseq_count", "subseq_policy", "normalize",
                "unit_scale", "synth", "synth_order", "synth_nonlinearity",
                "synth_T", "synth_n_train", "synth_n_val", "synth_n_test",
                "synth_noise_std"});
    read_files(d, "train_files", "$.data", cfg.data.train_files);
    read_files(d, "val_files", "$.data", cfg.data.val_files);
    read_files(d, "test_files", "$.data", cfg.data.test_files);
    read_if(d, "n_u", "$.data", cfg.data.n_u);
    read_if(d, "n_y", "$.data", cfg.data.n_y);
    read_if(d, "tau", "$.data", cfg.data.tau);
    read_if(d, "subseq_length", "$.data", cfg.data.subseq_length);
    read_if(d, "subseq_count", "$.data", cfg.data.subseq_count);
    read_if(d, "subseq_policy", "$.data", cfg.data.subseq_policy);
    read_if(d, "normalize", "$.data", cfg.data.normalize);
    read_if(d, "unit_scale", "$.data", cfg.data.unit_scale);
    read_if(d, "synth", "$.data", cfg.data.synth);
    read_if(d, "synth_order", "$.data", cfg.data.synth_order);
    read_if(d, "synth_nonlinearity", "$.data", cfg.data.synth_nonlinearity);
    read_if(d, "synth_T", "$.data", cfg.data.synth_T);
    read_if(d, "synth_n_train", "$.data", cfg.data.synth_n_train);
    read_if(d, "synth_n_val", "$.data", cfg.data.synth_n_val);
    read_if(d, "synth_n_test", "$.data", cfg.data.synth_n_test);
    read_if(d, "synth_noise_std", "$.data", cfg.data.synth_noise_std);
  }
  if (j.contains("train")) {
    const json& t = j.at("train");
    check_keys(t, "$.train",
               {"lr", "max_epochs", "batch_size", "plateau_patience",
                "plateau_factor", "early_stop_patience", "engine",
                "log_every"});
    read_if(t, "lr", "$.train", cfg.train.lr);
    read_if(t, "max_epochs", "$.train", cfg.train.max_epochs);
    read_if(t, "batch_size", "$.train", cfg.train.batch_size);
    read_if(t, "plateau_patience", "$.train", cfg.train.plateau_patience);
    read_if(t, "plateau_factor", "$.train", cfg.train.plateau_factor);
    read_if(t, "early_stop_patience", "$.train",
            cfg.train.early_stop_patience);
    read_if(t, "engine", "$.train", cfg.train.engine);
    read_if(t, "log_every", "$.train", cfg.train.log_every);
  }
  if (j.contains("eval_windows")) {
    const json& w = j.at("eval_windows");
    if (!w.is_array())
      throw ConfigError("$.eval_windows must be an array of [start, end]");
    for (const auto& e : w) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number_integer())
        throw ConfigError("$.eval_windows entries must be [start, end] pairs");
      EvalWindow win;
      win.start = e[0].get<Eigen::Index>();
      win.end = e[1].get<Eigen::Index>();
      cfg.eval_windows.push_back(win);
    }
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string resolved_config_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  json m;
  m["parametrization"] = cfg.model.parametrization;
  m["n_layers"] = cfg.model.n_layers;
  m["n_lambda"] = cfg.model.n_lambda;
  m["n_u"] = cfg.model.n_u;
  m["n_y"] = cfg.model.n_y;
  m["inter_size"] = cfg.model.inter_size;
  m["activation"] = cfg.model.activation;
  m["discretization"] = cfg.model.discretization;
  m["allow_forward_euler"] = cfg.model.allow_forward_euler;
  m["tau"] = cfg.model.tau;
  m["dplr_rank"] = cfg.model.dplr_rank;
  m["init"] = dump_init(cfg.model.init);
  j["model"] = std::move(m);
  json d;
  d["train_files"] = cfg.data.train_files;
  d["val_files"] = cfg.data.val_files;
  d["test_files"] = cfg.data.test_files;
  d["n_u"] = cfg.data.n_u;
  d["n_y"] = cfg.data.n_y;
  d["tau"] = cfg.data.tau;
  d["subseq_length"] = cfg.data.subseq_length;
  d["subseq_count"] = cfg.data.subseq_count;
  d["subseq_policy"] = cfg.data.subseq_policy;
  d["normalize"] = cfg.data.normalize;
  d["unit_scale"] = cfg.data.unit_scale;
  d["synth"] = cfg.data.synth;
  d["synth_order"] = cfg.data.synth_order;
  d["synth_nonlinearity"] = cfg.data.synth_nonlinearity;
  d["synth_T"] = cfg.data.synth_T;
  d["synth_n_train"] = cfg.data.synth_n_train;
  d["synth_n_val"] = cfg.data.synth_n_val;
  d["synth_n_test"] = cfg.data.synth_n_test;
  d["synth_noise_std"] = cfg.data.synth_noise_std;
  j["data"] = std::move(d);
  json t;
  t["lr"] = cfg.train.lr;
  t["max_epochs"] = cfg.train.max_epochs;
  t["batch_size"] = cfg.train.batch_size;
  t["plateau_patience"] = cfg.train.plateau_patience;
  t["plateau_factor"] = cfg.train.plateau_factor;
  t["early_stop_patience"] = cfg.train.early_stop_patience;
  t["engine"] = cfg.train.engine;
  t["log_every"] = cfg.train.log_every;
  j["train"] = std::move(t);
  json w = json::array();
  for (const EvalWindow& e : cfg.eval_windows)
    w.push_back(json::array({e.start, e.end}));
  j["eval_windows"] = std::move(w);
  return j.dump(2);
}

TrainConfig make_train_config(const RunConfig& cfg) {
  TrainConfig tc;
  tc.adam.lr = cfg.train.lr;
  tc.max_epochs = cfg.train.max_epochs;
  tc.batch_size = cfg.train.batch_size;
  tc.scheduler.patience = cfg.train.plateau_patience;
  tc.scheduler.factor = cfg.train.plateau_factor;
  tc.stopper.patience = cfg.train.early_stop_patience;
  tc.forward_engine = parse_engine(cfg.train.engine);
  tc.shuffle_seed = cfg.seed;
  tc.log_every = cfg.train.log_every;
  return tc;
}

namespace {

double draw_log_gamma(const InitConfig& ic, Rng& rng) {
  if (ic.gamma) return std::log(*ic.gamma);
  if (ic.gamma_min)
    return rng.uniform(std::log(*ic.gamma_min), std::log(*ic.gamma_max));
  return 0.0;
}

// Keeps the half of a conjugate-closed continuous spectrum with positive
// imaginary part; the other half is implied by the realness convention.
std::vector<Eigen::Index> positive_imag_half(const VectorXcd& lambda,
                                             Eigen::Index expect) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index j = 0; j < lambda.size(); ++j)
    if (lambda[j].imag() > 0.0) idx.push_back(j);
  if (static_cast<Eigen::Index>(idx.size()) != expect)
    throw NumericError(
        "spectrum does not split into conjugate halves as expected");
  return idx;
}

}  // namespace

ParamModel build_model(const ModelConfig& mc, std::uint64_t seed) {
  ParamModel model;
  model.activation.kind = parse_activation(mc.activation);
  model.method = parse_discretization(mc.discretization);
  model.allow_forward_euler = mc.allow_forward_euler;
  const Eigen::Index L = mc.n_layers;
  const Eigen::Index n = mc.n_lambda;
  for (Eigen::Index l = 0; l < L; ++l) {
    const Eigen::Index in = l == 0 ? mc.n_u : mc.inter_size;
    const Eigen::Index out = l + 1 == L ? mc.n_y : mc.inter_size;
    const bool skip = in == out;
    const std::uint64_t base = static_cast<std::uint64_t>(l) * 16;
    Rng rng_b = Rng::stream(seed, base + 1);
    Rng rng_c = Rng::stream(seed, base + 2);
    Rng rng_f = Rng::stream(seed, base + 4);
    Rng rng_g = Rng::stream(seed, base + 5);
    Rng rng_p = Rng::stream(seed, base + 6);
    RingSpec spec;
    spec.r_min = mc.init.r_min;
    spec.r_max = mc.init.r_max;
    spec.theta_min = mc.init.theta_min;
    spec.theta_max = mc.init.theta_max;
    spec.seed = splitmix64(seed ^ splitmix64(base + 9000));

    if (mc.parametrization == "lru") {
      LruParams p;
      const LruRingInit ring = init_lru_ring(n, spec);
      p.mu = ring.mu;
      p.theta = ring.theta;
      p.b_check = xavier_init_complex(n, in, rng_b);
      p.c_tilde = xavier_init_complex(out, n, rng_c);
      p.d = MatrixXd::Zero(out, in);
      p.skip_identity = skip;
      p.f = skip ? MatrixXd::Identity(out, in) : xavier_init(out, in, rng_f);
      model.layers.emplace_back(std::move(p));
      continue;
    }

    if (mc.parametrization == "ct_diag") {
      CtDiagParams p;
      p.tau = mc.tau;
      p.skip_identity = skip;
      if (mc.init.kind == InitKind::Hippo) {
        const HippoDiag hd = hippo_diag_init(2 * n, in);
        const auto idx = positive_imag_half(hd.lambda_c, n);
        p.alpha_re.resize(n);
        p.alpha_im.resize(n);
        p.b_c.resize(n, in);
        for (Eigen::Index j = 0; j < n; ++j) {
          const cd lam = hd.lambda_c[idx[static_cast<std::size_t>(j)]];
          p.alpha_re[j] = std::log(-lam.real());
          p.alpha_im[j] = std::log(lam.imag());
          p.b_c.row(j) = hd.b_c.row(idx[static_cast<std::size_t>(j)]);
        }
      } else {
        const CtRingInit ring = init_ct_ring(n, spec, mc.tau);
        p.alpha_re = ring.alpha_re;
        p.alpha_im = ring.alpha_im;
        p.b_c = xavier_init_complex(n, in, rng_b);
      }
      VectorXd gamma(n);
      for (Eigen::Index j = 0; j < n; ++j)
        gamma[j] = std::exp(draw_log_gamma(mc.init, rng_g));
      {
        VectorXcd lam_c(n);
        for (Eigen::Index j = 0; j < n; ++j)
          lam_c[j] =
              cd(-std::exp(p.alpha_re[j]), std::exp(p.alpha_im[j]));
        const NyquistReport rep =
            nyquist_guard(lam_c, gamma, mc.tau, mc.init.nyquist);
        for (const std::string& w : rep.warnings)
          std::cerr << "[init] layer " << l << ": " << w << "\n";
        gamma = rep.gamma;
      }
      p.log_gamma = gamma.array().log();
      p.c_c = xavier_init_complex(out, n, rng_c);
      p.f = skip ? MatrixXd::Identity(out, in) : xavier_init(out, in, rng_f);
      model.layers.emplace_back(std::move(p));
      continue;
    }

    // dplr
    DplrParams p;
    p.tau = mc.tau;
    p.skip_identity = skip;
    p.q_equals_p = true;
    const Eigen::Index rank = mc.dplr_rank;
    if (mc.init.kind == InitKind::Hippo) {
      const HippoFactors hf = hippo_dplr_init(2 * n, in);
      const auto idx = positive_imag_half(hf.lambda_c, n);
      p.alpha_re.resize(n);
      p.alpha_im.resize(n);
      p.p.resize(n, 1);
      p.b_c.resize(n, in);
      for (Eigen::Index j = 0; j < n; ++j) {
        const Eigen::Index src = idx[static_cast<std::size_t>(j)];
        const cd lam = hf.lambda_c[src];
        p.alpha_re[j] = -lam.real() - p.epsilon;
        p.alpha_im[j] = lam.imag();
        p.p(j, 0) = hf.p_proj[src];
        p.b_c.row(j) = hf.b_c.row(src);
      }
    } else {
      const CtRingInit ring = init_ct_ring(n, spec, mc.tau);
      p.alpha_re.resize(n);
      p.alpha_im.resize(n);
      for (Eigen::Index j = 0; j < n; ++j) {
        p.alpha_re[j] = std::exp(ring.alpha_re[j]) - p.epsilon;
        p.alpha_im[j] = std::exp(ring.alpha_im[j]);
      }
      p.p = xavier_init_complex(n, rank, rng_p);
      p.b_c = xavier_init_complex(n, in, rng_b);
    }
    p.q = MatrixXcd::Zero(p.p.rows(), p.p.cols());
    {
      VectorXcd lam_c(n);
      for (Eigen::Index j = 0; j < n; ++j)
        lam_c[j] = cd(-(std::max(0.0, p.alpha_re[j]) + p.epsilon),
                      p.alpha_im[j]);
      double gamma = std::exp(draw_log_gamma(mc.init, rng_g));
      const NyquistReport rep = nyquist_guard(
          lam_c, VectorXd::Constant(n, gamma), mc.tau, mc.init.nyquist);
      for (const std::string& w : rep.warnings)
        std::cerr << "[init] layer " << l << ": " << w << "\n";
      gamma = rep.gamma[0];
      p.log_gamma = std::log(gamma);
    }
    p.c_c = xavier_init_complex(out, n, rng_c);
    p.f = skip ? MatrixXd::Identity(out, in) : xavier_init(out, in, rng_f);
    model.layers.emplace_back(std::move(p));
  }
  return model;
}

Dataset build_dataset(const DataConfig& dc, std::uint64_t seed) {
  Dataset ds;
  ds.tau = dc.tau;
  const bool use_synth = dc.synth || (dc.train_files.empty() &&
                                      dc.val_files.empty() &&
                                      dc.test_files.empty());
  if (use_synth) {
    if (dc.n_u != 1 || dc.n_y != 1)
      throw ConfigError("the synthetic generator is single-input single-output");
    const Eigen::Index total =
        dc.synth_n_train + dc.synth_n_val + dc.synth_n_test;
    SynthDataset sd = synth_wiener(dc.synth_order, dc.synth_nonlinearity,
                                   dc.synth_T, total, dc.synth_noise_std, seed);
    for (Eigen::Index i = 0; i < total; ++i) {
      Role role = Role::Test;
      if (i < dc.synth_n_train)
        role = Role::Train;
      else if (i < dc.synth_n_train + dc.synth_n_val)
        role = Role::Val;
      sd.data.sequences[static_cast<std::size_t>(i)].role = role;
    }
    ds.sequences = std::move(sd.data.sequences);
    return ds;
  }

  std::vector<std::string> notices;
  const SubseqPolicy policy = dc.subseq_policy == "disjoint"
                                  ? SubseqPolicy::Disjoint
                                  : SubseqPolicy::Stride;
  std::uint64_t source_index = 0;
  for (const std::string& path : dc.train_files) {
    Sequence seq = load_csv(path, dc.n_u, dc.n_y, &notices);
    seq.role = Role::Train;
    if (dc.subseq_length > 0) {
      auto windows =
          extract_subsequences(seq, dc.subseq_length, dc.subseq_count, policy,
                               splitmix64(seed ^ source_index));
      for (Sequence& w : windows) ds.sequences.push_back(std::move(w));
    } else {
      ds.sequences.push_back(std::move(seq));
    }
    ++source_index;
  }
  for (const std::string& path : dc.val_files) {
    Sequence seq = load_csv(path, dc.n_u, dc.n_y, &notices);
    seq.role = Role::Val;
    ds.sequences.push_back(std::move(seq));
  }
  for (const std::string& path : dc.test_files) {
    Sequence seq = load_csv(path, dc.n_u, dc.n_y, &notices);
    seq.role = Role::Test;
    ds.sequences.push_back(std::move(seq));
  }
  for (const std::string& n : notices) std::cerr << "[data] " << n << "\n";
  if (ds.sequences.empty()) throw DataError("configuration yields no data");
  return ds;
}

}  // namespace ssm
