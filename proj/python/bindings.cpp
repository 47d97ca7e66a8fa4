// pybind11 surface: model construction, simulation, training, spectra,
// metrics and checkpoint IO, all JSON/numpy based so the python side stays
// dependency-light.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ssmkit/checkpoint.hpp"
#include "ssmkit/config.hpp"
#include "ssmkit/data.hpp"
#include "ssmkit/engines.hpp"
#include "ssmkit/errors.hpp"
#include "ssmkit/init.hpp"
#include "ssmkit/model.hpp"
#include "ssmkit/params.hpp"
#include "ssmkit/parallel.hpp"
#include "ssmkit/train.hpp"

namespace py = pybind11;
using namespace ssm;

namespace {

/// Python-facing handle: a parameter model plus the checkpoint metadata
/// (normalization stats, best epoch, seed) that makes it reproducible.
struct PyModel {
  Checkpoint ck;

  Eigen::Index n_u() const { return ck.model.n_u(); }
  Eigen::Index n_y() const { return ck.model.n_y(); }

  MatrixXd simulate(const MatrixXd& u, const std::string& engine) const {
    const Engine e = parse_engine(engine);
    const SsModel sys = realize_model(ck.model);
    py::gil_scoped_release release;
    return ssm_forward(sys, u, e);
  }

  MatrixXd predict(const MatrixXd& u, const std::string& engine) const {
    if (!ck.norm) return simulate(u, engine);
    const Engine e = parse_engine(engine);
    const SsModel sys = realize_model(ck.model);
    py::gil_scoped_release release;
    const MatrixXd y = ssm_forward(sys, normalize_u(u, *ck.norm), e);
    return denormalize_y(y, *ck.norm);
  }

  std::vector<std::string> block_names() const {
    std::vector<std::string> names;
    for (const ParamBlock& b : flat_layout(ck.model).blocks)
      names.push_back(b.name);
    return names;
  }

  PyModel with_parameters(const VectorXd& theta) const {
    PyModel out = *this;
    out.ck.model = unpack(ck.model, theta);
    return out;
  }

  py::list spectrum() const {
    py::list rows;
    for (std::size_t l = 0; l < ck.model.layers.size(); ++l) {
      const auto entries =
          spectrum_report(ck.model.layers[l], ck.model.method);
      for (std::size_t i = 0; i < entries.size(); ++i) {
        const SpectrumEntry& e = entries[i];
        py::dict row;
        row["layer"] = l;
        row["index"] = i;
        row["lambda_c"] = e.lambda_c ? py::cast(*e.lambda_c) : py::none();
        row["lambda_d"] = e.lambda_d;
        row["modulus"] = e.modulus;
        row["arg"] = e.arg;
        row["beyond_nyquist"] = e.beyond_nyquist;
        rows.append(row);
      }
    }
    return rows;
  }
};

py::dict history_dict(const TrainResult& res) {
  const std::size_t n = res.history.size();
  VectorXd train_loss(n), val_loss(n), lr(n), grad_norm(n);
  std::vector<bool> lr_cut(n), new_best(n);
  for (std::size_t i = 0; i < n; ++i) {
    const EpochRecord& r = res.history[i];
    train_loss(static_cast<Eigen::Index>(i)) = r.train_loss;
    val_loss(static_cast<Eigen::Index>(i)) = r.val_loss;
    lr(static_cast<Eigen::Index>(i)) = r.lr;
    grad_norm(static_cast<Eigen::Index>(i)) = r.grad_norm;
    lr_cut[i] = r.lr_cut;
    new_best[i] = r.new_best;
  }
  py::dict h;
  h["train_loss"] = train_loss;
  h["val_loss"] = val_loss;
  h["lr"] = lr;
  h["grad_norm"] = grad_norm;
  h["lr_cut"] = lr_cut;
  h["new_best"] = new_best;
  h["best_epoch"] = res.best_epoch;
  h["best_val_loss"] = res.best_val_loss;
  h["epochs_run"] = res.epochs_run;
  h["early_stopped"] = res.early_stopped;
  return h;
}

PyModel build_from_config(const std::string& config_json) {
  const RunConfig cfg = parse_config(config_json);
  PyModel m;
  m.ck.model = build_model(cfg.model, cfg.seed);
  m.ck.seed = cfg.seed;
  m.ck.best_val_loss = std::numeric_limits<double>::infinity();
  return m;
}

std::pair<PyModel, py::dict> fit_from_config(const std::string& config_json) {
  const RunConfig cfg = parse_config(config_json);
  const ParamModel init = build_model(cfg.model, cfg.seed);
  const TrainConfig tc = make_train_config(cfg);
  TrainResult res;
  Dataset ds;
  {
    py::gil_scoped_release release;
    ds = build_dataset(cfg.data, cfg.seed);
    if (cfg.data.normalize) ds = normalize(ds);
    res = train(init, ds, tc);
  }
  PyModel out;
  out.ck.model = std::move(res.best_model);
  out.ck.norm = ds.norm;
  out.ck.epoch = res.best_epoch;
  out.ck.best_val_loss = res.best_val_loss;
  out.ck.seed = cfg.seed;
  return {std::move(out), history_dict(res)};
}

py::dict metrics_dict(const MatrixXd& y_true, const MatrixXd& y_pred,
                      Eigen::Index start, Eigen::Index end,
                      double unit_scale) {
  const MetricsReport m = metrics(y_true, y_pred, start, end, unit_scale);
  py::dict d;
  d["rmse"] = m.rmse;
  d["fit"] = m.fit;
  d["window_start"] = m.window_start;
  d["window_end"] = m.window_end;
  return d;
}

py::dict synth_dict(int order, const std::string& nonlinearity,
                    Eigen::Index T, Eigen::Index n_seq, double noise_std,
                    std::uint64_t seed) {
  const SynthDataset sd = synth_wiener(order, nonlinearity, T, n_seq,
                                       noise_std, seed);
  py::list seqs;
  for (const Sequence& s : sd.data.sequences)
    seqs.append(py::make_tuple(s.u, s.y));
  py::dict d;
  d["sequences"] = seqs;
  d["poles"] = sd.truth.poles;
  d["nonlinearity"] = sd.truth.nonlinearity;
  d["noise_std"] = sd.truth.noise_std;
  d["input_bandwidth"] = sd.truth.input_bandwidth;
  return d;
}

py::dict hippo_dict(Eigen::Index n_lambda) {
  const HippoFactors f = hippo_dplr_init(n_lambda, 1);
  py::dict d;
  d["lambda_c"] = f.lambda_c;
  d["v"] = f.v;
  d["p"] = f.p_proj;
  d["b_c"] = f.b_c;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "structured state-space sequence model toolkit (C++ core)";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<NumericError>(m, "NumericError",
                                       PyExc_ArithmeticError);

  py::class_<PyModel>(m, "Model")
      .def_property_readonly("n_u", &PyModel::n_u)
      .def_property_readonly("n_y", &PyModel::n_y)
      .def_property_readonly(
          "n_layers",
          [](const PyModel& s) { return s.ck.model.layers.size(); })
      .def_property_readonly("epoch",
                             [](const PyModel& s) { return s.ck.epoch; })
      .def_property_readonly(
          "best_val_loss",
          [](const PyModel& s) { return s.ck.best_val_loss; })
      .def_property_readonly("seed",
                             [](const PyModel& s) { return s.ck.seed; })
      .def_property_readonly(
          "normalized",
          [](const PyModel& s) { return s.ck.norm.has_value(); })
      .def_property_readonly(
          "parametrizations",
          [](const PyModel& s) {
            std::vector<std::string> names;
            for (const SslParams& l : s.ck.model.layers)
              names.emplace_back(parametrization_name(l));
            return names;
          })
      .def("simulate", &PyModel::simulate, py::arg("u"),
           py::arg("engine") = "scan",
           "Forward pass in model coordinates (no normalization), T x n_u "
           "-> T x n_y.")
      .def("predict", &PyModel::predict, py::arg("u"),
           py::arg("engine") = "scan",
           "Forward pass in data units: normalizes u and denormalizes y "
           "with the stored statistics when present.")
      .def("pack", [](const PyModel& s) { return pack(s.ck.model); },
           "Flat parameter vector (complex blocks interleaved re/im).")
      .def("block_names", &PyModel::block_names)
      .def("with_parameters", &PyModel::with_parameters, py::arg("theta"),
           "New model with the flat parameter vector replaced.")
      .def("spectrum", &PyModel::spectrum,
           "Per-eigenvalue rows: lambda_c (None for discrete-time layers), "
           "lambda_d, modulus, arg, beyond_nyquist.")
      .def("to_json", [](const PyModel& s) { return checkpoint_to_json(s.ck); })
      .def("save",
           [](const PyModel& s, const std::string& path) {
             save_checkpoint(path, s.ck);
           },
           py::arg("path"))
      .def("__repr__", [](const PyModel& s) {
        std::string r = "Model(layers=[";
        for (std::size_t i = 0; i < s.ck.model.layers.size(); ++i) {
          if (i) r += ", ";
          r += parametrization_name(s.ck.model.layers[i]);
        }
        r += "], n_u=" + std::to_string(s.ck.model.n_u()) +
             ", n_y=" + std::to_string(s.ck.model.n_y()) + ")";
        return r;
      });

  m.def("build_model", &build_from_config, py::arg("config_json"),
        "Initialize a model from a run-configuration JSON string.");
  m.def("fit", &fit_from_config, py::arg("config_json"),
        "Build the dataset and model from a configuration string, train, "
        "and return (best_model, history).");
  m.def("load_checkpoint",
        [](const std::string& path) {
          PyModel s;
          s.ck = load_checkpoint(path);
          return s;
        },
        py::arg("path"));
  m.def("model_from_json",
        [](const std::string& text) {
          PyModel s;
          s.ck = checkpoint_from_json(text);
          return s;
        },
        py::arg("text"));
  m.def("resolved_config", [](const std::string& config_json) {
          return resolved_config_json(parse_config(config_json));
        },
        py::arg("config_json"),
        "Echo a configuration with every default filled in.");
  m.def("metrics", &metrics_dict, py::arg("y_true"), py::arg("y_pred"),
        py::arg("start") = 0, py::arg("end") = -1,
        py::arg("unit_scale") = 1.0,
        "RMSE and fit percentage over the half-open window [start, end).");
  m.def("synth", &synth_dict, py::arg("order") = 2,
        py::arg("nonlinearity") = std::string("tanh"), py::arg("T") = 2048,
        py::arg("n_seq") = 1, py::arg("noise_std") = 0.01,
        py::arg("seed") = 1,
        "Multisine-driven synthetic Wiener sequences plus the true system.");
  m.def("hippo", &hippo_dict, py::arg("n_lambda"),
        "Diagonalized scaled-Legendre initialization factors.");
  m.def("set_num_threads", &set_num_threads, py::arg("n"));
  m.def("num_threads", &num_threads);
}
