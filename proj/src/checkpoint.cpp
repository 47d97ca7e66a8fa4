#include "ssmkit/checkpoint.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "ssmkit/errors.hpp"

namespace ssm {

namespace {

using nlohmann::json;
using cd = std::complex<double>;

json dump_real(const MatrixXd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  // column-major flat data (native storage order)
  j["data"] = std::vector<double>(m.data(), m.data() + m.size());
  return j;
}

json dump_vec(const VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json dump_cplx(const MatrixXcd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(2 * m.size()));
  const cd* p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    flat.push_back(p[i].real());
    flat.push_back(p[i].imag());
  }
  j["data"] = std::move(flat);
  return j;
}

MatrixXd parse_real(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data"))
    throw ConfigError("checkpoint: malformed matrix at " + where);
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw ConfigError("checkpoint: matrix size mismatch at " + where);
  MatrixXd m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

VectorXd parse_vec(const json& j, const std::string& where) {
  if (!j.is_array())
    throw ConfigError("checkpoint: malformed vector at " + where);
  const auto data = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(data.data(),
                                    static_cast<Eigen::Index>(data.size()));
}

MatrixXcd parse_cplx(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data"))
    throw ConfigError("checkpoint: malformed matrix at " + where);
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != 2 * rows * cols)
    throw ConfigError("checkpoint: matrix size mismatch at " + where);
  MatrixXcd m(rows, cols);
  cd* p = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i)
    p[i] = cd(data[static_cast<std::size_t>(2 * i)],
              data[static_cast<std::size_t>(2 * i + 1)]);
  return m;
}

const char* activation_name(ActivationKind k) {
  switch (k) {
    case ActivationKind::Tanh:
      return "tanh";
    case ActivationKind::Elu:
      return "elu";
    case ActivationKind::Swish:
      return "swish";
  }
  return "elu";
}

ActivationKind activation_from(const std::string& s) {
  if (s == "tanh") return ActivationKind::Tanh;
  if (s == "elu") return ActivationKind::Elu;
  if (s == "swish") return ActivationKind::Swish;
  throw ConfigError("checkpoint: unknown activation '" + s + "'");
}

const char* method_name(DiscretizationMethod m) {
  switch (m) {
    case DiscretizationMethod::Zoh:
      return "zoh";
    case DiscretizationMethod::Bilinear:
      return "bilinear";
    case DiscretizationMethod::ForwardEuler:
      return "forward_euler";
  }
  return "zoh";
}

DiscretizationMethod method_from(const std::string& s) {
  if (s == "zoh") return DiscretizationMethod::Zoh;
  if (s == "bilinear") return DiscretizationMethod::Bilinear;
  if (s == "forward_euler") return DiscretizationMethod::ForwardEuler;
  throw ConfigError("checkpoint: unknown discretization '" + s + "'");
}

json dump_layer(const SslParams& params) {
  json j;
  if (const auto* lru = std::get_if<LruParams>(&params)) {
    j["type"] = "lru";
    j["mu"] = dump_vec(lru->mu);
    j["theta"] = dump_vec(lru->theta);
    j["b_check"] = dump_cplx(lru->b_check);
    j["c_tilde"] = dump_cplx(lru->c_tilde);
    j["d"] = dump_real(lru->d);
    j["f"] = dump_real(lru->f);
    j["skip_identity"] = lru->skip_identity;
  } else if (const auto* ctd = std::get_if<CtDiagParams>(&params)) {
    j["type"] = "ct_diag";
    j["alpha_re"] = dump_vec(ctd->alpha_re);
    j["alpha_im"] = dump_vec(ctd->alpha_im);
    j["b_c"] = dump_cplx(ctd->b_c);
    j["c_c"] = dump_cplx(ctd->c_c);
    j["f"] = dump_real(ctd->f);
    j["skip_identity"] = ctd->skip_identity;
    j["log_gamma"] = dump_vec(ctd->log_gamma);
    j["tau"] = ctd->tau;
  } else {
    const auto& dplr = std::get<DplrParams>(params);
    j["type"] = "dplr";
    j["alpha_re"] = dump_vec(dplr.alpha_re);
    j["alpha_im"] = dump_vec(dplr.alpha_im);
    j["p"] = dump_cplx(dplr.p);
    j["q"] = dump_cplx(dplr.q);
    j["q_equals_p"] = dplr.q_equals_p;
    j["b_c"] = dump_cplx(dplr.b_c);
    j["c_c"] = dump_cplx(dplr.c_c);
    j["f"] = dump_real(dplr.f);
    j["skip_identity"] = dplr.skip_identity;
    j["log_gamma"] = dplr.log_gamma;
    j["tau"] = dplr.tau;
    j["epsilon"] = dplr.epsilon;
  }
  return j;
}

SslParams parse_layer(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("type"))
    throw ConfigError("checkpoint: malformed layer at " + where);
  const std::string type = j.at("type").get<std::string>();
  try {
    if (type == "lru") {
      LruParams p;
      p.mu = parse_vec(j.at("mu"), where);
      p.theta = parse_vec(j.at("theta"), where);
      p.b_check = parse_cplx(j.at("b_check"), where);
      p.c_tilde = parse_cplx(j.at("c_tilde"), where);
      p.d = parse_real(j.at("d"), where);
      p.f = parse_real(j.at("f"), where);
      p.skip_identity = j.at("skip_identity").get<bool>();
      return p;
    }
    if (type == "ct_diag") {
      CtDiagParams p;
      p.alpha_re = parse_vec(j.at("alpha_re"), where);
      p.alpha_im = parse_vec(j.at("alpha_im"), where);
      p.b_c = parse_cplx(j.at("b_c"), where);
      p.c_c = parse_cplx(j.at("c_c"), where);
      p.f = parse_real(j.at("f"), where);
      p.skip_identity = j.at("skip_identity").get<bool>();
      p.log_gamma = parse_vec(j.at("log_gamma"), where);
      p.tau = j.at("tau").get<double>();
      return p;
    }
    if (type == "dplr") {
      DplrParams p;
      p.alpha_re = parse_vec(j.at("alpha_re"), where);
      p.alpha_im = parse_vec(j.at("alpha_im"), where);
      p.p = parse_cplx(j.at("p"), where);
      p.q = parse_cplx(j.at("q"), where);
      p.q_equals_p = j.at("q_equals_p").get<bool>();
      p.b_c = parse_cplx(j.at("b_c"), where);
      p.c_c = parse_cplx(j.at("c_c"), where);
      p.f = parse_real(j.at("f"), where);
      p.skip_identity = j.at("skip_identity").get<bool>();
      p.log_gamma = j.at("log_gamma").get<double>();
      p.tau = j.at("tau").get<double>();
      p.epsilon = j.at("epsilon").get<double>();
      return p;
    }
  } catch (const json::exception& e) {
    throw ConfigError("checkpoint: " + where + ": " + e.what());
  }
  throw ConfigError("checkpoint: unknown layer type '" + type + "'");
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ck) {
  json j;
  j["format_version"] = ck.format_version;
  j["epoch"] = ck.epoch;
  j["best_val_loss"] = ck.best_val_loss;
  j["seed"] = ck.seed;
  json model;
  model["activation"] = activation_name(ck.model.activation.kind);
  model["elu_alpha"] = ck.model.activation.elu_alpha;
  model["discretization"] = method_name(ck.model.method);
  model["allow_forward_euler"] = ck.model.allow_forward_euler;
  json layers = json::array();
  for (const SslParams& p : ck.model.layers) layers.push_back(dump_layer(p));
  model["layers"] = std::move(layers);
  j["model"] = std::move(model);
  if (ck.norm) {
    json n;
    n["u_mean"] = dump_vec(ck.norm->u_mean);
    n["u_std"] = dump_vec(ck.norm->u_std);
    n["y_mean"] = dump_vec(ck.norm->y_mean);
    n["y_std"] = dump_vec(ck.norm->y_std);
    j["normalization"] = std::move(n);
  }
  return j.dump(2);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: invalid json: ") + e.what());
  }
  Checkpoint ck;
  try {
    ck.format_version = j.at("format_version").get<int>();
    if (ck.format_version != 1)
      throw ConfigError("checkpoint: unsupported format version");
    ck.epoch = j.at("epoch").get<int>();
    ck.best_val_loss = j.at("best_val_loss").get<double>();
    ck.seed = j.at("seed").get<std::uint64_t>();
    const json& model = j.at("model");
    ck.model.activation.kind =
        activation_from(model.at("activation").get<std::string>());
    ck.model.activation.elu_alpha = model.at("elu_alpha").get<double>();
    ck.model.method =
        method_from(model.at("discretization").get<std::string>());
    ck.model.allow_forward_euler =
        model.at("allow_forward_euler").get<bool>();
    const json& layers = model.at("layers");
    if (!layers.is_array() || layers.empty())
      throw ConfigError("checkpoint: model has no layers");
    for (std::size_t l = 0; l < layers.size(); ++l)
      ck.model.layers.push_back(
          parse_layer(layers[l], "layer " + std::to_string(l)));
    if (j.contains("normalization")) {
      const json& n = j.at("normalization");
      NormalizationStats st;
      st.u_mean = parse_vec(n.at("u_mean"), "normalization");
      st.u_std = parse_vec(n.at("u_std"), "normalization");
      st.y_mean = parse_vec(n.at("y_mean"), "normalization");
      st.y_std = parse_vec(n.at("y_std"), "normalization");
      ck.norm = std::move(st);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: missing or malformed field: ") +
                      e.what());
  }
  return ck;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write checkpoint file: " + path);
  out << checkpoint_to_json(ck) << "\n";
  if (!out) throw DataError("failed writing checkpoint file: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open checkpoint file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

}  // namespace ssm
