#include "ssmkit/model.hpp"

#include <algorithm>
#include <sstream>

#include "ssmkit/errors.hpp"

namespace ssm {

namespace {

// Uniform walker over the trainable content of one layer's parameters.
// Visitors receive (block name, real span accessor) in a fixed order, which
// defines both the flat layout and the pack/unpack byte order.
template <typename Fn>
void visit_real(const char* name, VectorXd& v, Fn&& fn) {
  fn(name, v.data(), v.size());
}
template <typename Fn>
void visit_real(const char* name, MatrixXd& m, Fn&& fn) {
  fn(name, m.data(), m.size());
}
template <typename Fn>
void visit_scalar(const char* name, double& s, Fn&& fn) {
  fn(name, &s, Eigen::Index(1));
}

// Complex blocks contribute 2*size doubles, interleaved (re, im) in Eigen's
// native storage order.
template <typename Fn>
void visit_complex(const char* name, MatrixXcd& m, Fn&& fn) {
  fn(name, reinterpret_cast<double*>(m.data()), 2 * m.size());
}

template <typename Fn>
void visit_layer(LruParams& p, Fn&& fn) {
  visit_real("mu", p.mu, fn);
  visit_real("theta", p.theta, fn);
  visit_complex("b_check", p.b_check, fn);
  visit_complex("c_tilde", p.c_tilde, fn);
  visit_real("d", p.d, fn);
  if (!p.skip_identity) visit_real("f", p.f, fn);
}

template <typename Fn>
void visit_layer(CtDiagParams& p, Fn&& fn) {
  visit_real("alpha_re", p.alpha_re, fn);
  visit_real("alpha_im", p.alpha_im, fn);
  visit_complex("b_c", p.b_c, fn);
  visit_complex("c_c", p.c_c, fn);
  visit_real("log_gamma", p.log_gamma, fn);
  if (!p.skip_identity) visit_real("f", p.f, fn);
}

template <typename Fn>
void visit_layer(DplrParams& p, Fn&& fn) {
  visit_real("alpha_re", p.alpha_re, fn);
  visit_real("alpha_im", p.alpha_im, fn);
  visit_complex("p", p.p, fn);
  if (!p.q_equals_p) visit_complex("q", p.q, fn);
  visit_complex("b_c", p.b_c, fn);
  visit_complex("c_c", p.c_c, fn);
  visit_scalar("log_gamma", p.log_gamma, fn);
  if (!p.skip_identity) visit_real("f", p.f, fn);
}

template <typename Fn>
void visit_model(ParamModel& m, Fn&& fn) {
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    std::visit(
        [&](auto& params) {
          visit_layer(params, [&](const char* name, double* data,
                                  Eigen::Index size) {
            std::ostringstream os;
            os << "layer" << l << "." << name;
            fn(os.str(), data, size);
          });
        },
        m.layers[l]);
  }
}

Eigen::Index params_n_u(const SslParams& p) {
  return std::visit([](const auto& q) { return q.n_u(); }, p);
}
Eigen::Index params_n_y(const SslParams& p) {
  return std::visit([](const auto& q) { return q.n_y(); }, p);
}

}  // namespace

Eigen::Index ParamModel::n_u() const {
  if (layers.empty()) throw ConfigError("model has no layers");
  return params_n_u(layers.front());
}

Eigen::Index ParamModel::n_y() const {
  if (layers.empty()) throw ConfigError("model has no layers");
  return params_n_y(layers.back());
}

void ParamModel::validate() const {
  if (layers.empty()) throw ConfigError("model has no layers");
  for (std::size_t l = 1; l < layers.size(); ++l) {
    if (params_n_u(layers[l]) != params_n_y(layers[l - 1])) {
      std::ostringstream os;
      os << "layer " << l << " expects " << params_n_u(layers[l])
         << " inputs but layer " << l - 1 << " emits "
         << params_n_y(layers[l - 1]);
      throw ConfigError(os.str());
    }
  }
  realize_model(*this).validate();
}

SsModel realize_model(const ParamModel& m) {
  if (m.layers.empty()) throw ConfigError("model has no layers");
  SsModel out;
  out.layers.reserve(m.layers.size());
  for (const SslParams& params : m.layers) {
    SsLayer layer;
    layer.activation = m.activation;
    if (const auto* lru = std::get_if<LruParams>(&params)) {
      layer.lti = lru_realize(*lru);
      layer.skip_identity = lru->skip_identity;
    } else if (const auto* ctd = std::get_if<CtDiagParams>(&params)) {
      layer.lti = ct_diag_realize(*ctd, m.method, m.allow_forward_euler);
      layer.skip_identity = ctd->skip_identity;
    } else {
      const auto& dplr = std::get<DplrParams>(params);
      DplrRealization r = dplr_realize(dplr, m.method, m.allow_forward_euler);
      layer.lti = std::move(r.dense);
      layer.transfer = std::move(r.transfer);
      layer.skip_identity = dplr.skip_identity;
    }
    out.layers.push_back(std::move(layer));
  }
  return out;
}

const ParamBlock& FlatLayout::block_of(Eigen::Index i) const {
  for (const ParamBlock& b : blocks)
    if (i >= b.offset && i < b.offset + b.size) return b;
  throw ConfigError("flat index outside the parameter vector");
}

FlatLayout flat_layout(const ParamModel& m) {
  FlatLayout layout;
  ParamModel copy = m;  // visitation needs mutable spans
  visit_model(copy, [&](const std::string& name, double*, Eigen::Index size) {
    layout.blocks.push_back(ParamBlock{name, layout.total, size});
    layout.total += size;
  });
  return layout;
}

VectorXd pack(const ParamModel& m) {
  ParamModel copy = m;
  std::vector<double> flat;
  visit_model(copy, [&](const std::string&, double* data, Eigen::Index size) {
    flat.insert(flat.end(), data, data + size);
  });
  return Eigen::Map<VectorXd>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

ParamModel unpack(const ParamModel& prototype, const VectorXd& theta) {
  ParamModel out = prototype;
  Eigen::Index cursor = 0;
  visit_model(out, [&](const std::string& name, double* data,
                       Eigen::Index size) {
    if (cursor + size > theta.size()) {
      std::ostringstream os;
      os << "parameter vector too short at block " << name;
      throw ConfigError(os.str());
    }
    std::copy(theta.data() + cursor, theta.data() + cursor + size, data);
    cursor += size;
  });
  if (cursor != theta.size()) {
    std::ostringstream os;
    os << "parameter vector has " << theta.size() << " entries, model expects "
       << cursor;
    throw ConfigError(os.str());
  }
  return out;
}

}  // namespace ssm
