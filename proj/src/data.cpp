#include "ssmkit/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ssmkit/errors.hpp"
#include "ssmkit/rng.hpp"

namespace ssm {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view tok, double& out) {
  tok = trim(tok);
  if (tok.empty()) return false;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(line.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

double pooled_rms(const std::vector<VectorXd>& signals) {
  double acc = 0.0;
  Eigen::Index count = 0;
  for (const VectorXd& s : signals) {
    acc += s.squaredNorm();
    count += s.size();
  }
  if (count == 0) return 0.0;
  return std::sqrt(acc / static_cast<double>(count));
}

}  // namespace

std::vector<const Sequence*> Dataset::with_role(Role r) const {
  std::vector<const Sequence*> out;
  for (const Sequence& s : sequences)
    if (s.role == r) out.push_back(&s);
  return out;
}

Eigen::Index Dataset::n_u() const {
  if (sequences.empty()) throw DataError("dataset is empty");
  return sequences.front().u.cols();
}

Eigen::Index Dataset::n_y() const {
  if (sequences.empty()) throw DataError("dataset is empty");
  return sequences.front().y.cols();
}

Sequence load_csv(const std::string& path, Eigen::Index n_u, Eigen::Index n_y,
                  std::vector<std::string>* notices) {
  if (n_u <= 0 || n_y <= 0)
    throw ConfigError("csv: channel counts must be positive");
  std::ifstream in(path);
  if (!in) throw DataError("cannot open csv file: " + path);
  const Eigen::Index expected = n_u + n_y;
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view stripped = trim(line);
    if (stripped.empty()) continue;
    const std::vector<std::string_view> toks = split_csv(stripped);
    if (first_content) {
      first_content = false;
      bool numeric = true;
      double tmp;
      for (const auto& t : toks)
        if (!parse_double(t, tmp)) {
          numeric = false;
          break;
        }
      if (!numeric) {
        if (notices) {
          std::ostringstream os;
          os << path << ":" << lineno << ": skipping header line";
          notices->push_back(os.str());
        }
        continue;
      }
    }
    if (static_cast<Eigen::Index>(toks.size()) != expected) {
      std::ostringstream os;
      os << path << ":" << lineno << ": row has " << toks.size()
         << " fields, expected " << expected;
      throw DataError(os.str());
    }
    std::vector<double> row(static_cast<std::size_t>(expected));
    for (std::size_t c = 0; c < toks.size(); ++c) {
      double v;
      if (!parse_double(toks[c], v)) {
        std::ostringstream os;
        os << path << ":" << lineno << ": column " << c + 1
           << " is not a number: '" << std::string(trim(toks[c])) << "'";
        throw DataError(os.str());
      }
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << path << ":" << lineno << ": column " << c + 1
           << " is not finite";
        throw DataError(os.str());
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("no data rows in " + path);
  Sequence seq;
  const Eigen::Index T = static_cast<Eigen::Index>(rows.size());
  seq.u.resize(T, n_u);
  seq.y.resize(T, n_y);
  for (Eigen::Index k = 0; k < T; ++k) {
    for (Eigen::Index c = 0; c < n_u; ++c)
      seq.u(k, c) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
    for (Eigen::Index c = 0; c < n_y; ++c)
      seq.y(k, c) =
          rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(n_u + c)];
  }
  return seq;
}

std::vector<Sequence> extract_subsequences(const Sequence& seq,
                                           Eigen::Index length,
                                           Eigen::Index count,
                                           SubseqPolicy policy,
                                           std::uint64_t seed) {
  const Eigen::Index T = seq.u.rows();
  if (length <= 0 || count <= 0)
    throw ConfigError("subsequences: length and count must be positive");
  if (length > T)
    throw ConfigError("subsequences: window is longer than the sequence");
  std::vector<Eigen::Index> starts;
  starts.reserve(static_cast<std::size_t>(count));
  if (policy == SubseqPolicy::Disjoint) {
    const Eigen::Index slots = T / length;
    if (count > slots) {
      std::ostringstream os;
      os << "subsequences: " << count << " disjoint windows of " << length
         << " do not fit in " << T << " samples (" << slots << " slots)";
      throw ConfigError(os.str());
    }
    std::vector<Eigen::Index> slot_ids(static_cast<std::size_t>(slots));
    for (Eigen::Index i = 0; i < slots; ++i)
      slot_ids[static_cast<std::size_t>(i)] = i;
    if (count < slots) {
      Rng rng = Rng::stream(seed, 17);
      for (Eigen::Index i = 0; i < count; ++i) {
        const Eigen::Index j =
            i + static_cast<Eigen::Index>(rng.next_u64() %
                                          static_cast<std::uint64_t>(slots - i));
        std::swap(slot_ids[static_cast<std::size_t>(i)],
                  slot_ids[static_cast<std::size_t>(j)]);
      }
      slot_ids.resize(static_cast<std::size_t>(count));
      std::sort(slot_ids.begin(), slot_ids.end());
    }
    for (Eigen::Index i = 0; i < count; ++i)
      starts.push_back(slot_ids[static_cast<std::size_t>(i)] * length);
  } else {
    if (count == 1) {
      starts.push_back(0);
    } else {
      for (Eigen::Index i = 0; i < count; ++i)
        starts.push_back(i * (T - length) / (count - 1));
    }
  }
  std::vector<Sequence> out;
  out.reserve(starts.size());
  for (const Eigen::Index s : starts) {
    Sequence w;
    w.u = seq.u.middleRows(s, length);
    w.y = seq.y.middleRows(s, length);
    w.role = seq.role;
    out.push_back(std::move(w));
  }
  return out;
}

NormalizationStats compute_norm_stats(const Dataset& ds) {
  const auto train = ds.with_role(Role::Train);
  if (train.empty())
    throw DataError("normalization requires at least one training sequence");
  const Eigen::Index n_u = ds.n_u();
  const Eigen::Index n_y = ds.n_y();
  NormalizationStats st;
  st.u_mean = VectorXd::Zero(n_u);
  st.u_std = VectorXd::Zero(n_u);
  st.y_mean = VectorXd::Zero(n_y);
  st.y_std = VectorXd::Zero(n_y);
  double count = 0.0;
  for (const Sequence* s : train) {
    st.u_mean += s->u.colwise().sum().transpose();
    st.y_mean += s->y.colwise().sum().transpose();
    count += static_cast<double>(s->u.rows());
  }
  st.u_mean /= count;
  st.y_mean /= count;
  for (const Sequence* s : train) {
    st.u_std +=
        (s->u.rowwise() - st.u_mean.transpose()).array().square().colwise().sum().matrix().transpose();
    st.y_std +=
        (s->y.rowwise() - st.y_mean.transpose()).array().square().colwise().sum().matrix().transpose();
  }
  st.u_std = (st.u_std / count).cwiseSqrt();
  st.y_std = (st.y_std / count).cwiseSqrt();
  // constant channels pass through unscaled
  for (Eigen::Index c = 0; c < n_u; ++c)
    if (st.u_std[c] < 1e-300) st.u_std[c] = 1.0;
  for (Eigen::Index c = 0; c < n_y; ++c)
    if (st.y_std[c] < 1e-300) st.y_std[c] = 1.0;
  return st;
}

Dataset normalize(const Dataset& ds) {
  Dataset out = ds;
  const NormalizationStats st = compute_norm_stats(ds);
  for (Sequence& s : out.sequences) {
    s.u = (s.u.rowwise() - st.u_mean.transpose()).array().rowwise() /
          st.u_std.transpose().array();
    s.y = (s.y.rowwise() - st.y_mean.transpose()).array().rowwise() /
          st.y_std.transpose().array();
  }
  out.norm = st;
  return out;
}

MatrixXd denormalize_y(const MatrixXd& y_norm, const NormalizationStats& s) {
  return (y_norm.array().rowwise() * s.y_std.transpose().array()).rowwise() +
         s.y_mean.transpose().array();
}

MatrixXd normalize_u(const MatrixXd& u_raw, const NormalizationStats& s) {
  return (u_raw.rowwise() - s.u_mean.transpose()).array().rowwise() /
         s.u_std.transpose().array();
}

MetricsReport metrics(const MatrixXd& y_true, const MatrixXd& y_pred,
                      Eigen::Index start, Eigen::Index end,
                      double unit_scale) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols())
    throw DataError("metrics: prediction shape does not match the reference");
  if (end < 0) end = y_true.rows();
  if (start < 0 || start >= end || end > y_true.rows())
    throw ConfigError("metrics: invalid evaluation window");
  const Eigen::Index len = end - start;
  const MatrixXd yt = y_true.middleRows(start, len);
  const MatrixXd yp = y_pred.middleRows(start, len);
  const MatrixXd err = yt - yp;
  MetricsReport rep;
  rep.window_start = start;
  rep.window_end = end;
  rep.rmse = std::sqrt(err.squaredNorm() /
                       static_cast<double>(err.size())) *
             unit_scale;
  const Eigen::RowVectorXd mean = yt.colwise().mean();
  const double denom = (yt.rowwise() - mean).norm();
  if (denom < 1e-300)
    throw NumericError("metrics: reference signal is constant on the window");
  rep.fit = 100.0 * (1.0 - err.norm() / denom);
  return rep;
}

VectorXd SynthSystem::simulate_clean(const VectorXd& u) const {
  // Denominator polynomial prod_j (1 - pole_j z^-1); real for closed pole sets.
  const Eigen::Index order = poles.size();
  std::vector<std::complex<double>> coef(static_cast<std::size_t>(order) + 1,
                                         0.0);
  coef[0] = 1.0;
  for (Eigen::Index j = 0; j < order; ++j) {
    for (Eigen::Index k = j + 1; k > 0; --k)
      coef[static_cast<std::size_t>(k)] -=
          poles[j] * coef[static_cast<std::size_t>(k - 1)];
  }
  VectorXd a(order);
  for (Eigen::Index k = 1; k <= order; ++k)
    a[k - 1] = -coef[static_cast<std::size_t>(k)].real();

  const Eigen::Index T = u.size();
  VectorXd lin = VectorXd::Zero(T);
  for (Eigen::Index k = 0; k < T; ++k) {
    double acc = k >= 1 ? u[k - 1] : 0.0;
    for (Eigen::Index j = 0; j < order; ++j)
      if (k - 1 - j >= 0) acc += a[j] * lin[k - 1 - j];
    lin[k] = acc;
  }

  VectorXd out(T);
  for (Eigen::Index k = 0; k < T; ++k) {
    const double v = pre_gain * lin[k];
    double z;
    if (nonlinearity == "tanh")
      z = std::tanh(v);
    else if (nonlinearity == "cubic")
      z = v + 0.25 * v * v * v;
    else if (nonlinearity == "identity")
      z = v;
    else
      throw ConfigError("unknown synthetic nonlinearity: " + nonlinearity);
    out[k] = output_scale * z;
  }
  return out;
}

SynthDataset synth_wiener(int order, const std::string& nonlinearity,
                          Eigen::Index T, Eigen::Index n_seq, double noise_std,
                          std::uint64_t seed) {
  if (order != 1 && order != 2)
    throw ConfigError("synthetic system order must be 1 or 2");
  if (T < 8 || n_seq <= 0)
    throw ConfigError("synthetic dataset needs T >= 8 and n_seq >= 1");
  if (noise_std < 0.0) throw ConfigError("noise level must be non-negative");

  SynthSystem sys;
  sys.nonlinearity = nonlinearity;
  sys.noise_std = noise_std;
  sys.input_bandwidth = 0.8;
  {
    Rng rng = Rng::stream(seed, 0);
    const double r = rng.uniform(0.75, 0.93);
    const double phase = rng.uniform(0.15 * kPi, 0.45 * kPi);
    if (order == 1) {
      sys.poles.resize(1);
      sys.poles[0] = r;
    } else {
      sys.poles.resize(2);
      sys.poles[0] = std::polar(r, phase);
      sys.poles[1] = std::conj(sys.poles[0]);
    }
  }

  // Multisine inputs with per-sequence random phases, unit RMS.
  const int harmonics = 25;
  std::vector<VectorXd> inputs;
  inputs.reserve(static_cast<std::size_t>(n_seq));
  for (Eigen::Index i = 0; i < n_seq; ++i) {
    Rng rng = Rng::stream(seed, 100 + static_cast<std::uint64_t>(i));
    VectorXd u = VectorXd::Zero(T);
    for (int h = 1; h <= harmonics; ++h) {
      const double cycles = std::max(
          1.0, std::floor(static_cast<double>(h) * sys.input_bandwidth *
                          static_cast<double>(T) / (2.0 * harmonics)));
      const double ph = rng.uniform(0.0, 2.0 * kPi);
      for (Eigen::Index k = 0; k < T; ++k)
        u[k] += std::cos(2.0 * kPi * cycles * static_cast<double>(k) /
                             static_cast<double>(T) +
                         ph);
    }
    const double rms = std::sqrt(u.squaredNorm() / static_cast<double>(T));
    u /= rms;
    inputs.push_back(std::move(u));
  }

  // Calibrate the drive so the nonlinearity sees unit-RMS excursions, then
  // normalize the clean output to unit RMS so noise_std is 1/SNR directly.
  {
    sys.pre_gain = 1.0;
    sys.output_scale = 1.0;
    SynthSystem probe = sys;
    probe.nonlinearity = "identity";
    std::vector<VectorXd> lin;
    lin.reserve(inputs.size());
    for (const VectorXd& u : inputs) lin.push_back(probe.simulate_clean(u));
    const double lin_rms = pooled_rms(lin);
    if (lin_rms < 1e-300) throw NumericError("degenerate synthetic system");
    sys.pre_gain = 1.0 / lin_rms;
    std::vector<VectorXd> clean;
    clean.reserve(inputs.size());
    for (const VectorXd& u : inputs) clean.push_back(sys.simulate_clean(u));
    const double clean_rms = pooled_rms(clean);
    if (clean_rms < 1e-300) throw NumericError("degenerate synthetic system");
    sys.output_scale = 1.0 / clean_rms;
  }

  SynthDataset out;
  out.truth = sys;
  out.data.tau = 1.0;
  out.data.sequences.reserve(static_cast<std::size_t>(n_seq));
  for (Eigen::Index i = 0; i < n_seq; ++i) {
    Sequence s;
    s.u = inputs[static_cast<std::size_t>(i)];
    VectorXd y = sys.simulate_clean(inputs[static_cast<std::size_t>(i)]);
    if (noise_std > 0.0) {
      Rng rng = Rng::stream(seed, 1000 + static_cast<std::uint64_t>(i));
      for (Eigen::Index k = 0; k < T; ++k) y[k] += rng.normal(0.0, noise_std);
    }
    s.y = y;
    out.data.sequences.push_back(std::move(s));
  }
  return out;
}

}  // namespace ssm
