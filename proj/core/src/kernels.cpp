#include "catbox/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "catbox/errors.hpp"

namespace catbox {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kTwoPiSq = 2.0 * std::numbers::pi * std::numbers::pi;

double hamming_offset(const KernelParams& p) { return p.hamming_unit_diagonal ? 1.0 : 0.0; }

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd to_eigen(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void validate_params(const KernelParams& p, std::size_t num_cat, std::size_t num_con) {
  const auto d = static_cast<Eigen::Index>(num_con);
  if (num_con > 0 && (p.gsm.empty() || p.csm.empty())) {
    throw Error("kernel params: at least one Gaussian and one Cauchy component required");
  }
  double mass = 0.0;
  for (const auto& c : p.gsm) {
    if (c.mean.size() != d || c.var.size() != d) throw Error("kernel params: gsm dimension mismatch");
    if (!(c.weight >= 0.0)) throw Error("kernel params: gsm weight must be >= 0");
    if (!(c.var.array() > 0.0).all()) throw Error("kernel params: gsm var must be > 0");
    mass += c.weight;
  }
  for (const auto& c : p.csm) {
    if (c.eta.size() != d || c.gamma.size() != d) throw Error("kernel params: csm dimension mismatch");
    if (!(c.weight >= 0.0)) throw Error("kernel params: csm weight must be >= 0");
    if (!(c.gamma.array() > 0.0).all()) throw Error("kernel params: csm gamma must be > 0");
    mass += c.weight;
  }
  if (num_con > 0 && !(mass > 0.0)) throw Error("kernel params: total spectral weight must be > 0");
  if (p.hamming.size() != static_cast<Eigen::Index>(num_cat)) {
    throw Error("kernel params: expected " + std::to_string(num_cat) + " hamming lengthscales");
  }
  if (!(p.hamming.array() >= 0.0).all()) throw Error("kernel params: hamming lengthscales must be >= 0");
  if (!(p.lambda >= 0.0 && p.lambda <= 1.0)) throw Error("kernel params: lambda must lie in [0,1]");
  if (!(p.noise_var >= 1e-8)) throw Error("kernel params: noise_var must be >= 1e-8");
}

double k_gsm(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& tau) {
  double k = 0.0;
  for (const auto& c : p.gsm) {
    const double decay = std::exp(-kTwoPiSq * (c.var.array() * tau.array().square()).sum());
    k += c.weight * decay * std::cos(kTwoPi * tau.dot(c.mean));
  }
  return k;
}

double k_csm(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& tau) {
  double k = 0.0;
  for (const auto& c : p.csm) {
    const double decay = std::exp(-kTwoPi * c.gamma.dot(tau.cwiseAbs()));
    k += c.weight * decay * std::cos(kTwoPi * tau.dot(c.eta));
  }
  return k;
}

double k_hamming(const KernelParams& p, std::span<const int> a, std::span<const int> b) {
  const std::size_t u = a.size();
  if (u == 0) return 1.0;
  const double offset = hamming_offset(p);
  double s = 0.0;
  for (std::size_t i = 0; i < u; ++i) {
    s += p.hamming[static_cast<Eigen::Index>(i)] * ((a[i] == b[i] ? 1.0 : 0.0) - offset);
  }
  return std::exp(s / static_cast<double>(u));
}

double combine_composite(double lambda, double kc, double ku, bool has_con, bool has_cat) {
  if (!has_cat) return kc;
  if (!has_con) return ku;
  return lambda * (kc * ku) + (1.0 - lambda) * (kc + ku);
}

double k_composite(const KernelParams& p, const NormalizedPoint& x, const NormalizedPoint& y) {
  const bool has_con = x.con01.size() > 0;
  const bool has_cat = !x.cat.empty();
  const double kc = has_con ? k_gc(p, x.con01 - y.con01) : 0.0;
  const double ku = has_cat ? k_hamming(p, x.cat, y.cat) : 0.0;
  return combine_composite(p.lambda, kc, ku, has_con, has_cat);
}

Eigen::MatrixXd gram(const KernelParams& p, std::span<const NormalizedPoint> points, double jitter) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double v = k_composite(p, points[static_cast<std::size_t>(i)],
                                   points[static_cast<std::size_t>(j)]);
      if (!std::isfinite(v)) {
        throw Error("non-finite kernel value at pair (" + std::to_string(i) + ", " +
                    std::to_string(j) + ")");
      }
      k(i, j) = v;
      k(j, i) = v;
    }
    k(i, i) += p.noise_var + jitter;
  }
  return k;
}

Eigen::VectorXd cross_cov(const KernelParams& p, std::span<const NormalizedPoint> points,
                          const NormalizedPoint& x) {
  Eigen::VectorXd k(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    k[static_cast<Eigen::Index>(i)] = k_composite(p, x, points[i]);
  }
  return k;
}

// ---------------------------------------------------------------------------

HyperLayout::HyperLayout(std::size_t num_cat, std::size_t num_con, std::size_t q_gsm,
                         std::size_t q_csm)
    : num_cat_(num_cat), num_con_(num_con), q_gsm_(q_gsm), q_csm_(q_csm) {}

HyperLayout::HyperLayout(const KernelParams& shape)
    : HyperLayout(static_cast<std::size_t>(shape.hamming.size()),
                  shape.gsm.empty() ? (shape.csm.empty() ? 0 : static_cast<std::size_t>(shape.csm[0].eta.size()))
                                    : static_cast<std::size_t>(shape.gsm[0].mean.size()),
                  shape.gsm.size(), shape.csm.size()) {}

Eigen::VectorXd HyperLayout::pack(const KernelParams& p) const {
  constexpr double kTiny = 1e-12;
  Eigen::VectorXd theta(static_cast<Eigen::Index>(size()));
  const auto d = static_cast<Eigen::Index>(num_con_);
  for (std::size_t q = 0; q < q_gsm_; ++q) {
    const auto o = static_cast<Eigen::Index>(gsm_offset(q));
    theta[o] = std::log(std::max(p.gsm[q].weight, kTiny));
    theta.segment(o + 1, d) = p.gsm[q].mean;
    theta.segment(o + 1 + d, d) = p.gsm[q].var.array().max(kTiny).log().matrix();
  }
  for (std::size_t q = 0; q < q_csm_; ++q) {
    const auto o = static_cast<Eigen::Index>(csm_offset(q));
    theta[o] = std::log(std::max(p.csm[q].weight, kTiny));
    theta.segment(o + 1, d) = p.csm[q].eta;
    theta.segment(o + 1 + d, d) = p.csm[q].gamma.array().max(kTiny).log().matrix();
  }
  const auto h = static_cast<Eigen::Index>(hamming_offset());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(num_cat_); ++i) {
    theta[h + i] = std::log(std::max(p.hamming[i], kTiny));
  }
  const double lam = std::clamp(p.lambda, 1e-9, 1.0 - 1e-9);
  theta[static_cast<Eigen::Index>(lambda_index())] = std::log(lam / (1.0 - lam));
  theta[static_cast<Eigen::Index>(noise_index())] = std::log(p.noise_var);
  return theta;
}

KernelParams HyperLayout::unpack(const Eigen::VectorXd& theta, const KernelParams& flags) const {
  KernelParams p;
  p.hamming_unit_diagonal = flags.hamming_unit_diagonal;
  const auto d = static_cast<Eigen::Index>(num_con_);
  p.gsm.resize(q_gsm_);
  for (std::size_t q = 0; q < q_gsm_; ++q) {
    const auto o = static_cast<Eigen::Index>(gsm_offset(q));
    p.gsm[q].weight = std::exp(theta[o]);
    p.gsm[q].mean = theta.segment(o + 1, d);
    p.gsm[q].var = theta.segment(o + 1 + d, d).array().exp().matrix();
  }
  p.csm.resize(q_csm_);
  for (std::size_t q = 0; q < q_csm_; ++q) {
    const auto o = static_cast<Eigen::Index>(csm_offset(q));
    p.csm[q].weight = std::exp(theta[o]);
    p.csm[q].eta = theta.segment(o + 1, d);
    p.csm[q].gamma = theta.segment(o + 1 + d, d).array().exp().matrix();
  }
  p.hamming = theta.segment(static_cast<Eigen::Index>(hamming_offset()),
                            static_cast<Eigen::Index>(num_cat_))
                  .array()
                  .exp()
                  .matrix();
  p.lambda = 1.0 / (1.0 + std::exp(-theta[static_cast<Eigen::Index>(lambda_index())]));
  p.noise_var = std::exp(theta[static_cast<Eigen::Index>(noise_index())]);
  return p;
}

double k_composite_with_grad(const KernelParams& p, const HyperLayout& layout,
                             const NormalizedPoint& x, const NormalizedPoint& y,
                             Eigen::Ref<Eigen::VectorXd> grad) {
  grad.setZero();
  const auto d = static_cast<Eigen::Index>(layout.num_con());
  const bool has_con = d > 0;
  const bool has_cat = layout.num_cat() > 0;

  // Continuous part; gradients land in grad first and get rescaled below.
  double kc = 0.0;
  if (has_con) {
    const Eigen::VectorXd tau = x.con01 - y.con01;
    const Eigen::ArrayXd tau_sq = tau.array().square();
    const Eigen::ArrayXd tau_abs = tau.array().abs();
    for (std::size_t q = 0; q < layout.q_gsm(); ++q) {
      const auto& c = p.gsm[q];
      const auto o = static_cast<Eigen::Index>(layout.gsm_offset(q));
      const double decay = std::exp(-kTwoPiSq * (c.var.array() * tau_sq).sum());
      const double phase = kTwoPi * tau.dot(c.mean);
      const double term = c.weight * decay * std::cos(phase);
      const double sin_term = c.weight * decay * std::sin(phase);
      kc += term;
      grad[o] = term;
      grad.segment(o + 1, d) = (-kTwoPi * sin_term) * tau;
      grad.segment(o + 1 + d, d) = (-kTwoPiSq * term) * (c.var.array() * tau_sq).matrix();
    }
    for (std::size_t q = 0; q < layout.q_csm(); ++q) {
      const auto& c = p.csm[q];
      const auto o = static_cast<Eigen::Index>(layout.csm_offset(q));
      const double decay = std::exp(-kTwoPi * (c.gamma.array() * tau_abs).sum());
      const double phase = kTwoPi * tau.dot(c.eta);
      const double term = c.weight * decay * std::cos(phase);
      const double sin_term = c.weight * decay * std::sin(phase);
      kc += term;
      grad[o] = term;
      grad.segment(o + 1, d) = (-kTwoPi * sin_term) * tau;
      grad.segment(o + 1 + d, d) = (-kTwoPi * term) * (c.gamma.array() * tau_abs).matrix();
    }
  }

  double ku = 0.0;
  const auto h = static_cast<Eigen::Index>(layout.hamming_offset());
  const auto u = static_cast<Eigen::Index>(layout.num_cat());
  if (has_cat) {
    const double offset = hamming_offset(p);
    double s = 0.0;
    for (Eigen::Index i = 0; i < u; ++i) {
      const double match = (x.cat[static_cast<std::size_t>(i)] == y.cat[static_cast<std::size_t>(i)] ? 1.0 : 0.0) - offset;
      s += p.hamming[i] * match;
      grad[h + i] = p.hamming[i] * match / static_cast<double>(u);
    }
    ku = std::exp(s / static_cast<double>(u));
    grad.segment(h, u) *= ku;
  }

  const double k = combine_composite(p.lambda, kc, ku, has_con, has_cat);
  if (has_con && has_cat) {
    const double dk_dkc = p.lambda * ku + (1.0 - p.lambda);
    const double dk_dku = p.lambda * kc + (1.0 - p.lambda);
    grad.head(h) *= dk_dkc;
    grad.segment(h, u) *= dk_dku;
    grad[static_cast<Eigen::Index>(layout.lambda_index())] =
        (kc * ku - kc - ku) * p.lambda * (1.0 - p.lambda);
  }
  return k;
}

// ---------------------------------------------------------------------------

nlohmann::json params_to_json(const KernelParams& p) {
  nlohmann::json gsm = nlohmann::json::array();
  for (const auto& c : p.gsm) {
    gsm.push_back({{"weight", c.weight}, {"mean", to_std(c.mean)}, {"var", to_std(c.var)}});
  }
  nlohmann::json csm = nlohmann::json::array();
  for (const auto& c : p.csm) {
    csm.push_back({{"weight", c.weight}, {"eta", to_std(c.eta)}, {"gamma", to_std(c.gamma)}});
  }
  return {{"gsm", gsm},
          {"csm", csm},
          {"hamming_lengthscales", to_std(p.hamming)},
          {"lambda", p.lambda},
          {"noise_var", p.noise_var},
          {"hamming_unit_diagonal", p.hamming_unit_diagonal}};
}

KernelParams params_from_json(const nlohmann::json& j) {
  KernelParams p;
  try {
    for (const auto& c : j.at("gsm")) {
      p.gsm.push_back({c.at("weight").get<double>(), to_eigen(c.at("mean")), to_eigen(c.at("var"))});
    }
    for (const auto& c : j.at("csm")) {
      p.csm.push_back({c.at("weight").get<double>(), to_eigen(c.at("eta")), to_eigen(c.at("gamma"))});
    }
    p.hamming = to_eigen(j.at("hamming_lengthscales"));
    p.lambda = j.at("lambda").get<double>();
    p.noise_var = j.at("noise_var").get<double>();
    p.hamming_unit_diagonal = j.value("hamming_unit_diagonal", false);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("kernel params json: ") + e.what());
  }
  return p;
}

}  // namespace catbox
