#include "catbox/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>

#include "catbox/errors.hpp"
#include "catbox/lbfgs.hpp"

namespace catbox {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)
constexpr double kNoiseFloor = 1e-8;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

// Per-dimension span of the normalized training inputs, floored so that a
// single point does not produce an infinite frequency cap.
Eigen::VectorXd input_range(const TrainingSet& train, Eigen::Index d) {
  Eigen::VectorXd lo = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
  Eigen::VectorXd hi = Eigen::VectorXd::Constant(d, -std::numeric_limits<double>::infinity());
  for (const auto& p : train.points) {
    lo = lo.cwiseMin(p.con01);
    hi = hi.cwiseMax(p.con01);
  }
  Eigen::VectorXd r = hi - lo;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(r[j] > 0.05)) r[j] = train.points.size() > 1 ? 0.05 : 1.0;
  }
  return r;
}

Eigen::VectorXd frequency_cap(const TrainingSet& train, Eigen::Index d) {
  const double n = static_cast<double>(train.points.size());
  return (n / 2.0) * input_range(train, d).cwiseInverse();
}

// Median |tau_j| over all training pairs, per dimension.
Eigen::VectorXd median_distance(const TrainingSet& train, Eigen::Index d) {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(d, 0.5);
  const std::size_t n = train.points.size();
  if (n < 2) return out;
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> dist;
    dist.reserve(n * (n - 1) / 2);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        dist.push_back(std::abs(train.points[a].con01[j] - train.points[b].con01[j]));
      }
    }
    out[j] = std::clamp(median(std::move(dist)), 0.01, 1.0);
  }
  return out;
}

}  // namespace

TrainingSet make_training_set(const SearchSpace& space, std::span<const Observation> observations) {
  if (observations.empty()) throw StateError("at least one observation is required");
  TrainingSet t;
  const auto n = static_cast<Eigen::Index>(observations.size());
  t.points.reserve(observations.size());
  Eigen::VectorXd raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& obs = observations[static_cast<std::size_t>(i)];
    if (auto violation = validate_point(space, obs.point)) throw PointError(*violation);
    if (!std::isfinite(obs.y)) throw Error("observation " + std::to_string(i) + " is not finite");
    t.points.push_back(normalize(space, obs.point));
    raw[i] = obs.y;
  }
  t.y_mean = raw.mean();
  const double var = (raw.array() - t.y_mean).square().sum() / static_cast<double>(n);
  t.y_std = var > 0.0 ? std::sqrt(var) : 1.0;
  if (!(t.y_std > 1e-300)) t.y_std = 1.0;
  t.y = (raw.array() - t.y_mean) / t.y_std;
  return t;
}

double Posterior::std() const { return std::sqrt(std::max(var, 0.0)); }

GramFactor factorize(const KernelParams& params, std::span<const NormalizedPoint> points) {
  Eigen::MatrixXd k = gram(params, points, 0.0);
  const auto n = k.rows();
  double jitter = 1e-8 * k.trace() / static_cast<double>(n);
  if (!(jitter > 0.0)) jitter = 1e-12;
  constexpr int kEscalations = 6;
  for (int attempt = 0; attempt <= kEscalations; ++attempt) {
    Eigen::MatrixXd kj = k;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(kj);
    if (llt.info() == Eigen::Success && llt.matrixLLT().diagonal().allFinite() &&
        (llt.matrixLLT().diagonal().array() > 0.0).all()) {
      return {llt.matrixL(), jitter};
    }
    if (attempt < kEscalations) jitter *= 10.0;
  }
  throw GramNotPd(jitter);
}

GpModel::GpModel(TrainingSet train, KernelParams params)
    : train_(std::move(train)), params_(std::move(params)) {
  factor_ = factorize(params_, train_.points);
  alpha_ = factor_.chol.triangularView<Eigen::Lower>().solve(train_.y);
  factor_.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

Posterior GpModel::predict(const NormalizedPoint& x) const {
  const Eigen::VectorXd ks = cross_cov(params_, train_.points, x);
  Posterior post;
  post.y_mean = train_.y_mean;
  post.y_std = train_.y_std;
  post.mean = ks.dot(alpha_);
  const Eigen::VectorXd v = factor_.chol.triangularView<Eigen::Lower>().solve(ks);
  post.var = std::max(k_composite(params_, x, x) - v.squaredNorm(), 0.0);
  return post;
}

GpModel fit(const SearchSpace& space, std::span<const Observation> observations,
            const KernelParams& params) {
  validate_params(params, space.num_categorical(), space.num_continuous());
  return GpModel(make_training_set(space, observations), params);
}

Posterior predict(const SearchSpace& space, const GpModel& model, const MixedPoint& x) {
  if (auto violation = validate_point(space, x)) throw PointError(*violation);
  return model.predict(normalize(space, x));
}

double mll(const TrainingSet& train, const KernelParams& params) {
  const GramFactor f = factorize(params, train.points);
  const auto l = f.chol.triangularView<Eigen::Lower>();
  const Eigen::VectorXd a = l.solve(train.y);
  const double n = static_cast<double>(train.y.size());
  return -0.5 * a.squaredNorm() - f.chol.diagonal().array().log().sum() - 0.5 * n * kLog2Pi;
}

double mll(const SearchSpace& space, std::span<const Observation> observations,
           const KernelParams& params) {
  validate_params(params, space.num_categorical(), space.num_continuous());
  return mll(make_training_set(space, observations), params);
}

MllGradient mll_with_grad(const TrainingSet& train, const KernelParams& params,
                          const HyperLayout& layout) {
  const GramFactor f = factorize(params, train.points);
  const auto n = static_cast<Eigen::Index>(train.points.size());
  const auto l = f.chol.triangularView<Eigen::Lower>();
  const Eigen::VectorXd alpha = l.transpose().solve(l.solve(train.y));

  MllGradient out;
  out.value = -0.5 * train.y.dot(alpha) - f.chol.diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * kLog2Pi;

  // d mll / d theta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta)
  Eigen::MatrixXd w = l.transpose().solve(l.solve(Eigen::MatrixXd::Identity(n, n)));
  w = alpha * alpha.transpose() - w;

  const auto p = static_cast<Eigen::Index>(layout.size());
  const auto noise_slot = static_cast<Eigen::Index>(layout.noise_index());
  out.grad = Eigen::VectorXd::Zero(p);
  Eigen::VectorXd dk(p);
  Eigen::VectorXd dtrace = Eigen::VectorXd::Zero(p);
  double trace = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const double kij = k_composite_with_grad(params, layout, train.points[static_cast<std::size_t>(i)],
                                               train.points[static_cast<std::size_t>(j)], dk);
      const double weight = (i == j) ? 0.5 * w(i, i) : w(i, j);
      out.grad.noalias() += weight * dk;
      if (i == j) {
        trace += kij;
        dtrace += dk;
      }
    }
  }
  out.grad[noise_slot] = 0.5 * params.noise_var * w.trace();

  // The jitter is proportional to trace(K), so it moves with the parameters.
  trace += static_cast<double>(n) * params.noise_var;
  if (trace > 0.0) {
    dtrace[noise_slot] = static_cast<double>(n) * params.noise_var;
    out.grad.noalias() += (0.5 * w.trace() * f.jitter / trace) * dtrace;
  }
  return out;
}

KernelParams initial_params(const SearchSpace& space, const TrainingSet& train,
                            const KernelConfig& config, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(space.num_continuous());
  const auto u = static_cast<Eigen::Index>(space.num_categorical());
  KernelParams p;
  p.hamming_unit_diagonal = config.hamming_unit_diagonal;
  p.hamming = Eigen::VectorXd::Ones(u);
  p.lambda = 0.5;
  p.noise_var = 1e-3;
  if (d == 0) return p;

  const Eigen::VectorXd cap = frequency_cap(train, d);
  const Eigen::VectorXd med = median_distance(train, d);
  // exp(-2 pi^2 var tau^2) and exp(-2 pi gamma |tau|) both decay on the
  // scale of the median pairwise distance.
  const Eigen::VectorXd var = (2.0 * std::numbers::pi * med).array().square().inverse().matrix();
  const Eigen::VectorXd gamma = (2.0 * std::numbers::pi * med).cwiseInverse();
  const std::size_t q_total = config.q_gsm + config.q_csm;
  const double weight = 1.0 / static_cast<double>(q_total);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_freq = [&] {
    Eigen::VectorXd f(d);
    for (Eigen::Index j = 0; j < d; ++j) f[j] = unit(rng) * cap[j];
    return f;
  };
  for (std::size_t q = 0; q < config.q_gsm; ++q) p.gsm.push_back({weight, draw_freq(), var});
  for (std::size_t q = 0; q < config.q_csm; ++q) p.csm.push_back({weight, draw_freq(), gamma});
  return p;
}

HyperBounds hyper_bounds(const HyperLayout& layout, const TrainingSet& train) {
  const auto size = static_cast<Eigen::Index>(layout.size());
  const auto d = static_cast<Eigen::Index>(layout.num_con());
  HyperBounds b{Eigen::VectorXd(size), Eigen::VectorXd(size)};
  const double two_pi = 2.0 * std::numbers::pi;
  // Length scales between 1e-2 and 10 normalized units.
  const double len_lo = 1e-2, len_hi = 10.0;
  const double log_var_lo = -2.0 * std::log(two_pi * len_hi);
  const double log_var_hi = -2.0 * std::log(two_pi * len_lo);
  const double log_gamma_lo = -std::log(two_pi * len_hi);
  const double log_gamma_hi = -std::log(two_pi * len_lo);
  const Eigen::VectorXd cap = d > 0 ? frequency_cap(train, d) : Eigen::VectorXd();

  auto fill_component = [&](std::size_t offset, double lv_lo, double lv_hi) {
    const auto o = static_cast<Eigen::Index>(offset);
    b.lower[o] = std::log(1e-4);
    b.upper[o] = std::log(20.0);
    b.lower.segment(o + 1, d).setZero();
    b.upper.segment(o + 1, d) = cap;
    b.lower.segment(o + 1 + d, d).setConstant(lv_lo);
    b.upper.segment(o + 1 + d, d).setConstant(lv_hi);
  };
  for (std::size_t q = 0; q < layout.q_gsm(); ++q) fill_component(layout.gsm_offset(q), log_var_lo, log_var_hi);
  for (std::size_t q = 0; q < layout.q_csm(); ++q) fill_component(layout.csm_offset(q), log_gamma_lo, log_gamma_hi);
  const auto h = static_cast<Eigen::Index>(layout.hamming_offset());
  const auto u = static_cast<Eigen::Index>(layout.num_cat());
  b.lower.segment(h, u).setConstant(std::log(1e-3));
  b.upper.segment(h, u).setConstant(std::log(8.0));
  b.lower[static_cast<Eigen::Index>(layout.lambda_index())] = -6.0;
  b.upper[static_cast<Eigen::Index>(layout.lambda_index())] = 6.0;
  b.lower[static_cast<Eigen::Index>(layout.noise_index())] = std::log(kNoiseFloor * (1.0 + 1e-12));  // exp() must round back above the floor
  b.upper[static_cast<Eigen::Index>(layout.noise_index())] = std::log(1.0);
  return b;
}

HyperOptResult optimize_hyperparams(const SearchSpace& space,
                                    std::span<const Observation> observations,
                                    const KernelParams& init, const HyperOptConfig& config) {
  validate_params(init, space.num_categorical(), space.num_continuous());
  const TrainingSet train = make_training_set(space, observations);
  const HyperLayout layout(space.num_categorical(), space.num_continuous(), init.gsm.size(),
                           init.csm.size());
  const HyperBounds bounds = hyper_bounds(layout, train);

  HyperOptResult result;
  result.params = init;
  try {
    result.init_mll = mll(train, init);
  } catch (const GramNotPd&) {
    result.init_mll = -std::numeric_limits<double>::infinity();
  }
  result.mll = result.init_mll;

  auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd& grad) -> double {
    try {
      const MllGradient g = mll_with_grad(train, layout.unpack(theta, init), layout);
      if (!std::isfinite(g.value) || !g.grad.allFinite()) return std::numeric_limits<double>::quiet_NaN();
      grad = g.grad;
      return g.value;
    } catch (const Error&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };

  Rng rng(derive_seed(config.seed, 0x4d4c4cULL));
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::VectorXd theta0 = layout.pack(init);
  const Eigen::VectorXd span = bounds.upper - bounds.lower;
  LbfgsOptions opts;
  opts.max_iters = config.max_iters;

  bool any_ok = false;
  const int starts = std::max(1, config.restarts);
  for (int s = 0; s < starts; ++s) {
    Eigen::VectorXd start = theta0;
    if (s > 0) {
      for (Eigen::Index i = 0; i < start.size(); ++i) {
        start[i] += config.perturb_scale * normal(rng) * std::min(span[i], 4.0) * 0.25;
      }
    }
    const LbfgsResult r = maximize_box(objective, start, bounds.lower, bounds.upper, opts);
    if (!r.ok) continue;
    any_ok = true;
    KernelParams candidate = layout.unpack(r.x, init);
    double value;
    try {
      value = mll(train, candidate);
    } catch (const GramNotPd&) {
      continue;
    }
    if (value > result.mll) {
      result.mll = value;
      result.params = std::move(candidate);
    }
  }
  result.failed = !any_ok;
  return result;
}

}  // namespace catbox
