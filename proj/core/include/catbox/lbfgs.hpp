#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace catbox {

struct LbfgsOptions {
  int max_iters = 100;
  int memory = 8;
  int max_linesearch = 30;
  double ftol = 1e-10;  // relative decrease that counts as progress
  double gtol = 1e-7;   // projected-gradient infinity norm at convergence
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double value = -std::numeric_limits<double>::infinity();
  int iters = 0;
  bool ok = false;  // the start point itself could be evaluated
};

/// Box-constrained L-BFGS ascent with projected backtracking (Armijo) line
/// search. `objective(x, grad)` returns the value and writes the gradient;
/// a non-finite return marks x as infeasible and shortens the step.
template <class Objective>
LbfgsResult maximize_box(Objective&& objective, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper, const LbfgsOptions& opts = {}) {
  const Eigen::Index n = x0.size();
  auto project = [&](Eigen::VectorXd v) { return v.cwiseMax(lower).cwiseMin(upper).eval(); };

  // Internally minimize g = -f.
  Eigen::VectorXd x = project(std::move(x0));
  Eigen::VectorXd grad(n);
  double fx = objective(x, grad);
  LbfgsResult result;
  result.x = x;
  if (!std::isfinite(fx)) return result;
  result.ok = true;
  result.value = fx;
  double g = -fx;
  grad = -grad;

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  Eigen::VectorXd grad_new(n);

  for (int iter = 0; iter < opts.max_iters; ++iter) {
    result.iters = iter + 1;
    Eigen::VectorXd pg = grad;
    for (Eigen::Index i = 0; i < n; ++i) {
      if ((x[i] <= lower[i] && pg[i] > 0.0) || (x[i] >= upper[i] && pg[i] < 0.0)) pg[i] = 0.0;
    }
    if (pg.lpNorm<Eigen::Infinity>() < opts.gtol) break;

    // Two-loop recursion.
    Eigen::VectorXd q = pg;
    std::vector<double> alpha(s_hist.size());
    for (std::size_t k = s_hist.size(); k-- > 0;) {
      alpha[k] = rho_hist[k] * s_hist[k].dot(q);
      q -= alpha[k] * y_hist[k];
    }
    if (!s_hist.empty()) {
      q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    } else {
      q /= std::max(1.0, pg.lpNorm<Eigen::Infinity>());
    }
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Eigen::VectorXd dir = -q;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (pg[i] == 0.0) dir[i] = 0.0;
    }
    if (dir.dot(pg) >= 0.0) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -pg / std::max(1.0, pg.lpNorm<Eigen::Infinity>());
    }

    double step = 1.0;
    bool accepted = false;
    Eigen::VectorXd x_new;
    double g_new = 0.0;
    for (int ls = 0; ls < opts.max_linesearch; ++ls, step *= 0.5) {
      x_new = project(x + step * dir);
      const double f_new = objective(x_new, grad_new);
      if (!std::isfinite(f_new)) continue;
      g_new = -f_new;
      if (g_new <= g + 1e-4 * grad.dot(x_new - x)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    grad_new = -grad_new;

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_hist.push_back(s);
      y_hist.push_back(y);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > opts.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double decrease = g - g_new;
    x = x_new;
    g = g_new;
    grad = grad_new;
    if (decrease < opts.ftol * (1.0 + std::abs(g))) break;
  }
  result.x = x;
  result.value = -g;
  return result;
}

}  // namespace catbox
