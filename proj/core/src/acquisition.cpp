#include "catbox/acquisition.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "catbox/errors.hpp"

namespace catbox {

std::string to_string(AcqKind kind) {
  switch (kind) {
    case AcqKind::EI: return "ei";
    case AcqKind::UCB: return "ucb";
    case AcqKind::PI: return "pi";
  }
  return "ei";
}

AcqKind acq_kind_from_string(const std::string& s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ei") return AcqKind::EI;
  if (lower == "ucb") return AcqKind::UCB;
  if (lower == "pi") return AcqKind::PI;
  throw Error("unknown acquisition '" + s + "' (expected ei, ucb or pi)");
}

double gaussian_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double gaussian_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double score(const AcqSpec& acq, const Posterior& post) {
  const double mu = post.mean;
  const double sigma = post.std();
  const double gap = mu - acq.best_y - acq.xi;
  switch (acq.kind) {
    case AcqKind::UCB:
      return mu + acq.beta * sigma;
    case AcqKind::PI:
      if (sigma <= 0.0) return gap > 0.0 ? 1.0 : 0.0;
      return gaussian_cdf(gap / sigma);
    case AcqKind::EI:
      break;
  }
  if (sigma <= 0.0) return std::max(gap, 0.0);
  const double z = gap / sigma;
  return std::max(gap * gaussian_cdf(z) + sigma * gaussian_pdf(z), 0.0);
}

}  // namespace catbox
