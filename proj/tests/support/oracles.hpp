#pragma once

// Reference computations used by the unit and acceptance tests. None of these
// share code with the library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace oracle {

/// -log p(y) where p(y) = int int N(y | mu, s2) N(mu | gamma, s2 / nu) IG(s2 | alpha, beta) dmu ds2,
/// integrated numerically: adaptive Gauss-Kronrod over mu nested inside
/// adaptive Gauss-Kronrod over t = log s2.
inline double nig_marginal_nll(double y, double gamma, double nu, double alpha, double beta) {
  using boost::math::quadrature::gauss_kronrod;
  const double log_norm_ig = alpha * std::log(beta) - std::lgamma(alpha);
  auto inner = [&](double s2) {
    const double post_mean = (y + nu * gamma) / (1.0 + nu);
    const double post_sd = std::sqrt(s2 / (1.0 + nu));
    auto f = [&](double mu) {
      const double a = (y - mu) * (y - mu) / s2;
      const double b = nu * (mu - gamma) * (mu - gamma) / s2;
      return std::sqrt(nu) / (2.0 * M_PI * s2) * std::exp(-0.5 * (a + b));
    };
    return gauss_kronrod<double, 31>::integrate(f, post_mean - 14.0 * post_sd, post_mean + 14.0 * post_sd,
                                                12, 1e-13);
  };
  auto outer = [&](double t) {
    const double s2 = std::exp(t);
    const double log_ig = log_norm_ig - (alpha + 1.0) * t - beta / s2;
    return inner(s2) * std::exp(log_ig) * s2;
  };
  const double centre = std::log(beta / alpha);
  const double lo = centre - 12.0 - 4.0 / std::sqrt(alpha);
  const double hi = centre + 60.0 / alpha;
  const double p = gauss_kronrod<double, 61>::integrate(outer, lo, hi, 15, 1e-13);
  return -std::log(p);
}

/// Energy-form CRPS estimate E|Y - y| - 0.5 E|Y - Y'| from `n` Student-t draws.
/// The pair term uses all pairs through the sorted-sample identity.
inline double crps_monte_carlo(double y, double location, double scale, double dof, std::size_t n,
                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::student_t_distribution<double> t(dof);
  std::vector<double> s(n);
  for (double& v : s) v = location + scale * t(rng);
  double first = 0.0;
  for (double v : s) first += std::abs(v - y);
  first /= static_cast<double>(n);
  std::sort(s.begin(), s.end());
  double pair = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pair += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * s[i];
  }
  // sum_{i,j} |s_i - s_j| = 2 * pair; halve and divide by n^2.
  pair /= static_cast<double>(n) * static_cast<double>(n);
  return first - pair;
}

/// Mean categorical entropy over `n` draws from Dir(alpha).
inline double dirichlet_entropy_monte_carlo(std::span<const double> alpha, std::size_t n,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::gamma_distribution<double>> g;
  for (double a : alpha) g.emplace_back(a, 1.0);
  std::vector<double> draw(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < alpha.size(); ++c) s += draw[c] = g[c](rng);
    double h = 0.0;
    for (double d : draw) {
      const double p = d / s;
      if (p > 0.0) h -= p * std::log(p);
    }
    total += h;
  }
  return total / static_cast<double>(n);
}

/// Share of (positive, negative) pairs ranked correctly, ties counting one half.
inline double auroc_pairs(std::span<const int> positive, std::span<const double> scores) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!positive[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (positive[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) good += 1.0;
      else if (scores[i] == scores[j]) good += 0.5;
    }
  }
  return good / pairs;
}

/// Central difference of f around x[i].
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                 std::vector<double> x, std::size_t i, double h) {
  const double x0 = x[i];
  x[i] = x0 + h;
  const double up = f(x);
  x[i] = x0 - h;
  const double down = f(x);
  return (up - down) / (2.0 * h);
}

/// |a - b| <= rel * max(|a|, |b|), or within `floor` absolutely.
inline bool gradients_agree(double analytic, double numeric, double rel = 1e-4, double floor = 1e-6) {
  const double diff = std::abs(analytic - numeric);
  return diff <= floor || diff <= rel * std::max(std::abs(analytic), std::abs(numeric));
}

}  // namespace oracle
