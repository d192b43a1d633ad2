#include "evinam/lowess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "evinam/errors.hpp"

namespace evinam {

void LowessConfig::validate() const {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw ConfigError("lowess fraction must lie in (0, 1]");
}

namespace {

double cube(double v) { return v * v * v; }

// Fit at xs from points [left, right] (0-based, inclusive), extending right
// over ties. Returns false when every weight vanishes.
bool local_fit(std::span<const double> x, std::span<const double> y, double xs, std::size_t left,
               std::size_t right, std::span<const double> robust, bool use_robust,
               std::vector<double>& w, double& ys) {
  const std::size_t n = x.size();
  const double range = x[n - 1] - x[0];
  const double h = std::max(xs - x[left], x[right] - xs);
  const double h9 = 0.999 * h;
  const double h1 = 0.001 * h;
  double total = 0.0;
  std::size_t j = left;
  for (; j < n; ++j) {
    w[j] = 0.0;
    const double r = std::abs(x[j] - xs);
    if (r <= h9) {
      w[j] = r <= h1 ? 1.0 : cube(1.0 - cube(r / h));
      if (use_robust) w[j] *= robust[j];
      total += w[j];
    } else if (x[j] > xs) {
      break;
    }
  }
  const std::size_t last = j - 1;
  if (total <= 0.0) return false;
  for (std::size_t k = left; k <= last; ++k) w[k] /= total;
  if (h > 0.0) {
    double center = 0.0;
    for (std::size_t k = left; k <= last; ++k) center += w[k] * x[k];
    double slope = xs - center;
    double spread = 0.0;
    for (std::size_t k = left; k <= last; ++k) spread += w[k] * (x[k] - center) * (x[k] - center);
    if (std::sqrt(spread) > 0.001 * range) {
      slope /= spread;
      for (std::size_t k = left; k <= last; ++k) w[k] *= slope * (x[k] - center) + 1.0;
    }
  }
  ys = 0.0;
  for (std::size_t k = left; k <= last; ++k) ys += w[k] * y[k];
  return true;
}

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  const std::size_t m1 = n / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m1), v.end());
  const double upper = v[m1];
  if (n % 2 != 0) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(m1));
  return 0.5 * (upper + lower);
}

std::vector<double> lowess_sorted(std::span<const double> x, std::span<const double> y,
                                  const LowessConfig& config) {
  const std::size_t n = x.size();
  std::vector<double> ys(n, 0.0);
  if (n < 2) {
    std::copy(y.begin(), y.end(), ys.begin());
    return ys;
  }
  const auto ns = std::clamp<std::size_t>(
      static_cast<std::size_t>(config.fraction * static_cast<double>(n) + 1e-7), 2, n);
  std::vector<double> robust(n, 1.0);
  std::vector<double> w(n, 0.0);
  std::vector<double> res(n, 0.0);

  for (std::size_t iter = 0; iter <= config.iterations; ++iter) {
    std::size_t left = 0;
    std::size_t right = ns - 1;
    std::size_t last = 0;
    bool any = false;
    std::size_t i = 0;
    for (;;) {
      while (right + 1 < n && x[i] - x[left] > x[right + 1] - x[i]) {
        ++left;
        ++right;
      }
      if (!local_fit(x, y, x[i], left, right, robust, iter > 0, w, ys[i])) ys[i] = y[i];
      if (any && last + 1 < i) {
        const double denom = x[i] - x[last];
        for (std::size_t j = last + 1; j < i; ++j) {
          const double a = (x[j] - x[last]) / denom;
          ys[j] = a * ys[i] + (1.0 - a) * ys[last];
        }
      }
      any = true;
      last = i;
      std::size_t k = last + 1;
      for (; k < n; ++k) {
        if (x[k] > x[last]) break;
        ys[k] = ys[last];
        last = k;
      }
      i = std::max(last + 1, k - 1);
      if (last + 1 >= n) break;
    }
    for (std::size_t k = 0; k < n; ++k) res[k] = y[k] - ys[k];
    if (iter == config.iterations) break;

    double scale = 0.0;
    for (double r : res) scale += std::abs(r);
    scale /= static_cast<double>(n);
    std::vector<double> abs_res(n);
    std::transform(res.begin(), res.end(), abs_res.begin(), [](double r) { return std::abs(r); });
    const double cmad = 6.0 * median_of(abs_res);
    if (cmad < 1e-7 * scale) break;
    const double c9 = 0.999 * cmad;
    const double c1 = 0.001 * cmad;
    for (std::size_t k = 0; k < n; ++k) {
      const double r = abs_res[k];
      if (r <= c1) {
        robust[k] = 1.0;
      } else if (r <= c9) {
        const double u = r / cmad;
        robust[k] = (1.0 - u * u) * (1.0 - u * u);
      } else {
        robust[k] = 0.0;
      }
    }
  }
  return ys;
}

}  // namespace

std::vector<double> lowess(std::span<const double> x, std::span<const double> y,
                           const LowessConfig& config) {
  config.validate();
  if (x.size() != y.size()) throw InvalidInput("lowess: x and y differ in length");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw DomainError("lowess: non-finite input");
    }
  }
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> xs(x.size());
  std::vector<double> ys(y.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    xs[k] = x[order[k]];
    ys[k] = y[order[k]];
  }
  const std::vector<double> fit = lowess_sorted(xs, ys, config);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < order.size(); ++k) out[order[k]] = fit[k];
  return out;
}

}  // namespace evinam
