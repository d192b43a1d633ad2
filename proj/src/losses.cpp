#include "evinam/losses.hpp"

#include <cmath>
#include <numbers>

#include "evinam/errors.hpp"
#include "evinam/special.hpp"

namespace evinam {

using diff::Var;

std::string to_string(ClassificationLoss loss) {
  return loss == ClassificationLoss::expected_brier ? "expected_brier" : "type2_ml";
}

ClassificationLoss classification_loss_from_string(const std::string& name) {
  if (name == "expected_brier") return ClassificationLoss::expected_brier;
  if (name == "type2_ml") return ClassificationLoss::type2_ml;
  throw ConfigError("unknown classification loss '" + name + "'");
}

void LossConfig::validate() const {
  if (!(lambda > 0.0)) throw ConfigError("loss lambda must be > 0");
  if (!(p > 0.0)) throw ConfigError("loss exponent p must be > 0");
  if (kl_anneal_epochs == 0) throw ConfigError("kl_anneal_epochs must be positive");
}

double student_t_width(const NigParams& params) {
  return std::sqrt(params.beta * (1.0 + params.nu) / (params.alpha * params.nu));
}

double nig_nll(double y, const NigParams& params) {
  params.validate();
  if (!std::isfinite(y)) throw DomainError("nig_nll: non-finite target");
  const double omega = 2.0 * params.beta * (1.0 + params.nu);
  const double r = y - params.gamma;
  return 0.5 * std::log(std::numbers::pi / params.nu) - params.alpha * std::log(omega) +
         (params.alpha + 0.5) * std::log(r * r * params.nu + omega) +
         special::log_gamma(params.alpha) - special::log_gamma(params.alpha + 0.5);
}

double evidential_regularizer(double y, const NigParams& params, const LossConfig& config) {
  params.validate();
  const double width = student_t_width(params);
  if (!(width > 0.0)) throw DomainError("evidential_regularizer: zero predictive width");
  const double z = std::abs((y - params.gamma) / width);
  return config.lambda * std::pow(z, config.p) * (2.0 * params.nu + params.alpha);
}

LossBreakdown regression_loss(std::span<const double> y, std::span<const NigParams> params,
                              const LossConfig& config) {
  if (y.size() != params.size() || y.empty()) {
    throw InvalidInput("regression_loss: targets and parameters must be non-empty and aligned");
  }
  LossBreakdown out;
  out.nll.reserve(y.size());
  out.reg.reserve(y.size());
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.nll.push_back(nig_nll(y[i], params[i]));
    out.reg.push_back(evidential_regularizer(y[i], params[i], config));
    total += out.nll.back() + out.reg.back();
  }
  out.total = total / static_cast<double>(y.size());
  return out;
}

double kl_anneal_factor(std::size_t epoch, const LossConfig& config) {
  const double ratio = static_cast<double>(epoch) / static_cast<double>(config.kl_anneal_epochs);
  return ratio < 1.0 ? ratio : 1.0;
}

double kl_to_uniform(std::span<const double> alpha) {
  double strength = 0.0;
  for (double a : alpha) strength += a;
  const double psi_s = special::digamma(strength);
  double kl = special::log_gamma(strength) - special::log_gamma(static_cast<double>(alpha.size()));
  for (double a : alpha) {
    kl -= special::log_gamma(a);
    kl += (a - 1.0) * (special::digamma(a) - psi_s);
  }
  return kl;
}

namespace {

void check_onehot(std::span<const double> y, std::size_t classes) {
  if (y.size() != classes) throw InvalidInput("one-hot target width does not match class count");
  double total = 0.0;
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw InvalidInput("one-hot target entries must be 0 or 1");
    total += v;
  }
  if (total != 1.0) throw InvalidInput("one-hot target must contain exactly one 1");
}

}  // namespace

double dec_loss(std::span<const double> y_onehot, const DirichletParams& params, std::size_t epoch,
                const LossConfig& config) {
  params.validate();
  check_onehot(y_onehot, params.classes());
  const double s = params.strength();
  double data_term = 0.0;
  if (config.classification == ClassificationLoss::expected_brier) {
    for (std::size_t c = 0; c < params.classes(); ++c) {
      const double a = params.alpha[c];
      const double p = a / s;
      data_term += (y_onehot[c] - p) * (y_onehot[c] - p) + a * (s - a) / (s * s * (s + 1.0));
    }
  } else {
    for (std::size_t c = 0; c < params.classes(); ++c) {
      data_term += y_onehot[c] * (std::log(s) - std::log(params.alpha[c]));
    }
  }
  const double factor = kl_anneal_factor(epoch, config);
  if (factor == 0.0) return data_term;
  std::vector<double> tilde(params.classes());
  for (std::size_t c = 0; c < params.classes(); ++c) {
    tilde[c] = y_onehot[c] + (1.0 - y_onehot[c]) * params.alpha[c];
  }
  return data_term + factor * kl_to_uniform(tilde);
}

RegressionLossVars regression_loss(const Var& y, const NigVars& params, const LossConfig& config) {
  const Var& gamma = params.gamma;
  const Var& nu = params.nu;
  const Var& alpha = params.alpha;
  const Var& beta = params.beta;

  const Var omega = 2.0 * beta * (nu + 1.0);
  const Var resid = y - gamma;
  const Var nll = 0.5 * diff::log(std::numbers::pi / nu) - alpha * diff::log(omega) +
                  (alpha + 0.5) * diff::log(resid * resid * nu + omega) + diff::lgamma(alpha) -
                  diff::lgamma(alpha + 0.5);

  const Var width = diff::sqrt(beta * (nu + 1.0) / (alpha * nu));
  const Var scaled = diff::pow(diff::abs(resid / width), config.p);
  const Var reg = config.lambda * scaled * (2.0 * nu + alpha);
  return {nll, reg, diff::mean(nll + reg)};
}

Var classification_loss(std::span<const Var> alphas, std::span<const double> labels,
                        std::size_t epoch, const LossConfig& config) {
  if (alphas.empty()) throw InvalidInput("classification_loss: no classes");
  diff::Graph& graph = alphas.front().graph();
  const std::size_t batch = labels.size();
  const std::size_t classes = alphas.size();
  std::vector<std::vector<double>> onehot(classes, std::vector<double>(batch, 0.0));
  for (std::size_t i = 0; i < batch; ++i) {
    const double label = labels[i];
    if (label < 0.0 || label >= static_cast<double>(classes) || label != std::floor(label)) {
      throw InvalidInput("class label out of range");
    }
    onehot[static_cast<std::size_t>(label)][i] = 1.0;
  }
  std::vector<Var> y;
  for (auto& col : onehot) y.push_back(graph.constant(diff::Tensor::vector(col)));

  Var strength = alphas[0];
  for (std::size_t c = 1; c < classes; ++c) strength = strength + alphas[c];

  Var data_term;
  if (config.classification == ClassificationLoss::expected_brier) {
    const Var denom = strength * strength * (strength + 1.0);
    for (std::size_t c = 0; c < classes; ++c) {
      const Var err = y[c] - alphas[c] / strength;
      const Var var = alphas[c] * (strength - alphas[c]) / denom;
      const Var term = err * err + var;
      data_term = c == 0 ? term : data_term + term;
    }
  } else {
    const Var log_s = diff::log(strength);
    for (std::size_t c = 0; c < classes; ++c) {
      const Var term = y[c] * (log_s - diff::log(alphas[c]));
      data_term = c == 0 ? term : data_term + term;
    }
  }

  const double factor = kl_anneal_factor(epoch, config);
  if (factor == 0.0) return diff::mean(data_term);

  std::vector<Var> tilde;
  for (std::size_t c = 0; c < classes; ++c) {
    // y + (1 - y) * alpha
    tilde.push_back(y[c] + (1.0 - y[c]) * alphas[c]);
  }
  Var s_tilde = tilde[0];
  for (std::size_t c = 1; c < classes; ++c) s_tilde = s_tilde + tilde[c];
  const Var psi_s = diff::digamma(s_tilde);
  Var kl = diff::lgamma(s_tilde) - special::log_gamma(static_cast<double>(classes));
  for (std::size_t c = 0; c < classes; ++c) {
    kl = kl - diff::lgamma(tilde[c]) + (tilde[c] - 1.0) * (diff::digamma(tilde[c]) - psi_s);
  }
  return diff::mean(data_term + factor * kl);
}

}  // namespace evinam
