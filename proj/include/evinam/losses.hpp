#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evinam/graph.hpp"
#include "evinam/heads.hpp"

namespace evinam {

enum class ClassificationLoss {
  /// Expected squared error under the Dirichlet plus annealed KL to the uniform Dirichlet.
  expected_brier,
  /// Dirichlet type-II maximum likelihood plus the same annealed KL.
  type2_ml,
};

std::string to_string(ClassificationLoss loss);
ClassificationLoss classification_loss_from_string(const std::string& name);

struct LossConfig {
  double lambda = 0.1;
  double p = 1.0;
  std::size_t kl_anneal_epochs = 10;
  ClassificationLoss classification = ClassificationLoss::expected_brier;

  void validate() const;
};

/// Per-sample terms of the regression objective and their batch mean.
struct LossBreakdown {
  std::vector<double> nll;
  std::vector<double> reg;
  double total = 0.0;
};

/// Width of the Student-t posterior predictive, sqrt(beta (1 + nu) / (alpha nu)).
double student_t_width(const NigParams& params);

/// Negative log marginal likelihood of y under the NIG prior, i.e. the
/// negative log density of a Student-t with 2 alpha degrees of freedom,
/// location gamma and scale student_t_width(params).
double nig_nll(double y, const NigParams& params);

/// lambda * |(y - gamma) / w_St|^p * (2 nu + alpha).
double evidential_regularizer(double y, const NigParams& params, const LossConfig& config);

LossBreakdown regression_loss(std::span<const double> y, std::span<const NigParams> params,
                              const LossConfig& config);

/// min(1, epoch / kl_anneal_epochs) with a zero-based epoch index.
double kl_anneal_factor(std::size_t epoch, const LossConfig& config);

/// KL(Dir(alpha) || Dir(1, ..., 1)).
double kl_to_uniform(std::span<const double> alpha);

/// Dirichlet classification objective for one sample; y_onehot must be a
/// 0/1 indicator with a single 1.
double dec_loss(std::span<const double> y_onehot, const DirichletParams& params,
                std::size_t epoch, const LossConfig& config);

// Graph versions over a batch. y holds normalized targets (regression) or
// class indices (classification).
struct RegressionLossVars {
  diff::Var nll;    // [B]
  diff::Var reg;    // [B]
  diff::Var total;  // scalar mean of nll + reg
};

RegressionLossVars regression_loss(const diff::Var& y, const NigVars& params,
                                   const LossConfig& config);

/// Mean Dirichlet objective; `alphas` holds one [B] vector per class.
diff::Var classification_loss(std::span<const diff::Var> alphas, std::span<const double> labels,
                              std::size_t epoch, const LossConfig& config);

}  // namespace evinam
