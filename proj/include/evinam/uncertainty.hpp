#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "evinam/heads.hpp"

namespace evinam {

struct EviNamModel;

/// Location-scale Student-t summarizing the NIG posterior predictive.
struct PredictiveDist {
  double location = 0.0;
  double scale = 1.0;
  double dof = 4.0;

  static PredictiveDist from_nig(const NigParams& params);
};

struct UncertaintyPair {
  /// E[sigma] = w_St, in (normalized) target units.
  double aleatoric = 0.0;
  /// nu^(-1/2), unitless.
  double epistemic = 0.0;
};

struct DirichletUncertainty {
  std::vector<double> probs;
  /// Vacuity C / S.
  double epistemic = 0.0;
  /// Expected entropy of the categorical under the Dirichlet.
  double aleatoric = 0.0;
};

UncertaintyPair regression_uncertainty(const NigParams& params);

/// Scales the aleatoric part back to raw target units.
UncertaintyPair denormalize(const UncertaintyPair& u, double target_std);

DirichletUncertainty dirichlet_uncertainty(const DirichletParams& params);

/// Uncertainty implied by the intercepts and feature `feature` alone, at each
/// grid value (normalized units). The other features contribute nothing.
std::vector<UncertaintyPair> per_feature_uncertainty(const EviNamModel& model, std::size_t feature,
                                                     std::span<const double> grid);

/// Classification counterpart: alpha_c = 1 + phi(e_j^c(x)).
std::vector<DirichletUncertainty> per_feature_dirichlet_uncertainty(const EviNamModel& model,
                                                                    std::size_t feature,
                                                                    std::span<const double> grid);

}  // namespace evinam
