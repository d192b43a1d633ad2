#include "evinam/uncertainty.hpp"

#include <cmath>

#include "evinam/errors.hpp"
#include "evinam/losses.hpp"
#include "evinam/model.hpp"
#include "evinam/special.hpp"

namespace evinam {

using diff::Tensor;

PredictiveDist PredictiveDist::from_nig(const NigParams& params) {
  params.validate();
  return {params.gamma, student_t_width(params), 2.0 * params.alpha};
}

UncertaintyPair regression_uncertainty(const NigParams& params) {
  params.validate();
  return {student_t_width(params), 1.0 / std::sqrt(params.nu)};
}

UncertaintyPair denormalize(const UncertaintyPair& u, double target_std) {
  return {u.aleatoric * target_std, u.epistemic};
}

DirichletUncertainty dirichlet_uncertainty(const DirichletParams& params) {
  params.validate();
  const double s = params.strength();
  DirichletUncertainty out;
  out.probs.reserve(params.classes());
  const double psi_s1 = special::digamma(s + 1.0);
  for (double a : params.alpha) {
    const double p = a / s;
    out.probs.push_back(p);
    out.aleatoric -= p * (special::digamma(a + 1.0) - psi_s1);
  }
  out.epistemic = static_cast<double>(params.classes()) / s;
  return out;
}

namespace {

void check_feature(const EviNamModel& model, std::size_t feature) {
  if (feature >= model.n_features()) {
    throw InvalidInput("feature index " + std::to_string(feature) + " out of range (model has " +
                       std::to_string(model.n_features()) + " features)");
  }
}

}  // namespace

std::vector<UncertaintyPair> per_feature_uncertainty(const EviNamModel& model, std::size_t feature,
                                                     std::span<const double> grid) {
  if (model.task != TaskKind::regression) throw KindMismatch("model is not a regression model");
  check_feature(model, feature);
  const Tensor raw = shape_forward(model.nets[feature], grid);
  std::vector<UncertaintyPair> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Tensor row = Tensor::matrix(1, kNigParams, {raw.data().begin() + i * kNigParams,
                                                      raw.data().begin() + (i + 1) * kNigParams});
    out.push_back(regression_uncertainty(assemble_nig(row, model.biases.data(), model.link_mode)));
  }
  return out;
}

std::vector<DirichletUncertainty> per_feature_dirichlet_uncertainty(const EviNamModel& model,
                                                                    std::size_t feature,
                                                                    std::span<const double> grid) {
  if (model.task != TaskKind::classification) {
    throw KindMismatch("model is not a classification model");
  }
  check_feature(model, feature);
  const std::size_t C = model.n_outputs();
  const Tensor raw = shape_forward(model.nets[feature], grid);
  std::vector<DirichletUncertainty> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Tensor row =
        Tensor::matrix(1, C, {raw.data().begin() + i * C, raw.data().begin() + (i + 1) * C});
    out.push_back(
        dirichlet_uncertainty(assemble_dirichlet(row, model.link_mode, model.evidence_link)));
  }
  return out;
}

}  // namespace evinam
