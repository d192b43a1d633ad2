#pragma once

// Distributional heads. Each parameter k is assembled as
//
//   k = phi_k(b_k) + sum_j phi_k(f_j^k(x_j))          (forwarded links)
//
// so that every feature contributes an exact additive, already-constrained
// term. LinkMode::at_sum is the conventional phi_k(b_k + sum_j f_j^k(x_j))
// and exists only for comparison; it does not decompose additively.

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "evinam/graph.hpp"
#include "evinam/tensor.hpp"

namespace evinam {

enum class LinkMode { forwarded, at_sum };
enum class EvidenceLink { softplus, exp };

std::string to_string(LinkMode mode);
LinkMode link_mode_from_string(const std::string& name);
std::string to_string(EvidenceLink link);
EvidenceLink evidence_link_from_string(const std::string& name);

/// Index of each Normal-Inverse-Gamma parameter in raw outputs and biases.
enum NigIndex : std::size_t { kGamma = 0, kNu = 1, kAlpha = 2, kBeta = 3 };
inline constexpr std::size_t kNigParams = 4;
inline constexpr std::array<const char*, kNigParams> kNigNames = {"gamma", "nu", "alpha", "beta"};

/// Lower bound applied to assembled nu and beta. Softplus of very negative
/// raws underflows to 0, and both appear as divisors in the uncertainties.
inline constexpr double kPositiveFloor = 1e-6;

struct NigParams {
  double gamma = 0.0;
  double nu = 1.0;
  double alpha = 2.0;
  double beta = 1.0;

  /// Throws DomainError unless gamma finite, nu > 0, alpha > 1, beta > 0.
  void validate() const;
};

/// Per-parameter links: identity for gamma, softplus for nu and beta,
/// softplus + 1 for alpha.
struct LinkBundle {
  static double apply(std::size_t k, double z) noexcept;
  static diff::Var apply(std::size_t k, const diff::Var& z);
};

struct DirichletParams {
  std::vector<double> alpha;

  std::size_t classes() const noexcept { return alpha.size(); }
  double strength() const noexcept;
  double evidence(std::size_t c) const { return alpha.at(c) - 1.0; }
  void validate() const;
};

double evidence_link(EvidenceLink link, double z) noexcept;

/// raw: [J x 4] per-feature raw outputs; biases: 4 raw intercepts.
NigParams assemble_nig(const diff::Tensor& raw, std::span<const double> biases,
                       LinkMode mode = LinkMode::forwarded);

/// raw: [J x C] per-feature raw evidence. No intercept: alpha_c = 1 + sum_j phi(e_j^c).
DirichletParams assemble_dirichlet(const diff::Tensor& raw, LinkMode mode = LinkMode::forwarded,
                                   EvidenceLink link = EvidenceLink::softplus);

/// Batched graph versions: feature_outputs[j] is [B x K].
struct NigVars {
  diff::Var gamma;
  diff::Var nu;
  diff::Var alpha;
  diff::Var beta;
};

NigVars assemble_nig(std::span<const diff::Var> feature_outputs, const diff::Var& biases,
                     LinkMode mode = LinkMode::forwarded);

/// Returns one [B] alpha vector per class.
std::vector<diff::Var> assemble_dirichlet(std::span<const diff::Var> feature_outputs,
                                          std::size_t n_classes,
                                          LinkMode mode = LinkMode::forwarded,
                                          EvidenceLink link = EvidenceLink::softplus);

/// Post-link contribution of every feature to every distributional parameter.
struct ContributionTable {
  std::vector<std::string> parameter_names;
  std::vector<std::string> feature_names;
  /// phi_k(b_k) for regression; the constant 1 of alpha_c for classification.
  std::vector<double> bias_terms;
  /// feature_terms[j][k] = phi_k(f_j^k(x_j)).
  std::vector<std::vector<double>> feature_terms;
  /// The parameters as assembled by the head.
  std::vector<double> assembled;

  /// bias_terms[k] + sum_j feature_terms[j][k], summed in head order.
  double resum(std::size_t k) const;
};

struct EviNamModel;

/// Throws InvalidInput on a width mismatch or for a link-at-sum model, whose
/// parameters do not decompose.
ContributionTable contributions(const EviNamModel& model, std::span<const double> x);

}  // namespace evinam
