#include "evinam/heads.hpp"

#include <cmath>
#include <sstream>

#include "evinam/errors.hpp"
#include "evinam/model.hpp"

namespace evinam {

using diff::Tensor;
using diff::Var;

std::string to_string(LinkMode mode) { return mode == LinkMode::forwarded ? "forwarded" : "at_sum"; }

LinkMode link_mode_from_string(const std::string& name) {
  if (name == "forwarded") return LinkMode::forwarded;
  if (name == "at_sum") return LinkMode::at_sum;
  throw ConfigError("unknown link mode '" + name + "' (expected forwarded or at_sum)");
}

std::string to_string(EvidenceLink link) { return link == EvidenceLink::softplus ? "softplus" : "exp"; }

EvidenceLink evidence_link_from_string(const std::string& name) {
  if (name == "softplus") return EvidenceLink::softplus;
  if (name == "exp") return EvidenceLink::exp;
  throw ConfigError("unknown evidence link '" + name + "' (expected softplus or exp)");
}

void NigParams::validate() const {
  if (!std::isfinite(gamma) || !(nu > 0.0) || !(alpha > 1.0) || !(beta > 0.0) ||
      !std::isfinite(nu) || !std::isfinite(alpha) || !std::isfinite(beta)) {
    std::ostringstream msg;
    msg << "invalid NIG parameters (gamma=" << gamma << ", nu=" << nu << ", alpha=" << alpha
        << ", beta=" << beta << ")";
    throw DomainError(msg.str());
  }
}

double LinkBundle::apply(std::size_t k, double z) noexcept {
  switch (k) {
    case kGamma:
      return z;
    case kAlpha:
      return diff::softplus(z) + 1.0;
    default:
      return diff::softplus(z);
  }
}

Var LinkBundle::apply(std::size_t k, const Var& z) {
  switch (k) {
    case kGamma:
      return z;
    case kAlpha:
      return diff::softplus(z) + 1.0;
    default:
      return diff::softplus(z);
  }
}

double DirichletParams::strength() const noexcept {
  double s = 0.0;
  for (double a : alpha) s += a;
  return s;
}

void DirichletParams::validate() const {
  if (alpha.empty()) throw DomainError("Dirichlet needs at least one class");
  for (double a : alpha) {
    if (!(a >= 1.0) || !std::isfinite(a)) {
      throw DomainError("Dirichlet concentrations must be finite and >= 1");
    }
  }
}

double evidence_link(EvidenceLink link, double z) noexcept {
  return link == EvidenceLink::softplus ? diff::softplus(z) : std::exp(z);
}

namespace {

double floor_positive(std::size_t k, double value) {
  if (k == kNu || k == kBeta) return value > kPositiveFloor ? value : kPositiveFloor;
  return value;
}

Var floor_positive(std::size_t k, const Var& value) {
  if (k == kNu || k == kBeta) return diff::maximum(value, kPositiveFloor);
  return value;
}

Var evidence_link(EvidenceLink link, const Var& z) {
  return link == EvidenceLink::softplus ? diff::softplus(z) : diff::exp(z);
}

}  // namespace

NigParams assemble_nig(const Tensor& raw, std::span<const double> biases, LinkMode mode) {
  if (raw.rank() != 2 || raw.cols() != kNigParams || biases.size() != kNigParams) {
    throw ShapeError("assemble_nig expects [J x 4] raw outputs and 4 biases");
  }
  const std::size_t features = raw.rows();
  std::array<double, kNigParams> out{};
  for (std::size_t k = 0; k < kNigParams; ++k) {
    double acc;
    if (mode == LinkMode::forwarded) {
      acc = LinkBundle::apply(k, biases[k]);
      for (std::size_t j = 0; j < features; ++j) acc = acc + LinkBundle::apply(k, raw.at(j, k));
    } else {
      double z = biases[k];
      for (std::size_t j = 0; j < features; ++j) z = z + raw.at(j, k);
      acc = LinkBundle::apply(k, z);
    }
    out[k] = floor_positive(k, acc);
  }
  return {out[kGamma], out[kNu], out[kAlpha], out[kBeta]};
}

DirichletParams assemble_dirichlet(const Tensor& raw, LinkMode mode, EvidenceLink link) {
  if (raw.rank() != 2 || raw.cols() == 0) {
    throw ShapeError("assemble_dirichlet expects [J x C] raw evidence");
  }
  const std::size_t features = raw.rows();
  DirichletParams params;
  params.alpha.resize(raw.cols());
  for (std::size_t c = 0; c < raw.cols(); ++c) {
    double acc = 1.0;
    if (mode == LinkMode::forwarded) {
      for (std::size_t j = 0; j < features; ++j) acc = acc + evidence_link(link, raw.at(j, c));
    } else {
      double z = 0.0;
      for (std::size_t j = 0; j < features; ++j) z = z + raw.at(j, c);
      acc = acc + evidence_link(link, z);
    }
    params.alpha[c] = acc;
  }
  return params;
}

NigVars assemble_nig(std::span<const Var> feature_outputs, const Var& biases, LinkMode mode) {
  if (feature_outputs.empty()) throw ShapeError("assemble_nig needs at least one feature");
  std::array<Var, kNigParams> out;
  for (std::size_t k = 0; k < kNigParams; ++k) {
    const Var bias = diff::element(biases, k);
    Var acc;
    if (mode == LinkMode::forwarded) {
      acc = LinkBundle::apply(k, bias);
      for (const Var& f : feature_outputs) acc = acc + LinkBundle::apply(k, diff::column(f, k));
    } else {
      Var z = bias;
      for (const Var& f : feature_outputs) z = z + diff::column(f, k);
      acc = LinkBundle::apply(k, z);
    }
    out[k] = floor_positive(k, acc);
  }
  return {out[kGamma], out[kNu], out[kAlpha], out[kBeta]};
}

std::vector<Var> assemble_dirichlet(std::span<const Var> feature_outputs, std::size_t n_classes,
                                    LinkMode mode, EvidenceLink link) {
  if (feature_outputs.empty()) throw ShapeError("assemble_dirichlet needs at least one feature");
  diff::Graph& graph = feature_outputs.front().graph();
  std::vector<Var> alphas;
  alphas.reserve(n_classes);
  for (std::size_t c = 0; c < n_classes; ++c) {
    Var acc = graph.constant(1.0);
    if (mode == LinkMode::forwarded) {
      for (const Var& f : feature_outputs) acc = acc + evidence_link(link, diff::column(f, c));
    } else {
      Var z = diff::column(feature_outputs.front(), c);
      for (std::size_t j = 1; j < feature_outputs.size(); ++j) {
        z = z + diff::column(feature_outputs[j], c);
      }
      acc = acc + evidence_link(link, z);
    }
    alphas.push_back(acc);
  }
  return alphas;
}

double ContributionTable::resum(std::size_t k) const {
  double acc = bias_terms.at(k);
  for (const auto& row : feature_terms) acc = acc + row.at(k);
  return acc;
}

ContributionTable contributions(const EviNamModel& model, std::span<const double> x) {
  if (model.link_mode != LinkMode::forwarded) {
    throw InvalidInput("feature contributions are only additive for forwarded links");
  }
  check_width(model, x.size());
  const Tensor raw = raw_outputs(model, x);

  ContributionTable table;
  table.parameter_names = model.parameter_names();
  table.feature_names = model.feature_names();
  const std::size_t K = model.n_outputs();
  table.feature_terms.assign(model.n_features(), std::vector<double>(K));
  if (model.task == TaskKind::regression) {
    for (std::size_t k = 0; k < K; ++k) {
      table.bias_terms.push_back(LinkBundle::apply(k, model.biases[k]));
      for (std::size_t j = 0; j < model.n_features(); ++j) {
        table.feature_terms[j][k] = LinkBundle::apply(k, raw.at(j, k));
      }
    }
    const NigParams p = assemble_nig(raw, model.biases.data(), model.link_mode);
    table.assembled = {p.gamma, p.nu, p.alpha, p.beta};
  } else {
    table.bias_terms.assign(K, 1.0);
    for (std::size_t j = 0; j < model.n_features(); ++j) {
      for (std::size_t c = 0; c < K; ++c) {
        table.feature_terms[j][c] = evidence_link(model.evidence_link, raw.at(j, c));
      }
    }
    table.assembled = assemble_dirichlet(raw, model.link_mode, model.evidence_link).alpha;
  }
  return table;
}

}  // namespace evinam
