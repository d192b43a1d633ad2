#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "evinam/data.hpp"
#include "evinam/model.hpp"
#include "evinam/tensor.hpp"

namespace fixture {

/// Replaces every weight with N(0, scale^2) draws so no output layer stays at zero.
inline void randomize(evinam::EviNamModel& model, std::uint64_t seed, double scale = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  for (evinam::diff::Tensor* slot : evinam::parameter_slots(model)) {
    std::vector<double> v(slot->size());
    for (double& x : v) x = n(rng);
    *slot = evinam::diff::Tensor(slot->shape(), std::move(v));
  }
}

/// Random-weight model with an encoder fitted on `data`'s rows.
inline evinam::EviNamModel fitted_model(const evinam::Dataset& data, evinam::ModelSpec spec,
                                        std::uint64_t weight_seed) {
  const evinam::Encoder enc = evinam::Encoder::fit(data);
  spec.task = data.task;
  spec.n_features = enc.width();
  if (data.task == evinam::TaskKind::classification) spec.n_classes = enc.class_names.size();
  evinam::EviNamModel model = evinam::make_model(spec);
  model.encoder = enc;
  model.feature_summaries = evinam::summarize_features(enc.transform(data));
  randomize(model, weight_seed);
  return model;
}

inline evinam::Dataset small_cubic_2d(std::size_t n = 200, std::uint64_t seed = 3) {
  evinam::CubicSpec spec = evinam::default_cubic_2d();
  spec.n = n;
  spec.seed = seed;
  return evinam::synth_cubic_2d(spec);
}

inline evinam::Dataset small_blobs(std::size_t n = 200, std::uint64_t seed = 3) {
  evinam::BlobSpec spec;
  spec.n = n;
  spec.seed = seed;
  return evinam::synth_blobs(spec);
}

/// Uniform random design matrix [rows x cols] in [lo, hi].
inline evinam::diff::Tensor random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                          double lo = -2.0, double hi = 2.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(rows * cols);
  for (double& x : v) x = u(rng);
  return evinam::diff::Tensor::matrix(rows, cols, std::move(v));
}

}  // namespace fixture
