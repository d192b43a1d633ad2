#include "evinam/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "evinam/metrics.hpp"

namespace evinam {

using diff::Tensor;
using diff::Var;

AdamState AdamState::zeros_like(std::span<Tensor* const> params) {
  AdamState state;
  for (const Tensor* p : params) {
    state.m.emplace_back(p->size(), 0.0);
    state.v.emplace_back(p->size(), 0.0);
  }
  return state;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double lr, const AdamConfig& config) {
  if (params.size() != grads.size() || params.size() != state.m.size() ||
      params.size() != state.v.size()) {
    throw ShapeError("adam_step: parameter, gradient and state counts differ");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k]->shape() != grads[k].shape() || state.m[k].size() != grads[k].size()) {
      throw ShapeError("adam_step: gradient " + std::to_string(k) + " has shape " +
                       diff::shape_string(grads[k].shape()) + ", parameter has " +
                       diff::shape_string(params[k]->shape()));
    }
    if (!grads[k].all_finite()) {
      throw NumericError("adam_step: non-finite gradient in parameter tensor " + std::to_string(k));
    }
  }
  const std::size_t t = ++state.step;
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const auto g = grads[k].data();
    const auto w = params[k]->data();
    std::vector<double> updated(w.begin(), w.end());
    auto& m = state.m[k];
    auto& v = state.v[k];
    for (std::size_t i = 0; i < updated.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      updated[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.eps);
    }
    *params[k] = Tensor(params[k]->shape(), std::move(updated));
  }
}

EarlyStopping::EarlyStopping(std::size_t patience, double min_delta)
    : patience_(patience), min_delta_(min_delta) {}

bool EarlyStopping::observe(std::size_t epoch, double loss) {
  if (loss < best_loss_ - min_delta_) {
    best_loss_ = loss;
    best_epoch_ = epoch;
    stale_ = 0;
    return true;
  }
  ++stale_;
  return false;
}

PlateauScheduler::PlateauScheduler(double lr, const PlateauConfig& config)
    : config_(config), lr_(lr) {}

double PlateauScheduler::step(double loss) {
  if (loss < best_ - config_.threshold) {
    best_ = loss;
    stale_ = 0;
  } else if (++stale_ > config_.patience) {
    lr_ = std::max(lr_ * config_.factor, config_.min_lr);
    stale_ = 0;
  }
  return lr_;
}

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("lr must be > 0");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (patience == 0 || patience >= max_epochs) {
    throw ConfigError("patience must be positive and smaller than max_epochs");
  }
  if (!(min_delta >= 0.0)) throw ConfigError("min_delta must be >= 0");
  if (!(scheduler.factor > 0.0 && scheduler.factor < 1.0)) {
    throw ConfigError("scheduler factor must lie in (0, 1)");
  }
  if (!(scheduler.min_lr > 0.0)) throw ConfigError("scheduler min_lr must be > 0");
  loss.validate();
}

namespace {

constexpr std::size_t kEvalChunk = 4096;

Var batch_loss(const EviNamModel& model, const BoundModel& bound, diff::Graph& graph,
               const EncodedData& batch, std::size_t epoch, const LossConfig& loss) {
  const Var x = graph.constant(batch.x);
  if (model.task == TaskKind::regression) {
    const NigVars params = forward_nig(model, bound, x);
    const Var y = graph.constant(Tensor::vector(batch.y));
    return regression_loss(y, params, loss).total;
  }
  const auto alphas = forward_dirichlet(model, bound, x);
  return classification_loss(alphas, batch.y, epoch, loss);
}

void check_data(const EviNamModel& model, const EncodedData& data, const char* what) {
  if (data.rows() == 0) throw InvalidInput(std::string(what) + " set is empty");
  if (data.task != model.task) {
    throw KindMismatch(std::string(what) + " set is " + to_string(data.task) + ", model is " +
                       to_string(model.task));
  }
  check_width(model, data.features());
}

double nll_metric_of(const EviNamModel& model, const EncodedData& data) {
  return nll_metric(data.y, predict_nig(model, data.x));
}

struct Checkpoint {
  std::vector<ShapeNet> nets;
  Tensor biases;
};

}  // namespace

double evaluate_loss(const EviNamModel& model, const EncodedData& data, const LossConfig& loss) {
  check_data(model, data, "evaluation");
  double total = 0.0;
  for (std::size_t start = 0; start < data.rows(); start += kEvalChunk) {
    const std::size_t stop = std::min(data.rows(), start + kEvalChunk);
    std::vector<std::size_t> idx(stop - start);
    std::iota(idx.begin(), idx.end(), start);
    const EncodedData chunk = idx.size() == data.rows() ? data : data.subset(idx);
    diff::Graph graph;
    const BoundModel bound = bind(graph, model, false);
    const Var l = batch_loss(model, bound, graph, chunk, loss.kl_anneal_epochs, loss);
    total += l.value().item() * static_cast<double>(idx.size());
  }
  return total / static_cast<double>(data.rows());
}

TrainReport train(EviNamModel& model, const EncodedData& train_set, const EncodedData& val_set,
                  const TrainConfig& config) {
  config.validate();
  check_data(model, train_set, "training");
  check_data(model, val_set, "validation");
  const auto started = std::chrono::steady_clock::now();

  TrainReport report;
  EarlyStopping stopper(config.patience, config.min_delta);
  PlateauScheduler scheduler(config.lr, config.scheduler);
  std::vector<Tensor*> slots = parameter_slots(model);
  AdamState adam = AdamState::zeros_like(slots);
  Checkpoint best{model.nets, model.biases};

  const std::size_t n = train_set.rows();
  std::vector<std::size_t> order(n);
  double lr = config.lr;

  auto finish = [&] {
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  };

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(config.seed),
                      static_cast<std::uint32_t>(config.seed >> 32),
                      static_cast<std::uint32_t>(epoch)};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);

    double epoch_total = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t stop = std::min(n, start + config.batch_size);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      const EncodedData batch = train_set.subset(idx);
      diff::Graph graph;
      const BoundModel bound = bind(graph, model, true);
      const Var loss = batch_loss(model, bound, graph, batch, epoch - 1, config.loss);
      const double value = loss.value().item();
      if (!std::isfinite(value)) {
        finish();
        throw TrainingDiverged("training loss became non-finite in epoch " + std::to_string(epoch),
                               report);
      }
      const std::vector<Tensor> grads = graph.backward(loss);
      try {
        adam_step(slots, grads, adam, lr, config.adam);
      } catch (const NumericError& e) {
        finish();
        throw TrainingDiverged(std::string(e.what()) + " in epoch " + std::to_string(epoch),
                               report);
      }
      epoch_total += value * static_cast<double>(idx.size());
    }

    const double train_loss = epoch_total / static_cast<double>(n);
    const double val_loss = evaluate_loss(model, val_set, config.loss);
    if (!std::isfinite(val_loss)) {
      finish();
      throw TrainingDiverged("validation loss became non-finite in epoch " + std::to_string(epoch),
                             report);
    }
    report.train_loss.push_back(train_loss);
    report.val_loss.push_back(val_loss);
    report.learning_rate.push_back(lr);
    report.stopped_epoch = epoch;

    if (stopper.observe(epoch, val_loss)) {
      best.nets = model.nets;
      best.biases = model.biases;
    }
    if (stopper.should_stop()) break;
    lr = scheduler.step(val_loss);
  }

  model.nets = std::move(best.nets);
  model.biases = std::move(best.biases);
  report.best_epoch = stopper.best_epoch();
  report.best_val_loss = stopper.best_loss();
  finish();
  return report;
}

SearchResult random_search(const ModelSpec& base, const Encoder& encoder,
                           const EncodedData& train_set, const EncodedData& val_set,
                           const TrainConfig& config, const SearchSpace& space,
                           std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw ConfigError("random search needs at least one trial");
  if (!(space.lr_min > 0.0 && space.lr_min <= space.lr_max) ||
      !(space.lambda_min > 0.0 && space.lambda_min <= space.lambda_max) ||
      space.hidden_choices.empty()) {
    throw ConfigError("invalid random-search space");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
  };

  SearchResult result;
  double best_score = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < trials; ++t) {
    SearchTrial trial;
    trial.lr = log_uniform(space.lr_min, space.lr_max);
    trial.lambda = log_uniform(space.lambda_min, space.lambda_max);
    trial.hidden_sizes = space.hidden_choices[rng() % space.hidden_choices.size()];

    ModelSpec spec = base;
    spec.hidden_sizes = trial.hidden_sizes;
    EviNamModel model = make_model(spec);
    model.encoder = encoder;
    model.feature_summaries = summarize_features(train_set);
    TrainConfig cfg = config;
    cfg.lr = trial.lr;
    cfg.loss.lambda = trial.lambda;
    trial.report = train(model, train_set, val_set, cfg);
    if (model.task == TaskKind::regression) {
      trial.score = nll_metric_of(model, val_set);
    } else {
      trial.score = trial.report.best_val_loss;
    }
    if (trial.score < best_score) {
      best_score = trial.score;
      result.best = t;
      result.model = model;
    }
    result.trials.push_back(std::move(trial));
  }
  return result;
}

}  // namespace evinam
