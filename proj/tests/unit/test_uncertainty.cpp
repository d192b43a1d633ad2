#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "evinam/errors.hpp"
#include "evinam/losses.hpp"
#include "evinam/model.hpp"
#include "evinam/uncertainty.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace evinam;
using evinam::diff::Tensor;

TEST_SUITE("uncertainty") {
  TEST_CASE("regression examples") {
    const UncertaintyPair u = regression_uncertainty({0.0, 1.0, 2.0, 1.0});
    CHECK(u.aleatoric == doctest::Approx(1.0));
    CHECK(u.epistemic == doctest::Approx(1.0));
    CHECK(regression_uncertainty({0.0, 4.0, 3.7, 0.2}).epistemic == doctest::Approx(0.5));
    const UncertaintyPair far = regression_uncertainty({0.0, 1e12, 3.0, 1.5});
    CHECK(far.epistemic < 1e-5);
    CHECK(far.aleatoric == doctest::Approx(std::sqrt(1.5 / 3.0)).epsilon(1e-9));
    CHECK(denormalize(u, 4.0).aleatoric == doctest::Approx(4.0));
    CHECK(denormalize(u, 4.0).epistemic == u.epistemic);
  }

  TEST_CASE("aleatoric equals the predictive width") {
    const NigParams p{0.3, 2.5, 1.7, 0.9};
    CHECK(regression_uncertainty(p).aleatoric == student_t_width(p));
    const PredictiveDist d = PredictiveDist::from_nig(p);
    CHECK(d.location == p.gamma);
    CHECK(d.scale == student_t_width(p));
    CHECK(d.dof == 2.0 * p.alpha);
  }

  TEST_CASE("epistemic decreases strictly in nu") {
    double previous = INFINITY;
    for (double nu : {1e-6, 0.01, 0.5, 1.0, 3.0, 100.0, 1e6}) {
      const double e = regression_uncertainty({0.0, nu, 2.0, 1.0}).epistemic;
      CHECK(e < previous);
      previous = e;
    }
  }

  TEST_CASE("Dirichlet examples") {
    const DirichletUncertainty uniform = dirichlet_uncertainty({{1.0, 1.0}});
    CHECK(uniform.probs == std::vector<double>{0.5, 0.5});
    CHECK(uniform.epistemic == 1.0);
    const DirichletUncertainty skew = dirichlet_uncertainty({{2.0, 1.0, 1.0, 1.0}});
    CHECK(skew.probs[0] == doctest::Approx(0.4));
    for (std::size_t c = 1; c < 4; ++c) CHECK(skew.probs[c] == doctest::Approx(0.2));
    CHECK(skew.epistemic == doctest::Approx(0.8));
  }

  TEST_CASE("expected entropy matches Monte Carlo") {
    const std::vector<double> alpha{2.0, 1.0, 1.0, 1.0};
    const double mc = oracle::dirichlet_entropy_monte_carlo(alpha, 200000, 11);
    CHECK(std::abs(dirichlet_uncertainty({alpha}).aleatoric - mc) < 1e-3);
    // Closed form at Dir(1, 1): E[-p log p - (1-p) log(1-p)] = 1/2.
    CHECK(dirichlet_uncertainty({{1.0, 1.0}}).aleatoric == doctest::Approx(0.5).epsilon(1e-12));
  }

  TEST_CASE("probabilities normalize and vacuity decreases in every alpha") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
      std::vector<double> alpha(2 + i % 5);
      for (double& a : alpha) a = 1.0 + u(rng);
      const DirichletUncertainty d = dirichlet_uncertainty({alpha});
      double s = 0.0;
      for (double p : d.probs) {
        CHECK(p >= 0.0);
        s += p;
      }
      CHECK(std::abs(s - 1.0) <= 1e-9);
      CHECK(d.epistemic > 0.0);
      CHECK(d.epistemic <= 1.0);
      for (std::size_t c = 0; c < alpha.size(); ++c) {
        std::vector<double> more = alpha;
        more[c] += 0.5;
        CHECK(dirichlet_uncertainty({more}).epistemic < d.epistemic);
      }
    }
  }

  TEST_CASE("per-feature bands of a zero-initialized model are constant") {
    ModelSpec spec;
    spec.n_features = 3;
    EviNamModel model = make_model(spec);
    model.biases = Tensor::vector({0.1, 0.4, -0.2, 0.3});
    const std::vector<double> grid{-3.0, -1.0, 0.0, 2.0, 5.0};
    const auto bands = per_feature_uncertainty(model, 1, grid);
    REQUIRE(bands.size() == grid.size());
    for (const auto& b : bands) {
      CHECK(b.aleatoric == bands.front().aleatoric);
      CHECK(b.epistemic == bands.front().epistemic);
    }
  }

  TEST_CASE("single-feature bands reproduce the full model") {
    ModelSpec spec;
    spec.n_features = 1;
    EviNamModel model = make_model(spec);
    fixture::randomize(model, 12);
    const std::vector<double> grid{-2.0, -0.5, 0.25, 1.75};
    const auto bands = per_feature_uncertainty(model, 0, grid);
    const auto full = predict_nig(model, Tensor::matrix(grid.size(), 1, grid));
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const UncertaintyPair u = regression_uncertainty(full[g]);
      CHECK(bands[g].aleatoric == u.aleatoric);
      CHECK(bands[g].epistemic == u.epistemic);
    }
  }

  TEST_CASE("bands equal a restricted re-assembly of bias and one feature") {
    ModelSpec spec;
    spec.n_features = 3;
    spec.hidden_sizes = {7, 5};
    EviNamModel model = make_model(spec);
    fixture::randomize(model, 21);
    const std::vector<double> grid{-1.5, 0.0, 0.8, 2.2};
    for (std::size_t j = 0; j < 3; ++j) {
      const auto bands = per_feature_uncertainty(model, j, grid);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const std::vector<double> x{grid[g]};
        const Tensor raw = shape_forward(model.nets[j], x);
        const auto sp = [](double z) { return std::log1p(std::exp(z)); };
        const double nu = sp(model.biases[1]) + sp(raw.at(0, 1));
        const double alpha = sp(model.biases[2]) + 1.0 + sp(raw.at(0, 2)) + 1.0;
        const double beta = sp(model.biases[3]) + sp(raw.at(0, 3));
        CHECK(bands[g].epistemic == doctest::Approx(1.0 / std::sqrt(nu)).epsilon(1e-12));
        CHECK(bands[g].aleatoric ==
              doctest::Approx(std::sqrt(beta * (1.0 + nu) / (alpha * nu))).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("uncertainties do not depend on feature order") {
    ModelSpec spec;
    spec.n_features = 3;
    EviNamModel model = make_model(spec);
    fixture::randomize(model, 5);
    EviNamModel permuted = model;
    permuted.nets = {model.nets[2], model.nets[0], model.nets[1]};
    const Tensor x = fixture::random_matrix(4, 3, 8);
    std::vector<double> xp;
    for (std::size_t i = 0; i < 4; ++i) {
      xp.push_back(x.at(i, 2));
      xp.push_back(x.at(i, 0));
      xp.push_back(x.at(i, 1));
    }
    const auto a = predict_nig(model, x);
    const auto b = predict_nig(permuted, Tensor::matrix(4, 3, xp));
    for (std::size_t i = 0; i < 4; ++i) {
      const UncertaintyPair ua = regression_uncertainty(a[i]);
      const UncertaintyPair ub = regression_uncertainty(b[i]);
      CHECK(ua.aleatoric == doctest::Approx(ub.aleatoric).epsilon(1e-13));
      CHECK(ua.epistemic == doctest::Approx(ub.epistemic).epsilon(1e-13));
    }
    const auto pa = per_feature_uncertainty(model, 2, std::vector<double>{0.5});
    const auto pb = per_feature_uncertainty(permuted, 0, std::vector<double>{0.5});
    CHECK(pa[0].epistemic == pb[0].epistemic);
  }

  TEST_CASE("classification per-feature bands") {
    const Dataset data = fixture::small_blobs();
    const EviNamModel model = fixture::fitted_model(data, ModelSpec{}, 2);
    const std::vector<double> grid{-1.0, 0.0, 1.0};
    const auto bands = per_feature_dirichlet_uncertainty(model, 1, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const std::vector<double> x{grid[g]};
      const Tensor raw = shape_forward(model.nets[1], x);
      const double a0 = 1.0 + std::log1p(std::exp(raw.at(0, 0)));
      const double a1 = 1.0 + std::log1p(std::exp(raw.at(0, 1)));
      CHECK(bands[g].epistemic == doctest::Approx(2.0 / (a0 + a1)).epsilon(1e-12));
    }
  }

  TEST_CASE("errors") {
    ModelSpec spec;
    spec.n_features = 2;
    const EviNamModel model = make_model(spec);
    const std::vector<double> grid{0.0};
    CHECK_THROWS_AS(per_feature_uncertainty(model, 2, grid), InvalidInput);
    CHECK_THROWS_AS(per_feature_dirichlet_uncertainty(model, 0, grid), KindMismatch);
    CHECK_THROWS_AS(regression_uncertainty({0.0, 0.0, 2.0, 1.0}), DomainError);
    CHECK_THROWS_AS(dirichlet_uncertainty({{0.5, 1.0}}), DomainError);
  }
}
