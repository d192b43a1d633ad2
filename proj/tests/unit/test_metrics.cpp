#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "evinam/data.hpp"
#include "evinam/errors.hpp"
#include "evinam/losses.hpp"
#include "evinam/metrics.hpp"
#include "oracles.hpp"

using namespace evinam;

TEST_SUITE("metrics") {
  TEST_CASE("mae") {
    const std::vector<double> y{0.5, -1.0, 3.0};
    CHECK(mae(y, y) == 0.0);
    CHECK(mae(std::vector<double>{0.0, 2.0}, std::vector<double>{1.0, 1.0}) == 1.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<double> a(100), b(100);
    double ref = 0.0;
    for (std::size_t i = 0; i < 100; ++i) {
      a[i] = n(rng);
      b[i] = n(rng);
      ref += std::abs(a[i] - b[i]) / 100.0;
    }
    CHECK(mae(a, b) == doctest::Approx(ref).epsilon(1e-13));
    CHECK_THROWS_AS(mae(std::vector<double>{}, std::vector<double>{}), InvalidInput);
  }

  TEST_CASE("CRPS agrees with Monte Carlo at the location") {
    const PredictiveDist d{0.0, 1.0, 4.0};
    const double mc = oracle::crps_monte_carlo(0.0, 0.0, 1.0, 4.0, 200000, 5);
    CHECK(std::abs(crps_student_t(0.0, d) - mc) / mc < 0.01);
  }

  TEST_CASE("CRPS shrinks to zero with the scale at the location") {
    double previous = INFINITY;
    for (double s : {1.0, 1e-2, 1e-4, 1e-8}) {
      const double v = crps_student_t(2.0, {2.0, s, 5.0});
      CHECK(v < previous);
      previous = v;
    }
    CHECK(previous < 1e-7);
  }

  TEST_CASE("CRPS large-dof limit approaches the Gaussian closed form") {
    // Gaussian CRPS at the mean: sigma (2 phi(0) - 1/sqrt(pi)).
    const double gauss = 2.0 / std::sqrt(2.0 * M_PI) - 1.0 / std::sqrt(M_PI);
    CHECK(crps_student_t(0.0, {0.0, 1.0, 1e7}) == doctest::Approx(gauss).epsilon(1e-5));
  }

  TEST_CASE("CRPS needs more than one degree of freedom") {
    CHECK_THROWS_AS(crps_student_t(0.0, {0.0, 1.0, 1.0}), DomainError);
    CHECK_THROWS_AS(crps_student_t(0.0, {0.0, 0.0, 4.0}), DomainError);
  }

  TEST_CASE("NLL metric") {
    const NigParams p{0.2, 1.5, 2.5, 0.7};
    const std::vector<double> one{1.0};
    const std::vector<NigParams> single{p};
    CHECK(nll_metric(one, single) == nig_nll(1.0, p));
    const std::vector<double> two{1.0, 1.0};
    const std::vector<NigParams> dup{p, p};
    CHECK(nll_metric(two, dup) == doctest::Approx(nig_nll(1.0, p)).epsilon(1e-15));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    std::vector<double> y;
    std::vector<NigParams> ps;
    double ref = 0.0;
    for (int i = 0; i < 30; ++i) {
      ps.push_back({u(rng) - 1.5, u(rng), 1.0 + u(rng), u(rng)});
      y.push_back(u(rng) - 1.5);
      ref += nig_nll(y.back(), ps.back());
    }
    CHECK(nll_metric(y, ps) == doctest::Approx(ref / 30.0).epsilon(1e-13));
  }

  TEST_CASE("r squared") {
    const std::vector<double> y{1.0, 2.0, 4.0, 7.0};
    CHECK(r_squared(y, y) == 1.0);
    CHECK(std::abs(r_squared(y, std::vector<double>(4, 3.5))) < 1e-15);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    std::vector<double> a(50), b(50);
    for (std::size_t i = 0; i < 50; ++i) {
      a[i] = n(rng);
      b[i] = a[i] + 0.3 * n(rng);
    }
    double mean = 0.0;
    for (double v : a) mean += v / 50.0;
    double ss_res = 0.0, ss_tot = 0.0;
    for (std::size_t i = 0; i < 50; ++i) {
      ss_res += (a[i] - b[i]) * (a[i] - b[i]);
      ss_tot += (a[i] - mean) * (a[i] - mean);
    }
    CHECK(r_squared(a, b) == doctest::Approx(1.0 - ss_res / ss_tot).epsilon(1e-13));
    CHECK_THROWS_AS(r_squared(std::vector<double>{2.0, 2.0}, std::vector<double>{1.0, 2.0}), DomainError);
  }

  TEST_CASE("regression report and scale invariance") {
    // Two raw target scales that normalize to the same values give the same metrics.
    std::vector<double> raw_a{1.0, 2.0, 5.0, 3.0, -1.0};
    std::vector<double> raw_b;
    for (double v : raw_a) raw_b.push_back(100.0 * v - 40.0);
    auto normalized = [](const std::vector<double>& raw) {
      Dataset d;
      d.columns = {ColumnSpec{"x", ColumnKind::numeric, {}}};
      d.rows = raw.size();
      for (std::size_t i = 0; i < raw.size(); ++i) d.values.push_back(static_cast<double>(i));
      d.targets = raw;
      const Encoder enc = Encoder::fit(d);
      return enc.transform(d).y;
    };
    const std::vector<double> ya = normalized(raw_a);
    const std::vector<double> yb = normalized(raw_b);
    const std::vector<NigParams> params(5, NigParams{0.1, 1.2, 2.3, 0.8});
    const MetricReport ra = regression_metrics(ya, params);
    const MetricReport rb = regression_metrics(yb, params);
    REQUIRE(ra.values.size() == rb.values.size());
    for (std::size_t i = 0; i < ra.values.size(); ++i) {
      CHECK(ra.values[i].first == rb.values[i].first);
      CHECK(ra.values[i].second == doctest::Approx(rb.values[i].second).epsilon(1e-12));
    }
    CHECK(ra.has("mae"));
    CHECK(ra.has("nll"));
    CHECK(ra.has("crps"));
    CHECK(ra.has("r2"));
    CHECK(ra.count == 5);
    CHECK_THROWS_AS(ra.get("auroc"), InvalidInput);
  }

  TEST_CASE("perfect classification") {
    const std::vector<double> labels{0, 1, 2, 1};
    const std::vector<double> probs{1, 0, 0, 0, 1, 0, 0, 0, 1, 0, 1, 0};
    const MetricReport r = classification_metrics(labels, probs, 3);
    CHECK(r.get("accuracy") == 1.0);
    CHECK(r.get("brier") == 0.0);
    CHECK(r.get("auroc") == 1.0);
    CHECK(r.get("ece") == 0.0);
  }

  TEST_CASE("ties in argmax resolve to the lowest index") {
    const std::vector<double> probs{0.5, 0.5, 0.5, 0.5};
    CHECK(accuracy(std::vector<double>{0, 1}, probs, 2) == 0.5);
  }

  TEST_CASE("brier is the summed squared error per sample") {
    const std::vector<double> labels{0, 1};
    const std::vector<double> probs{0.7, 0.3, 0.4, 0.6};
    CHECK(brier(labels, probs, 2) == doctest::Approx((0.09 + 0.09 + 0.16 + 0.16) / 2.0));
  }

  TEST_CASE("anti-ranked binary scores give AUROC 0") {
    const std::vector<int> pos{1, 1, 0, 0};
    const std::vector<double> scores{0.1, 0.2, 0.8, 0.9};
    CHECK(binary_auroc(pos, scores) == 0.0);
  }

  TEST_CASE("AUROC matches pairwise counting and ignores monotone transforms") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> coin(0, 1);
    std::uniform_int_distribution<int> level(0, 20);
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<int> pos(200);
      std::vector<double> scores(200), squashed(200);
      for (std::size_t i = 0; i < 200; ++i) {
        pos[i] = coin(rng);
        // Integer levels force plenty of exact ties.
        scores[i] = static_cast<double>(level(rng) + 2 * pos[i]);
        squashed[i] = std::exp(0.1 * scores[i]) + scores[i] * scores[i] * scores[i];
      }
      const double ref = oracle::auroc_pairs(pos, scores);
      CHECK(binary_auroc(pos, scores) == doctest::Approx(ref).epsilon(1e-15));
      CHECK(binary_auroc(pos, squashed) == doctest::Approx(ref).epsilon(1e-15));
    }
  }

  TEST_CASE("multiclass AUROC is the one-vs-rest macro average") {
    const std::vector<double> labels{0, 1, 2, 0, 1, 2, 2};
    const std::vector<double> probs{0.6, 0.3, 0.1, 0.2, 0.5, 0.3, 0.3, 0.3, 0.4, 0.4, 0.4, 0.2,
                                    0.1, 0.6, 0.3, 0.2, 0.2, 0.6, 0.5, 0.1, 0.4};
    double macro = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      std::vector<int> pos;
      std::vector<double> s;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        pos.push_back(labels[i] == static_cast<double>(c));
        s.push_back(probs[i * 3 + c]);
      }
      macro += oracle::auroc_pairs(pos, s) / 3.0;
    }
    CHECK(auroc(labels, probs, 3) == doctest::Approx(macro).epsilon(1e-14));
    // A class without positives is skipped.
    const std::vector<double> two{0, 1, 0, 1};
    const std::vector<double> p3{0.8, 0.1, 0.1, 0.2, 0.7, 0.1, 0.6, 0.3, 0.1, 0.3, 0.6, 0.1};
    CHECK(auroc(two, p3, 3) == 1.0);
    const std::vector<double> single{0, 0};
    CHECK_THROWS_AS(auroc(single, std::vector<double>{0.5, 0.5, 0.6, 0.4}, 2), InvalidInput);
  }

  TEST_CASE("ECE vanishes when confidence equals bin accuracy") {
    std::vector<double> labels, probs;
    // Ten samples at confidence 0.8 with eight correct.
    for (int i = 0; i < 10; ++i) {
      probs.insert(probs.end(), {0.8, 0.2});
      labels.push_back(i < 8 ? 0 : 1);
    }
    // Four samples at confidence 0.75 with three correct.
    for (int i = 0; i < 4; ++i) {
      probs.insert(probs.end(), {0.25, 0.75});
      labels.push_back(i < 3 ? 1 : 0);
    }
    CHECK(ece(labels, probs, 2) == doctest::Approx(0.0).epsilon(1e-14));
    // Shifting one bin's confidence away from its accuracy shows up with its weight.
    std::vector<double> shifted = probs;
    for (int i = 0; i < 10; ++i) {
      shifted[2 * i] = 0.9;
      shifted[2 * i + 1] = 0.1;
    }
    CHECK(ece(labels, shifted, 2) == doctest::Approx(10.0 / 14.0 * 0.1).epsilon(1e-12));
  }

  TEST_CASE("classification input validation") {
    CHECK_THROWS_AS(classification_metrics(std::vector<double>{2}, std::vector<double>{0.5, 0.5}, 2), InvalidInput);
    CHECK_THROWS_AS(classification_metrics(std::vector<double>{0}, std::vector<double>{0.5, 0.6}, 2), InvalidInput);
    CHECK_THROWS_AS(classification_metrics(std::vector<double>{0, 1}, std::vector<double>{0.5, 0.5}, 2), InvalidInput);
  }
}
