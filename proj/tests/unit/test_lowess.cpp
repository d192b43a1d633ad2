#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "evinam/errors.hpp"
#include "evinam/lowess.hpp"

using namespace evinam;

namespace {

nlohmann::json reference() {
  std::ifstream in(std::string(EVINAM_TEST_DATA_DIR) + "/lowess_statsmodels.json");
  REQUIRE(in);
  return nlohmann::json::parse(in);
}

}  // namespace

TEST_SUITE("lowess") {
  // Frozen output of statsmodels' lowess (delta = 0); see tests/oracles/lowess_statsmodels.py.
  TEST_CASE("matches statsmodels") {
    const nlohmann::json ref = reference();
    const auto x = ref.at("x").get<std::vector<double>>();
    const auto y = ref.at("y").get<std::vector<double>>();
    struct Case {
      const char* key;
      double fraction;
      std::size_t iterations;
    };
    for (const Case c : {Case{"0.3_1", 0.3, 1}, Case{"0.3_0", 0.3, 0}, Case{"0.5_3", 0.5, 3}}) {
      CAPTURE(c.key);
      const auto expected = ref.at("fits").at(c.key).get<std::vector<double>>();
      const std::vector<double> got = lowess(x, y, {c.fraction, c.iterations});
      REQUIRE(got.size() == expected.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CAPTURE(i);
        CHECK(std::abs(got[i] - expected[i]) <= 1e-9);
      }
    }
  }

  TEST_CASE("reproduces a straight line exactly") {
    std::vector<double> x, y;
    for (int i = 0; i < 30; ++i) {
      x.push_back(0.37 * ((i * 11) % 30));
      y.push_back(2.0 - 0.5 * x.back());
    }
    const std::vector<double> fit = lowess(x, y, {0.4, 2});
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(fit[i] == doctest::Approx(y[i]).epsilon(1e-10));
  }

  TEST_CASE("tied abscissae share one value") {
    const std::vector<double> x{0.0, 1.0, 1.0, 2.0, 3.0, 4.0};
    const std::vector<double> y{0.0, 1.0, 3.0, 2.0, 1.0, 0.5};
    const std::vector<double> fit = lowess(x, y, {0.8, 1});
    CHECK(fit[1] == fit[2]);
  }

  TEST_CASE("invalid input") {
    const std::vector<double> x{0.0, 1.0, 2.0};
    const std::vector<double> y{0.0, 1.0};
    CHECK_THROWS_AS(lowess(x, y), InvalidInput);
    const std::vector<double> y3{0.0, 1.0, 2.0};
    CHECK_THROWS_AS(lowess(x, y3, {0.0, 1}), ConfigError);
    CHECK_THROWS_AS(lowess(x, y3, {1.5, 1}), ConfigError);
    CHECK_THROWS_AS(lowess(x, std::vector<double>{0.0, NAN, 2.0}), DomainError);
  }
}
