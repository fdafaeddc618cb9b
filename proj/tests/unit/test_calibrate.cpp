#include <doctest.h>

#include <cmath>
#include <random>

#include "groundchat/bundle.hpp"
#include "groundchat/calibrate.hpp"
#include "support.hpp"

using namespace groundchat;
using support::error_code;

namespace {

Logits make_logits(std::initializer_list<double> values) {
  Logits z;
  z.values.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) {
    z.values[i] = v;
    z.labels.push_back("L" + std::to_string(i));
    ++i;
  }
  return z;
}

CalibratedPrediction from_probs(std::initializer_list<double> probs) {
  // log(p) as logits reproduces p exactly at T = 1.
  Logits z;
  z.values.resize(static_cast<Eigen::Index>(probs.size()));
  Eigen::Index i = 0;
  for (double p : probs) {
    z.values[i] = std::log(p);
    z.labels.push_back("L" + std::to_string(i));
    ++i;
  }
  return softmax_with_temperature(z, Temperature(1.0));
}

struct Synthetic {
  std::vector<Logits> logits;
  std::vector<std::string> gold;
};

// Labels drawn from softmax(z), so T = 1 is calibrated by construction.
Synthetic calibrated_source(int rows, int classes, double spread, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, spread);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Synthetic s;
  for (int r = 0; r < rows; ++r) {
    Logits z;
    z.values.resize(classes);
    for (int c = 0; c < classes; ++c) {
      z.values[c] = normal(rng);
      z.labels.push_back("c" + std::to_string(c));
    }
    double total = 0.0;
    for (int c = 0; c < classes; ++c) total += std::exp(z.values[c]);
    double draw = u(rng) * total;
    int label = classes - 1;
    for (int c = 0; c < classes; ++c) {
      draw -= std::exp(z.values[c]);
      if (draw <= 0.0) {
        label = c;
        break;
      }
    }
    s.gold.push_back(z.labels[static_cast<std::size_t>(label)]);
    s.logits.push_back(std::move(z));
  }
  return s;
}

}  // namespace

TEST_SUITE("calibrate") {
  TEST_CASE("softmax of [2,1,0] at T = 1 matches a direct evaluation") {
    const double denom = std::exp(2.0) + std::exp(1.0) + std::exp(0.0);
    const auto p = softmax_with_temperature(make_logits({2, 1, 0}), Temperature(1.0));
    CHECK(p.probs[0] == doctest::Approx(std::exp(2.0) / denom).epsilon(1e-12));
    CHECK(p.probs[1] == doctest::Approx(std::exp(1.0) / denom).epsilon(1e-12));
    CHECK(p.probs[2] == doctest::Approx(1.0 / denom).epsilon(1e-12));
    CHECK(p.probs[0] == doctest::Approx(0.6652).epsilon(1e-4));
    CHECK(p.ranked == std::vector<Eigen::Index>{0, 1, 2});
    CHECK(p.top_label() == "L0");
  }

  TEST_CASE("equal logits give thirds at any temperature") {
    for (double t : {0.05, 1.0, 7.0}) {
      const auto p = softmax_with_temperature(make_logits({1, 1, 1}), Temperature(t));
      for (Eigen::Index i = 0; i < 3; ++i) CHECK(p.probs[i] == doctest::Approx(1.0 / 3.0));
      CHECK(p.ranked == std::vector<Eigen::Index>{0, 1, 2});
    }
  }

  TEST_CASE("a very high temperature flattens the distribution") {
    const auto p = softmax_with_temperature(make_logits({2, 1, 0}), Temperature(1000.0));
    CHECK(p.probs.maxCoeff() - p.probs.minCoeff() < 0.001);
  }

  TEST_CASE("huge logits stay finite") {
    const auto p = softmax_with_temperature(make_logits({1000, 999, -1000}), Temperature(0.5));
    CHECK(std::isfinite(p.probs.sum()));
    CHECK(p.probs.sum() == doctest::Approx(1.0));
  }

  TEST_CASE("temperature must be finite and positive") {
    for (double bad : {0.0, -1.0, std::nan(""), HUGE_VAL}) {
      CHECK(error_code([&] { (void)Temperature(bad); }) == errc::kInvalidArgument);
    }
  }

  TEST_CASE("nll: one-hot, uniform and a hand computation") {
    const std::vector<CalibratedPrediction> sure = {
        softmax_with_temperature(make_logits({800, 0, 0}), Temperature(1.0)),
        softmax_with_temperature(make_logits({0, 800, 0}), Temperature(1.0))};
    const std::vector<std::string> sure_gold = {"L0", "L1"};
    CHECK(nll(sure, sure_gold) <= 1e-9);

    const std::vector<CalibratedPrediction> flat = {from_probs({0.25, 0.25, 0.25, 0.25})};
    const std::vector<std::string> flat_gold = {"L2"};
    CHECK(nll(flat, flat_gold) == doctest::Approx(std::log(4.0)));

    const std::vector<CalibratedPrediction> mixed = {from_probs({0.7, 0.2, 0.1}), from_probs({0.5, 0.5}),
                                                     from_probs({0.1, 0.3, 0.6})};
    const std::vector<std::string> mixed_gold = {"L0", "L1", "L0"};
    const double expected = (-std::log(0.7) - std::log(0.5) - std::log(0.1)) / 3.0;
    CHECK(nll(mixed, mixed_gold) == doctest::Approx(expected).epsilon(1e-12));
  }

  TEST_CASE("nll clamps zero probabilities and rejects missing gold labels") {
    const std::vector<CalibratedPrediction> zero = {
        softmax_with_temperature(make_logits({0, 2000}), Temperature(1.0))};
    const std::vector<std::string> gold = {"L0"};
    CHECK(nll(zero, gold) == doctest::Approx(-std::log(kProbabilityFloor)));
    const std::vector<std::string> missing = {"nope"};
    CHECK_FALSE(error_code([&] { nll(zero, missing); }).empty());
    const std::vector<std::string> too_many = {"L0", "L1"};
    CHECK(error_code([&] { nll(zero, too_many); }) == errc::kInvalidArgument);
  }

  TEST_CASE("nll_at agrees with nll over materialised predictions") {
    const auto s = calibrated_source(50, 4, 2.0, 5);
    for (double t : {0.3, 1.0, 4.0}) {
      std::vector<CalibratedPrediction> preds;
      for (const auto& z : s.logits) preds.push_back(softmax_with_temperature(z, Temperature(t)));
      CHECK(nll_at(s.logits, s.gold, Temperature(t)) == doctest::Approx(nll(preds, s.gold)).epsilon(1e-10));
    }
  }

  TEST_CASE("fit_temperature on a calibrated source lands near 1") {
    const auto s = calibrated_source(3000, 5, 2.0, 11);
    const double t = fit_temperature(s.logits, s.gold).value();
    CHECK(t >= 0.5);
    CHECK(t <= 2.0);
  }

  TEST_CASE("scaling logits by 10 scales the fitted temperature by 10") {
    const auto s = calibrated_source(3000, 5, 0.5, 12);
    auto scaled = s.logits;
    for (auto& z : scaled) z.values *= 10.0;
    const double base = fit_temperature(s.logits, s.gold).value();
    const double big = fit_temperature(scaled, s.gold).value();
    CHECK(big / base == doctest::Approx(10.0).epsilon(0.2));
  }

  TEST_CASE("degenerate single example hits the grid boundary") {
    const std::vector<Logits> z = {make_logits({5, 0})};
    const std::vector<std::string> gold = {"L0"};
    const double t = fit_temperature(z, gold).value();
    CHECK(std::isfinite(t));
    CHECK(t > 0.0);
    // nll is exactly 0 across the first grid cell.
    const TemperatureSearch grid;
    CHECK(t >= grid.grid_min);
    CHECK(t <= grid.grid_min * std::pow(grid.grid_max / grid.grid_min, 1.0 / (grid.grid_points - 1)));
  }

  TEST_CASE("fit_temperature never does worse than T = 1 and rejects empty input") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
      const auto s = calibrated_source(5 + static_cast<int>(rng() % 40), 3, 3.0, rng());
      const auto t = fit_temperature(s.logits, s.gold);
      CHECK(nll_at(s.logits, s.gold, t) <= nll_at(s.logits, s.gold, Temperature(1.0)) + 1e-12);
    }
    CHECK(error_code([] { fit_temperature({}, {}); }) == errc::kInvalidArgument);
  }

  TEST_CASE("gate examples") {
    const auto direct = gate(from_probs({0.97, 0.02, 0.01}), 0.9);
    CHECK(direct.kind == GateDecision::Kind::Direct);
    CHECK(direct.candidates == std::vector<std::string>{"L0"});

    const auto five = gate(from_probs({0.4, 0.3, 0.2, 0.07, 0.03}), 0.9);
    CHECK(five.kind == GateDecision::Kind::Confirm);
    CHECK(five.candidates == std::vector<std::string>{"L0", "L1", "L2", "L3"});

    const auto two = gate(from_probs({0.6, 0.4}), 0.9);
    CHECK(two.kind == GateDecision::Kind::Confirm);
    CHECK(two.candidates == std::vector<std::string>{"L0", "L1"});
  }

  TEST_CASE("gate is strict at the threshold and validates it") {
    const auto p = from_probs({0.9, 0.1});
    CHECK(gate(p, p.top_confidence()).kind == GateDecision::Kind::Confirm);
    CHECK(gate(p, 1.0).kind == GateDecision::Kind::Confirm);
    for (double bad : {0.0, -0.1, 1.5}) CHECK(error_code([&] { gate(p, bad); }) == errc::kInvalidArgument);
  }

  TEST_CASE("normalisation, argmax invariance and monotone flattening") {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal(0.0, 5.0);
    std::vector<double> temps;
    for (int i = 0; i < 20; ++i) temps.push_back(0.05 * std::pow(400.0, i / 19.0));
    for (int trial = 0; trial < 200; ++trial) {
      const int k = 2 + static_cast<int>(rng() % 9);
      Logits z;
      z.values.resize(k);
      for (int c = 0; c < k; ++c) {
        z.values[c] = normal(rng);
        z.labels.push_back(std::to_string(c));
      }
      const auto base = softmax_with_temperature(z, Temperature(1.0));
      double prev_max = 2.0;
      for (double t : temps) {
        const auto p = softmax_with_temperature(z, Temperature(t));
        CHECK(std::abs(p.probs.sum() - 1.0) <= 1e-9);
        CHECK(p.probs.minCoeff() >= 0.0);
        CHECK(p.ranked.front() == base.ranked.front());
        CHECK(p.top_confidence() <= prev_max + 1e-15);
        prev_max = p.top_confidence();
        const auto g = gate(p);
        CHECK(!g.candidates.empty());
        CHECK(g.candidates.size() <= kMaxConfirmations);
        CHECK(g.topic() == p.top_label());
      }
    }
  }

  TEST_CASE("fixture calibration improves validation nll") {
    const auto& report = support::fixture_report();
    CHECK(report.medical_calibration.nll_after <= report.medical_calibration.nll_before);
    CHECK(report.social_calibration.nll_after <= report.social_calibration.nll_before);
    CHECK(support::fixture_bundle()->medical.temperature.value() == report.medical_calibration.temperature);
  }
}
