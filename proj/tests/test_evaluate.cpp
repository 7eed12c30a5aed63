#include <doctest.h>

#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "msprobit/evaluate.hpp"
#include "msprobit/simulate.hpp"

using namespace msprobit;

namespace {

Dataset three_scales(std::uint64_t seed, int n = 45) {
  RandomStream rng(seed);
  return simulate_dataset(3, n, 3, {1, 2, 3}, 3, rng).pooled();
}

ChainConfig quick_chain(const Dataset& d) {
  ChainConfig c;
  c.prior = Prior::isotropic(d.num_features(), 1.0);
  c.proposal_sd.assign(static_cast<std::size_t>(d.num_scales()), 0.4);
  c.burn_in = 50;
  c.thinning = 1;
  c.stored_draws = 20;
  return c;
}

}  // namespace

TEST_SUITE("evaluate") {
  TEST_CASE("metric names") {
    const auto names = split_metric_names(2);
    CHECK(names == std::vector<std::string>{"f1_macro_in", "tau_b_in", "harmonic_in",
                                            "f1_class_1_in", "f1_class_2_in", "f1_macro_out",
                                            "tau_b_out", "harmonic_out", "f1_class_1_out",
                                            "f1_class_2_out"});
  }

  TEST_CASE("training rows are stratified per scale and reproducible") {
    const auto d = three_scales(1);
    for (double frac : {2.0 / 3.0, 1.0 / 3.0}) {
      RandomStream a(5), b(5);
      const auto rows = draw_training_rows(d, frac, a);
      CHECK(rows == draw_training_rows(d, frac, b));
      CHECK(std::is_sorted(rows.begin(), rows.end()));
      for (int s = 1; s <= 3; ++s) {
        std::set<int> classes;
        long count = 0;
        for (auto i : rows) {
          if (d.scale_ids[static_cast<std::size_t>(i)] != s) continue;
          ++count;
          classes.insert(d.labels[static_cast<std::size_t>(i)]);
        }
        CHECK(count == std::lround(frac * 45));
        CHECK(static_cast<int>(classes.size()) == d.scale(s).num_classes());
      }
    }
  }

  TEST_CASE("a class with one member cannot be in every training split") {
    Dataset d;
    d.features = Eigen::MatrixXd::Identity(6, 2);
    d.features(5, 0) = 3.0;
    d.features(4, 1) = 2.0;
    d.labels = {1, 1, 1, 1, 1, 2};
    d.scale_ids.assign(6, 1);
    d.scales = {ScaleSpec(1, 2)};
    RandomStream rng(2);
    // With 1/6 of the rows there is room for one class only.
    try {
      draw_training_rows(d, 1.0 / 6.0, rng);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("scale 1 class") != std::string::npos);
    }
  }

  TEST_CASE("smoke run: shapes, draw counts and differences") {
    const auto d = three_scales(3);
    SplitSpec spec;
    spec.num_splits = 2;
    spec.chains = 2;
    spec.seed = 4;
    const auto chain = quick_chain(d);
    const auto report = evaluate_splits(d, spec, chain);
    long expected_rows = 0, expected_diffs = 0;
    for (const auto& s : d.scales) {
      expected_rows += 2L * 2 * 20 * 2 * (3 + s.num_classes());
      expected_diffs += 2L * (3 + s.num_classes());
    }
    CHECK(static_cast<long>(report.rows.size()) == spec.num_splits * expected_rows);
    CHECK(static_cast<long>(report.diffs.size()) == spec.num_splits * expected_diffs);

    // Each (split, model, scale, metric) has stored_draws x chains samples.
    std::map<std::tuple<int, std::string, int, std::string>, std::vector<double>> groups;
    for (const auto& r : report.rows) groups[{r.split, r.model, r.scale, r.metric}].push_back(r.value);
    for (const auto& [key, values] : groups) CHECK(values.size() == 40);

    for (const auto& diff : report.diffs) {
      const auto& multi = groups.at({diff.split, "multi", diff.scale, diff.metric});
      const auto& single = groups.at({diff.split, "single", diff.scale, diff.metric});
      const double mm = std::accumulate(multi.begin(), multi.end(), 0.0) / 40.0;
      const double ms = std::accumulate(single.begin(), single.end(), 0.0) / 40.0;
      if (std::isnan(diff.diff)) continue;
      CHECK(diff.mean_multi == doctest::Approx(mm).epsilon(1e-12));
      CHECK(diff.mean_single == doctest::Approx(ms).epsilon(1e-12));
      CHECK(diff.diff == doctest::Approx(mm - ms).epsilon(1e-12));
    }
    for (const auto& r : report.rows) {
      if (r.metric.rfind("f1", 0) == 0) CHECK((r.value >= 0.0 && r.value <= 1.0));
    }

    const auto again = evaluate_splits(d, spec, chain);
    REQUIRE(again.rows.size() == report.rows.size());
    for (std::size_t k = 0; k < report.rows.size(); ++k) {
      const double a = again.rows[k].value, b = report.rows[k].value;
      CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
    }
  }

  TEST_CASE("standardized evaluation runs and rejects bad fractions") {
    const auto d = three_scales(6);
    SplitSpec spec;
    spec.num_splits = 1;
    spec.standardize = true;
    spec.train_fraction = 1.0 / 3.0;
    CHECK_NOTHROW(evaluate_splits(d, spec, quick_chain(d)));
    spec.train_fraction = 1.0;
    CHECK_THROWS_AS(evaluate_splits(d, spec, quick_chain(d)), ValidationError);
  }
}
