#include <catch2/catch_amalgamated.hpp>

#include <set>
#include <vector>

#include "kcx/synth.hpp"
#include "kcx/tuner.hpp"

namespace {

std::vector<kcx::DatasetItem> small_dataset() {
  std::vector<kcx::DatasetItem> dataset;
  for (std::uint64_t seed : {701, 702}) {
    kcx::SynthSpec spec;
    spec.seed = seed;
    spec.duration_s = 120.0;
    spec.sampling_rate_hz = 250.0;
    spec.channel_count = 6;
    spec.background.rms_uv = 15.0;
    spec.events.count = 12;
    spec.events.template_spec.peak_to_trough_uv = 100.0;
    spec.events.min_separation_s = 5.0;
    spec.events.channel_visibility = 1.0;
    kcx::SynthCorpus corpus = kcx::generate(spec);
    dataset.push_back({std::move(corpus.record), std::move(corpus.truth),
                       "seed" + std::to_string(seed)});
  }
  return dataset;
}

}  // namespace

TEST_CASE("grid decode covers every combination in the documented order") {
  kcx::ParamGrid grid;
  grid.p = {std::vector<double>{0.1, 0.2},
            std::vector<double>{0.3},
            std::vector<double>{0.4, 0.5, 0.6},
            std::vector<double>{0.7},
            std::vector<double>{0.8, 0.9}};
  grid.v_t = {0, 1};
  REQUIRE(grid.size() == 2 * 1 * 3 * 1 * 2 * 2);

  const kcx::KbpParams base;
  // v_t runs innermost
  CHECK(grid.at(0, base).v_t == 0);
  CHECK(grid.at(1, base).v_t == 1);
  CHECK(grid.at(0, base).p_t_s == 0.8);
  CHECK(grid.at(2, base).p_t_s == 0.9);
  // p1 runs outermost
  CHECK(grid.at(0, base).p_t_p1 == 0.1);
  CHECK(grid.at(grid.size() - 1, base).p_t_p1 == 0.2);

  // every index decodes to a distinct combination
  std::set<std::array<double, 6>> seen;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto p = grid.at(g, base);
    seen.insert({p.p_t_p1, p.p_t_p2, p.p_t_p3, p.p_t_p4, p.p_t_s,
                 static_cast<double>(p.v_t)});
  }
  REQUIRE(seen.size() == grid.size());
}

TEST_CASE("the default grid brackets the stock optimum") {
  const auto grid = kcx::default_grid();
  REQUIRE(grid.p[0].size() == 15);
  REQUIRE(grid.v_t.size() == 6);
  auto contains = [](const std::vector<double>& axis, double v) {
    for (double x : axis)
      if (std::abs(x - v) < 1e-9) return true;
    return false;
  };
  // 0.81 and 0.89 fall between coarse steps; the coarse grid brackets them
  CHECK(contains(grid.p[0], 0.80));
  CHECK(contains(grid.p[0], 0.82));
  CHECK(contains(grid.p[2], 0.98));
  CHECK(contains(grid.p[4], 0.70));
  CHECK(std::find(grid.v_t.begin(), grid.v_t.end(), 2) != grid.v_t.end());
}

TEST_CASE("single-combination grid returns that combination") {
  const auto dataset = small_dataset();
  kcx::ParamGrid grid;
  grid.p = {std::vector<double>{0.9}, std::vector<double>{0.9},
            std::vector<double>{0.9}, std::vector<double>{0.9},
            std::vector<double>{0.9}};
  grid.v_t = {2};
  const auto result =
      kcx::grid_search(dataset, grid, {}, {0.5, 1.0}, 50.0);
  CHECK(result.best.p_t_p1 == 0.9);
  CHECK(result.best.v_t == 2);
  CHECK(result.evaluated_count == 1);

  // reported numbers reproduce exactly under standalone re-evaluation
  kcx::ConfusionCounts pooled;
  for (const auto& item : dataset) {
    const auto det = kcx::detect_kbp(item.record, result.best);
    pooled += kcx::evaluate(item.record.duration_s(), det.detections.to_annotations(),
                            item.truth, {0.5, 1.0});
  }
  REQUIRE(pooled == result.counts);
  REQUIRE(kcx::tpr_pct(pooled) == result.tpr_pct);
  REQUIRE(kcx::ppv_pct(pooled) == result.ppv_pct);
}

TEST_CASE("the feasible combination with the best PPV wins") {
  const auto dataset = small_dataset();
  // p3/p4 pinned; vary p1 coarsely and v_t
  kcx::ParamGrid grid;
  grid.p = {std::vector<double>{0.70, 0.95}, std::vector<double>{0.86},
            std::vector<double>{0.98}, std::vector<double>{0.89},
            std::vector<double>{0.70, 0.95}, };
  grid.v_t = {1, 3};
  const auto result = kcx::grid_search(dataset, grid, {}, {0.5, 1.0}, 80.0);
  REQUIRE(result.evaluated_count == 8);

  // oracle replay: evaluate every combination independently
  const kcx::KbpParams base;
  bool any_feasible = false;
  double best_ppv = -1.0, best_tpr = -1.0;
  std::size_t best_index = 0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto params = grid.at(g, base);
    kcx::ConfusionCounts pooled;
    for (const auto& item : dataset) {
      const auto det = kcx::detect_kbp(item.record, params);
      pooled += kcx::evaluate(item.record.duration_s(), det.detections.to_annotations(),
                              item.truth, {0.5, 1.0});
    }
    const double tpr = kcx::tpr_pct(pooled).value_or(-1);
    const double ppv = kcx::ppv_pct(pooled).value_or(-1);
    if (tpr >= 80.0) {
      if (!any_feasible || ppv > best_ppv ||
          (ppv == best_ppv && tpr > best_tpr)) {
        any_feasible = true;
        best_ppv = ppv;
        best_tpr = tpr;
        best_index = g;
      }
    }
  }
  REQUIRE(any_feasible == result.feasible);
  if (any_feasible) {
    REQUIRE(result.best_index == best_index);
    REQUIRE(result.ppv_pct.value() == best_ppv);
  }
}

TEST_CASE("tuning is deterministic across thread counts") {
  const auto dataset = small_dataset();
  kcx::ParamGrid grid;
  grid.p = {std::vector<double>{0.8, 0.9}, std::vector<double>{0.86},
            std::vector<double>{0.9, 0.98}, std::vector<double>{0.89},
            std::vector<double>{0.7, 0.9}};
  grid.v_t = {1, 2, 3};

  const auto a = kcx::grid_search(dataset, grid, {}, {0.5, 1.0}, 90.0, 1);
  const auto b = kcx::grid_search(dataset, grid, {}, {0.5, 1.0}, 90.0, 4);
  REQUIRE(a.best_index == b.best_index);
  REQUIRE(a.counts == b.counts);
  REQUIRE(a.feasible == b.feasible);
  REQUIRE(a.tpr_pct == b.tpr_pct);
  REQUIRE(a.ppv_pct == b.ppv_pct);
  REQUIRE(a.fpr_pct == b.fpr_pct);
}

TEST_CASE("infeasible grids report the max-TPR combination") {
  const auto dataset = small_dataset();
  kcx::ParamGrid grid;
  grid.p = {std::vector<double>{0.999}, std::vector<double>{0.999},
            std::vector<double>{0.999}, std::vector<double>{0.999},
            std::vector<double>{0.999}};
  grid.v_t = {5};
  const auto result = kcx::grid_search(dataset, grid, {}, {0.5, 1.0}, 100.0);
  CHECK_FALSE(result.feasible);

  kcx::ParamGrid empty;
  CHECK_THROWS_AS(kcx::grid_search(dataset, empty, {}, {0.5, 1.0}), kcx::Error);
  CHECK_THROWS_AS(kcx::grid_search({}, grid, {}, {0.5, 1.0}), kcx::Error);
}

TEST_CASE("trace records every combination when requested") {
  const auto dataset = small_dataset();
  kcx::ParamGrid grid;
  grid.p = {std::vector<double>{0.8}, std::vector<double>{0.86},
            std::vector<double>{0.98}, std::vector<double>{0.89},
            std::vector<double>{0.7, 0.9}};
  grid.v_t = {1, 2};
  const auto result = kcx::grid_search(dataset, grid, {}, {0.5, 1.0}, 90.0, 2, true);
  REQUIRE(result.trace.size() == 4);
  for (std::size_t g = 0; g < result.trace.size(); ++g) {
    REQUIRE(result.trace[g].index == g);
    REQUIRE(result.trace[g].counts.tp + result.trace[g].counts.fn ==
            2 * 12);  // pooled truth size
  }
}
