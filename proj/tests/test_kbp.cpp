#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <vector>

#include "kcx/kbp.hpp"
#include "kcx/metrics.hpp"
#include "kcx/synth.hpp"

namespace {

kcx::SynthSpec small_noise_spec(std::uint64_t seed, std::size_t channels,
                                double duration_s) {
  kcx::SynthSpec spec;
  spec.seed = seed;
  spec.duration_s = duration_s;
  spec.sampling_rate_hz = 250.0;
  spec.channel_count = channels;
  spec.background.rms_uv = 15.0;
  spec.events.count = 0;
  return spec;
}

std::vector<kcx::FeatureFrame> frames_from_values(const std::vector<double>& s_values) {
  std::vector<kcx::FeatureFrame> frames(s_values.size());
  for (std::size_t i = 0; i < frames.size(); ++i) frames[i].s = s_values[i];
  return frames;
}

}  // namespace

TEST_CASE("channel flags are the OR of the five logic values") {
  kcx::ChannelThresholds thr;
  for (auto& t : thr.t) t.value = 10.0;

  SECTION("everything below thresholds stays silent") {
    const auto flags = kcx::channel_flags(frames_from_values({1, 2, 3, 4}), thr);
    REQUIRE(flags == std::vector<std::uint8_t>{0, 0, 0, 0});
  }

  SECTION("one exceeding feature raises exactly its window") {
    std::vector<kcx::FeatureFrame> frames(10);
    frames[7].p3 = 11.0;  // single feature above threshold in window 7
    const auto flags = kcx::channel_flags(frames, thr);
    for (std::size_t i = 0; i < flags.size(); ++i)
      REQUIRE(flags[i] == (i == 7 ? 1 : 0));
  }

  SECTION("equality does not flag") {
    const auto flags = kcx::channel_flags(frames_from_values({10.0}), thr);
    REQUIRE(flags == std::vector<std::uint8_t>{0});
  }
}

TEST_CASE("voting is strictly greater than v_t") {
  const std::vector<std::vector<std::uint8_t>> flags{
      {1, 1, 0}, {1, 1, 0}, {1, 0, 0}, {0, 0, 0}};
  const auto votes = kcx::vote_counts(flags);
  REQUIRE(votes == std::vector<int>{3, 2, 0});
  REQUIRE(kcx::vote(flags, 2) == std::vector<std::uint8_t>{1, 0, 0});
  REQUIRE(kcx::vote(flags, 0) == std::vector<std::uint8_t>{1, 1, 0});

  CHECK_THROWS_AS(kcx::vote_counts({{1, 0}, {1}}), kcx::Error);
}

TEST_CASE("coalesce merges runs and bridges small gaps") {
  kcx::WindowIndexing idx;
  idx.spec = {256, 26};
  idx.sampling_rate_hz = 250.0;
  idx.window_count = 60;

  std::vector<std::uint8_t> marks(60, 0);
  std::vector<int> votes(60, 0);

  SECTION("contiguous run centers on its middle window") {
    for (int i = 10; i <= 14; ++i) {
      marks[i] = 1;
      votes[i] = 3;
    }
    const auto det = kcx::coalesce(marks, votes, idx, 2);
    REQUIRE(det.events.size() == 1);
    REQUIRE(det.events[0].t == Catch::Approx(idx.center_time_s(12)).margin(1e-12));
    REQUIRE(det.events[0].support == 3);
  }

  SECTION("distant marks stay separate events") {
    marks[10] = marks[40] = 1;
    votes[10] = votes[40] = 1;
    const auto det = kcx::coalesce(marks, votes, idx, 2);
    REQUIRE(det.events.size() == 2);
  }

  SECTION("a gap within the limit is bridged") {
    marks[10] = marks[11] = marks[13] = 1;
    votes[10] = votes[11] = votes[13] = 2;
    const auto det = kcx::coalesce(marks, votes, idx, 2);
    REQUIRE(det.events.size() == 1);
  }

  SECTION("events come out strictly increasing and cover every mark") {
    std::mt19937_64 rng(77);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::uint8_t> m(60, 0);
      std::vector<int> v(60, 0);
      for (int i = 0; i < 60; ++i)
        if (rng() % 3 == 0) {
          m[i] = 1;
          v[i] = 1 + static_cast<int>(rng() % 5);
        }
      const int gap = static_cast<int>(rng() % 4);
      const auto det = kcx::coalesce(m, v, idx, gap);
      for (std::size_t e = 1; e < det.events.size(); ++e)
        REQUIRE(det.events[e].t > det.events[e - 1].t);
      // every marked window lies within one gap+run of some event
      std::size_t marked = 0, covered = 0;
      for (int i = 0; i < 60; ++i) {
        if (!m[i]) continue;
        ++marked;
        for (const auto& ev : det.events)
          if (std::abs(ev.t - idx.center_time_s(i)) <=
              (60.0 * idx.spec.step_samples) / idx.sampling_rate_hz) {
            ++covered;
            break;
          }
      }
      REQUIRE(marked == covered);
    }
  }
}

TEST_CASE("a planted K-complex flags windows near the plant") {
  kcx::SynthSpec spec = small_noise_spec(501, 1, 30.0);
  spec.events.count = 1;
  spec.events.template_spec.peak_to_trough_uv = 120.0;
  spec.events.min_separation_s = 1.0;
  spec.events.channel_visibility = 1.0;
  const kcx::SynthCorpus corpus = kcx::generate(spec);
  REQUIRE(corpus.truth.events.size() == 1);

  kcx::KbpParams params;  // stock defaults
  const auto table = kcx::compute_features(corpus.record, params.window, params.bands,
                                           params.cutoff_hz);
  const auto sorted = kcx::sort_features(table);
  const auto thresholds = kcx::compute_thresholds(sorted, params.p_values());
  const auto flags = kcx::channel_flags(table.frames[0], thresholds[0]);

  const double plant = corpus.truth.events[0];
  bool near_flag = false;
  for (std::size_t i = 0; i < flags.size(); ++i)
    if (flags[i] && std::abs(table.indexing.center_time_s(i) - plant) <= 0.5)
      near_flag = true;
  REQUIRE(near_flag);
}

TEST_CASE("detect_kbp finds strong plants and tolerates channel rescaling") {
  kcx::SynthSpec spec = small_noise_spec(502, 6, 120.0);
  spec.events.count = 10;
  spec.events.template_spec.peak_to_trough_uv = 110.0;
  spec.events.min_separation_s = 6.0;
  spec.events.channel_visibility = 1.0;
  const kcx::SynthCorpus corpus = kcx::generate(spec);

  // Synthetic channels carry independent noise, so cross-channel vote
  // coincidences need stricter settings than the stock real-EEG values:
  // most of the six channels must agree and the quantiles sit higher.
  kcx::KbpParams params;
  params.set_p_values({0.95, 0.95, 0.95, 0.95, 0.90});
  params.v_t = 4;
  const kcx::KbpResult res = kcx::detect_kbp(corpus.record, params);

  const auto counts = kcx::match_events(res.detections.to_annotations(), corpus.truth,
                                        {0.5, 1.0});
  REQUIRE(counts.tp >= 9);  // strong plants on every channel

  SECTION("doubling every channel leaves detections identical") {
    kcx::EegRecord scaled = corpus.record;
    for (auto& ch : scaled.samples)
      for (auto& v : ch) v *= 2.0;
    const kcx::KbpResult res2 = kcx::detect_kbp(scaled, params);
    REQUIRE(res2.marks == res.marks);
    REQUIRE(res2.votes == res.votes);
    REQUIRE(res2.detections.events.size() == res.detections.events.size());
    for (std::size_t e = 0; e < res.detections.events.size(); ++e) {
      REQUIRE(res2.detections.events[e].t == res.detections.events[e].t);
      REQUIRE(res2.detections.events[e].support == res.detections.events[e].support);
    }
  }

  SECTION("channel permutation leaves detections identical") {
    kcx::EegRecord shuffled = corpus.record;
    std::reverse(shuffled.samples.begin(), shuffled.samples.end());
    std::reverse(shuffled.channel_names.begin(), shuffled.channel_names.end());
    const kcx::KbpResult res2 = kcx::detect_kbp(shuffled, params);
    REQUIRE(res2.votes == res.votes);
    REQUIRE(res2.marks == res.marks);
  }
}

TEST_CASE("pure noise yields few events under the stock defaults") {
  const kcx::SynthCorpus corpus = kcx::generate(small_noise_spec(503, 8, 60.0));
  const kcx::KbpResult res = kcx::detect_kbp(corpus.record, {});
  // Self-calibrated quantiles always flag the top tail, so noise runs merge
  // into a handful of broad events rather than none.
  REQUIRE(res.detections.events.size() <= 12);
}

TEST_CASE("raising v_t can only shrink the marked set") {
  const kcx::SynthCorpus corpus = kcx::generate(small_noise_spec(504, 5, 40.0));
  kcx::KbpParams params;
  const auto table = kcx::compute_features(corpus.record, params.window, params.bands,
                                           params.cutoff_hz);
  const auto sorted = kcx::sort_features(table);
  std::vector<std::uint8_t> prev;
  for (int v_t = 0; v_t < 5; ++v_t) {
    params.v_t = v_t;
    const auto res = kcx::detect_kbp_cached(table, sorted, params);
    if (!prev.empty())
      for (std::size_t i = 0; i < res.marks.size(); ++i)
        REQUIRE(res.marks[i] <= prev[i]);  // subset relation
    prev = res.marks;
  }
}

TEST_CASE("raising any single p_t never adds a flagged window") {
  const kcx::SynthCorpus corpus = kcx::generate(small_noise_spec(505, 1, 30.0));
  kcx::KbpParams params;
  const auto table = kcx::compute_features(corpus.record, params.window, params.bands,
                                           params.cutoff_hz);
  const auto sorted = kcx::sort_features(table);

  std::mt19937_64 rng(66);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::array<double, 5> p{};
    for (auto& v : p) v = uni(rng);
    const std::size_t which = rng() % 5;
    std::array<double, 5> raised = p;
    raised[which] = std::min(1.0, p[which] + 0.25 * uni(rng));

    const auto base_flags =
        kcx::channel_flags(table.frames[0], kcx::compute_thresholds(sorted, p)[0]);
    const auto raised_flags =
        kcx::channel_flags(table.frames[0], kcx::compute_thresholds(sorted, raised)[0]);
    for (std::size_t i = 0; i < base_flags.size(); ++i)
      REQUIRE(raised_flags[i] <= base_flags[i]);
  }
}

TEST_CASE("v_t must stay below the channel count") {
  const kcx::SynthCorpus corpus = kcx::generate(small_noise_spec(506, 2, 10.0));
  kcx::KbpParams params;
  params.v_t = 2;
  CHECK_THROWS_AS(kcx::detect_kbp(corpus.record, params), kcx::Error);
}
