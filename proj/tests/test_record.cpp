#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "kcx/parallel.hpp"
#include "kcx/record.hpp"
#include "kcx/record_io.hpp"

namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const auto dir = fs::temp_directory_path() / "kcx_test_record";
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("csv record loads with sidecar metadata") {
  const auto dir = temp_dir();
  std::string csv = "left,right\n";
  for (int i = 0; i < 500; ++i) csv += "1.5,-2.25\n";
  write_file(dir / "two.csv", csv);
  write_file(dir / "two.json",
             R"({"sampling_rate_hz": 250.0, "channels": ["left", "right"]})");

  const kcx::EegRecord rec = kcx::load_record((dir / "two.csv").string());
  CHECK(rec.channel_count() == 2);
  CHECK(rec.samples_per_channel() == 500);
  CHECK(rec.duration_s() == Catch::Approx(2.0));
  CHECK(rec.channel_names[0] == "left");
  CHECK(rec.samples[1][7] == -2.25);
}

TEST_CASE("csv loader rejects channel count mismatch") {
  const auto dir = temp_dir();
  write_file(dir / "mismatch.csv", "a,b\n0,0\n");
  write_file(dir / "mismatch.json",
             R"({"sampling_rate_hz": 100.0, "channels": ["a", "b", "c"]})");
  CHECK_THROWS_WITH(kcx::load_record((dir / "mismatch.csv").string()),
                    Catch::Matchers::ContainsSubstring("channel count mismatch"));
}

TEST_CASE("csv loader reports bad rows with line numbers") {
  const auto dir = temp_dir();
  write_file(dir / "bad.csv", "a\n1.0\noops\n");
  write_file(dir / "bad.json", R"({"sampling_rate_hz": 10.0, "channels": ["a"]})");
  CHECK_THROWS_WITH(kcx::load_record((dir / "bad.csv").string()),
                    Catch::Matchers::ContainsSubstring(":3"));

  write_file(dir / "rate.csv", "a\n1.0\n");
  write_file(dir / "rate.json", R"({"sampling_rate_hz": 0.0, "channels": ["a"]})");
  CHECK_THROWS_WITH(kcx::load_record((dir / "rate.csv").string()),
                    Catch::Matchers::ContainsSubstring("sampling rate"));
}

TEST_CASE("binary record of 20 channels x 900000 samples spans one hour") {
  const auto dir = temp_dir();
  kcx::EegRecord rec;
  rec.sampling_rate_hz = 250.0;
  for (int c = 0; c < 20; ++c) {
    rec.channel_names.push_back("ch" + std::to_string(c));
    rec.samples.emplace_back(900000, static_cast<double>(c));
  }
  const auto path = (dir / "hour.eegbin").string();
  kcx::save_record_binary(rec, path);
  const kcx::EegRecord loaded = kcx::load_record(path);
  CHECK(loaded.duration_s() == Catch::Approx(3600.0));
  CHECK(loaded.channel_count() == 20);
  fs::remove(path);
}

TEST_CASE("binary round-trip is bit exact for float-precision samples") {
  const auto dir = temp_dir();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> uni(-200.0f, 200.0f);
  kcx::EegRecord rec;
  rec.sampling_rate_hz = 250.0;
  rec.channel_names = {"Fp1", "Cz", "O2"};
  for (int c = 0; c < 3; ++c) {
    std::vector<double> ch(1024);
    for (auto& v : ch) v = static_cast<double>(uni(rng));
    rec.samples.push_back(std::move(ch));
  }
  const auto path = (dir / "rt.eegbin").string();
  kcx::save_record_binary(rec, path);
  const kcx::EegRecord loaded = kcx::load_record_binary(path);
  REQUIRE(loaded.channel_names == rec.channel_names);
  REQUIRE(loaded.sampling_rate_hz == rec.sampling_rate_hz);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 1024; ++i)
      REQUIRE(loaded.samples[c][i] == rec.samples[c][i]);
}

TEST_CASE("binary loader reports truncation with byte offsets") {
  const auto dir = temp_dir();
  write_file(dir / "short.eegbin", "KCX1\x02");
  CHECK_THROWS_WITH(kcx::load_record((dir / "short.eegbin").string()),
                    Catch::Matchers::ContainsSubstring("byte offset"));
  write_file(dir / "nomagic.eegbin", "WAT?aaaaaaaaaaaaaaaaaaaa");
  CHECK_THROWS_WITH(kcx::load_record((dir / "nomagic.eegbin").string()),
                    Catch::Matchers::ContainsSubstring("magic"));
}

TEST_CASE("annotations load sorted and deduplicated") {
  const auto dir = temp_dir();
  write_file(dir / "ann.txt", "12.5\n3.0\n12.5\n");
  const kcx::AnnotationSet set = kcx::load_annotations((dir / "ann.txt").string());
  REQUIRE(set.events == std::vector<double>{3.0, 12.5});

  write_file(dir / "empty.txt", "");
  CHECK(kcx::load_annotations((dir / "empty.txt").string()).events.empty());

  write_file(dir / "neg.txt", "-1.0\n");
  CHECK_THROWS_WITH(kcx::load_annotations((dir / "neg.txt").string()),
                    Catch::Matchers::ContainsSubstring("negative event time"));

  write_file(dir / "comments.txt", "# header\n5.5 # trailing note\n\n2.0\n");
  CHECK(kcx::load_annotations((dir / "comments.txt").string()).events ==
        std::vector<double>{2.0, 5.5});

  write_file(dir / "junk.txt", "1.0\nnot-a-number\n");
  CHECK_THROWS_WITH(kcx::load_annotations((dir / "junk.txt").string()),
                    Catch::Matchers::ContainsSubstring(":2"));
}

TEST_CASE("annotation output is strictly increasing for random inputs") {
  const auto dir = temp_dir();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(0.0, 100.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::string content;
    for (int i = 0; i < 50; ++i) content += std::to_string(uni(rng)) + "\n";
    write_file(dir / "rand.txt", content);
    const auto set = kcx::load_annotations((dir / "rand.txt").string());
    for (std::size_t i = 1; i < set.events.size(); ++i)
      REQUIRE(set.events[i - 1] < set.events[i]);
  }
}

TEST_CASE("make_windows matches direct enumeration") {
  kcx::EegRecord rec;
  rec.sampling_rate_hz = 250.0;
  rec.channel_names = {"a"};
  rec.samples = {std::vector<double>(1000, 0.0)};

  const kcx::WindowIndexing idx = kcx::make_windows(rec, {256, 25});
  // enumeration oracle: count placements i*step + length <= n
  std::size_t expected = 0;
  for (std::size_t start = 0; start + 256 <= 1000; start += 25) ++expected;
  CHECK(expected == 30);
  CHECK(idx.window_count == expected);
  CHECK(idx.center_time_s(0) == Catch::Approx(128.0 / 250.0));

  rec.samples = {std::vector<double>(256, 0.0)};
  CHECK(kcx::make_windows(rec, {256, 25}).window_count == 1);

  rec.samples = {std::vector<double>(255, 0.0)};
  CHECK_THROWS_AS(kcx::make_windows(rec, {256, 25}), kcx::Error);
}

TEST_CASE("window tiling covers all but the trailing step") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t length = std::size_t{1} << (3 + rng() % 6);
    const std::size_t step = 1 + rng() % length;
    const std::size_t n = length + rng() % 5000;
    kcx::EegRecord rec;
    rec.sampling_rate_hz = 100.0;
    rec.channel_names = {"a"};
    rec.samples = {std::vector<double>(n, 0.0)};
    const auto idx = kcx::make_windows(rec, {length, step});
    for (std::size_t i = 0; i < idx.window_count; ++i) {
      REQUIRE(idx.start_sample(i) == i * step);
      if (i > 0) REQUIRE(idx.center_time_s(i) > idx.center_time_s(i - 1));
    }
    const std::size_t covered = idx.start_sample(idx.window_count - 1) + length;
    REQUIRE(covered <= n);
    REQUIRE(covered + step > n);  // coverage >= n - step
  }
}

TEST_CASE("window spec validation") {
  CHECK_THROWS_AS((kcx::WindowSpec{255, 25}.validate()), kcx::Error);  // not a power of two
  CHECK_THROWS_AS((kcx::WindowSpec{256, 300}.validate()), kcx::Error); // step > length
  CHECK_THROWS_AS((kcx::WindowSpec{256, 0}.validate()), kcx::Error);
  CHECK_NOTHROW((kcx::WindowSpec{256, 26}.validate()));
}

TEST_CASE("seconds to samples rounds half up") {
  CHECK(kcx::seconds_to_samples(1.024, 250.0) == 256);
  CHECK(kcx::seconds_to_samples(0.1024, 250.0) == 26);  // 25.6 rounds up
}

TEST_CASE("worker count resolution order: flag, then env, then hardware") {
  setenv("KCX_THREADS", "3", 1);
  CHECK(kcx::resolve_threads(2) == 2);  // explicit request wins
  CHECK(kcx::resolve_threads(0) == 3);  // env fallback
  setenv("KCX_THREADS", "garbage", 1);
  CHECK(kcx::resolve_threads(0) >= 1);  // unparseable env falls to hardware
  unsetenv("KCX_THREADS");
  CHECK(kcx::resolve_threads(0) >= 1);
}
