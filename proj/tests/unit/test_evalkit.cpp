#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "flaky_bridge.hpp"
#include "seeds/error.hpp"
#include "seeds/evalkit.hpp"
#include "test_support.hpp"

using namespace seeds;
using namespace seeds::evalkit;
using seeds::testing::error_of;
using seeds::testing::TempDir;

TEST_CASE("word counts: letter runs and digit runs") {
  CHECK(count_words("* copy entire grid") == 3);
  CHECK(count_words("* copy <image2>") == 3);
  CHECK(count_words("* copy \xe2\x9f\xa8image2\xe2\x9f\xa9") == 3);
  CHECK(count_words("") == 0);
  CHECK(count_words("   \n* \n") == 0);
  CHECK(count_words("- copy entire grid") == 3);
  CHECK(count_words("\xe2\x80\xa2 copy entire grid  ") == 3);
  CHECK(count_words("1. Place the cupcakes from image1 into the scene.") == 9);
  CHECK(count_words("caf\xc3\xa9 na\xc3\xafve") == 2);
  CHECK(count_words("well-known 3.5x") == 5);
  CHECK(count_words("a\xe2\x80\x94" "b") == 2);
}

TEST_CASE("word counts ignore bullet style and surrounding whitespace") {
  const std::string body = "Take the silhouette of image1\nApply the texture of image 2";
  std::string star, dash, dot;
  for (const auto& line : {std::string("Take the silhouette of image1"), std::string("Apply the texture of image 2")}) {
    star += "* " + line + "\n";
    dash += "  - " + line + "  \n";
    dot += "\xe2\x80\xa2 " + line + "\n";
  }
  CHECK(count_words(star) == count_words(body));
  CHECK(count_words(dash) == count_words(body));
  CHECK(count_words(dot) == count_words(body));
}

TEST_CASE("bullets strip markers and drop blank lines") {
  CHECK(bullets("* one\n\n  - two  \n3. three\n") == std::vector<std::string>{"one", "two", "three"});
}

TEST_CASE("pattern classification") {
  CHECK(classify_pattern("* copy <image2>") == Pattern::copy);
  CHECK(classify_pattern("* Copy image1.") == Pattern::copy);
  CHECK(classify_pattern("* copy entire grid") == Pattern::split);
  CHECK(classify_pattern("* Place the cupcakes from image1 into the underwater scene from image2.") ==
        Pattern::insertion);
  CHECK(classify_pattern("* Place the cupcakes from image1 into the underwater scene from image2.\n"
                         "* Apply the coral texture of image2 to the cupcakes.") == Pattern::none);
  CHECK(classify_pattern("* Put image1 and image2 side by side.") == Pattern::split);
  CHECK(classify_pattern("* copy <image2>\n* add a hat") == Pattern::none);
  CHECK(classify_pattern("") == Pattern::none);
  CHECK(classify_pattern("* Blend the two shapes into one.") == Pattern::none);
  CHECK(std::string(to_string(Pattern::insertion)) == "insertion");
}

TEST_CASE("harmonic mean") {
  CHECK(harmonic_mean_score(0.5, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(harmonic_mean_score(0.6, 0.3) == doctest::Approx(0.4).epsilon(1e-12));
  CHECK(harmonic_mean_score(0.7, 0.0) == 0.0);
  CHECK(harmonic_mean_score(0.0, 0.0) == 0.0);
  CHECK(error_of([] { harmonic_mean_score(-0.1, 0.5); }) == ErrorCode::PreconditionViolated);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(1e-6, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double a = u(rng), b = u(rng);
    const double h = harmonic_mean_score(a, b);
    CHECK(h == harmonic_mean_score(b, a));
    CHECK(h >= std::min(a, b) - 1e-15);
    CHECK(h <= std::max(a, b) + 1e-15);
    CHECK(h <= (a + b) / 2 + 1e-15);
  }
}

TEST_CASE("mean and population std") {
  const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
  const auto ms = mean_std(v);
  CHECK(ms.mean == doctest::Approx(5.0));
  CHECK(ms.std == doctest::Approx(2.0));
  const auto empty = mean_std(std::vector<double>{});
  CHECK(empty.mean == 0.0);
  CHECK(empty.std == 0.0);
}

TEST_CASE("description aggregation matches hand computation and ignores order") {
  // Word counts 3, 3, 13, 3, 5; patterns copy, split, insertion, copy, none.
  std::vector<DescriptionRecord> records{
      make_description("p1", "ours", 1, "* copy <image2>"),
      make_description("p1", "ours", 2, "* copy entire grid"),
      make_description("p2", "ours", 1, "* Place the cupcakes from image1 into the underwater scene from image2."),
      make_description("p2", "ours", 2, "* copy image1"),
      make_description("p3", "ours", 1, "* Blend both shapes into one"),
      make_description("p3", "other", 1, "* copy <image1>"),
  };
  CHECK(records[2].word_count == 13);
  const auto s = aggregate_descriptions("ours", records, 2);
  CHECK(s.n == 5);
  CHECK(s.excluded == 2);
  const double mean = (3 + 3 + 13 + 3 + 5) / 5.0;
  const double var = ((3 - mean) * (3 - mean) * 3 + (13 - mean) * (13 - mean) +
                      (5 - mean) * (5 - mean)) / 5.0;
  CHECK(records[4].word_count == 5);
  CHECK(s.words.mean == doctest::Approx(mean));
  CHECK(s.words.std == doctest::Approx(std::sqrt(var)));
  CHECK(s.copy_pct == doctest::Approx(40.0));
  CHECK(s.split_pct == doctest::Approx(20.0));
  CHECK(s.insertion_pct == doctest::Approx(20.0));

  std::reverse(records.begin(), records.end());
  const auto r = aggregate_descriptions("ours", records, 2);
  CHECK(r.words.mean == doctest::Approx(s.words.mean));
  CHECK(r.words.std == doctest::Approx(s.words.std));
  CHECK(r.copy_pct == s.copy_pct);

  const auto none = aggregate_descriptions("absent", records);
  CHECK(none.n == 0);
  CHECK(none.copy_pct == 0.0);
}

TEST_CASE("benchmark with a constant judge") {
  TempDir dir;
  ContentStore store(dir.path());
  bridge::MockOptions opts;
  opts.canned_descriptions = {"* copy <image2>"};
  bridge::MockBridge mock(store, opts);
  composer::Composer comp(mock, store, composer::fixed_clock("2024-01-01T00:00:00Z"));
  const std::vector<BenchmarkPair> pairs{
      {"p1", store.import_file(testing::fixture("meadow.png")), store.import_file(testing::fixture("dusk.png"))},
      {"p2", store.import_file(testing::fixture("harbour.png")), store.import_file(testing::fixture("plate.png"))}};
  const std::vector<MethodSpec> methods{ours_method(comp), clip_interp_method(comp)};
  const auto report = run_combination_benchmark(pairs, methods, mock, store);
  CHECK(report.records.size() == 16);
  REQUIRE(report.stats.size() == 2);
  for (const auto& s : report.stats) {
    CHECK(s.n == 8);
    CHECK(s.words.mean == 3.0);
    CHECK(s.words.std == 0.0);
    CHECK(s.copy_pct == 100.0);
  }
  CHECK(report.to_table().find("ours") != std::string::npos);

  const auto empty = run_combination_benchmark({}, methods, mock, store);
  CHECK(empty.records.empty());
  CHECK(empty.stats.size() == 2);
  CHECK(empty.stats[0].n == 0);
}

TEST_CASE("benchmark excludes failed generations and counts them") {
  TempDir dir;
  ContentStore store(dir.path());
  testing::FlakyBridge flaky(store);
  flaky.failing_generate_seeds = {2};
  composer::Composer comp(flaky, store, composer::fixed_clock("2024-01-01T00:00:00Z"));
  const std::vector<BenchmarkPair> pairs{
      {"p1", store.import_file(testing::fixture("meadow.png")), store.import_file(testing::fixture("dusk.png"))}};
  const std::vector<MethodSpec> methods{ours_method(comp)};
  const auto report = run_combination_benchmark(pairs, methods, flaky, store);
  CHECK(report.records.size() == 3);
  CHECK(report.stats[0].n == 3);
  CHECK(report.stats[0].excluded == 1);
  CHECK(report.exclusions.size() == 1);
  CHECK(flaky.judge_calls == 3);
}

TEST_CASE("decomposition scores") {
  const auto one = aggregate_decomp_scores({score_sample("s", 0.55, 0.56, 0.31)});
  CHECK(one.harmonic.mean == doctest::Approx(2 * 0.55 * 0.56 / 1.11).epsilon(1e-12));
  CHECK(one.harmonic.mean == doctest::Approx(0.555).epsilon(1e-3));
  CHECK(one.harmonic.std == 0.0);

  const auto two = aggregate_decomp_scores({score_sample("a", 0.4, 0.6, 0.2), score_sample("b", 0.8, 0.2, 0.5)});
  CHECK(two.sim_a.mean == doctest::Approx(0.6));
  CHECK(two.sim_a.std == doctest::Approx(0.2));
  CHECK(two.sim_ab.mean == doctest::Approx(0.35));
  CHECK(two.harmonic.mean == doctest::Approx((0.48 + 0.32) / 2));

  TempDir dir;
  ContentStore store(dir.path());
  bridge::MockBridge mock(store);
  const ImageRef img = store.import_file(testing::fixture("plate.png"));
  forge::TripletRecord same;
  same.id = "t-same";
  same.comb = img;
  same.a = img;
  same.b = img;
  forge::TripletRecord skipped;
  skipped.status = forge::TripletStatus::skipped_degenerate;
  const std::vector<forge::TripletRecord> triplets{same, skipped};
  const auto report = score_decompositions(triplets, mock);
  REQUIRE(report.samples.size() == 1);
  CHECK(report.samples[0].harmonic == 1.0);
  CHECK(report.not_ok == 1);
  CHECK(report.to_table().find("Harmonic Mean") != std::string::npos);
}

TEST_CASE("user study aggregation") {
  using C = StudyChoice;
  const std::vector<StudyResponse> all_dup{{"u1", "i1", C::near_duplicate}, {"u2", "i2", C::near_duplicate}};
  CHECK(aggregate_user_study(all_dup, {{"i1", 3}, {"i2", 3}}) == std::map<C, double>{{C::near_duplicate, 3.0}});

  const std::vector<StudyResponse> mixed{
      {"u1", "i1", C::insertion}, {"u2", "i2", C::insertion}, {"u1", "i3", C::texture_transfer}};
  const auto m = aggregate_user_study(mixed, {{"i1", 10}, {"i2", 20}, {"i3", 42}});
  CHECK(m.size() == 2);
  CHECK(m.at(C::insertion) == doctest::Approx(15.0));
  CHECK(m.at(C::texture_transfer) == doctest::Approx(42.0));

  CHECK(aggregate_user_study({}, {}).empty());
  CHECK(error_of([&] { aggregate_user_study(mixed, {{"i1", 10}}); }) == ErrorCode::MissingLength);
  CHECK(error_of([] { parse_study_choice("maybe"); }) == ErrorCode::PreconditionViolated);
  CHECK(parse_study_choice("texture_transfer") == C::texture_transfer);

  TempDir dir;
  std::ofstream(dir / "r.json") << R"([{"participant_id":"u1","item_id":"i1","choice":"other"}])";
  std::ofstream(dir / "r.jsonl") << R"({"participant_id":"u1","item_id":"i1","choice":"unrelated"})" << "\n"
                                 << R"({"participant_id":"u2","item_id":"i1","choice":"other"})" << "\n";
  CHECK(read_study_responses(dir / "r.json").size() == 1);
  const auto lines = read_study_responses(dir / "r.jsonl");
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].choice == C::unrelated);
}
