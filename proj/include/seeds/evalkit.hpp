#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "seeds/bridge.hpp"
#include "seeds/composer.hpp"
#include "seeds/forge.hpp"
#include "seeds/store.hpp"

namespace seeds::evalkit {

// ---------------------------------------------------------------------------
// Description metrics
// ---------------------------------------------------------------------------

// Words are maximal runs of letters or maximal runs of ASCII digits, so
// "image2" is two words. Bullet markers, angle brackets (ASCII or U+27E8/9)
// and punctuation separate words. Non-ASCII code points count as letters
// unless they sit in a punctuation or symbol block.
std::size_t count_words(std::string_view text);

enum class Pattern { copy, insertion, split, none };
const char* to_string(Pattern p);

// Rules over normalised bullets, precedence split > copy > insertion > none:
//   split      a bullet says "copy entire grid" or places both inputs side by
//              side / in a grid
//   copy       the only substantive bullet is "copy <imageN>"
//   insertion  a bullet moves something from one image into/onto another
//              (place/insert/paste/put/extract/add) and no bullet transforms
//              (apply/blend/texture/transform/merge)
Pattern classify_pattern(std::string_view text);

// Bullet lines with markers and surrounding whitespace removed; blank
// lines dropped.
std::vector<std::string> bullets(std::string_view text);

// 2ab / (a + b); 0 when either is 0. Negative inputs are
// PreconditionViolated.
double harmonic_mean_score(double sim_a, double sim_b);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};
MeanStd mean_std(std::span<const double> values);

// ---------------------------------------------------------------------------
// Combination benchmark
// ---------------------------------------------------------------------------

struct BenchmarkPair {
  std::string pair_id;
  ImageRef a;
  ImageRef b;
};

inline constexpr const char* kPairSchema = "seeds.pairs";
inline constexpr int kPairVersion = 1;
nlohmann::json to_json(const BenchmarkPair& p);
BenchmarkPair pair_from_json(const nlohmann::json& j);
std::vector<BenchmarkPair> read_pairs(const std::filesystem::path& path);

struct DescriptionRecord {
  std::string pair_id;
  std::string method;
  std::int64_t seed = 0;
  std::string text;
  std::size_t word_count = 0;
  Pattern pattern = Pattern::none;

  bool operator==(const DescriptionRecord&) const = default;
};

DescriptionRecord make_description(std::string pair_id, std::string method, std::int64_t seed, std::string text);
inline constexpr const char* kDescriptionSchema = "seeds.descriptions";
inline constexpr int kDescriptionVersion = 1;
nlohmann::json to_json(const DescriptionRecord& r);
DescriptionRecord description_from_json(const nlohmann::json& j);

// How one method turns a pair into outputs, and which judge template reads
// them: grid_input for methods conditioned on the canvas, two_input for
// methods that take the pair directly.
struct MethodSpec {
  std::string name;
  bridge::JudgeTemplate judge = bridge::JudgeTemplate::two_input;
  // One output per seed in seed order; fewer outputs mean the missing seeds
  // failed.
  std::function<std::vector<ImageRef>(const BenchmarkPair&, std::span<const std::int64_t>)> generate;
};

MethodSpec ours_method(composer::Composer& composer);
MethodSpec clip_interp_method(composer::Composer& composer);

struct MethodStats {
  std::string method;
  std::size_t n = 0;
  std::size_t excluded = 0;
  MeanStd words;
  double copy_pct = 0.0;
  double insertion_pct = 0.0;
  double split_pct = 0.0;

  nlohmann::json to_json() const;
};

// Stats over the records whose method matches; `excluded` is carried through.
MethodStats aggregate_descriptions(const std::string& method, std::span<const DescriptionRecord> records,
                                   std::size_t excluded = 0);

struct BenchmarkReport {
  std::vector<DescriptionRecord> records;
  std::vector<MethodStats> stats;  // one per method, in method order
  std::vector<std::string> exclusions;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

struct BenchmarkOptions {
  std::vector<std::int64_t> seeds = composer::kDefaultSeeds;
  std::size_t workers = 4;  // concurrent judge calls
};

// Generates every (pair, method, seed) output and asks the judge to
// describe it. Generation or judge failures exclude the item and are
// counted, never imputed.
BenchmarkReport run_combination_benchmark(std::span<const BenchmarkPair> pairs, std::span<const MethodSpec> methods,
                                          bridge::Bridge& bridge, ContentStore& store,
                                          const BenchmarkOptions& options = {});

// ---------------------------------------------------------------------------
// Decomposition quality
// ---------------------------------------------------------------------------

struct DecompScore {
  std::string sample_id;
  double sim_a = 0.0;   // component A vs input
  double sim_b = 0.0;   // component B vs input
  double sim_ab = 0.0;  // A vs B
  double harmonic = 0.0;
};

struct DecompReport {
  std::vector<DecompScore> samples;
  MeanStd sim_a, sim_b, sim_ab, harmonic;
  std::size_t excluded = 0;
  std::size_t not_ok = 0;
  std::vector<std::string> exclusions;

  nlohmann::json to_json() const;
  std::string to_table() const;
};

DecompScore score_sample(std::string sample_id, double sim_a, double sim_b, double sim_ab);
DecompReport aggregate_decomp_scores(std::vector<DecompScore> samples);

// Scores ok triplets with the bridge's perceptual similarity; other
// statuses are counted in not_ok.
DecompReport score_decompositions(std::span<const forge::TripletRecord> triplets, bridge::Bridge& bridge,
                                  std::size_t workers = 4);

// ---------------------------------------------------------------------------
// User study
// ---------------------------------------------------------------------------

enum class StudyChoice { near_duplicate, insertion, texture_transfer, other, unrelated };
const char* to_string(StudyChoice c);
StudyChoice parse_study_choice(const std::string& s);  // PreconditionViolated if unknown

struct StudyResponse {
  std::string participant_id;
  std::string item_id;
  StudyChoice choice = StudyChoice::other;
};

StudyResponse study_response_from_json(const nlohmann::json& j);

// Accepts a JSON array or JSON lines of {participant_id, item_id, choice}.
std::vector<StudyResponse> read_study_responses(const std::filesystem::path& path);

// Mean description length per chosen option; options nobody chose are
// omitted. A response whose item has no length is MissingLength.
std::map<StudyChoice, double> aggregate_user_study(std::span<const StudyResponse> responses,
                                                   const std::map<std::string, double>& lengths);

}  // namespace seeds::evalkit
