#include <cstdio>
#include <optional>
#include <sstream>

#include "seeds/error.hpp"
#include "seeds/evalkit.hpp"
#include "seeds/workers.hpp"

namespace seeds::evalkit {

namespace {

Pattern parse_pattern(const std::string& s) {
  if (s == "copy") return Pattern::copy;
  if (s == "insertion") return Pattern::insertion;
  if (s == "split") return Pattern::split;
  if (s == "none") return Pattern::none;
  fail(ErrorCode::CorruptLine, "unknown pattern " + s);
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pm(const MeanStd& m, int digits) { return fixed(m.mean, digits) + " +/- " + fixed(m.std, digits); }

nlohmann::json json_of(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

// Left-aligned first column, right-aligned others.
std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return {};
  std::vector<std::size_t> width(rows[0].size(), 0);
  for (const auto& r : rows)
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      const std::string& cell = rows[i][c];
      const std::string pad(width[c] - cell.size(), ' ');
      if (c > 0) out << "  ";
      out << (c == 0 ? cell + pad : pad + cell);
    }
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace

nlohmann::json to_json(const BenchmarkPair& p) { return {{"pair_id", p.pair_id}, {"a", p.a}, {"b", p.b}}; }

BenchmarkPair pair_from_json(const nlohmann::json& j) {
  return {j.at("pair_id").get<std::string>(), j.at("a").get<ImageRef>(), j.at("b").get<ImageRef>()};
}

std::vector<BenchmarkPair> read_pairs(const std::filesystem::path& path) {
  const auto read = read_manifest(path, kPairSchema, kPairVersion, [](const nlohmann::json& j) { pair_from_json(j); });
  for (const auto& w : read.warnings) log_warning(w);
  std::vector<BenchmarkPair> out;
  for (const auto& j : read.records) out.push_back(pair_from_json(j));
  return out;
}

DescriptionRecord make_description(std::string pair_id, std::string method, std::int64_t seed, std::string text) {
  DescriptionRecord r;
  r.pair_id = std::move(pair_id);
  r.method = std::move(method);
  r.seed = seed;
  r.word_count = count_words(text);
  r.pattern = classify_pattern(text);
  r.text = std::move(text);
  return r;
}

nlohmann::json to_json(const DescriptionRecord& r) {
  return {{"pair_id", r.pair_id}, {"method", r.method},         {"seed", r.seed},
          {"text", r.text},       {"word_count", r.word_count}, {"pattern", to_string(r.pattern)}};
}

DescriptionRecord description_from_json(const nlohmann::json& j) {
  DescriptionRecord r = make_description(j.at("pair_id").get<std::string>(), j.at("method").get<std::string>(),
                                         j.at("seed").get<std::int64_t>(), j.at("text").get<std::string>());
  require(j.at("word_count").get<std::size_t>() == r.word_count && parse_pattern(j.at("pattern")) == r.pattern,
          ErrorCode::CorruptLine, "description record disagrees with its text");
  return r;
}

MethodSpec ours_method(composer::Composer& composer) {
  return {"ours", bridge::JudgeTemplate::grid_input,
          [&composer](const BenchmarkPair& p, std::span<const std::int64_t> seeds) {
            return composer.combine(p.a, p.b, {seeds.begin(), seeds.end()}).results;
          }};
}

MethodSpec clip_interp_method(composer::Composer& composer) {
  return {"clip_interp", bridge::JudgeTemplate::two_input,
          [&composer](const BenchmarkPair& p, std::span<const std::int64_t> seeds) {
            return composer.clip_interpolation_baseline(p.a, p.b, {seeds.begin(), seeds.end()}).results;
          }};
}

nlohmann::json MethodStats::to_json() const {
  return {{"method", method},
          {"n", n},
          {"excluded", excluded},
          {"word_count", json_of(words)},
          {"copy_pct", copy_pct},
          {"insertion_pct", insertion_pct},
          {"split_pct", split_pct}};
}

MethodStats aggregate_descriptions(const std::string& method, std::span<const DescriptionRecord> records,
                                   std::size_t excluded) {
  MethodStats s;
  s.method = method;
  s.excluded = excluded;
  std::vector<double> words;
  std::size_t copy = 0, insertion = 0, split = 0;
  for (const auto& r : records) {
    if (r.method != method) continue;
    words.push_back(static_cast<double>(r.word_count));
    copy += r.pattern == Pattern::copy;
    insertion += r.pattern == Pattern::insertion;
    split += r.pattern == Pattern::split;
  }
  s.n = words.size();
  s.words = mean_std(words);
  if (s.n > 0) {
    const double n = static_cast<double>(s.n);
    s.copy_pct = 100.0 * static_cast<double>(copy) / n;
    s.insertion_pct = 100.0 * static_cast<double>(insertion) / n;
    s.split_pct = 100.0 * static_cast<double>(split) / n;
  }
  return s;
}

nlohmann::json BenchmarkReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : stats) rows.push_back(s.to_json());
  return {{"methods", rows}, {"exclusions", exclusions}};
}

std::string BenchmarkReport::to_table() const {
  std::vector<std::vector<std::string>> rows = {{"Method", "Word Count", "Copy %", "Insertion %", "Split %", "n", "excluded"}};
  for (const auto& s : stats)
    rows.push_back({s.method, pm(s.words, 1), fixed(s.copy_pct, 1), fixed(s.insertion_pct, 1), fixed(s.split_pct, 1),
                    std::to_string(s.n), std::to_string(s.excluded)});
  return render_table(rows);
}

BenchmarkReport run_combination_benchmark(std::span<const BenchmarkPair> pairs, std::span<const MethodSpec> methods,
                                          bridge::Bridge& bridge, ContentStore& store,
                                          const BenchmarkOptions& options) {
  composer::validate_seeds(options.seeds);
  BenchmarkReport report;
  std::vector<std::size_t> excluded(methods.size(), 0);

  // Generation runs in (method, pair) order; judge calls fan out afterwards.
  struct Item {
    std::size_t method;
    const BenchmarkPair* pair;
    std::int64_t seed;
    ImageRef output;
  };
  std::vector<Item> items;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (const auto& pair : pairs) {
      std::vector<ImageRef> outputs;
      try {
        outputs = methods[m].generate(pair, options.seeds);
      } catch (const Error& e) {
        report.exclusions.push_back(methods[m].name + "/" + pair.pair_id + ": generation failed: " + e.what());
      }
      for (std::size_t s = 0; s < options.seeds.size(); ++s) {
        if (s < outputs.size()) {
          items.push_back({m, &pair, options.seeds[s], outputs[s]});
        } else {
          ++excluded[m];
          report.exclusions.push_back(methods[m].name + "/" + pair.pair_id + "/seed " +
                                      std::to_string(options.seeds[s]) + ": no output");
        }
      }
    }
  }

  std::vector<std::optional<DescriptionRecord>> described(items.size());
  std::vector<std::string> errors(items.size());
  run_bounded(items.size(), options.workers, [&](std::size_t i) {
    const Item& it = items[i];
    const MethodSpec& method = methods[it.method];
    try {
      std::vector<ImageRef> inputs;
      if (method.judge == bridge::JudgeTemplate::grid_input) inputs.push_back(forge::compose_canvas(it.pair->a, it.pair->b, store));
      else inputs = {it.pair->a, it.pair->b};
      described[i] = make_description(it.pair->pair_id, method.name, it.seed,
                                      bridge.describe_reconstruction(inputs, it.output, method.judge));
    } catch (const Error& e) {
      errors[i] = method.name + "/" + it.pair->pair_id + "/seed " + std::to_string(it.seed) + ": judge failed: " + e.what();
    }
  });

  for (std::size_t i = 0; i < items.size(); ++i) {
    if (described[i]) {
      report.records.push_back(std::move(*described[i]));
    } else {
      ++excluded[items[i].method];
      report.exclusions.push_back(errors[i]);
    }
  }
  for (std::size_t m = 0; m < methods.size(); ++m)
    report.stats.push_back(aggregate_descriptions(methods[m].name, report.records, excluded[m]));
  return report;
}

// ---------------------------------------------------------------------------

DecompScore score_sample(std::string sample_id, double sim_a, double sim_b, double sim_ab) {
  return {std::move(sample_id), sim_a, sim_b, sim_ab, harmonic_mean_score(sim_a, sim_b)};
}

DecompReport aggregate_decomp_scores(std::vector<DecompScore> samples) {
  DecompReport r;
  std::vector<double> a, b, ab, h;
  for (const auto& s : samples) {
    a.push_back(s.sim_a);
    b.push_back(s.sim_b);
    ab.push_back(s.sim_ab);
    h.push_back(s.harmonic);
  }
  r.sim_a = mean_std(a);
  r.sim_b = mean_std(b);
  r.sim_ab = mean_std(ab);
  r.harmonic = mean_std(h);
  r.samples = std::move(samples);
  return r;
}

nlohmann::json DecompReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : samples)
    rows.push_back({{"sample_id", s.sample_id}, {"sim_a", s.sim_a}, {"sim_b", s.sim_b}, {"sim_ab", s.sim_ab},
                    {"harmonic", s.harmonic}});
  return {{"samples", rows},       {"sim_a", json_of(sim_a)},   {"sim_b", json_of(sim_b)},
          {"sim_ab", json_of(sim_ab)}, {"harmonic", json_of(harmonic)}, {"excluded", excluded},
          {"not_ok", not_ok},      {"exclusions", exclusions}};
}

std::string DecompReport::to_table() const {
  return render_table({{"n", "Comp1-Input", "Comp2-Input", "Comp1-Comp2", "Harmonic Mean", "excluded"},
                       {std::to_string(samples.size()), pm(sim_a, 2), pm(sim_b, 2), pm(sim_ab, 2), pm(harmonic, 2),
                        std::to_string(excluded)}});
}

DecompReport score_decompositions(std::span<const forge::TripletRecord> triplets, bridge::Bridge& bridge,
                                  std::size_t workers) {
  std::vector<const forge::TripletRecord*> ok;
  std::size_t not_ok = 0;
  for (const auto& t : triplets) {
    if (t.status == forge::TripletStatus::ok) ok.push_back(&t);
    else ++not_ok;
  }
  std::vector<std::optional<DecompScore>> scores(ok.size());
  std::vector<std::string> errors(ok.size());
  run_bounded(ok.size(), workers, [&](std::size_t i) {
    const auto& t = *ok[i];
    try {
      scores[i] = score_sample(t.id, bridge.perceptual_similarity(*t.a, t.comb), bridge.perceptual_similarity(*t.b, t.comb),
                               bridge.perceptual_similarity(*t.a, *t.b));
    } catch (const Error& e) {
      errors[i] = t.id + ": " + e.what();
    }
  });
  std::vector<DecompScore> kept;
  std::vector<std::string> exclusions;
  for (std::size_t i = 0; i < ok.size(); ++i) {
    if (scores[i]) kept.push_back(std::move(*scores[i]));
    else exclusions.push_back(errors[i]);
  }
  DecompReport report = aggregate_decomp_scores(std::move(kept));
  report.excluded = exclusions.size();
  report.exclusions = std::move(exclusions);
  report.not_ok = not_ok;
  return report;
}

}  // namespace seeds::evalkit
