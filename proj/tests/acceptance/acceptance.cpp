// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every check compares library output against an
// independent reference (loop oracles, exhaustive search, golden files or
// hand aggregation) with the tolerances listed next to each criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flaky_bridge.hpp"
#include "seeds/composer.hpp"
#include "seeds/decomposer.hpp"
#include "seeds/error.hpp"
#include "seeds/evalkit.hpp"
#include "seeds/forge.hpp"
#include "seeds/prompts.hpp"
#include "seeds/sae.hpp"
#include "seeds/tuner.hpp"
#include "seeds/workers.hpp"
#include "test_support.hpp"

using namespace seeds;
namespace oracle = seeds::testing::oracle;
using seeds::testing::TempDir;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

std::vector<double> values(const Embedding& e) { return {e.values().begin(), e.values().end()}; }

// ---------------------------------------------------------------------------
// 1. Encode/decode/loss against the loop oracle on a hand-built model.
//    Tolerance 1e-6 absolute, 100 inputs, under 1 s.
Outcome sae_oracle() {
  Outcome o;
  // clang-format off
  const Matrix w_enc(8, 4, {
       0.50, -0.20,  0.10,  0.30,
      -0.40,  0.60,  0.20, -0.10,
       0.10,  0.10, -0.70,  0.50,
       0.30, -0.30,  0.30, -0.30,
      -0.20,  0.40,  0.40,  0.20,
       0.70,  0.00, -0.10, -0.60,
       0.00, -0.50,  0.50,  0.10,
      -0.60, -0.10,  0.00,  0.40});
  const Matrix w_dec(4, 8, {
       0.60, -0.10,  0.20,  0.40, -0.30,  0.50,  0.00, -0.20,
      -0.20,  0.70,  0.10, -0.40,  0.50,  0.10, -0.60,  0.00,
       0.10,  0.30, -0.80,  0.20,  0.40, -0.10,  0.50,  0.10,
       0.30, -0.20,  0.40, -0.30,  0.10, -0.70,  0.10,  0.60});
  // clang-format on
  const sae::SaeModel model(w_enc, {0.05, -0.10, 0.00, 0.10, -0.05, 0.02, 0.00, -0.20}, w_dec,
                            {0.01, -0.02, 0.03, 0.00}, 0.25);
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto a = testing::random_vector(rng, 4);
    const auto h = sae::encode(model, Embedding(a));
    const auto ref_h = oracle::encode(model, a);
    for (std::size_t j = 0; j < 8; ++j) worst = std::max(worst, std::fabs(h[j] - ref_h[j]));
    const auto r = values(sae::decode(model, h));
    const auto ref_r = oracle::decode(model, ref_h);
    for (std::size_t i = 0; i < 4; ++i) worst = std::max(worst, std::fabs(r[i] - ref_r[i]));
    worst = std::max(worst, std::fabs(sae::loss(model, Embedding(a)) - oracle::loss(model, a)));
  }
  o.expect(worst <= 1e-6, "max abs error " + fmt(worst));
  if (o.pass) o.detail = "max abs error " + fmt(worst);
  return o;
}

// ---------------------------------------------------------------------------
// 2. Analytic gradients against central differences of the oracle loss,
//    step 1e-4, relative error (over the whole parameter vector) < 1e-3 on
//    20 random 4-dim instances.
Outcome gradient_check() {
  Outcome o;
  std::mt19937_64 rng(77);
  double worst = 0.0;
  const double step = 1e-4;
  for (int t = 0; t < 20; ++t) {
    const auto model = testing::random_sae(rng, 4, 8, 0.1 + 0.02 * t);
    const auto a = testing::random_vector(rng, 4);
    const auto g = sae::loss_gradient(model, Embedding(a));

    std::vector<double> analytic, numeric;
    auto probe = [&](auto&& nudge) {
      auto eval = [&](double delta) {
        Matrix we = model.w_enc(), wd = model.w_dec();
        std::vector<double> be(model.b_enc().begin(), model.b_enc().end());
        std::vector<double> bd(model.b_dec().begin(), model.b_dec().end());
        nudge(we, be, wd, bd, delta);
        return oracle::loss(sae::SaeModel(we, be, wd, bd, model.sparsity_coeff()), a);
      };
      numeric.push_back((eval(step) - eval(-step)) / (2 * step));
    };
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 4; ++c) {
        analytic.push_back(g.w_enc(r, c));
        probe([&](Matrix& we, auto&, Matrix&, auto&, double d) { we(r, c) += d; });
      }
    for (std::size_t j = 0; j < 8; ++j) {
      analytic.push_back(g.b_enc[j]);
      probe([&](Matrix&, std::vector<double>& be, Matrix&, auto&, double d) { be[j] += d; });
    }
    for (std::size_t r = 0; r < 4; ++r)
      for (std::size_t c = 0; c < 8; ++c) {
        analytic.push_back(g.w_dec(r, c));
        probe([&](Matrix&, auto&, Matrix& wd, auto&, double d) { wd(r, c) += d; });
      }
    for (std::size_t i = 0; i < 4; ++i) {
      analytic.push_back(g.b_dec[i]);
      probe([&](Matrix&, auto&, Matrix&, std::vector<double>& bd, double d) { bd[i] += d; });
    }

    double diff = 0.0, na = 0.0, nn = 0.0;
    for (std::size_t k = 0; k < analytic.size(); ++k) {
      diff += (analytic[k] - numeric[k]) * (analytic[k] - numeric[k]);
      na += analytic[k] * analytic[k];
      nn += numeric[k] * numeric[k];
    }
    const double rel = std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), 1e-12});
    worst = std::max(worst, rel);
  }
  o.expect(worst < 1e-3, "worst relative error " + fmt(worst));
  if (o.pass) o.detail = "worst relative error " + fmt(worst);
  return o;
}

// ---------------------------------------------------------------------------
// 3. Toy recovery: 4-dim, 8 true atoms, 2-sparse codes, 8 features. Mean
//    loss below 10% of initial within 5000 steps and at least 4 of 8 decoder
//    columns with |cos| >= 0.8 against some true atom.
Outcome toy_recovery() {
  Outcome o;
  const std::uint64_t seed = 0;
  const double coeff = 0.03;
  const auto data = sae::make_sparse_dataset(4, 8, 512, 2, seed);
  const auto initial = sae::init_toy_sae(4, 8, coeff, seed);
  const auto model = sae::train_toy_sae(data.samples, 8, coeff, 5000, seed);

  const double l0 = sae::mean_loss(initial, data.samples);
  const double l1 = sae::mean_loss(model, data.samples);
  // Recovery is judged with a plain cosine, independent of best_atom_match.
  std::size_t recovered = 0;
  for (std::size_t j = 0; j < 8; ++j) {
    const auto col = values(model.atom(j));
    double best = 0.0;
    for (const auto& atom : data.atoms) {
      const auto t = values(atom);
      double d = 0.0, nc = 0.0, nt = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        d += col[i] * t[i];
        nc += col[i] * col[i];
        nt += t[i] * t[i];
      }
      best = std::max(best, std::fabs(d) / std::sqrt(nc * nt));
    }
    recovered += best >= 0.8;
  }
  const double ratio = l1 / l0;
  o.expect(ratio < 0.10, "loss ratio " + fmt(ratio));
  o.expect(recovered >= 4, "recovered " + std::to_string(recovered) + "/8 atoms");
  o.detail = "loss ratio " + fmt(ratio) + ", recovered " + std::to_string(recovered) + "/8 atoms";
  return o;
}

// ---------------------------------------------------------------------------
// 4. kmeans2 SSE equals the exhaustive two-partition optimum on 200 random
//    instances of 2..10 points (relative 1e-9).
Outcome kmeans_optimality() {
  Outcome o;
  std::mt19937_64 rng(99);
  std::size_t matched = 0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t count = 2 + static_cast<std::size_t>(t % 9);
    const std::size_t dim = 1 + static_cast<std::size_t>(t % 4);
    std::vector<Embedding> pts;
    std::vector<std::vector<double>> raw;
    for (std::size_t p = 0; p < count; ++p) {
      raw.push_back(testing::random_vector(rng, dim));
      pts.emplace_back(raw.back());
    }
    const double got = decomposer::kmeans2(pts, static_cast<std::uint64_t>(t)).sse;
    const double best = oracle::best_two_partition_sse(raw);
    if (std::fabs(got - best) <= 1e-9 * std::max(1.0, best)) ++matched;
    else o.expect(false, "instance " + std::to_string(t) + ": sse " + fmt(got) + " vs optimum " + fmt(best));
  }
  if (o.pass) o.detail = std::to_string(matched) + "/200 optimal";
  return o;
}

// ---------------------------------------------------------------------------
// 5. Edit identities on 100 random decompositions, renormalisation off:
//    edited_a + edited_b == 2 source (1e-6); swapping labels negates the
//    direction and swaps the outputs; edit_step 0 is the identity.
Outcome edit_identities() {
  Outcome o;
  std::mt19937_64 rng(5);
  int done = 0;
  double worst = 0.0;
  for (int attempt = 0; done < 100 && attempt < 1000; ++attempt) {
    const auto model = testing::random_sae(rng, 8, 24, 0.0);
    const Embedding src(testing::random_vector(rng, 8));
    decomposer::DecomposeParams p;
    p.top_k = 4 + static_cast<std::size_t>(attempt % 12);
    p.edit_step = decomposer::kEditStepPresets[static_cast<std::size_t>(attempt) % 2];
    p.renormalize = false;
    p.rng_seed = static_cast<std::uint64_t>(attempt);
    decomposer::Decomposition d;
    try {
      d = decomposer::decompose(model, src, p);
    } catch (const Error&) {
      continue;  // non-decomposable draw; only successful runs count
    }
    ++done;
    for (std::size_t i = 0; i < 8; ++i) worst = std::max(worst, std::fabs(d.edited_a[i] + d.edited_b[i] - 2 * src[i]));

    const auto swapped = decomposer::swap_labels(d.split);
    const Embedding neg = decomposer::editing_direction(swapped);
    for (std::size_t i = 0; i < 8; ++i) o.expect(neg[i] == -d.direction[i], "swap does not negate the direction");
    const auto [sa, sb] = decomposer::apply_edit(src, neg, p.edit_step, false);
    o.expect(sa == d.edited_b && sb == d.edited_a, "swap does not exchange the outputs");

    const auto [za, zb] = decomposer::apply_edit(src, d.direction, 0.0, false);
    o.expect(za == src && zb == src, "edit_step 0 is not the identity");
  }
  o.expect(done == 100, "only " + std::to_string(done) + " decompositions succeeded");
  o.expect(worst <= 1e-6, "sum identity error " + fmt(worst));
  if (o.pass) o.detail = std::to_string(done) + " decompositions, max sum error " + fmt(worst);
  return o;
}

// ---------------------------------------------------------------------------
// 6. Canvas: quadrant pixels, golden bytes and the recorded resize filter.
Outcome canvas_exactness() {
  Outcome o;
  TempDir dir;
  ContentStore store(dir.path());
  const auto meadow = store.import_file(testing::fixture("meadow.png"));
  const auto dusk = store.import_file(testing::fixture("dusk.png"));
  const auto ref = forge::compose_canvas(meadow, dusk, store);
  const Image c = store.load(ref);
  o.expect(c.width() == 1024 && c.height() == 1024, "canvas is not 1024x1024");

  const Image ta = resize_bilinear(store.load(meadow), 512, 512);
  const Image tb = resize_bilinear(store.load(dusk), 512, 512);
  bool quadrants = true;
  for (int y = 0; y < 1024 && quadrants; ++y)
    for (int x = 0; x < 1024; ++x) {
      Rgb expected = kWhite;
      if (x < 512 && y < 512) expected = ta.at(x, y);
      if (x >= 512 && y >= 512) expected = tb.at(x - 512, y - 512);
      if (c.at(x, y) != expected) {
        quadrants = false;
        break;
      }
    }
  o.expect(quadrants, "quadrant pixels differ");

  // The tiles themselves agree with a float bilinear reference to within
  // rounding.
  const auto ref_a = oracle::bilinear(store.load(meadow), 512, 512);
  double worst = 0.0;
  for (std::size_t i = 0; i < ref_a.size(); ++i) worst = std::max(worst, std::fabs(ref_a[i] - ta.pixels()[i]));
  o.expect(worst <= 1.0, "tile differs from the float reference by " + fmt(worst));

  const auto golden = read_file_bytes(testing::data_dir() / "golden" / "canvas_meadow_dusk.png");
  o.expect(store.read_bytes(ref) == golden, "canvas bytes differ from the golden PNG");
  o.expect(forge::CanvasLayout::to_json().at("resize_filter") == "bilinear", "resize filter not recorded in layout");
  o.expect(forge::TripletRecord{}.resize_filter == "bilinear", "resize filter not recorded in triplets");
  o.expect(tuner::to_json(tuner::TrainConfig{}).at("canvas").at("resize_filter") == "bilinear",
           "resize filter not recorded in the training config");
  if (o.pass) o.detail = "golden match, tile error vs float reference " + fmt(worst);
  return o;
}

// ---------------------------------------------------------------------------
// 7. Metric fixtures and the harmonic-mean bounds.
Outcome metric_fixtures() {
  Outcome o;
  using evalkit::Pattern;
  o.expect(evalkit::count_words("* copy entire grid") == 3, "count_words(copy entire grid) != 3");
  o.expect(evalkit::count_words("* copy <image2>") == 3, "count_words(copy <image2>) != 3");
  o.expect(evalkit::classify_pattern("* copy <image2>") == Pattern::copy, "copy phrasing not classified as copy");
  o.expect(evalkit::classify_pattern("* copy entire grid") == Pattern::split, "grid phrasing not classified as split");
  o.expect(evalkit::classify_pattern("* Place the cupcakes from image1 into the underwater scene from image2.") ==
               Pattern::insertion,
           "placement phrasing not classified as insertion");
  o.expect(std::fabs(evalkit::harmonic_mean_score(0.5, 0.5) - 0.5) <= 1e-9, "HM(0.5, 0.5) != 0.5");
  o.expect(std::fabs(evalkit::harmonic_mean_score(0.6, 0.3) - 0.4) <= 1e-9, "HM(0.6, 0.3) != 0.4");
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> u(1e-9, 1.0);
  int bounded = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a = u(rng), b = u(rng);
    const double h = evalkit::harmonic_mean_score(a, b);
    if (h >= std::min(a, b) && h <= std::max(a, b)) ++bounded;
  }
  o.expect(bounded == 1000, std::to_string(1000 - bounded) + " pairs outside [min, max]");
  if (o.pass) o.detail = "fixtures exact, 1000/1000 pairs bounded";
  return o;
}

// ---------------------------------------------------------------------------
// 8. Training config defaults, fixed prompt and golden file.
Outcome config_fidelity() {
  Outcome o;
  const auto c = tuner::emit_config();
  o.expect(c.lora_rank_linear == 32 && c.lora_rank_conv == 16, "LoRA ranks differ");
  o.expect(c.learning_rate == 1e-4, "learning rate differs");
  o.expect(c.batch_size == 1, "batch size differs");
  o.expect(c.steps == 15000, "step count differs");
  const std::string prompt =
      "Combine the element in the top left with the element in the bottom right to create a single object inspired "
      "by both of them.";
  o.expect(c.fixed_prompt == prompt, "fixed prompt differs");
  o.expect(prompts::combination_prompt() == prompt, "embedded prompt asset differs");
  std::ifstream in(testing::data_dir() / "train_config.golden.json");
  const auto golden = nlohmann::json::parse(in);
  o.expect(tuner::to_json(c) == golden, "emitted config differs from the golden file");
  if (o.pass) o.detail = "defaults and golden file match";
  return o;
}

// ---------------------------------------------------------------------------
// 9. End-to-end mock pipeline, twice, with a stub judge.

// Stub judge replies with hand-counted words and hand-assigned patterns.
struct StubReply {
  const char* text;
  std::size_t words;
  evalkit::Pattern pattern;
};

const std::vector<StubReply> kStubReplies = {
    {"* copy <image2>", 3, evalkit::Pattern::copy},
    {"* copy entire grid", 3, evalkit::Pattern::split},
    {"* Place the lamp from image1 into the room from image2.", 12, evalkit::Pattern::insertion},
    {"* Keep the outline of image1.\n* Apply the glossy texture of image2.", 13, evalkit::Pattern::none},
    {"* Merge both shapes into one smooth form.", 7, evalkit::Pattern::none},
};

struct PipelineRun {
  std::map<std::string, std::vector<std::uint8_t>> manifests;
  evalkit::BenchmarkReport report;
};

PipelineRun run_pipeline(const std::filesystem::path& root) {
  ContentStore store(root);
  bridge::MockOptions opts;
  for (const auto& r : kStubReplies) opts.canned_descriptions.emplace_back(r.text);
  bridge::MockBridge mock(store, opts);

  forge::PoolSpec spec;
  spec.templated.push_back({"a {color} {object} on a table", {{"color", {"amber", "cobalt"}}, {"object", {"vase"}}}});
  spec.generator_seeds = {0, 1};
  {
    ManifestWriter w(store.manifest_path("pool"), forge::kPoolSchema, forge::kPoolVersion);
    const auto pool = forge::build_pool(spec, mock, &w);
    require(pool.entries.size() == 4, ErrorCode::PreconditionViolated, "pool did not produce 4 images");
  }
  const auto pool = forge::read_pool(store.manifest_path("pool"));
  std::vector<ImageRef> images;
  for (const auto& e : pool) images.push_back(e.image);

  const auto model = sae::init_toy_sae(16, 64, 0.0, 3);
  forge::MintOptions mint;
  mint.base.top_k = 16;
  mint.sampling_seed = 11;
  {
    ManifestWriter w(store.manifest_path("triplets"), forge::kTripletSchema, forge::kTripletVersion);
    forge::mint_dataset(images, model, mint, mock, &w);
  }
  {
    ManifestWriter w(store.manifest_path("canvases"), "seeds.canvases", 1);
    for (const auto& t : forge::read_triplets(store.manifest_path("triplets")))
      if (t.status == forge::TripletStatus::ok)
        w.append({{"triplet", t.id}, {"canvas", forge::compose_canvas(*t.a, *t.b, store)}});
  }

  composer::Composer comp(mock, store, composer::fixed_clock("2024-01-01T00:00:00Z"));
  {
    ManifestWriter w(store.manifest_path("jobs"), composer::kJobSchema, composer::kJobVersion);
    composer::JobQueue queue(comp, 2, &w);
    queue.submit(composer::JobKind::combine, images[0], images[2], composer::kDefaultSeeds);
    queue.submit(composer::JobKind::combine, images[1], images[3], composer::kDefaultSeeds);
    queue.shutdown();
  }

  std::vector<evalkit::BenchmarkPair> pairs{{"p0", images[0], images[2]}, {"p1", images[1], images[3]}};
  const std::vector<evalkit::MethodSpec> methods{evalkit::ours_method(comp), evalkit::clip_interp_method(comp)};
  PipelineRun run;
  run.report = evalkit::run_combination_benchmark(pairs, methods, mock, store);
  {
    ManifestWriter w(store.manifest_path("descriptions"), evalkit::kDescriptionSchema, evalkit::kDescriptionVersion);
    for (const auto& r : run.report.records) w.append(evalkit::to_json(r));
  }
  for (const char* name : {"pool", "triplets", "canvases", "jobs", "descriptions"})
    run.manifests[name] = read_file_bytes(store.manifest_path(name));
  return run;
}

Outcome end_to_end() {
  Outcome o;
  TempDir d1, d2;
  const auto first = run_pipeline(d1.path());
  const auto second = run_pipeline(d2.path());
  for (const auto& [name, bytes] : first.manifests)
    o.expect(second.manifests.at(name) == bytes, "manifest '" + name + "' differs between runs");
  o.expect(first.report.to_json() == second.report.to_json(), "reports differ between runs");
  o.expect(first.report.records.size() == 16, std::to_string(first.report.records.size()) + " descriptions, want 16");

  // Hand aggregation from the stub table, independent of evalkit.
  for (const auto& stats : first.report.stats) {
    std::vector<double> words;
    double copy = 0, insertion = 0, split = 0;
    for (const auto& r : first.report.records) {
      if (r.method != stats.method) continue;
      const StubReply* reply = nullptr;
      for (const auto& s : kStubReplies)
        if (r.text == s.text) reply = &s;
      if (reply == nullptr) {
        o.expect(false, "judge text not from the stub table");
        continue;
      }
      words.push_back(static_cast<double>(reply->words));
      copy += reply->pattern == evalkit::Pattern::copy;
      insertion += reply->pattern == evalkit::Pattern::insertion;
      split += reply->pattern == evalkit::Pattern::split;
    }
    const double n = static_cast<double>(words.size());
    double mean = 0.0, var = 0.0;
    for (double w : words) mean += w / n;
    for (double w : words) var += (w - mean) * (w - mean) / n;
    o.expect(stats.n == words.size() && words.size() == 8, "method " + stats.method + " has " + std::to_string(stats.n) + " items");
    o.expect(std::fabs(stats.words.mean - mean) <= 1e-9, stats.method + " mean words " + fmt(stats.words.mean) + " vs " + fmt(mean));
    o.expect(std::fabs(stats.words.std - std::sqrt(var)) <= 1e-9, stats.method + " std words differs");
    o.expect(std::fabs(stats.copy_pct - 100.0 * copy / n) <= 1e-9, stats.method + " copy % differs");
    o.expect(std::fabs(stats.insertion_pct - 100.0 * insertion / n) <= 1e-9, stats.method + " insertion % differs");
    o.expect(std::fabs(stats.split_pct - 100.0 * split / n) <= 1e-9, stats.method + " split % differs");
  }
  if (o.pass) o.detail = "2 identical runs, 5 manifests, report matches hand aggregation";
  return o;
}

// ---------------------------------------------------------------------------
// 10. Mock smoke training: strictly decreasing loss over 10 steps on two
//     fixture triplets; identical trace on a rerun.
std::vector<double> smoke_trace(const std::filesystem::path& root) {
  ContentStore store(root);
  bridge::MockBridge mock(store);
  std::vector<ImageRef> refs{store.import_file(testing::fixture("meadow.png")),
                             store.import_file(testing::fixture("tabletop.jpg"))};
  forge::MintOptions mint;
  mint.base.top_k = 16;
  const auto triplets = forge::mint_dataset(refs, sae::init_toy_sae(16, 64, 0.0, 1), mint, mock);
  const auto samples = tuner::load_samples(triplets, store);
  require(samples.size() == 2, ErrorCode::EmptyDataset, "expected 2 ok fixture triplets");
  tuner::MockBackend backend;
  const auto report = tuner::smoke_train(tuner::TrainConfig{}, backend, 10, samples);
  std::vector<double> trace{report.initial_loss};
  trace.insert(trace.end(), report.losses.begin(), report.losses.end());
  return trace;
}

Outcome smoke_train() {
  Outcome o;
  TempDir d1, d2;
  const auto t1 = smoke_trace(d1.path());
  const auto t2 = smoke_trace(d2.path());
  o.expect(t1.size() == 11, "ran " + std::to_string(t1.size() - 1) + " steps");
  for (std::size_t i = 1; i < t1.size(); ++i)
    o.expect(t1[i] < t1[i - 1], "loss did not decrease at step " + std::to_string(i));
  o.expect(t1 == t2, "traces differ between reruns");
  if (o.pass) o.detail = "loss " + fmt(t1.front()) + " -> " + fmt(t1.back()) + ", reruns identical";
  return o;
}

struct Criterion {
  int number;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  warnings_enabled() = false;
  const std::vector<Criterion> criteria = {
      {1, "SAE oracle equivalence", 1.0, sae_oracle},
      {2, "gradient check", 10.0, gradient_check},
      {3, "toy SAE recovery", 60.0, toy_recovery},
      {4, "k-means optimality", 30.0, kmeans_optimality},
      {5, "edit identities", 5.0, edit_identities},
      {6, "canvas bit-exactness", 5.0, canvas_exactness},
      {7, "metric fixtures", 1.0, metric_fixtures},
      {8, "config fidelity", 1.0, config_fidelity},
      {9, "end-to-end mock pipeline", 60.0, end_to_end},
      {10, "smoke train", 10.0, smoke_train},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_seconds) {
      o.pass = false;
      o.detail += " (over the " + fmt(c.budget_seconds) + " s budget)";
    }
    failures += !o.pass;
    std::printf("[%s] %2d %-26s %6.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.number, c.name, secs, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
