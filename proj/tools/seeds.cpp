// seeds: command-line front end for the decomposition / dataset / combination
// / evaluation pipeline and the exploration server.

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seeds/bridge.hpp"
#include "seeds/composer.hpp"
#include "seeds/decomposer.hpp"
#include "seeds/error.hpp"
#include "seeds/evalkit.hpp"
#include "seeds/forge.hpp"
#include "seeds/gateway.hpp"
#include "seeds/sae.hpp"
#include "seeds/store.hpp"
#include "seeds/tuner.hpp"

namespace {

using nlohmann::json;
using namespace seeds;

struct Globals {
  std::string config_path;
  bool mock = false;
  std::optional<std::string> store_flag;
};

// Store and bridge are created on first use so that commands which need
// neither (train-config emit, sae inspect) work anywhere.
class Context {
 public:
  explicit Context(const Globals& g) : globals_(g) {}

  ContentStore& store() {
    if (!store_) store_ = std::make_unique<ContentStore>(ContentStore::resolve_root(globals_.store_flag));
    return *store_;
  }

  bridge::BridgeConfig bridge_config() const {
    bridge::BridgeConfig config;
    if (!globals_.config_path.empty()) config = bridge::BridgeConfig::load(globals_.config_path);
    if (globals_.mock) config.mock_mode = true;
    return config;
  }

  bridge::Bridge& bridge() {
    if (!bridge_) bridge_ = bridge::make_bridge(bridge_config(), store());
    return *bridge_;
  }

  // A bare name refers to <store>/manifests/<name>.jsonl; anything that
  // looks like a path is used as given.
  std::filesystem::path manifest(const std::string& arg) {
    if (arg.find('/') != std::string::npos || arg.ends_with(".jsonl")) return arg;
    return store().manifest_path(arg);
  }

  // A store id, or a PNG/JPEG file that is imported into the store.
  ImageRef image(const std::string& arg) {
    if (auto ref = store().find(arg)) return *ref;
    require(std::filesystem::is_regular_file(arg), ErrorCode::NotFound, "no stored image or file named " + arg);
    return store().import_file(arg);
  }

 private:
  const Globals& globals_;
  std::unique_ptr<ContentStore> store_;
  std::unique_ptr<bridge::Bridge> bridge_;
};

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

struct ParamFlags {
  std::size_t top_k = decomposer::DecomposeParams{}.top_k;
  double edit_step = decomposer::DecomposeParams{}.edit_step;
  double keep_fraction = decomposer::DecomposeParams{}.keep_fraction;
  bool no_renormalize = false;
  std::uint64_t kmeans_seed = 0;

  void add(CLI::App* cmd, bool with_step) {
    cmd->add_option("--top-k", top_k, "Number of top activated atoms")->capture_default_str();
    if (with_step) cmd->add_option("--edit-step", edit_step, "Edit step along the direction")->capture_default_str();
    cmd->add_option("--keep-fraction", keep_fraction, "Fraction kept per cluster by the boundary filter")
        ->capture_default_str();
    cmd->add_flag("--no-renormalize", no_renormalize, "Do not rescale edits to the source norm");
    cmd->add_option("--kmeans-seed", kmeans_seed, "Seed for k-means restarts")->capture_default_str();
  }

  decomposer::DecomposeParams params() const {
    decomposer::DecomposeParams p;
    p.top_k = top_k;
    p.edit_step = edit_step;
    p.keep_fraction = keep_fraction;
    p.renormalize = !no_renormalize;
    p.rng_seed = kmeans_seed;
    return p;
  }
};

json job_summary(const composer::CombinationJob& job) { return composer::to_json(job); }

std::vector<double> values_of(const Embedding& e) { return {e.values().begin(), e.values().end()}; }

int run_serve(Context& ctx, const std::string& host, int port, const std::string& seed_dir, std::size_t concurrency) {
  // Block the shutdown signals before any thread starts so only sigwait
  // sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  gateway::Service service(ctx.store(), ctx.bridge(), {host, port, concurrency});
  if (!seed_dir.empty()) {
    const auto seeded = service.seed_gallery(seed_dir);
    std::cerr << "seeded " << seeded.size() << " gallery image(s) from " << seed_dir << '\n';
  }
  service.start();
  std::cerr << "serving on http://" << host << ':' << service.port() << " (store " << ctx.store().root().string()
            << (ctx.bridge().is_mock() ? ", mock bridge" : "") << ")\n";
  int sig = 0;
  sigwait(&signals, &sig);
  std::cerr << "shutting down; finishing queued jobs\n";
  service.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seeds: image decomposition, triplet datasets, combination and evaluation"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--config", globals.config_path, "Bridge configuration JSON");
  app.add_flag("--mock", globals.mock, "Use the deterministic offline bridge");
  app.add_option("--store", globals.store_flag, "Store directory (default $SEEDS_STORE or ./seeds-store)");
  Context ctx(globals);
  std::function<int()> action;

  // ---- sae ------------------------------------------------------------------
  auto* sae_cmd = app.add_subcommand("sae", "Inspect, initialise or train sparse autoencoders");
  sae_cmd->require_subcommand(1);

  std::string inspect_path;
  auto* inspect = sae_cmd->add_subcommand("inspect", "Print the shape and settings of a weight file");
  inspect->add_option("weights", inspect_path)->required();
  inspect->callback([&] {
    action = [&] {
      const auto model = sae::load_sae(inspect_path);
      double lo = 1e300, hi = 0.0;
      for (std::size_t j = 0; j < model.m(); ++j) {
        const double nrm = model.atom(j).norm();
        lo = std::min(lo, nrm);
        hi = std::max(hi, nrm);
      }
      print({{"m", model.m()},
             {"n", model.n()},
             {"sparsity_coeff", model.sparsity_coeff()},
             {"activation", "relu"},
             {"decoder_column_norm", {{"min", lo}, {"max", hi}}}});
      return 0;
    };
  });

  struct {
    std::size_t n = 16, m = 64;
    double coeff = 0.0;
    std::uint64_t seed = 0;
    std::string out;
  } init_flags;
  auto* init = sae_cmd->add_subcommand("init", "Write a seeded, untrained model (for offline pipelines)");
  init->add_option("--n", init_flags.n, "Embedding dimension")->capture_default_str();
  init->add_option("--m", init_flags.m, "Number of features")->capture_default_str();
  init->add_option("--coeff", init_flags.coeff, "Sparsity coefficient")->capture_default_str();
  init->add_option("--seed", init_flags.seed)->capture_default_str();
  init->add_option("--out", init_flags.out)->required();
  init->callback([&] {
    action = [&] {
      sae::save_sae(init_flags.out, sae::init_toy_sae(init_flags.n, init_flags.m, init_flags.coeff, init_flags.seed));
      print({{"written", init_flags.out}, {"n", init_flags.n}, {"m", init_flags.m}});
      return 0;
    };
  });

  struct {
    std::size_t n = 4, m = 8, atoms = 8, samples = 512, active = 2, steps = 5000, batch = 8;
    double coeff = 0.03, lr = 0.1;
    std::uint64_t seed = 0;
    std::string out;
  } toy;
  auto* train_toy = sae_cmd->add_subcommand("train-toy", "Train on synthetic sparse data from a known dictionary");
  train_toy->add_option("--n", toy.n)->capture_default_str();
  train_toy->add_option("--m", toy.m)->capture_default_str();
  train_toy->add_option("--atoms", toy.atoms)->capture_default_str();
  train_toy->add_option("--samples", toy.samples)->capture_default_str();
  train_toy->add_option("--active", toy.active, "Atoms per sample")->capture_default_str();
  train_toy->add_option("--steps", toy.steps)->capture_default_str();
  train_toy->add_option("--coeff", toy.coeff, "Sparsity coefficient")->capture_default_str();
  train_toy->add_option("--lr", toy.lr)->capture_default_str();
  train_toy->add_option("--batch", toy.batch)->capture_default_str();
  train_toy->add_option("--seed", toy.seed)->capture_default_str();
  train_toy->add_option("--out", toy.out, "Where to write the trained weights");
  train_toy->callback([&] {
    action = [&] {
      const auto data = sae::make_sparse_dataset(toy.n, toy.atoms, toy.samples, toy.active, toy.seed);
      const auto initial = sae::init_toy_sae(toy.n, toy.m, toy.coeff, toy.seed);
      const auto model = sae::train_toy_sae(data.samples, toy.m, toy.coeff, toy.steps, toy.seed, {toy.lr, toy.batch});
      std::size_t recovered = 0;
      for (std::size_t j = 0; j < model.m(); ++j) recovered += sae::best_atom_match(model, j, data.atoms) >= 0.8;
      const double l0 = sae::mean_loss(initial, data.samples), l1 = sae::mean_loss(model, data.samples);
      if (!toy.out.empty()) sae::save_sae(toy.out, model);
      print({{"initial_loss", l0}, {"final_loss", l1}, {"loss_ratio", l1 / l0}, {"atoms_recovered", recovered}});
      return 0;
    };
  });

  // ---- decompose ---------------------------------------------------------
  std::string dec_image, dec_sae;
  bool dec_render = false;
  ParamFlags dec_flags;
  auto* dec = app.add_subcommand("decompose", "Split one image into two complementary edits");
  dec->add_option("image", dec_image, "Stored image id or image file")->required();
  dec->add_option("--sae", dec_sae, "SAE weight file")->required();
  dec->add_flag("--render", dec_render, "Render both edited embeddings into the store");
  dec_flags.add(dec, true);
  dec->callback([&] {
    action = [&] {
      const ImageRef img = ctx.image(dec_image);
      const auto model = sae::load_sae(dec_sae);
      const auto d = decomposer::decompose(model, ctx.bridge().embed_image(img), dec_flags.params());
      json out = {{"image", img},
                  {"params", forge::params_to_json(d.params)},
                  {"indices_a", d.split.indices_a},
                  {"indices_b", d.split.indices_b},
                  {"discarded", d.split.discarded},
                  {"direction_norm", d.direction.norm()},
                  {"edited_a", values_of(d.edited_a)},
                  {"edited_b", values_of(d.edited_b)}};
      if (dec_render) {
        out["rendered_a"] = ctx.bridge().render_embedding(d.edited_a, 0);
        out["rendered_b"] = ctx.bridge().render_embedding(d.edited_b, 1);
      }
      print(out);
      return 0;
    };
  });

  // ---- pool --------------------------------------------------------------
  auto* pool_cmd = app.add_subcommand("pool", "Image pool construction");
  pool_cmd->require_subcommand(1);
  std::string pool_spec, pool_out = "pool";
  std::size_t pool_workers = 4;
  auto* pool_build = pool_cmd->add_subcommand("build", "Generate the image pool from templated and vague prompts");
  pool_build->add_option("--spec", pool_spec, "Pool spec JSON (default: built-in representative spec)");
  pool_build->add_option("--out", pool_out, "Pool manifest name or path")->capture_default_str();
  pool_build->add_option("--workers", pool_workers)->capture_default_str();
  pool_build->callback([&] {
    action = [&] {
      forge::PoolSpec spec = forge::default_pool_spec();
      if (!pool_spec.empty()) {
        std::ifstream in(pool_spec);
        require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + pool_spec);
        spec = forge::PoolSpec::from_json(json::parse(in));
      }
      ManifestWriter writer(ctx.manifest(pool_out), forge::kPoolSchema, forge::kPoolVersion);
      const auto built = forge::build_pool(spec, ctx.bridge(), &writer, pool_workers);
      print({{"manifest", writer.path().string()}, {"images", built.entries.size()}, {"failures", built.failures}});
      return built.entries.empty() ? 1 : 0;
    };
  });

  // ---- dataset -----------------------------------------------------------
  auto* ds_cmd = app.add_subcommand("dataset", "Triplet minting and conditioning canvases");
  ds_cmd->require_subcommand(1);
  struct {
    std::string sae, pool, out = "triplets";
    std::uint64_t sampling_seed = 0;
    std::int64_t render_seed_base = 0;
    std::size_t workers = 4;
  } mint_flags;
  ParamFlags mint_params;
  auto* mint = ds_cmd->add_subcommand("mint", "Decompose every pool image into a training triplet");
  mint->add_option("--sae", mint_flags.sae, "SAE weight file")->required();
  mint->add_option("--pool", mint_flags.pool, "Pool manifest name or path")->required();
  mint->add_option("--out", mint_flags.out, "Triplet manifest name or path")->capture_default_str();
  mint->add_option("--sampling-seed", mint_flags.sampling_seed, "Seed for the per-item edit step choice")
      ->capture_default_str();
  mint->add_option("--render-seed-base", mint_flags.render_seed_base)->capture_default_str();
  mint->add_option("--workers", mint_flags.workers)->capture_default_str();
  mint_params.add(mint, false);
  mint->callback([&] {
    action = [&] {
      const auto pool = forge::read_pool(ctx.manifest(mint_flags.pool));
      std::vector<ImageRef> images;
      for (const auto& e : pool) images.push_back(e.image);
      const auto model = sae::load_sae(mint_flags.sae);
      forge::MintOptions options{mint_params.params(), mint_flags.sampling_seed, mint_flags.render_seed_base,
                                 mint_flags.workers};
      ManifestWriter writer(ctx.manifest(mint_flags.out), forge::kTripletSchema, forge::kTripletVersion);
      const auto records = forge::mint_dataset(images, model, options, ctx.bridge(), &writer);
      std::size_t ok = 0, skipped = 0, failed = 0;
      for (const auto& r : records) {
        ok += r.status == forge::TripletStatus::ok;
        skipped += r.status == forge::TripletStatus::skipped_degenerate;
        failed += r.status == forge::TripletStatus::failed;
      }
      print({{"manifest", writer.path().string()}, {"ok", ok}, {"skipped_degenerate", skipped}, {"failed", failed}});
      return 0;
    };
  });

  std::string canvas_triplets, canvas_out;
  std::vector<std::string> canvas_pair;
  auto* canvas = ds_cmd->add_subcommand("canvas", "Compose 1024x1024 conditioning canvases");
  canvas->add_option("pair", canvas_pair, "Two images (store ids or files): top-left, bottom-right")->expected(0, 2);
  canvas->add_option("--triplets", canvas_triplets, "Compose a canvas for every ok triplet in this manifest");
  canvas->add_option("--out", canvas_out, "PNG file (pair mode) or canvas manifest (triplet mode)");
  canvas->callback([&] {
    action = [&] {
      if (!canvas_triplets.empty()) {
        ManifestWriter writer(ctx.manifest(canvas_out.empty() ? "canvases" : canvas_out), "seeds.canvases", 1);
        std::size_t n = 0;
        for (const auto& t : forge::read_triplets(ctx.manifest(canvas_triplets))) {
          if (t.status != forge::TripletStatus::ok) continue;
          const ImageRef c = forge::compose_canvas(*t.a, *t.b, ctx.store());
          writer.append({{"triplet_id", t.id},
                         {"canvas", c},
                         {"target", t.comb},
                         {"layout", forge::CanvasLayout::to_json()}});
          ++n;
        }
        print({{"manifest", writer.path().string()}, {"canvases", n}});
        return 0;
      }
      require(canvas_pair.size() == 2, ErrorCode::PreconditionViolated, "give two images or --triplets");
      const ImageRef c = forge::compose_canvas(ctx.image(canvas_pair[0]), ctx.image(canvas_pair[1]), ctx.store());
      if (!canvas_out.empty()) std::filesystem::copy_file(ctx.store().resolve(c), canvas_out,
                                                          std::filesystem::copy_options::overwrite_existing);
      print({{"canvas", c}, {"resize_filter", forge::CanvasLayout::kResizeFilter}});
      return 0;
    };
  });

  // ---- train-config / train ---------------------------------------------
  auto* tc_cmd = app.add_subcommand("train-config", "Fine-tuning configuration");
  tc_cmd->require_subcommand(1);
  std::vector<std::string> tc_sets;
  std::string tc_out;
  auto* emit = tc_cmd->add_subcommand("emit", "Write the fine-tuning configuration");
  emit->add_option("--set", tc_sets, "Override a field: key=value (repeatable)");
  emit->add_option("--out", tc_out, "Output file (default stdout)");
  emit->callback([&] {
    action = [&] {
      json overrides = json::object();
      for (const auto& kv : tc_sets) {
        const auto eq = kv.find('=');
        require(eq != std::string::npos, ErrorCode::PreconditionViolated, "--set expects key=value, got " + kv);
        const std::string value = kv.substr(eq + 1);
        try {
          overrides[kv.substr(0, eq)] = json::parse(value);
        } catch (const json::exception&) {
          overrides[kv.substr(0, eq)] = value;
        }
      }
      const std::string text = tuner::to_json(tuner::emit_config(overrides)).dump(2) + "\n";
      if (tc_out.empty()) std::cout << text;
      else {
        write_file_atomic(tc_out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
      }
      return 0;
    };
  });

  auto* train_cmd = app.add_subcommand("train", "Training runs");
  train_cmd->require_subcommand(1);
  struct {
    int max_steps = 10;
    std::string config, backend = "mock", dataset;
  } smoke_flags;
  auto* smoke = train_cmd->add_subcommand("smoke", "Desk-scale training run against a pluggable backend");
  smoke->add_option("--max-steps", smoke_flags.max_steps)->capture_default_str();
  smoke->add_option("--train-config", smoke_flags.config, "Config emitted by train-config emit");
  smoke->add_option("--backend", smoke_flags.backend)->capture_default_str();
  smoke->add_option("--dataset", smoke_flags.dataset, "Triplet manifest name or path (overrides the config)");
  smoke->callback([&] {
    action = [&] {
      tuner::TrainConfig config;
      if (!smoke_flags.config.empty()) {
        std::ifstream in(smoke_flags.config);
        require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + smoke_flags.config);
        config = tuner::config_from_json(json::parse(in));
      }
      if (!smoke_flags.dataset.empty()) config.dataset_manifest = std::filesystem::absolute(ctx.manifest(smoke_flags.dataset));
      auto backend = tuner::make_backend(smoke_flags.backend);
      print(tuner::smoke_train(config, *backend, smoke_flags.max_steps, ctx.store()).to_json());
      return 0;
    };
  });

  // ---- combine / baseline ------------------------------------------------
  std::string comb_a, comb_b;
  std::vector<std::int64_t> comb_seeds = composer::kDefaultSeeds;
  auto* combine = app.add_subcommand("combine", "Combine two images under a batch of seeds");
  combine->add_option("a", comb_a, "Top-left input (store id or file)")->required();
  combine->add_option("b", comb_b, "Bottom-right input (store id or file)")->required();
  combine->add_option("--seeds", comb_seeds)->delimiter(',')->capture_default_str();
  combine->callback([&] {
    action = [&] {
      composer::Composer composer(ctx.bridge(), ctx.store());
      const auto job = composer.combine(ctx.image(comb_a), ctx.image(comb_b), comb_seeds);
      ManifestWriter(ctx.store().manifest_path("jobs"), composer::kJobSchema, composer::kJobVersion).append(composer::to_json(job));
      print(job_summary(job));
      return job.status == composer::JobStatus::done ? 0 : 1;
    };
  });

  auto* baseline = app.add_subcommand("baseline", "Comparison baselines");
  baseline->require_subcommand(1);
  std::string base_a, base_b;
  std::vector<std::int64_t> base_seeds = composer::kDefaultSeeds;
  auto* clip = baseline->add_subcommand("clip-interp", "Render the mean of the two image embeddings");
  clip->add_option("a", base_a)->required();
  clip->add_option("b", base_b)->required();
  clip->add_option("--seeds", base_seeds)->delimiter(',')->capture_default_str();
  clip->callback([&] {
    action = [&] {
      composer::Composer composer(ctx.bridge(), ctx.store());
      const auto job = composer.clip_interpolation_baseline(ctx.image(base_a), ctx.image(base_b), base_seeds);
      ManifestWriter(ctx.store().manifest_path("jobs"), composer::kJobSchema, composer::kJobVersion).append(composer::to_json(job));
      print(job_summary(job));
      return job.status == composer::JobStatus::done ? 0 : 1;
    };
  });

  // ---- eval --------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Evaluation");
  eval->require_subcommand(1);
  struct {
    std::string pairs, from_pool, out = "descriptions";
    std::vector<std::string> methods{"ours", "clip_interp"};
    std::vector<std::int64_t> seeds = composer::kDefaultSeeds;
    std::size_t workers = 4;
    bool json_out = false;
  } desc;
  auto* describe = eval->add_subcommand("describe", "Description-complexity benchmark (judge word counts, patterns)");
  describe->add_option("--pairs", desc.pairs, "Pair manifest name or path");
  describe->add_option("--from-pool", desc.from_pool, "Pair consecutive pool images instead of a pair manifest");
  describe->add_option("--methods", desc.methods)->delimiter(',')->capture_default_str();
  describe->add_option("--seeds", desc.seeds)->delimiter(',')->capture_default_str();
  describe->add_option("--out", desc.out, "Description manifest name or path")->capture_default_str();
  describe->add_option("--workers", desc.workers)->capture_default_str();
  describe->add_flag("--json", desc.json_out, "Print machine-readable rows instead of the table");
  describe->callback([&] {
    action = [&] {
      std::vector<evalkit::BenchmarkPair> pairs;
      if (!desc.pairs.empty()) {
        pairs = evalkit::read_pairs(ctx.manifest(desc.pairs));
      } else {
        require(!desc.from_pool.empty(), ErrorCode::PreconditionViolated, "give --pairs or --from-pool");
        const auto pool = forge::read_pool(ctx.manifest(desc.from_pool));
        for (std::size_t i = 0; i + 1 < pool.size(); i += 2)
          pairs.push_back({"pair-" + std::to_string(i / 2), pool[i].image, pool[i + 1].image});
      }
      composer::Composer composer(ctx.bridge(), ctx.store());
      std::vector<evalkit::MethodSpec> methods;
      for (const auto& m : desc.methods) {
        if (m == "ours") methods.push_back(evalkit::ours_method(composer));
        else if (m == "clip_interp") methods.push_back(evalkit::clip_interp_method(composer));
        else seeds::fail(ErrorCode::PreconditionViolated, "unknown method '" + m + "' (ours, clip_interp)");
      }
      const auto report =
          evalkit::run_combination_benchmark(pairs, methods, ctx.bridge(), ctx.store(), {desc.seeds, desc.workers});
      std::vector<json> rows;
      for (const auto& r : report.records) rows.push_back(evalkit::to_json(r));
      write_manifest(ctx.manifest(desc.out), evalkit::kDescriptionSchema, evalkit::kDescriptionVersion, rows);
      if (desc.json_out) print(report.to_json());
      else std::cout << report.to_table();
      return 0;
    };
  });

  std::string decomp_triplets;
  bool decomp_json = false;
  auto* decomp = eval->add_subcommand("decomp", "Decomposition quality (perceptual similarity harmonic mean)");
  decomp->add_option("--triplets", decomp_triplets, "Triplet manifest name or path")->required();
  decomp->add_flag("--json", decomp_json);
  decomp->callback([&] {
    action = [&] {
      const auto triplets = forge::read_triplets(ctx.manifest(decomp_triplets));
      const auto report = evalkit::score_decompositions(triplets, ctx.bridge());
      if (decomp_json) print(report.to_json());
      else std::cout << report.to_table();
      return 0;
    };
  });

  std::string study_responses, study_lengths;
  auto* study = eval->add_subcommand("study", "Mean description length per user-study choice");
  study->add_option("--responses", study_responses, "JSON array or JSON lines of responses")->required();
  study->add_option("--lengths", study_lengths, "JSON object: item_id -> word count")->required();
  study->callback([&] {
    action = [&] {
      std::ifstream in(study_lengths);
      require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + study_lengths);
      const auto lengths = json::parse(in).get<std::map<std::string, double>>();
      const auto responses = evalkit::read_study_responses(study_responses);
      json out = json::object();
      for (const auto& [choice, mean] : evalkit::aggregate_user_study(responses, lengths))
        out[evalkit::to_string(choice)] = mean;
      print(out);
      return 0;
    };
  });

  // ---- serve -------------------------------------------------------------
  struct {
    std::string host = "127.0.0.1", seed_dir;
    int port = 8080;
    std::size_t concurrency = 1;
  } serve_flags;
  auto* serve = app.add_subcommand("serve", "Run the exploration HTTP API");
  serve->add_option("--host", serve_flags.host)->capture_default_str();
  serve->add_option("--port", serve_flags.port)->capture_default_str();
  serve->add_option("--seed-dir", serve_flags.seed_dir, "Import these images into the gallery on start");
  serve->add_option("--concurrency", serve_flags.concurrency, "Concurrent generation jobs")->capture_default_str();
  serve->callback([&] {
    action = [&] {
      return run_serve(ctx, serve_flags.host, serve_flags.port, serve_flags.seed_dir, serve_flags.concurrency);
    };
  });

  CLI11_PARSE(app, argc, argv);
  try {
    return action ? action() : 0;
  } catch (const seeds::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
