#include "seeds/tuner.hpp"

#include <random>
#include <set>

#include "seeds/error.hpp"
#include "seeds/prompts.hpp"

namespace seeds::tuner {

namespace {

const std::set<std::string>& declared_fields() {
  static const std::set<std::string> fields = {"lora_rank_linear", "lora_rank_conv", "learning_rate",
                                               "batch_size",       "steps",          "optimizer",        "fixed_prompt",
                                               "canvas",           "dataset_manifest", "checkpoint_every",
                                               "rng_seed",         "schema",         "version"};
  return fields;
}

void apply_field(TrainConfig& c, const std::string& key, const nlohmann::json& v) {
  if (key == "lora_rank_linear") c.lora_rank_linear = v.get<int>();
  else if (key == "lora_rank_conv") c.lora_rank_conv = v.get<int>();
  else if (key == "learning_rate") c.learning_rate = v.get<double>();
  else if (key == "batch_size") c.batch_size = v.get<int>();
  else if (key == "steps") c.steps = v.get<int>();
  else if (key == "optimizer") c.optimizer = v.get<std::string>();
  else if (key == "dataset_manifest") c.dataset_manifest = v.get<std::string>();
  else if (key == "checkpoint_every") c.checkpoint_every = v.get<int>();
  else if (key == "rng_seed") c.rng_seed = v.get<std::uint64_t>();
}

std::array<double, 3> mean_rgb(const Image& img, int x0, int y0, int w, int h) {
  std::array<double, 3> sum{};
  const auto px = img.pixels();
  for (int y = y0; y < y0 + h; ++y) {
    const std::size_t row = (static_cast<std::size_t>(y) * static_cast<std::size_t>(img.width()) + x0) * 3;
    for (std::size_t i = 0; i < static_cast<std::size_t>(w) * 3; i += 3)
      for (std::size_t c = 0; c < 3; ++c) sum[c] += px[row + i + c];
  }
  const double n = static_cast<double>(w) * h * 255.0;
  for (auto& s : sum) s /= n;
  return sum;
}

}  // namespace

TrainConfig::TrainConfig() : fixed_prompt(prompts::combination_prompt()) {}

void validate(const TrainConfig& c) {
  require(c.lora_rank_linear > 0 && c.lora_rank_conv > 0, ErrorCode::PreconditionViolated, "LoRA ranks must be positive");
  require(c.steps > 0, ErrorCode::PreconditionViolated, "steps must be positive");
  require(c.batch_size > 0, ErrorCode::PreconditionViolated, "batch_size must be positive");
  require(c.learning_rate > 0, ErrorCode::PreconditionViolated, "learning_rate must be positive");
  require(!c.optimizer.empty(), ErrorCode::PreconditionViolated, "optimizer must be named");
  require(c.checkpoint_every > 0, ErrorCode::PreconditionViolated, "checkpoint_every must be positive");
  require(c.fixed_prompt == prompts::combination_prompt(), ErrorCode::PreconditionViolated,
          "fixed_prompt must be the canonical combination prompt");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"schema", kConfigSchema},
          {"version", kConfigVersion},
          {"lora_rank_linear", c.lora_rank_linear},
          {"lora_rank_conv", c.lora_rank_conv},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"steps", c.steps},
          {"optimizer", c.optimizer},
          {"fixed_prompt", c.fixed_prompt},
          {"canvas", forge::CanvasLayout::to_json()},
          {"dataset_manifest", c.dataset_manifest.generic_string()},
          {"checkpoint_every", c.checkpoint_every},
          {"rng_seed", c.rng_seed}};
}

TrainConfig config_from_json(const nlohmann::json& j) {
  require(j.is_object(), ErrorCode::PreconditionViolated, "train config must be a JSON object");
  require(j.value("schema", "") == kConfigSchema && j.value("version", -1) == kConfigVersion,
          ErrorCode::SchemaVersionMismatch,
          std::string("expected ") + kConfigSchema + " v" + std::to_string(kConfigVersion));
  TrainConfig c;
  for (const auto& [key, value] : j.items()) {
    require(declared_fields().count(key) == 1, ErrorCode::UnknownField, "unknown train config field '" + key + "'");
    apply_field(c, key, value);
  }
  if (j.contains("fixed_prompt")) c.fixed_prompt = j["fixed_prompt"].get<std::string>();
  require(!j.contains("canvas") || j["canvas"] == forge::CanvasLayout::to_json(), ErrorCode::PreconditionViolated,
          "canvas layout does not match the fixed layout");
  validate(c);
  return c;
}

TrainConfig emit_config(const nlohmann::json& overrides) {
  require(overrides.is_object(), ErrorCode::PreconditionViolated, "overrides must be a JSON object");
  TrainConfig c;
  for (const auto& [key, value] : overrides.items()) {
    require(declared_fields().count(key) == 1 && key != "schema" && key != "version", ErrorCode::UnknownField,
            "unknown train config field '" + key + "'");
    require(key != "fixed_prompt" && key != "canvas", ErrorCode::PreconditionViolated,
            "'" + key + "' is fixed and cannot be overridden");
    try {
      apply_field(c, key, value);
    } catch (const nlohmann::json::exception&) {
      fail(ErrorCode::PreconditionViolated, "override '" + key + "' has the wrong type");
    }
  }
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// Mock backend

std::array<double, MockBackend::kFeatures> MockBackend::features(const Image& canvas) {
  using L = forge::CanvasLayout;
  require(canvas.width() == L::kSize && canvas.height() == L::kSize, ErrorCode::BadCanvas, "canvas must be 1024x1024");
  const auto a = mean_rgb(canvas, L::kOriginA[0], L::kOriginA[1], L::kTile, L::kTile);
  const auto b = mean_rgb(canvas, L::kOriginB[0], L::kOriginB[1], L::kTile, L::kTile);
  return {a[0], a[1], a[2], b[0], b[1], b[2], 1.0};
}

std::array<double, MockBackend::kOutputs> MockBackend::targets(const Image& target) {
  return mean_rgb(target, 0, 0, target.width(), target.height());
}

nlohmann::json MockBackend::optimizer_details() const {
  return {{"name", "full-batch gradient descent"},
          {"step_size", kStepSize},
          {"loss", "mean squared error"},
          {"note", "learning_rate and batch_size from the config are recorded but not used by the mock"}};
}

void MockBackend::begin(const std::vector<TrainSample>& samples, const TrainConfig& config) {
  x_.clear();
  y_.clear();
  for (const auto& s : samples) {
    x_.push_back(features(s.canvas));
    y_.push_back(targets(s.target));
  }
  std::mt19937_64 rng(config.rng_seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  for (auto& row : w_)
    for (auto& v : row) v = normal(rng);
}

double MockBackend::loss() const {
  require(!x_.empty(), ErrorCode::EmptyDataset, "mock backend has no samples");
  double total = 0.0;
  for (std::size_t i = 0; i < x_.size(); ++i)
    for (std::size_t o = 0; o < kOutputs; ++o) {
      double pred = 0.0;
      for (std::size_t f = 0; f < kFeatures; ++f) pred += w_[o][f] * x_[i][f];
      total += (pred - y_[i][o]) * (pred - y_[i][o]);
    }
  return total / static_cast<double>(x_.size());
}

void MockBackend::step() {
  require(!x_.empty(), ErrorCode::EmptyDataset, "mock backend has no samples");
  std::array<std::array<double, kFeatures>, kOutputs> grad{};
  const double scale = 2.0 / static_cast<double>(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i)
    for (std::size_t o = 0; o < kOutputs; ++o) {
      double pred = 0.0;
      for (std::size_t f = 0; f < kFeatures; ++f) pred += w_[o][f] * x_[i][f];
      const double r = scale * (pred - y_[i][o]);
      for (std::size_t f = 0; f < kFeatures; ++f) grad[o][f] += r * x_[i][f];
    }
  for (std::size_t o = 0; o < kOutputs; ++o)
    for (std::size_t f = 0; f < kFeatures; ++f) w_[o][f] -= kStepSize * grad[o][f];
}

nlohmann::json MockBackend::checkpoint() const { return {{"weights", w_}}; }

std::unique_ptr<TrainBackend> make_backend(const std::string& name) {
  if (name == "mock") return std::make_unique<MockBackend>();
  fail(ErrorCode::BackendUnavailable, "training backend '" + name + "' is not available in this build");
}

// ---------------------------------------------------------------------------

nlohmann::json SmokeReport::to_json() const {
  nlohmann::json cps = nlohmann::json::array();
  for (const auto& c : checkpoints) cps.push_back({{"step", c.step}, {"loss", c.loss}, {"state", c.state}});
  return {{"backend", backend},     {"optimizer", optimizer}, {"steps_run", steps_run}, {"initial_loss", initial_loss},
          {"final_loss", final_loss}, {"losses", losses},     {"checkpoints", cps}};
}

std::vector<TrainSample> load_samples(std::span<const forge::TripletRecord> triplets, const ContentStore& store) {
  std::vector<TrainSample> samples;
  for (const auto& t : triplets) {
    if (t.status != forge::TripletStatus::ok) continue;
    samples.push_back({forge::compose_canvas_image(store.load(*t.a), store.load(*t.b)), store.load(t.comb)});
  }
  return samples;
}

SmokeReport smoke_train(const TrainConfig& config, TrainBackend& backend, int max_steps, const ContentStore& store) {
  const auto path = config.dataset_manifest.is_absolute() ? config.dataset_manifest
                                                          : store.root() / config.dataset_manifest;
  const auto triplets = forge::read_triplets(path);
  return smoke_train(config, backend, max_steps, load_samples(triplets, store));
}

SmokeReport smoke_train(const TrainConfig& config, TrainBackend& backend, int max_steps,
                        const std::vector<TrainSample>& samples) {
  validate(config);
  require(max_steps >= 0, ErrorCode::PreconditionViolated, "max_steps must be non-negative");
  require(!samples.empty(), ErrorCode::EmptyDataset, "no ok triplets to train on");

  backend.begin(samples, config);
  SmokeReport report;
  report.backend = backend.name();
  report.optimizer = backend.optimizer_details();
  report.initial_loss = backend.loss();
  report.final_loss = report.initial_loss;
  const int steps = std::min(max_steps, config.steps);
  for (int s = 1; s <= steps; ++s) {
    backend.step();
    report.final_loss = backend.loss();
    report.losses.push_back(report.final_loss);
    if (s % config.checkpoint_every == 0) report.checkpoints.push_back({s, report.final_loss, backend.checkpoint()});
  }
  report.steps_run = steps;
  return report;
}

}  // namespace seeds::tuner
