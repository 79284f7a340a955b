#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seeds/forge.hpp"
#include "seeds/image.hpp"
#include "seeds/store.hpp"

namespace seeds::tuner {

// Field names map one to one onto the fine-tuning hyperparameters. Only the
// optimizer's name is configured; its internals (scheduler, weight decay,
// precision) are left to the backend and reported by it.
struct TrainConfig {
  int lora_rank_linear = 32;
  int lora_rank_conv = 16;
  double learning_rate = 1e-4;
  int batch_size = 1;
  int steps = 15000;
  std::string optimizer = "adamw";
  std::string fixed_prompt;  // always the canonical combination prompt
  std::filesystem::path dataset_manifest = "manifests/triplets.jsonl";  // store-relative unless absolute
  int checkpoint_every = 500;
  std::uint64_t rng_seed = 0;

  TrainConfig();
  bool operator==(const TrainConfig&) const = default;
};

inline constexpr const char* kConfigSchema = "seeds.train_config";
inline constexpr int kConfigVersion = 1;

void validate(const TrainConfig& config);

// Schema-versioned JSON; the canvas layout is written out for the trainer
// but is not configurable.
nlohmann::json to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

// Defaults with `overrides` applied. Keys outside the declared fields are
// UnknownField; fixed_prompt and canvas are fixed and cannot be overridden.
TrainConfig emit_config(const nlohmann::json& overrides = nlohmann::json::object());

// One training example: the conditioning canvas and the target image.
struct TrainSample {
  Image canvas;
  Image target;
};

class TrainBackend {
 public:
  virtual ~TrainBackend() = default;
  virtual std::string name() const = 0;
  virtual nlohmann::json optimizer_details() const = 0;
  virtual void begin(const std::vector<TrainSample>& samples, const TrainConfig& config) = 0;
  virtual double loss() const = 0;  // over the whole dataset
  virtual void step() = 0;
  virtual nlohmann::json checkpoint() const = 0;
};

// Linear model from canvas tile colour statistics to target colour
// statistics, trained by full-batch gradient descent on mean squared error.
// The step size is below 2 / (largest Hessian eigenvalue) for features in
// [0, 1], so every step strictly lowers the loss until it reaches a minimum.
class MockBackend final : public TrainBackend {
 public:
  static constexpr std::size_t kFeatures = 7;  // two tiles x RGB mean + bias
  static constexpr std::size_t kOutputs = 3;
  static constexpr double kStepSize = 0.05;

  std::string name() const override { return "mock"; }
  nlohmann::json optimizer_details() const override;
  void begin(const std::vector<TrainSample>& samples, const TrainConfig& config) override;
  double loss() const override;
  void step() override;
  nlohmann::json checkpoint() const override;

  static std::array<double, kFeatures> features(const Image& canvas);
  static std::array<double, kOutputs> targets(const Image& target);

 private:
  std::vector<std::array<double, kFeatures>> x_;
  std::vector<std::array<double, kOutputs>> y_;
  std::array<std::array<double, kFeatures>, kOutputs> w_{};
};

// Only "mock" exists; other names are BackendUnavailable.
std::unique_ptr<TrainBackend> make_backend(const std::string& name);

struct Checkpoint {
  int step = 0;
  double loss = 0.0;
  nlohmann::json state;
};

struct SmokeReport {
  std::string backend;
  nlohmann::json optimizer;
  int steps_run = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> losses;  // after each step
  std::vector<Checkpoint> checkpoints;

  nlohmann::json to_json() const;
};

// Samples from the ok triplets of an already loaded manifest.
std::vector<TrainSample> load_samples(std::span<const forge::TripletRecord> triplets, const ContentStore& store);

// Runs min(max_steps, config.steps) steps on the ok triplets listed in
// config.dataset_manifest. Reads the manifest, never writes it. EmptyDataset
// when no ok triplet is available.
SmokeReport smoke_train(const TrainConfig& config, TrainBackend& backend, int max_steps, const ContentStore& store);
SmokeReport smoke_train(const TrainConfig& config, TrainBackend& backend, int max_steps,
                        const std::vector<TrainSample>& samples);

}  // namespace seeds::tuner
