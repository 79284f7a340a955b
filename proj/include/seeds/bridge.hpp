#pragma once

// The only place that talks to learned models or external APIs. Everything
// downstream holds a Bridge& and stays testable offline via MockBridge.

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "seeds/error.hpp"
#include "seeds/store.hpp"
#include "seeds/tensor.hpp"

namespace seeds::bridge {

struct ApiEndpoint {
  std::string url;
  std::string key_env;  // name of the environment variable holding the key
};

struct BridgeConfig {
  std::string clip_encoder;
  std::string embedding_decoder;
  std::string canvas_generator;
  std::string text_to_image;
  std::string perceptual_sim;
  ApiEndpoint vlm_judge;
  ApiEndpoint llm_expander;
  bool mock_mode = true;
  std::size_t embedding_dim = 16;
  int max_attempts = 5;
  int initial_backoff_ms = 250;
  int timeout_seconds = 120;

  static BridgeConfig from_json(const nlohmann::json& j);
  static BridgeConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

enum class JudgeTemplate { two_input, grid_input };

std::string_view judge_prompt(JudgeTemplate t);
std::string_view judge_prompt_asset_name(JudgeTemplate t);
std::size_t judge_input_count(JudgeTemplate t);

class Bridge {
 public:
  virtual ~Bridge() = default;

  virtual Embedding embed_image(const ImageRef& image) = 0;
  virtual ImageRef render_embedding(const Embedding& e, std::int64_t seed) = 0;
  virtual ImageRef generate_combination(const ImageRef& canvas, const std::string& prompt, std::int64_t seed) = 0;
  // `inputs` holds two images for two_input and the single canvas for
  // grid_input; anything else is PreconditionViolated.
  virtual std::string describe_reconstruction(std::span<const ImageRef> inputs, const ImageRef& output,
                                              JudgeTemplate t) = 0;
  virtual std::vector<std::string> expand_prompt(const std::string& vague, int n_variants) = 0;
  virtual double perceptual_similarity(const ImageRef& a, const ImageRef& b) = 0;
  virtual ImageRef text_to_image(const std::string& prompt, std::int64_t seed) = 0;

  virtual bool is_mock() const noexcept = 0;
};

// ---------------------------------------------------------------------------
// Deterministic offline stand-ins. Every output is a pure function of the
// inputs (by content hash), so whole pipelines are byte-reproducible.
// ---------------------------------------------------------------------------

inline constexpr int kMockImageSize = 64;

struct MockOptions {
  std::size_t embedding_dim = 16;
  // Judge replies, chosen by a hash of the input/output content hashes.
  std::vector<std::string> canned_descriptions;
  // Exact reply for a given output image hash; wins over the canned list.
  std::map<std::string, std::string> description_by_output;
  // Embedding override for a given image hash.
  std::map<std::string, Embedding> embedding_by_image;
};

std::vector<std::string> default_canned_descriptions();

class MockBridge final : public Bridge {
 public:
  MockBridge(ContentStore& store, MockOptions options = {});

  Embedding embed_image(const ImageRef& image) override;
  ImageRef render_embedding(const Embedding& e, std::int64_t seed) override;
  ImageRef generate_combination(const ImageRef& canvas, const std::string& prompt, std::int64_t seed) override;
  std::string describe_reconstruction(std::span<const ImageRef> inputs, const ImageRef& output,
                                      JudgeTemplate t) override;
  std::vector<std::string> expand_prompt(const std::string& vague, int n_variants) override;
  double perceptual_similarity(const ImageRef& a, const ImageRef& b) override;
  ImageRef text_to_image(const std::string& prompt, std::int64_t seed) override;

  bool is_mock() const noexcept override { return true; }

  const MockOptions& options() const noexcept { return options_; }

 private:
  ContentStore& store_;
  MockOptions options_;
};

// 64-bit difference hash: 9x8 grayscale thumbnail, bit = (left < right).
std::uint64_t difference_hash(const Image& image);

// Unit vector drawn from a Gaussian seeded by `seed`.
Embedding seeded_unit_vector(std::size_t dim, std::uint64_t seed);

// ---------------------------------------------------------------------------
// HTTP-backed bridge. Each locator is a base URL of a model server speaking
// small JSON requests (images travel base64-encoded):
//   POST <clip_encoder>/embed          {"image_b64"}                 -> {"embedding": [..]}
//   POST <embedding_decoder>/render    {"embedding", "seed"}         -> {"image_b64"}
//   POST <canvas_generator>/generate   {"canvas_b64", "prompt", "seed"} -> {"image_b64"}
//   POST <text_to_image>/generate      {"prompt", "seed"}            -> {"image_b64"}
//   POST <perceptual_sim>/distance     {"a_b64", "b_b64"}            -> {"distance"}
//   POST <vlm_judge.url>               {"prompt", "images_b64"}      -> {"text"}
//   POST <llm_expander.url>            {"prompt", "n"}               -> {"variants": [..]}
// API keys go in "Authorization: Bearer"; HTTP 429 is retried with
// exponential backoff up to max_attempts.
// ---------------------------------------------------------------------------
class RemoteBridge final : public Bridge {
 public:
  RemoteBridge(ContentStore& store, BridgeConfig config);

  Embedding embed_image(const ImageRef& image) override;
  ImageRef render_embedding(const Embedding& e, std::int64_t seed) override;
  ImageRef generate_combination(const ImageRef& canvas, const std::string& prompt, std::int64_t seed) override;
  std::string describe_reconstruction(std::span<const ImageRef> inputs, const ImageRef& output,
                                      JudgeTemplate t) override;
  std::vector<std::string> expand_prompt(const std::string& vague, int n_variants) override;
  double perceptual_similarity(const ImageRef& a, const ImageRef& b) override;
  ImageRef text_to_image(const std::string& prompt, std::int64_t seed) override;

  bool is_mock() const noexcept override { return false; }

  // Replaces the sleep between retries (tests).
  void set_sleeper(std::function<void(int ms)> sleeper) { sleeper_ = std::move(sleeper); }

 private:
  nlohmann::json post(const std::string& locator, const nlohmann::json& body, ErrorCode unavailable,
                      const std::string& api_key = {});
  std::vector<std::uint8_t> image_bytes(const ImageRef& ref);

  ContentStore& store_;
  BridgeConfig config_;
  std::mutex mutex_;  // one request in flight per instance
  std::function<void(int)> sleeper_;
};

std::unique_ptr<Bridge> make_bridge(const BridgeConfig& config, ContentStore& store);

// Fixed set of bridge instances; lease() blocks until one is free.
class BridgePool {
 public:
  using Factory = std::function<std::unique_ptr<Bridge>()>;

  BridgePool(std::size_t size, const Factory& factory);

  class Lease {
   public:
    Lease(BridgePool& pool, std::size_t slot) : pool_(&pool), slot_(slot) {}
    Lease(Lease&& other) noexcept : pool_(other.pool_), slot_(other.slot_) { other.pool_ = nullptr; }
    Lease(const Lease&) = delete;
    Lease& operator=(const Lease&) = delete;
    Lease& operator=(Lease&&) = delete;
    ~Lease();

    Bridge& operator*() const { return *pool_->bridges_[slot_]; }
    Bridge* operator->() const { return pool_->bridges_[slot_].get(); }

   private:
    BridgePool* pool_;
    std::size_t slot_;
  };

  Lease lease();
  std::size_t size() const noexcept { return bridges_.size(); }

 private:
  std::vector<std::unique_ptr<Bridge>> bridges_;
  std::vector<bool> busy_;
  std::mutex mutex_;
  std::condition_variable released_;
};

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(std::string_view text);

}  // namespace seeds::bridge
