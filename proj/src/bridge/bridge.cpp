#include <fstream>

#include "seeds/bridge.hpp"
#include "seeds/error.hpp"
#include "seeds/prompts.hpp"

namespace seeds::bridge {

namespace {

ApiEndpoint endpoint_from(const nlohmann::json& j, const char* key) {
  ApiEndpoint e;
  if (!j.contains(key)) return e;
  const auto& v = j.at(key);
  if (v.is_string()) {
    e.url = v.get<std::string>();
  } else {
    e.url = v.value("url", "");
    e.key_env = v.value("key_env", "");
  }
  return e;
}

}  // namespace

BridgeConfig BridgeConfig::from_json(const nlohmann::json& j) {
  BridgeConfig c;
  c.clip_encoder = j.value("clip_encoder", "");
  c.embedding_decoder = j.value("embedding_decoder", "");
  c.canvas_generator = j.value("canvas_generator", "");
  c.text_to_image = j.value("text_to_image", "");
  c.perceptual_sim = j.value("perceptual_sim", "");
  c.vlm_judge = endpoint_from(j, "vlm_judge");
  c.llm_expander = endpoint_from(j, "llm_expander");
  c.mock_mode = j.value("mock_mode", true);
  c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  c.max_attempts = j.value("max_attempts", c.max_attempts);
  c.initial_backoff_ms = j.value("initial_backoff_ms", c.initial_backoff_ms);
  c.timeout_seconds = j.value("timeout_seconds", c.timeout_seconds);
  for (const char* secret : {"api_key", "key", "token"})
    require(!j.contains(secret), ErrorCode::PreconditionViolated,
            std::string("secrets are read from environment variables, not the config file ('") + secret + "')");
  require(c.embedding_dim > 0, ErrorCode::PreconditionViolated, "embedding_dim must be positive");
  require(c.max_attempts >= 1, ErrorCode::PreconditionViolated, "max_attempts must be at least 1");
  return c;
}

BridgeConfig BridgeConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open bridge config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, "bridge config is not valid JSON: " + std::string(e.what()));
  }
  if (j.contains("bridge")) j = j.at("bridge");
  return from_json(j);
}

nlohmann::json BridgeConfig::to_json() const {
  return {{"clip_encoder", clip_encoder},
          {"embedding_decoder", embedding_decoder},
          {"canvas_generator", canvas_generator},
          {"text_to_image", text_to_image},
          {"perceptual_sim", perceptual_sim},
          {"vlm_judge", {{"url", vlm_judge.url}, {"key_env", vlm_judge.key_env}}},
          {"llm_expander", {{"url", llm_expander.url}, {"key_env", llm_expander.key_env}}},
          {"mock_mode", mock_mode},
          {"embedding_dim", embedding_dim},
          {"max_attempts", max_attempts},
          {"initial_backoff_ms", initial_backoff_ms},
          {"timeout_seconds", timeout_seconds}};
}

std::string_view judge_prompt(JudgeTemplate t) {
  return t == JudgeTemplate::two_input ? prompts::judge_two_input() : prompts::judge_grid_input();
}

std::string_view judge_prompt_asset_name(JudgeTemplate t) {
  return t == JudgeTemplate::two_input ? "judge_two_input.v1.txt" : "judge_grid_input.v1.txt";
}

std::size_t judge_input_count(JudgeTemplate t) { return t == JudgeTemplate::two_input ? 2 : 1; }

std::unique_ptr<Bridge> make_bridge(const BridgeConfig& config, ContentStore& store) {
  if (config.mock_mode) {
    MockOptions options;
    options.embedding_dim = config.embedding_dim;
    return std::make_unique<MockBridge>(store, std::move(options));
  }
  return std::make_unique<RemoteBridge>(store, config);
}

// ---------------------------------------------------------------------------

BridgePool::BridgePool(std::size_t size, const Factory& factory) {
  require(size >= 1, ErrorCode::PreconditionViolated, "bridge pool needs at least one instance");
  for (std::size_t i = 0; i < size; ++i) bridges_.push_back(factory());
  busy_.assign(size, false);
}

BridgePool::Lease BridgePool::lease() {
  std::unique_lock lock(mutex_);
  for (;;) {
    for (std::size_t i = 0; i < busy_.size(); ++i) {
      if (!busy_[i]) {
        busy_[i] = true;
        return Lease(*this, i);
      }
    }
    released_.wait(lock);
  }
}

BridgePool::Lease::~Lease() {
  if (pool_ == nullptr) return;
  {
    std::lock_guard lock(pool_->mutex_);
    pool_->busy_[slot_] = false;
  }
  pool_->released_.notify_one();
}

// ---------------------------------------------------------------------------

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = std::uint32_t{bytes[i]} << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (std::uint32_t{bytes[i]} << 16) | (std::uint32_t{bytes[i + 1]} << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::vector<std::uint8_t> out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (char c : text) {
    if (c == '=' || c == '\n' || c == '\r') continue;
    const char* pos = std::char_traits<char>::find(kAlphabet, 64, c);
    require(pos != nullptr, ErrorCode::CorruptImage, "invalid base64 payload");
    acc = (acc << 6) | static_cast<std::uint32_t>(pos - kAlphabet);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace seeds::bridge
