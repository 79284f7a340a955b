#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <set>
#include <thread>

#include "seeds/bridge.hpp"
#include "seeds/error.hpp"

namespace seeds::bridge {

namespace {

struct Locator {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Locator split_locator(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::string join_path(const std::string& url, const std::string& suffix) {
  if (!url.empty() && url.back() == '/') return url.substr(0, url.size() - 1) + suffix;
  return url + suffix;
}

std::string api_key(const ApiEndpoint& endpoint, ErrorCode unavailable, const char* what) {
  require(!endpoint.url.empty(), unavailable, std::string(what) + " endpoint is not configured");
  require(!endpoint.key_env.empty(), unavailable, std::string(what) + " key_env is not configured");
  const char* key = std::getenv(endpoint.key_env.c_str());
  require(key != nullptr && *key != '\0', unavailable,
          std::string(what) + " API key variable " + endpoint.key_env + " is not set");
  return key;
}

}  // namespace

RemoteBridge::RemoteBridge(ContentStore& store, BridgeConfig config)
    : store_(store), config_(std::move(config)), sleeper_([](int ms) {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
      }) {}

nlohmann::json RemoteBridge::post(const std::string& locator, const nlohmann::json& body, ErrorCode unavailable,
                                  const std::string& key) {
  require(!locator.empty(), unavailable, "no locator configured");
  const Locator loc = split_locator(locator);
  httplib::Client client(loc.base);
  client.set_connection_timeout(config_.timeout_seconds, 0);
  client.set_read_timeout(config_.timeout_seconds, 0);
  httplib::Headers headers;
  if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);

  const std::string payload = body.dump();
  int backoff = config_.initial_backoff_ms;
  for (int attempt = 1;; ++attempt) {
    auto res = client.Post(loc.path, headers, payload, "application/json");
    require(static_cast<bool>(res), unavailable, "cannot reach " + locator + ": " + httplib::to_string(res.error()));
    if (res->status == 429) {
      require(attempt < config_.max_attempts, ErrorCode::RateLimited,
              locator + " still rate limited after " + std::to_string(attempt) + " attempts");
      sleeper_(backoff);
      backoff *= 2;
      continue;
    }
    require(res->status >= 200 && res->status < 300, unavailable,
            locator + " answered HTTP " + std::to_string(res->status));
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception&) {
      fail(unavailable, locator + " returned a non-JSON body");
    }
  }
}

std::vector<std::uint8_t> RemoteBridge::image_bytes(const ImageRef& ref) {
  auto bytes = store_.read_bytes(ref);
  decode_image(bytes);
  return bytes;
}

Embedding RemoteBridge::embed_image(const ImageRef& image) {
  const auto bytes = image_bytes(image);
  std::lock_guard lock(mutex_);
  const auto reply = post(join_path(config_.clip_encoder, "/embed"), {{"image_b64", base64_encode(bytes)}},
                          ErrorCode::EncoderUnavailable);
  require(reply.contains("embedding") && reply["embedding"].is_array(), ErrorCode::EncoderUnavailable,
          "encoder reply lacks 'embedding'");
  Embedding e(reply["embedding"].get<std::vector<double>>());
  require(e.dim() == config_.embedding_dim, ErrorCode::DimMismatch,
          "encoder returned dim " + std::to_string(e.dim()) + ", expected " + std::to_string(config_.embedding_dim));
  return e;
}

ImageRef RemoteBridge::render_embedding(const Embedding& e, std::int64_t seed) {
  require(e.dim() == config_.embedding_dim, ErrorCode::DimMismatch,
          "decoder expects dim " + std::to_string(config_.embedding_dim) + ", got " + std::to_string(e.dim()));
  std::lock_guard lock(mutex_);
  const std::vector<double> values(e.values().begin(), e.values().end());
  const auto reply = post(join_path(config_.embedding_decoder, "/render"), {{"embedding", values}, {"seed", seed}},
                          ErrorCode::DecoderUnavailable);
  require(reply.contains("image_b64"), ErrorCode::DecoderUnavailable, "decoder reply lacks 'image_b64'");
  return store_.put_bytes(base64_decode(reply["image_b64"].get<std::string>()));
}

ImageRef RemoteBridge::generate_combination(const ImageRef& canvas, const std::string& prompt, std::int64_t seed) {
  const auto bytes = image_bytes(canvas);
  const Image c = decode_image(bytes);
  require(c.width() == 1024 && c.height() == 1024, ErrorCode::BadCanvas, "canvas must be 1024x1024");
  std::lock_guard lock(mutex_);
  const auto reply = post(join_path(config_.canvas_generator, "/generate"),
                          {{"canvas_b64", base64_encode(bytes)}, {"prompt", prompt}, {"seed", seed}},
                          ErrorCode::GeneratorUnavailable);
  require(reply.contains("image_b64"), ErrorCode::GeneratorUnavailable, "generator reply lacks 'image_b64'");
  return store_.put_bytes(base64_decode(reply["image_b64"].get<std::string>()));
}

std::string RemoteBridge::describe_reconstruction(std::span<const ImageRef> inputs, const ImageRef& output,
                                                  JudgeTemplate t) {
  require(inputs.size() == judge_input_count(t), ErrorCode::PreconditionViolated,
          "judge template expects " + std::to_string(judge_input_count(t)) + " input image(s)");
  const std::string key = api_key(config_.vlm_judge, ErrorCode::JudgeUnavailable, "judge");
  nlohmann::json images = nlohmann::json::array();
  for (const auto& in : inputs) images.push_back(base64_encode(image_bytes(in)));
  images.push_back(base64_encode(image_bytes(output)));
  std::lock_guard lock(mutex_);
  const auto reply = post(config_.vlm_judge.url, {{"prompt", std::string(judge_prompt(t))}, {"images_b64", images}},
                          ErrorCode::JudgeUnavailable, key);
  require(reply.contains("text") && reply["text"].is_string(), ErrorCode::JudgeUnavailable, "judge reply lacks 'text'");
  return reply["text"].get<std::string>();
}

std::vector<std::string> RemoteBridge::expand_prompt(const std::string& vague, int n_variants) {
  require(n_variants >= 1, ErrorCode::PreconditionViolated, "n_variants must be at least 1");
  const std::string key = api_key(config_.llm_expander, ErrorCode::ExpanderUnavailable, "expander");
  const std::string instruction = "Expand the short, vague image prompt \"" + vague + "\" into " +
                                  std::to_string(n_variants) +
                                  " distinct, richer visual descriptions suitable for text-to-image generation.";
  std::lock_guard lock(mutex_);
  const auto reply = post(config_.llm_expander.url, {{"prompt", instruction}, {"n", n_variants}},
                          ErrorCode::ExpanderUnavailable, key);
  require(reply.contains("variants") && reply["variants"].is_array(), ErrorCode::ExpanderUnavailable,
          "expander reply lacks 'variants'");
  auto variants = reply["variants"].get<std::vector<std::string>>();
  require(variants.size() == static_cast<std::size_t>(n_variants), ErrorCode::ExpanderUnavailable,
          "expander returned the wrong number of variants");
  require(std::set<std::string>(variants.begin(), variants.end()).size() == variants.size(),
          ErrorCode::ExpanderUnavailable, "expander returned duplicate variants");
  return variants;
}

double RemoteBridge::perceptual_similarity(const ImageRef& a, const ImageRef& b) {
  const auto ba = image_bytes(a);
  const auto bb = image_bytes(b);
  std::lock_guard lock(mutex_);
  const auto reply = post(join_path(config_.perceptual_sim, "/distance"),
                          {{"a_b64", base64_encode(ba)}, {"b_b64", base64_encode(bb)}},
                          ErrorCode::SimilarityUnavailable);
  require(reply.contains("distance") && reply["distance"].is_number(), ErrorCode::SimilarityUnavailable,
          "similarity reply lacks 'distance'");
  return std::clamp(1.0 - reply["distance"].get<double>(), 0.0, 1.0);
}

ImageRef RemoteBridge::text_to_image(const std::string& prompt, std::int64_t seed) {
  std::lock_guard lock(mutex_);
  const auto reply = post(join_path(config_.text_to_image, "/generate"), {{"prompt", prompt}, {"seed", seed}},
                          ErrorCode::GeneratorUnavailable);
  require(reply.contains("image_b64"), ErrorCode::GeneratorUnavailable, "text-to-image reply lacks 'image_b64'");
  return store_.put_bytes(base64_decode(reply["image_b64"].get<std::string>()));
}

}  // namespace seeds::bridge
