#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "seeds/bridge.hpp"
#include "seeds/error.hpp"
#include "test_support.hpp"

using namespace seeds;
using namespace seeds::bridge;
using seeds::testing::error_of;
using seeds::testing::TempDir;

namespace {

// A local model server whose handlers the test fills in.
class FakeServer {
 public:
  FakeServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("mock bridge is deterministic by content") {
  TempDir dir;
  ContentStore store(dir.path());
  MockBridge a(store), b(store);
  const ImageRef img = store.import_file(testing::fixture("meadow.png"));
  CHECK(a.embed_image(img) == b.embed_image(img));
  CHECK(a.embed_image(img).dim() == 16);
  CHECK(a.embed_image(img).norm() == doctest::Approx(1.0));

  const Embedding e = a.embed_image(img);
  CHECK(a.render_embedding(e, 3) == b.render_embedding(e, 3));
  CHECK(a.render_embedding(e, 3) != a.render_embedding(e, 4));
  CHECK(a.text_to_image("a red fox", 1) == b.text_to_image("a red fox", 1));
  CHECK(a.expand_prompt("a cosy room", 4) == b.expand_prompt("a cosy room", 4));
  CHECK(a.expand_prompt("a cosy room", 4).size() == 4);
  CHECK(a.perceptual_similarity(img, img) == 1.0);
  CHECK(error_of([&] { a.render_embedding(Embedding::zeros(3), 0); }) == ErrorCode::DimMismatch);

  const ImageRef small = store.put(Image(64, 64));
  CHECK(error_of([&] { a.generate_combination(small, "x", 0); }) == ErrorCode::BadCanvas);
  const std::vector<ImageRef> one{img};
  CHECK(error_of([&] { a.describe_reconstruction(one, img, JudgeTemplate::two_input); }) ==
        ErrorCode::PreconditionViolated);
}

TEST_CASE("mock embedding overrides apply by content hash") {
  TempDir dir;
  ContentStore store(dir.path());
  const ImageRef img = store.import_file(testing::fixture("plate.png"));
  MockOptions opts;
  opts.embedding_dim = 4;
  opts.embedding_by_image[img.content_hash] = Embedding({1.0, 0.0, 0.0, 0.0});
  MockBridge m(store, opts);
  CHECK(m.embed_image(img) == Embedding({1.0, 0.0, 0.0, 0.0}));
}

TEST_CASE("a zero-byte image is CorruptImage") {
  TempDir dir;
  ContentStore store(dir.path());
  CHECK(error_of([&] { store.put_bytes({}); }) == ErrorCode::CorruptImage);
  MockBridge m(store);
  const ImageRef img = store.import_file(testing::fixture("plate.png"));
  std::filesystem::resize_file(store.resolve(img), 0);
  CHECK(error_of([&] { m.embed_image(img); }) == ErrorCode::CorruptImage);
}

TEST_CASE("base64 round trip") {
  const std::vector<std::uint8_t> bytes{0, 1, 2, 250, 251, 252, 253};
  CHECK(base64_encode(bytes) == "AAEC+vv8/Q==");
  CHECK(base64_decode(base64_encode(bytes)) == bytes);
}

TEST_CASE("bridge config rejects inline secrets") {
  CHECK(error_of([] { BridgeConfig::from_json({{"api_key", "sk-123"}}); }) == ErrorCode::PreconditionViolated);
  const auto c = BridgeConfig::from_json({{"embedding_dim", 8}, {"vlm_judge", {{"url", "x"}, {"key_env", "K"}}}});
  CHECK(c.embedding_dim == 8);
  CHECK(c.vlm_judge.key_env == "K");
}

TEST_CASE("remote bridge retries 429 with exponential backoff") {
  FakeServer fake;
  std::atomic<int> calls{0};
  fake.server().Post("/embed", [&](const httplib::Request&, httplib::Response& res) {
    if (++calls <= 2) {
      res.status = 429;
      return;
    }
    res.set_content(nlohmann::json{{"embedding", {1.0, 2.0, 3.0}}}.dump(), "application/json");
  });

  TempDir dir;
  ContentStore store(dir.path());
  BridgeConfig cfg;
  cfg.mock_mode = false;
  cfg.clip_encoder = fake.url();
  cfg.embedding_dim = 3;
  cfg.max_attempts = 5;
  cfg.initial_backoff_ms = 100;
  RemoteBridge remote(store, cfg);
  std::vector<int> sleeps;
  remote.set_sleeper([&](int ms) { sleeps.push_back(ms); });

  const ImageRef img = store.import_file(testing::fixture("plate.png"));
  CHECK(remote.embed_image(img) == Embedding({1.0, 2.0, 3.0}));
  CHECK(sleeps == std::vector<int>{100, 200});

  calls = -100;
  sleeps.clear();
  CHECK(error_of([&] { remote.embed_image(img); }) == ErrorCode::RateLimited);
  CHECK(sleeps.size() == 4);
}

TEST_CASE("remote judge needs its key from the environment and sends it as a bearer token") {
  FakeServer fake;
  std::string seen_auth;
  fake.server().Post("/judge", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    res.set_content(R"({"text": "- copy image1"})", "application/json");
  });

  TempDir dir;
  ContentStore store(dir.path());
  BridgeConfig cfg;
  cfg.mock_mode = false;
  cfg.vlm_judge = {fake.url() + "/judge", "SEEDS_TEST_JUDGE_KEY"};
  RemoteBridge remote(store, cfg);
  const ImageRef img = store.import_file(testing::fixture("plate.png"));
  const std::vector<ImageRef> inputs{img, img};

  ::unsetenv("SEEDS_TEST_JUDGE_KEY");
  CHECK(error_of([&] { remote.describe_reconstruction(inputs, img, JudgeTemplate::two_input); }) ==
        ErrorCode::JudgeUnavailable);

  ::setenv("SEEDS_TEST_JUDGE_KEY", "secret-value", 1);
  CHECK(remote.describe_reconstruction(inputs, img, JudgeTemplate::two_input) == "- copy image1");
  CHECK(seen_auth == "Bearer secret-value");
  ::unsetenv("SEEDS_TEST_JUDGE_KEY");
}

TEST_CASE("remote bridge surfaces wrong dimensions and unreachable servers") {
  FakeServer fake;
  fake.server().Post("/embed", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"embedding": [1, 2]})", "application/json");
  });
  TempDir dir;
  ContentStore store(dir.path());
  BridgeConfig cfg;
  cfg.mock_mode = false;
  cfg.clip_encoder = fake.url();
  cfg.embedding_dim = 3;
  RemoteBridge remote(store, cfg);
  const ImageRef img = store.import_file(testing::fixture("plate.png"));
  CHECK(error_of([&] { remote.embed_image(img); }) == ErrorCode::DimMismatch);
  CHECK(error_of([&] { remote.render_embedding(Embedding::zeros(2), 0); }) == ErrorCode::DimMismatch);

  BridgeConfig none;
  none.mock_mode = false;
  RemoteBridge empty(store, none);
  CHECK(error_of([&] { empty.embed_image(img); }) == ErrorCode::EncoderUnavailable);
}

TEST_CASE("bridge pool hands out each instance to one holder at a time") {
  TempDir dir;
  ContentStore store(dir.path());
  BridgePool pool(2, [&] { return std::make_unique<MockBridge>(store); });
  auto l1 = pool.lease();
  auto l2 = pool.lease();
  CHECK(&*l1 != &*l2);
  std::atomic<bool> got{false};
  std::thread t([&] {
    auto l3 = pool.lease();
    got = true;
  });
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  CHECK(!got);
  { auto drop = std::move(l1); }
  t.join();
  CHECK(got);
}
