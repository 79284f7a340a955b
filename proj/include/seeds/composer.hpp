#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "seeds/bridge.hpp"
#include "seeds/manifest.hpp"
#include "seeds/store.hpp"

namespace seeds::composer {

enum class JobStatus { queued, running, done, failed };
enum class JobKind { combine, branch, clip_interpolation };

const char* to_string(JobStatus s);
const char* to_string(JobKind k);

struct CombinationJob {
  std::string id;
  JobKind kind = JobKind::combine;
  ImageRef input_a;
  ImageRef input_b;
  std::vector<std::int64_t> seeds;
  JobStatus status = JobStatus::queued;
  std::vector<ImageRef> results;  // seed order; partial when failed
  std::optional<std::string> error;
  std::string created_at;  // ISO-8601 UTC
  std::optional<std::string> finished_at;
  std::optional<std::string> parent_job;  // branch provenance
  // Caller labels for the inputs; the gateway stores gallery ids here.
  std::string label_a;
  std::string label_b;

  bool terminal() const noexcept { return status == JobStatus::done || status == JobStatus::failed; }
  bool operator==(const CombinationJob&) const = default;
};

nlohmann::json to_json(const CombinationJob& job);
CombinationJob job_from_json(const nlohmann::json& j);

inline constexpr const char* kJobSchema = "seeds.jobs";
inline constexpr int kJobVersion = 1;

inline const std::vector<std::int64_t> kDefaultSeeds = {1, 2, 3, 4};

// Non-empty and pairwise distinct, else PreconditionViolated.
void validate_seeds(std::span<const std::int64_t> seeds);

// (a + b) / 2, elementwise.
Embedding embedding_midpoint(const Embedding& a, const Embedding& b);

using Clock = std::function<std::string()>;
Clock system_clock();
Clock fixed_clock(std::string timestamp);

// Runs combination jobs synchronously. Job ids are derived from the job
// content and a per-composer sequence number, so reruns reproduce them.
class Composer {
 public:
  Composer(bridge::Bridge& bridge, ContentStore& store, Clock clock = system_clock(), std::uint64_t first_sequence = 0);

  // Queued job with validated seeds; nothing is generated yet.
  CombinationJob prepare(JobKind kind, const ImageRef& a, const ImageRef& b, std::vector<std::int64_t> seeds,
                         std::optional<std::string> parent_job = std::nullopt);

  // Drives a prepared job to done or failed. A failing seed marks the job
  // failed; results from the seeds that succeeded are kept.
  void execute(CombinationJob& job);

  // canvas = compose_canvas(a, b); one generation per seed with the fixed
  // combination prompt.
  CombinationJob combine(const ImageRef& a, const ImageRef& b, std::vector<std::int64_t> seeds = kDefaultSeeds);
  // combine() with a previous result as the first input.
  CombinationJob branch(const ImageRef& result, const ImageRef& other, std::vector<std::int64_t> seeds = kDefaultSeeds,
                        std::optional<std::string> parent_job = std::nullopt);
  // render_embedding((embed(a) + embed(b)) / 2, seed) per seed.
  CombinationJob clip_interpolation_baseline(const ImageRef& a, const ImageRef& b,
                                             std::vector<std::int64_t> seeds = kDefaultSeeds);

  bridge::Bridge& bridge() noexcept { return bridge_; }
  ContentStore& store() noexcept { return store_; }

 private:
  bridge::Bridge& bridge_;
  ContentStore& store_;
  Clock clock_;
  std::mutex mutex_;
  std::uint64_t sequence_;
};

// Bounded job queue. Workers take jobs in submission order; state changes
// happen under one lock, so pollers only ever see queued -> running ->
// done/failed. Terminal jobs are appended to the jobs manifest.
class JobQueue {
 public:
  JobQueue(Composer& composer, std::size_t concurrency = 1, ManifestWriter* manifest = nullptr);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  // Returns the queued job (already validated); PreconditionViolated on bad
  // seeds.
  CombinationJob submit(JobKind kind, const ImageRef& a, const ImageRef& b, std::vector<std::int64_t> seeds,
                        std::optional<std::string> parent_job = std::nullopt, std::string label_a = {},
                        std::string label_b = {});

  // Makes finished jobs from an earlier session visible to get().
  void restore(const CombinationJob& job);

  std::optional<CombinationJob> get(const std::string& id) const;
  std::vector<CombinationJob> list() const;

  // Blocks until every submitted job is terminal.
  void wait_idle();
  // Finishes queued work, then stops the workers. Idempotent.
  void shutdown();

 private:
  void worker();

  Composer& composer_;
  ManifestWriter* manifest_;
  mutable std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::deque<std::string> pending_;
  std::map<std::string, CombinationJob> jobs_;
  std::vector<std::string> order_;
  std::size_t active_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

std::vector<CombinationJob> read_jobs(const std::filesystem::path& path);

}  // namespace seeds::composer
