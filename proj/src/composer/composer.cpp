#include "seeds/composer.hpp"

#include <chrono>
#include <ctime>
#include <set>

#include "seeds/error.hpp"
#include "seeds/forge.hpp"
#include "seeds/hash.hpp"
#include "seeds/prompts.hpp"

namespace seeds::composer {

namespace {

JobStatus parse_status(const std::string& s) {
  if (s == "queued") return JobStatus::queued;
  if (s == "running") return JobStatus::running;
  if (s == "done") return JobStatus::done;
  if (s == "failed") return JobStatus::failed;
  fail(ErrorCode::CorruptLine, "unknown job status " + s);
}

JobKind parse_kind(const std::string& s) {
  if (s == "combine") return JobKind::combine;
  if (s == "branch") return JobKind::branch;
  if (s == "clip_interpolation") return JobKind::clip_interpolation;
  fail(ErrorCode::CorruptLine, "unknown job kind " + s);
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<std::string>();
}

}  // namespace

const char* to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued: return "queued";
    case JobStatus::running: return "running";
    case JobStatus::done: return "done";
    case JobStatus::failed: return "failed";
  }
  return "failed";
}

const char* to_string(JobKind k) {
  switch (k) {
    case JobKind::combine: return "combine";
    case JobKind::branch: return "branch";
    case JobKind::clip_interpolation: return "clip_interpolation";
  }
  return "combine";
}

nlohmann::json to_json(const CombinationJob& job) {
  return {{"id", job.id},
          {"kind", to_string(job.kind)},
          {"input_a", job.input_a},
          {"input_b", job.input_b},
          {"seeds", job.seeds},
          {"status", to_string(job.status)},
          {"results", job.results},
          {"error", optional_json(job.error)},
          {"created_at", job.created_at},
          {"finished_at", optional_json(job.finished_at)},
          {"parent_job", optional_json(job.parent_job)},
          {"label_a", job.label_a},
          {"label_b", job.label_b}};
}

CombinationJob job_from_json(const nlohmann::json& j) {
  CombinationJob job;
  job.id = j.at("id").get<std::string>();
  job.kind = parse_kind(j.at("kind").get<std::string>());
  job.input_a = j.at("input_a").get<ImageRef>();
  job.input_b = j.at("input_b").get<ImageRef>();
  job.seeds = j.at("seeds").get<std::vector<std::int64_t>>();
  job.status = parse_status(j.at("status").get<std::string>());
  job.results = j.at("results").get<std::vector<ImageRef>>();
  job.error = optional_string(j, "error");
  job.created_at = j.at("created_at").get<std::string>();
  job.finished_at = optional_string(j, "finished_at");
  job.parent_job = optional_string(j, "parent_job");
  job.label_a = j.value("label_a", "");
  job.label_b = j.value("label_b", "");
  return job;
}

void validate_seeds(std::span<const std::int64_t> seeds) {
  require(!seeds.empty(), ErrorCode::PreconditionViolated, "at least one seed is required");
  require(std::set<std::int64_t>(seeds.begin(), seeds.end()).size() == seeds.size(), ErrorCode::PreconditionViolated,
          "seeds must be pairwise distinct");
}

Embedding embedding_midpoint(const Embedding& a, const Embedding& b) {
  require(a.dim() == b.dim(), ErrorCode::DimMismatch, "embeddings differ in dimension");
  std::vector<double> mid(a.dim());
  for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = (a[i] + b[i]) / 2.0;
  return Embedding(std::move(mid));
}

Clock system_clock() {
  return [] {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
  };
}

Clock fixed_clock(std::string timestamp) {
  return [t = std::move(timestamp)] { return t; };
}

// ---------------------------------------------------------------------------

Composer::Composer(bridge::Bridge& bridge, ContentStore& store, Clock clock, std::uint64_t first_sequence)
    : bridge_(bridge), store_(store), clock_(std::move(clock)), sequence_(first_sequence) {}

CombinationJob Composer::prepare(JobKind kind, const ImageRef& a, const ImageRef& b, std::vector<std::int64_t> seeds,
                                 std::optional<std::string> parent_job) {
  validate_seeds(seeds);
  CombinationJob job;
  job.kind = kind;
  job.input_a = a;
  job.input_b = b;
  job.seeds = std::move(seeds);
  job.parent_job = std::move(parent_job);
  std::uint64_t seq = 0;
  {
    std::lock_guard lock(mutex_);
    seq = sequence_++;
    job.created_at = clock_();
  }
  std::string key = std::string(to_string(kind)) + "|" + a.id + "|" + b.id + "|" + std::to_string(seq);
  for (auto s : job.seeds) key += "|" + std::to_string(s);
  job.id = "j-" + sha256_hex(key).substr(0, 16);
  return job;
}

void Composer::execute(CombinationJob& job) {
  job.results.clear();
  job.error.reset();
  std::vector<std::string> failures;
  try {
    if (job.kind == JobKind::clip_interpolation) {
      const Embedding mid = embedding_midpoint(bridge_.embed_image(job.input_a), bridge_.embed_image(job.input_b));
      for (auto seed : job.seeds) {
        try {
          job.results.push_back(bridge_.render_embedding(mid, seed));
        } catch (const Error& e) {
          failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
        }
      }
    } else {
      const ImageRef canvas = forge::compose_canvas(job.input_a, job.input_b, store_);
      const std::string prompt(prompts::combination_prompt());
      for (auto seed : job.seeds) {
        try {
          job.results.push_back(bridge_.generate_combination(canvas, prompt, seed));
        } catch (const Error& e) {
          failures.push_back("seed " + std::to_string(seed) + ": " + e.what());
        }
      }
    }
  } catch (const Error& e) {
    failures.push_back(e.what());
  }
  if (failures.empty()) {
    job.status = JobStatus::done;
  } else {
    job.status = JobStatus::failed;
    std::string msg;
    for (const auto& f : failures) msg += (msg.empty() ? "" : "; ") + f;
    job.error = msg;
  }
  std::lock_guard lock(mutex_);
  job.finished_at = clock_();
}

CombinationJob Composer::combine(const ImageRef& a, const ImageRef& b, std::vector<std::int64_t> seeds) {
  auto job = prepare(JobKind::combine, a, b, std::move(seeds));
  execute(job);
  return job;
}

CombinationJob Composer::branch(const ImageRef& result, const ImageRef& other, std::vector<std::int64_t> seeds,
                                std::optional<std::string> parent_job) {
  auto job = prepare(JobKind::branch, result, other, std::move(seeds), std::move(parent_job));
  execute(job);
  return job;
}

CombinationJob Composer::clip_interpolation_baseline(const ImageRef& a, const ImageRef& b,
                                                     std::vector<std::int64_t> seeds) {
  auto job = prepare(JobKind::clip_interpolation, a, b, std::move(seeds));
  execute(job);
  return job;
}

// ---------------------------------------------------------------------------

JobQueue::JobQueue(Composer& composer, std::size_t concurrency, ManifestWriter* manifest)
    : composer_(composer), manifest_(manifest) {
  require(concurrency >= 1, ErrorCode::PreconditionViolated, "job concurrency must be at least 1");
  for (std::size_t i = 0; i < concurrency; ++i) workers_.emplace_back([this] { worker(); });
}

JobQueue::~JobQueue() { shutdown(); }

CombinationJob JobQueue::submit(JobKind kind, const ImageRef& a, const ImageRef& b, std::vector<std::int64_t> seeds,
                                std::optional<std::string> parent_job, std::string label_a, std::string label_b) {
  CombinationJob job = composer_.prepare(kind, a, b, std::move(seeds), std::move(parent_job));
  job.label_a = std::move(label_a);
  job.label_b = std::move(label_b);
  {
    std::lock_guard lock(mutex_);
    require(!stopping_, ErrorCode::PreconditionViolated, "job queue is shutting down");
    jobs_[job.id] = job;
    order_.push_back(job.id);
    pending_.push_back(job.id);
  }
  wake_.notify_one();
  return job;
}

void JobQueue::restore(const CombinationJob& job) {
  require(job.terminal(), ErrorCode::PreconditionViolated, "only finished jobs can be restored");
  std::lock_guard lock(mutex_);
  if (jobs_.emplace(job.id, job).second) order_.push_back(job.id);
}

std::optional<CombinationJob> JobQueue::get(const std::string& id) const {
  std::lock_guard lock(mutex_);
  const auto it = jobs_.find(id);
  if (it == jobs_.end()) return std::nullopt;
  return it->second;
}

std::vector<CombinationJob> JobQueue::list() const {
  std::lock_guard lock(mutex_);
  std::vector<CombinationJob> out;
  for (const auto& id : order_) out.push_back(jobs_.at(id));
  return out;
}

void JobQueue::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [this] { return pending_.empty() && active_ == 0; });
}

void JobQueue::shutdown() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& w : workers_)
    if (w.joinable()) w.join();
  workers_.clear();
}

void JobQueue::worker() {
  while (true) {
    CombinationJob job;
    {
      std::unique_lock lock(mutex_);
      wake_.wait(lock, [this] { return stopping_ || !pending_.empty(); });
      if (pending_.empty()) return;  // stopping and drained
      const std::string id = pending_.front();
      pending_.pop_front();
      ++active_;
      jobs_[id].status = JobStatus::running;
      job = jobs_[id];
    }
    composer_.execute(job);
    if (manifest_) {
      try {
        manifest_->append(to_json(job));
      } catch (const Error& e) {
        job.status = JobStatus::failed;
        job.error = std::string("could not record job: ") + e.what();
      }
    }
    {
      std::lock_guard lock(mutex_);
      jobs_[job.id] = job;
      --active_;
    }
    idle_.notify_all();
  }
}

std::vector<CombinationJob> read_jobs(const std::filesystem::path& path) {
  const auto read = read_manifest(path, kJobSchema, kJobVersion, [](const nlohmann::json& j) { job_from_json(j); });
  std::vector<CombinationJob> out;
  for (const auto& j : read.records) out.push_back(job_from_json(j));
  return out;
}

}  // namespace seeds::composer
