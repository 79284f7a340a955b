#include <httplib.h>

#include <algorithm>
#include <fstream>

#include "seeds/error.hpp"
#include "seeds/gateway.hpp"
#include "seeds/hash.hpp"

namespace seeds::gateway {

namespace {

using nlohmann::json;

const char* to_string(Origin o) { return o == Origin::seeded ? "seeded" : "promoted"; }

Origin parse_origin(const std::string& s) {
  if (s == "seeded") return Origin::seeded;
  if (s == "promoted") return Origin::promoted;
  fail(ErrorCode::CorruptLine, "unknown gallery origin " + s);
}

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json image_json(const ImageRef& ref) {
  return {{"id", ref.id},
          {"url", "/api/images/" + ref.id},
          {"width", ref.width},
          {"height", ref.height},
          {"content_hash", ref.content_hash}};
}

json entry_json(const GalleryEntry& e) {
  return {{"id", e.id},
          {"image", image_json(e.image)},
          {"origin", to_string(e.origin)},
          {"parent_job", opt(e.parent_job)},
          {"result_index", opt(e.result_index)}};
}

json job_json(const composer::CombinationJob& job) {
  json results = json::array();
  for (const auto& r : job.results) results.push_back(image_json(r));
  return {{"id", job.id},
          {"kind", composer::to_string(job.kind)},
          {"status", composer::to_string(job.status)},
          {"a_id", job.label_a},
          {"b_id", job.label_b},
          {"input_a", image_json(job.input_a)},
          {"input_b", image_json(job.input_b)},
          {"seeds", job.seeds},
          {"results", results},
          {"error", opt(job.error)},
          {"created_at", job.created_at},
          {"finished_at", opt(job.finished_at)},
          {"parent_job", opt(job.parent_job)}};
}

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::JobNotDone: return 409;
    case ErrorCode::IndexOutOfRange: return 422;
    case ErrorCode::PreconditionViolated: return 400;
    default: return 500;
  }
}

void reply(httplib::Response& res, int status, json body) {
  body["api_version"] = kApiVersion;
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  reply(res, status, {{"error", {{"code", code}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
  try {
    json body = json::parse(req.body);
    require(body.is_object(), ErrorCode::PreconditionViolated, "request body must be a JSON object");
    return body;
  } catch (const json::exception&) {
    fail(ErrorCode::PreconditionViolated, "request body is not valid JSON");
  }
}

std::uint64_t restored_job_count(const std::filesystem::path& path) {
  return composer::read_jobs(path).size();
}

}  // namespace

json to_json(const GalleryEntry& e) {
  return {{"id", e.id},
          {"image", e.image},
          {"origin", to_string(e.origin)},
          {"parent_job", opt(e.parent_job)},
          {"result_index", opt(e.result_index)}};
}

GalleryEntry gallery_entry_from_json(const json& j) {
  GalleryEntry e;
  e.id = j.at("id").get<std::string>();
  e.image = j.at("image").get<ImageRef>();
  e.origin = parse_origin(j.at("origin").get<std::string>());
  if (j.contains("parent_job") && !j["parent_job"].is_null()) e.parent_job = j["parent_job"].get<std::string>();
  if (j.contains("result_index") && !j["result_index"].is_null())
    e.result_index = j["result_index"].get<std::size_t>();
  return e;
}

// ---------------------------------------------------------------------------

Gallery::Gallery(std::filesystem::path manifest) : writer_(manifest, kGallerySchema, kGalleryVersion) {
  const auto read = read_manifest(manifest, kGallerySchema, kGalleryVersion,
                                  [](const json& j) { gallery_entry_from_json(j); });
  for (const auto& j : read.records) entries_.push_back(gallery_entry_from_json(j));
}

GalleryEntry Gallery::append(GalleryEntry entry) {
  // Caller holds the lock.
  std::string key = entry.image.id + "|" + to_string(entry.origin) + "|" + std::to_string(entries_.size());
  if (entry.parent_job) key += "|" + *entry.parent_job + "|" + std::to_string(*entry.result_index);
  entry.id = "g-" + sha256_hex(key).substr(0, 16);
  writer_.append(to_json(entry));
  entries_.push_back(entry);
  return entry;
}

GalleryEntry Gallery::add_seeded(const ImageRef& image) {
  std::lock_guard lock(mutex_);
  for (const auto& e : entries_)
    if (e.origin == Origin::seeded && e.image.id == image.id) return e;
  GalleryEntry e;
  e.image = image;
  e.origin = Origin::seeded;
  return append(std::move(e));
}

GalleryEntry Gallery::add_promoted(const composer::CombinationJob& job, std::size_t index) {
  require(job.status == composer::JobStatus::done, ErrorCode::PreconditionViolated, "job is not done");
  require(index < job.results.size(), ErrorCode::PreconditionViolated, "result index out of range");
  std::lock_guard lock(mutex_);
  GalleryEntry e;
  e.image = job.results[index];
  e.origin = Origin::promoted;
  e.parent_job = job.id;
  e.result_index = index;
  return append(std::move(e));
}

std::optional<GalleryEntry> Gallery::find(const std::string& id) const {
  std::lock_guard lock(mutex_);
  for (const auto& e : entries_)
    if (e.id == id) return e;
  return std::nullopt;
}

std::vector<GalleryEntry> Gallery::list() const {
  std::lock_guard lock(mutex_);
  return entries_;
}

// ---------------------------------------------------------------------------

void check_store_writable(const std::filesystem::path& root) {
  std::error_code ec;
  std::filesystem::create_directories(root, ec);
  const auto probe = root / ".write-probe";
  {
    std::ofstream out(probe);
    require(!ec && static_cast<bool>(out << "ok"), ErrorCode::StoreUnwritable,
            "store directory " + root.string() + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

Service::Service(ContentStore& store, bridge::Bridge& bridge, ServiceConfig config, composer::Clock clock)
    : store_((check_store_writable(store.root()), store)),
      config_(std::move(config)),
      gallery_(store.manifest_path("gallery")),
      jobs_manifest_(store.manifest_path("jobs"), composer::kJobSchema, composer::kJobVersion),
      composer_(bridge, store, std::move(clock), restored_job_count(store.manifest_path("jobs"))),
      queue_(composer_, config_.job_concurrency, &jobs_manifest_),
      server_(std::make_unique<httplib::Server>()) {
  for (const auto& job : composer::read_jobs(store.manifest_path("jobs"))) queue_.restore(job);
  // httplib also sets SO_REUSEPORT by default, which would let a second
  // server share a port that is already serving.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  routes();
}

Service::~Service() { stop(); }

int Service::bind() {
  if (port_ >= 0) return port_;
  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
    require(port_ > 0, ErrorCode::PortInUse, "could not bind any port on " + config_.host);
  } else {
    require(server_->bind_to_port(config_.host, config_.port), ErrorCode::PortInUse,
            "port " + std::to_string(config_.port) + " on " + config_.host + " is in use");
    port_ = config_.port;
  }
  return port_;
}

void Service::start() {
  bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void Service::stop() {
  std::lock_guard lock(stop_mutex_);
  if (stopped_.exchange(true)) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  queue_.shutdown();
}

std::vector<GalleryEntry> Service::seed_gallery(const std::filesystem::path& dir) {
  require(std::filesystem::is_directory(dir), ErrorCode::NotFound, "gallery seed directory " + dir.string() + " not found");
  std::vector<std::filesystem::path> files;
  for (const auto& f : std::filesystem::directory_iterator(dir)) {
    if (!f.is_regular_file()) continue;
    auto ext = f.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<GalleryEntry> out;
  for (const auto& f : files) out.push_back(gallery_.add_seeded(store_.import_file(f)));
  return out;
}

GalleryEntry Service::promote(const std::string& job_id, std::size_t index) {
  const auto job = queue_.get(job_id);
  require(job.has_value(), ErrorCode::NotFound, "no job " + job_id);
  require(job->status == composer::JobStatus::done, ErrorCode::JobNotDone,
          "job " + job_id + " is " + composer::to_string(job->status));
  require(index < job->results.size(), ErrorCode::IndexOutOfRange,
          "result index " + std::to_string(index) + " out of range for job " + job_id);
  return gallery_.add_promoted(*job, index);
}

void Service::routes() {
  auto guarded = [](auto handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        reply_error(res, http_status(e.code()), std::string(seeds::to_string(e.code())), e.what());
      } catch (const std::exception& e) {
        reply_error(res, 500, "Internal", e.what());
      }
    };
  };

  server_->Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
                 reply(res, 200, {{"status", "ok"}});
               }));

  server_->Get("/api/gallery", guarded([this](const httplib::Request&, httplib::Response& res) {
                 json entries = json::array();
                 for (const auto& e : gallery_.list()) entries.push_back(entry_json(e));
                 reply(res, 200, {{"entries", entries}});
               }));

  server_->Get(R"(/api/images/([0-9a-f]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto ref = store_.find(req.matches[1]);
                 require(ref.has_value(), ErrorCode::NotFound, "no image " + std::string(req.matches[1]));
                 const auto bytes = store_.read_bytes(*ref);
                 const bool png = sniff_format(bytes) == ImageFormat::png;
                 res.status = 200;
                 res.set_content(std::string(bytes.begin(), bytes.end()), png ? "image/png" : "image/jpeg");
               }));

  server_->Post("/api/combine", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  require(body.contains("a_id") && body["a_id"].is_string() && body.contains("b_id") &&
                              body["b_id"].is_string(),
                          ErrorCode::PreconditionViolated, "a_id and b_id are required strings");
                  const std::string a_id = body["a_id"], b_id = body["b_id"];
                  std::vector<std::int64_t> seeds = composer::kDefaultSeeds;
                  if (body.contains("seeds") && !body["seeds"].is_null()) {
                    require(body["seeds"].is_array(), ErrorCode::PreconditionViolated, "seeds must be an array");
                    try {
                      seeds = body["seeds"].get<std::vector<std::int64_t>>();
                    } catch (const json::exception&) {
                      fail(ErrorCode::PreconditionViolated, "seeds must be integers");
                    }
                  }
                  const auto a = gallery_.find(a_id);
                  const auto b = gallery_.find(b_id);
                  require(a.has_value(), ErrorCode::NotFound, "no gallery entry " + a_id);
                  require(b.has_value(), ErrorCode::NotFound, "no gallery entry " + b_id);
                  const bool branch = a->origin == Origin::promoted;
                  const auto job = queue_.submit(branch ? composer::JobKind::branch : composer::JobKind::combine,
                                                 a->image, b->image, std::move(seeds),
                                                 branch ? a->parent_job : std::nullopt, a_id, b_id);
                  reply(res, 202, {{"job", job_json(job)}});
                }));

  server_->Get("/api/jobs", guarded([this](const httplib::Request&, httplib::Response& res) {
                 json jobs = json::array();
                 for (const auto& j : queue_.list()) jobs.push_back(job_json(j));
                 reply(res, 200, {{"jobs", jobs}});
               }));

  server_->Get(R"(/api/jobs/([A-Za-z0-9-]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 const auto job = queue_.get(req.matches[1]);
                 require(job.has_value(), ErrorCode::NotFound, "no job " + std::string(req.matches[1]));
                 reply(res, 200, {{"job", job_json(*job)}});
               }));

  server_->Post("/api/promote", guarded([this](const httplib::Request& req, httplib::Response& res) {
                  const json body = parse_body(req);
                  require(body.contains("job_id") && body["job_id"].is_string(), ErrorCode::PreconditionViolated,
                          "job_id is a required string");
                  require(body.contains("index") && body["index"].is_number_integer(), ErrorCode::PreconditionViolated,
                          "index is a required integer");
                  const auto index = body["index"].get<std::int64_t>();
                  require(index >= 0, ErrorCode::IndexOutOfRange, "index must be non-negative");
                  const auto entry = promote(body["job_id"].get<std::string>(), static_cast<std::size_t>(index));
                  reply(res, 201, {{"entry", entry_json(entry)}});
                }));

  server_->set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) reply_error(res, res.status, "NotFound", "no such endpoint");
  });
}

}  // namespace seeds::gateway
