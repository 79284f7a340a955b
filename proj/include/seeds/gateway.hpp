#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "seeds/bridge.hpp"
#include "seeds/composer.hpp"
#include "seeds/manifest.hpp"
#include "seeds/store.hpp"

namespace httplib {
class Server;
}

namespace seeds::gateway {

inline constexpr int kApiVersion = 1;

enum class Origin { seeded, promoted };

struct GalleryEntry {
  std::string id;
  ImageRef image;
  Origin origin = Origin::seeded;
  std::optional<std::string> parent_job;
  std::optional<std::size_t> result_index;

  bool operator==(const GalleryEntry&) const = default;
};

nlohmann::json to_json(const GalleryEntry& e);
GalleryEntry gallery_entry_from_json(const nlohmann::json& j);

inline constexpr const char* kGallerySchema = "seeds.gallery";
inline constexpr int kGalleryVersion = 1;

// Append-only gallery backed by a manifest. Entry ids are unique even when
// the same image is promoted twice.
class Gallery {
 public:
  explicit Gallery(std::filesystem::path manifest);

  // Adds an image once; seeding the same image again returns the entry
  // that already exists.
  GalleryEntry add_seeded(const ImageRef& image);
  // PreconditionViolated unless `job` is done and `index` is in range; the
  // gateway maps those cases to JobNotDone / IndexOutOfRange first.
  GalleryEntry add_promoted(const composer::CombinationJob& job, std::size_t index);

  std::optional<GalleryEntry> find(const std::string& id) const;
  std::vector<GalleryEntry> list() const;

 private:
  GalleryEntry append(GalleryEntry entry);

  mutable std::mutex mutex_;
  std::vector<GalleryEntry> entries_;
  ManifestWriter writer_;
};

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::size_t job_concurrency = 1;
};

// The exploration API:
//   GET  /api/health
//   GET  /api/gallery
//   GET  /api/images/{id}
//   POST /api/combine   {"a_id", "b_id", "seeds"?}
//   GET  /api/jobs       (all jobs, oldest first)
//   GET  /api/jobs/{id}
//   POST /api/promote   {"job_id", "index"}
// Every JSON body carries "api_version". Unknown request fields are
// ignored. Errors are {"api_version", "error": {"code", "message"}}.
class Service {
 public:
  Service(ContentStore& store, bridge::Bridge& bridge, ServiceConfig config = {},
          composer::Clock clock = composer::system_clock());
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds the listening socket; PortInUse when that fails. Returns the port.
  int bind();
  // Serves on a background thread (binding first if needed).
  void start();
  // Stops accepting requests, lets queued jobs finish, and joins. Idempotent.
  void stop();

  int port() const noexcept { return port_; }
  Gallery& gallery() noexcept { return gallery_; }
  composer::JobQueue& jobs() noexcept { return queue_; }

  // Imports every PNG/JPEG in `dir` (sorted by file name) as seeded entries.
  std::vector<GalleryEntry> seed_gallery(const std::filesystem::path& dir);

  // JobNotDone / IndexOutOfRange / NotFound.
  GalleryEntry promote(const std::string& job_id, std::size_t index);

 private:
  void routes();

  ContentStore& store_;
  ServiceConfig config_;
  Gallery gallery_;
  ManifestWriter jobs_manifest_;
  composer::Composer composer_;
  composer::JobQueue queue_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
  std::atomic<bool> stopped_{false};
  std::mutex stop_mutex_;
};

// Throws StoreUnwritable when files cannot be created under `root`.
void check_store_writable(const std::filesystem::path& root);

}  // namespace seeds::gateway
