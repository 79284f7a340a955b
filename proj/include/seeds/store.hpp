#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seeds/image.hpp"

namespace seeds {

// A stored image. `id` is the SHA-256 of the file bytes, so it doubles as
// the content hash. `path` is relative to the store root.
struct ImageRef {
  std::string id;
  std::filesystem::path path;
  int width = 0;
  int height = 0;
  std::string content_hash;

  bool operator==(const ImageRef&) const = default;
};

void to_json(nlohmann::json& j, const ImageRef& ref);
void from_json(const nlohmann::json& j, ImageRef& ref);

// Content-addressed image directory:
//   <root>/images/<first two hex digits>/<sha256>.<png|jpg>
//   <root>/manifests/*.jsonl
// Writes are atomic (temp file + rename) and idempotent.
class ContentStore {
 public:
  explicit ContentStore(std::filesystem::path root);

  const std::filesystem::path& root() const noexcept { return root_; }
  std::filesystem::path manifest_path(const std::string& name) const;

  ImageRef put(const Image& image);
  // Validates that the bytes decode as PNG or JPEG before storing them.
  ImageRef put_bytes(std::span<const std::uint8_t> bytes);
  ImageRef import_file(const std::filesystem::path& path);

  std::filesystem::path resolve(const ImageRef& ref) const;

  std::optional<ImageRef> find(const std::string& id) const;
  ImageRef get(const std::string& id) const;  // NotFound when absent

  // Reads and re-hashes the bytes; CorruptImage on hash mismatch.
  std::vector<std::uint8_t> read_bytes(const ImageRef& ref) const;
  Image load(const ImageRef& ref) const;

  // Store root from an explicit flag, else $SEEDS_STORE, else "./seeds-store".
  static std::filesystem::path resolve_root(const std::optional<std::string>& flag);

 private:
  std::filesystem::path path_for(const std::string& hash, ImageFormat format) const;

  std::filesystem::path root_;
};

}  // namespace seeds
