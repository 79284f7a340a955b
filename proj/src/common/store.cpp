#include "seeds/store.hpp"

#include <cstdlib>

#include "seeds/error.hpp"
#include "seeds/hash.hpp"

namespace seeds {

void to_json(nlohmann::json& j, const ImageRef& ref) {
  j = nlohmann::json{{"id", ref.id},
                     {"path", ref.path.generic_string()},
                     {"width", ref.width},
                     {"height", ref.height},
                     {"content_hash", ref.content_hash}};
}

void from_json(const nlohmann::json& j, ImageRef& ref) {
  ref.id = j.at("id").get<std::string>();
  ref.path = j.at("path").get<std::string>();
  ref.width = j.at("width").get<int>();
  ref.height = j.at("height").get<int>();
  ref.content_hash = j.at("content_hash").get<std::string>();
}

ContentStore::ContentStore(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_ / "images", ec);
  std::filesystem::create_directories(root_ / "manifests", ec);
  require(!ec && std::filesystem::is_directory(root_ / "images"), ErrorCode::StoreUnwritable,
          "cannot create store at " + root_.string());
}

std::filesystem::path ContentStore::manifest_path(const std::string& name) const {
  return root_ / "manifests" / (name + ".jsonl");
}

std::filesystem::path ContentStore::path_for(const std::string& hash, ImageFormat format) const {
  return std::filesystem::path("images") / hash.substr(0, 2) / (hash + (format == ImageFormat::jpeg ? ".jpg" : ".png"));
}

std::filesystem::path ContentStore::resolve(const ImageRef& ref) const {
  return ref.path.is_absolute() ? ref.path : root_ / ref.path;
}

ImageRef ContentStore::put(const Image& image) {
  const auto bytes = encode_png(image);
  const std::string hash = sha256_hex(bytes);
  const auto path = path_for(hash, ImageFormat::png);
  if (!std::filesystem::exists(root_ / path)) write_file_atomic(root_ / path, bytes);
  return {hash, path, image.width(), image.height(), hash};
}

ImageRef ContentStore::put_bytes(std::span<const std::uint8_t> bytes) {
  const Image decoded = decode_image(bytes);
  const std::string hash = sha256_hex(bytes);
  const auto path = path_for(hash, sniff_format(bytes));
  if (!std::filesystem::exists(root_ / path)) write_file_atomic(root_ / path, bytes);
  return {hash, path, decoded.width(), decoded.height(), hash};
}

ImageRef ContentStore::import_file(const std::filesystem::path& path) { return put_bytes(read_file_bytes(path)); }

std::optional<ImageRef> ContentStore::find(const std::string& id) const {
  if (id.size() != 64 || id.find_first_not_of("0123456789abcdef") != std::string::npos) return std::nullopt;
  for (ImageFormat f : {ImageFormat::png, ImageFormat::jpeg}) {
    const auto path = path_for(id, f);
    if (!std::filesystem::exists(root_ / path)) continue;
    const Image image = decode_image(read_file_bytes(root_ / path));
    return ImageRef{id, path, image.width(), image.height(), id};
  }
  return std::nullopt;
}

ImageRef ContentStore::get(const std::string& id) const {
  auto ref = find(id);
  require(ref.has_value(), ErrorCode::NotFound, "image " + id + " is not in the store");
  return *ref;
}

std::vector<std::uint8_t> ContentStore::read_bytes(const ImageRef& ref) const {
  const auto path = resolve(ref);
  require(std::filesystem::exists(path), ErrorCode::NotFound, "image file missing: " + path.string());
  auto bytes = read_file_bytes(path);
  require(sha256_hex(bytes) == ref.content_hash, ErrorCode::CorruptImage,
          "content hash mismatch for " + ref.path.string());
  return bytes;
}

Image ContentStore::load(const ImageRef& ref) const { return decode_image(read_bytes(ref)); }

std::filesystem::path ContentStore::resolve_root(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return *flag;
  if (const char* env = std::getenv("SEEDS_STORE"); env != nullptr && *env != '\0') return env;
  return "seeds-store";
}

}  // namespace seeds
