#include "seeds/manifest.hpp"

#include <sstream>

#include "seeds/error.hpp"
#include "seeds/image.hpp"

namespace seeds {

namespace {

nlohmann::json header(const std::string& kind, int version) { return {{"schema", kind}, {"version", version}}; }

}  // namespace

ManifestWriter::ManifestWriter(std::filesystem::path path, std::string kind, int version)
    : path_(std::move(path)), kind_(std::move(kind)), version_(version) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
  if (!fresh) {
    // Validates the existing header before appending to it.
    read_manifest(path_, kind_, version_);
  }
  out_.open(path_, std::ios::app | std::ios::binary);
  require(static_cast<bool>(out_), ErrorCode::StoreUnwritable, "cannot open manifest " + path_.string());
  if (fresh) {
    out_ << header(kind_, version_).dump() << '\n';
    out_.flush();
  }
}

void ManifestWriter::append(const nlohmann::json& record) {
  const std::string line = record.dump();
  std::lock_guard lock(mutex_);
  out_ << line << '\n';
  out_.flush();
  require(static_cast<bool>(out_), ErrorCode::StoreUnwritable, "write to manifest " + path_.string() + " failed");
}

ManifestRead read_manifest(const std::filesystem::path& path, const std::string& kind, int version,
                           const std::function<void(const nlohmann::json&)>& validate) {
  ManifestRead result;
  if (!std::filesystem::exists(path)) return result;
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open manifest " + path.string());

  std::string line;
  std::size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      if (!saw_header) fail(ErrorCode::SchemaVersionMismatch, path.string() + ": unreadable manifest header");
      ++result.corrupt_lines;
      result.warnings.push_back(path.string() + ":" + std::to_string(line_no) + ": not valid JSON, skipped");
      continue;
    }
    if (!saw_header) {
      saw_header = true;
      require(j.is_object() && j.value("schema", "") == kind && j.value("version", -1) == version,
              ErrorCode::SchemaVersionMismatch,
              path.string() + ": expected schema " + kind + " v" + std::to_string(version) + ", found " + j.dump());
      continue;
    }
    if (validate) {
      try {
        validate(j);
      } catch (const std::exception& e) {
        ++result.corrupt_lines;
        result.warnings.push_back(path.string() + ":" + std::to_string(line_no) + ": " + e.what() + ", skipped");
        continue;
      }
    }
    result.records.push_back(std::move(j));
  }
  return result;
}

void write_manifest(const std::filesystem::path& path, const std::string& kind, int version,
                    const std::vector<nlohmann::json>& records) {
  std::ostringstream out;
  out << header(kind, version).dump() << '\n';
  for (const auto& r : records) out << r.dump() << '\n';
  const std::string text = out.str();
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace seeds
