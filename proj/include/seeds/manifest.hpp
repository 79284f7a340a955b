#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace seeds {

// Append-only JSON-lines manifest. The first line is a header
//   {"schema": "<kind>", "version": <n>}
// and every following line is one record. Records are written with sorted
// keys so equal records always serialise to equal bytes.
class ManifestWriter {
 public:
  ManifestWriter(std::filesystem::path path, std::string kind, int version);

  // Thread-safe; each call appends and flushes exactly one line.
  void append(const nlohmann::json& record);

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
  std::string kind_;
  int version_;
  std::mutex mutex_;
  std::ofstream out_;
};

struct ManifestRead {
  std::vector<nlohmann::json> records;
  std::size_t corrupt_lines = 0;
  std::vector<std::string> warnings;
};

// A missing or empty file reads as an empty manifest. Lines that fail to
// parse, or that `validate` rejects by throwing, are skipped and counted.
// A header naming another kind or version throws SchemaVersionMismatch.
ManifestRead read_manifest(const std::filesystem::path& path, const std::string& kind, int version,
                           const std::function<void(const nlohmann::json&)>& validate = {});

// Rewrites a whole manifest (header + records) atomically.
void write_manifest(const std::filesystem::path& path, const std::string& kind, int version,
                    const std::vector<nlohmann::json>& records);

}  // namespace seeds
