#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "seeds/bridge.hpp"
#include "seeds/decomposer.hpp"
#include "seeds/manifest.hpp"
#include "seeds/sae.hpp"
#include "seeds/store.hpp"

namespace seeds::forge {

// ---------------------------------------------------------------------------
// Image pool
// ---------------------------------------------------------------------------

// "A {material} {shape} ..." style template; every combination of slot
// values is one prompt.
struct PromptTemplate {
  std::string pattern;
  std::map<std::string, std::vector<std::string>> slots;
};

std::vector<std::string> expand_template(const PromptTemplate& t);

struct PoolSpec {
  std::vector<PromptTemplate> templated;
  std::vector<std::string> vague;
  int variants_per_vague = 3;
  std::vector<std::int64_t> generator_seeds{0};
  std::size_t target_size = 16;  // informational; production runs used 2085

  static PoolSpec from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Representative multi-attribute templates plus a few vague seed prompts.
PoolSpec default_pool_spec();

struct PoolEntry {
  ImageRef image;
  std::string prompt;
  std::string strategy;  // "templated" or "vague"
  std::string origin;    // template pattern or the vague prompt it expands
  std::int64_t seed = 0;
};

nlohmann::json to_json(const PoolEntry& e);
PoolEntry pool_entry_from_json(const nlohmann::json& j);

inline constexpr const char* kPoolSchema = "seeds.pool";
inline constexpr int kPoolVersion = 1;

struct PoolBuild {
  std::vector<PoolEntry> entries;
  std::vector<std::string> failures;
};

// One image per (prompt, generator seed). Per-item bridge failures are
// logged and skipped. Entries come back in prompt-major, seed-minor order
// regardless of worker count; when `manifest` is given they are appended to
// it in that order.
PoolBuild build_pool(const PoolSpec& spec, bridge::Bridge& bridge, ManifestWriter* manifest = nullptr,
                     std::size_t workers = 4);

std::vector<PoolEntry> read_pool(const std::filesystem::path& path, std::size_t* corrupt = nullptr);

// ---------------------------------------------------------------------------
// Conditioning canvas
// ---------------------------------------------------------------------------

struct CanvasLayout {
  static constexpr int kSize = 1024;
  static constexpr int kTile = 512;
  static constexpr std::array<int, 2> kOriginA{0, 0};
  static constexpr std::array<int, 2> kOriginB{512, 512};
  static constexpr Rgb kFill = kWhite;
  static constexpr const char* kResizeFilter = "bilinear";

  static nlohmann::json to_json();
};

// White 1024x1024 canvas; `a` resized to 512x512 at the top-left, `b` at
// the bottom-right.
Image compose_canvas_image(const Image& a, const Image& b);
ImageRef compose_canvas(const ImageRef& a, const ImageRef& b, ContentStore& store);

// ---------------------------------------------------------------------------
// Triplets
// ---------------------------------------------------------------------------

enum class TripletStatus { ok, skipped_degenerate, failed };

struct DecompositionSummary {
  std::size_t cluster_a_size = 0;
  std::size_t cluster_b_size = 0;
  std::size_t discarded = 0;
  double direction_norm = 0.0;
  std::vector<std::size_t> indices_a;
  std::vector<std::size_t> indices_b;

  bool operator==(const DecompositionSummary&) const = default;
};

struct TripletRecord {
  std::string id;
  ImageRef comb;
  std::optional<ImageRef> a;
  std::optional<ImageRef> b;
  decomposer::DecomposeParams params;
  DecompositionSummary summary;
  std::array<std::int64_t, 2> render_seeds{0, 1};
  TripletStatus status = TripletStatus::ok;
  std::string error;
  std::string resize_filter = CanvasLayout::kResizeFilter;

  bool operator==(const TripletRecord&) const = default;
};

nlohmann::json params_to_json(const decomposer::DecomposeParams& p);
decomposer::DecomposeParams params_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TripletRecord& r);
TripletRecord triplet_from_json(const nlohmann::json& j);

inline constexpr const char* kTripletSchema = "seeds.triplets";
inline constexpr int kTripletVersion = 1;

// Embed -> decompose -> render both edited embeddings. Decomposer
// degeneracy yields a skipped_degenerate record; bridge errors yield a
// failed record carrying the message. Never throws for per-item problems.
TripletRecord mint_triplet(const ImageRef& img, const sae::SaeModel& model, const decomposer::DecomposeParams& params,
                           bridge::Bridge& bridge, std::array<std::int64_t, 2> render_seeds = {0, 1});

struct MintOptions {
  decomposer::DecomposeParams base;   // edit_step is resampled per item
  std::uint64_t sampling_seed = 0;    // drives the per-item edit_step choice
  std::int64_t render_seed_base = 0;  // item i renders with base+2i, base+2i+1
  std::size_t workers = 4;
};

// Item i uses edit_step kEditStepPresets[hash(sampling_seed, i) % 2]. One
// record per input image, in input order, whatever its status.
std::vector<TripletRecord> mint_dataset(std::span<const ImageRef> images, const sae::SaeModel& model,
                                        const MintOptions& options, bridge::Bridge& bridge,
                                        ManifestWriter* manifest = nullptr);

std::vector<TripletRecord> read_triplets(const std::filesystem::path& path, std::size_t* corrupt = nullptr);

}  // namespace seeds::forge
