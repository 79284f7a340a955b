#include "seeds/error.hpp"
#include "seeds/forge.hpp"
#include "seeds/hash.hpp"
#include "seeds/workers.hpp"

namespace seeds::forge {

namespace {

const char* status_name(TripletStatus s) {
  switch (s) {
    case TripletStatus::ok: return "ok";
    case TripletStatus::skipped_degenerate: return "skipped_degenerate";
    case TripletStatus::failed: return "failed";
  }
  return "failed";
}

TripletStatus parse_status(const std::string& s) {
  if (s == "ok") return TripletStatus::ok;
  if (s == "skipped_degenerate") return TripletStatus::skipped_degenerate;
  if (s == "failed") return TripletStatus::failed;
  fail(ErrorCode::CorruptLine, "unknown triplet status " + s);
}

bool is_degenerate(ErrorCode code) {
  return code == ErrorCode::NoActiveFeatures || code == ErrorCode::DegenerateInput || code == ErrorCode::ZeroDirection;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

nlohmann::json params_to_json(const decomposer::DecomposeParams& p) {
  return {{"top_k", p.top_k},
          {"edit_step", p.edit_step},
          {"keep_fraction", p.keep_fraction},
          {"renormalize", p.renormalize},
          {"rng_seed", p.rng_seed}};
}

decomposer::DecomposeParams params_from_json(const nlohmann::json& j) {
  decomposer::DecomposeParams p;
  p.top_k = j.at("top_k").get<std::size_t>();
  p.edit_step = j.at("edit_step").get<double>();
  p.keep_fraction = j.at("keep_fraction").get<double>();
  p.renormalize = j.at("renormalize").get<bool>();
  p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  return p;
}

nlohmann::json to_json(const TripletRecord& r) {
  nlohmann::json j = {{"id", r.id},
                      {"comb", r.comb},
                      {"params", params_to_json(r.params)},
                      {"decomposition_summary",
                       {{"cluster_a_size", r.summary.cluster_a_size},
                        {"cluster_b_size", r.summary.cluster_b_size},
                        {"discarded", r.summary.discarded},
                        {"direction_norm", r.summary.direction_norm},
                        {"indices_a", r.summary.indices_a},
                        {"indices_b", r.summary.indices_b}}},
                      {"render_seeds", r.render_seeds},
                      {"status", status_name(r.status)},
                      {"resize_filter", r.resize_filter}};
  if (r.a) j["a"] = *r.a;
  if (r.b) j["b"] = *r.b;
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

TripletRecord triplet_from_json(const nlohmann::json& j) {
  TripletRecord r;
  r.id = j.at("id").get<std::string>();
  r.comb = j.at("comb").get<ImageRef>();
  if (j.contains("a")) r.a = j["a"].get<ImageRef>();
  if (j.contains("b")) r.b = j["b"].get<ImageRef>();
  r.params = params_from_json(j.at("params"));
  const auto& s = j.at("decomposition_summary");
  r.summary.cluster_a_size = s.at("cluster_a_size").get<std::size_t>();
  r.summary.cluster_b_size = s.at("cluster_b_size").get<std::size_t>();
  r.summary.discarded = s.at("discarded").get<std::size_t>();
  r.summary.direction_norm = s.at("direction_norm").get<double>();
  r.summary.indices_a = s.at("indices_a").get<std::vector<std::size_t>>();
  r.summary.indices_b = s.at("indices_b").get<std::vector<std::size_t>>();
  r.render_seeds = j.at("render_seeds").get<std::array<std::int64_t, 2>>();
  r.status = parse_status(j.at("status").get<std::string>());
  r.error = j.value("error", "");
  r.resize_filter = j.value("resize_filter", CanvasLayout::kResizeFilter);
  if (r.status == TripletStatus::ok)
    require(r.a && r.b, ErrorCode::CorruptLine, "ok triplet " + r.id + " lacks an edited image");
  return r;
}

TripletRecord mint_triplet(const ImageRef& img, const sae::SaeModel& model, const decomposer::DecomposeParams& params,
                           bridge::Bridge& bridge, std::array<std::int64_t, 2> render_seeds) {
  TripletRecord r;
  r.comb = img;
  r.params = params;
  r.render_seeds = render_seeds;
  r.id = "t-" + sha256_hex(img.id + "|" + params_to_json(params).dump() + "|" + std::to_string(render_seeds[0]) +
                           "," + std::to_string(render_seeds[1]))
                    .substr(0, 16);
  try {
    const Embedding source = bridge.embed_image(img);
    const decomposer::Decomposition d = decomposer::decompose(model, source, params);
    r.summary = {d.split.indices_a.size(), d.split.indices_b.size(), d.split.discarded.size(), d.direction.norm(),
                 d.split.indices_a,        d.split.indices_b};
    ImageRef a = bridge.render_embedding(d.edited_a, render_seeds[0]);
    ImageRef b = bridge.render_embedding(d.edited_b, render_seeds[1]);
    if (a.content_hash == b.content_hash) {
      r.status = TripletStatus::skipped_degenerate;
      r.error = "both edits rendered to the same image";
      return r;
    }
    r.a = std::move(a);
    r.b = std::move(b);
    r.status = TripletStatus::ok;
  } catch (const Error& e) {
    r.status = is_degenerate(e.code()) ? TripletStatus::skipped_degenerate : TripletStatus::failed;
    r.error = e.what();
  }
  return r;
}

std::vector<TripletRecord> mint_dataset(std::span<const ImageRef> images, const sae::SaeModel& model,
                                        const MintOptions& options, bridge::Bridge& bridge,
                                        ManifestWriter* manifest) {
  decomposer::validate(options.base);
  std::vector<TripletRecord> out(images.size());
  run_bounded(images.size(), options.workers, [&](std::size_t i) {
    decomposer::DecomposeParams p = options.base;
    p.edit_step = decomposer::kEditStepPresets[mix(options.sampling_seed ^ mix(i)) % decomposer::kEditStepPresets.size()];
    const auto base = options.render_seed_base + 2 * static_cast<std::int64_t>(i);
    out[i] = mint_triplet(images[i], model, p, bridge, {base, base + 1});
  });
  for (const auto& r : out) {
    if (r.status != TripletStatus::ok) log_warning("triplet " + r.id + " " + status_name(r.status) + ": " + r.error);
    if (manifest) manifest->append(to_json(r));
  }
  return out;
}

std::vector<TripletRecord> read_triplets(const std::filesystem::path& path, std::size_t* corrupt) {
  const auto read =
      read_manifest(path, kTripletSchema, kTripletVersion, [](const nlohmann::json& j) { triplet_from_json(j); });
  for (const auto& w : read.warnings) log_warning(w);
  if (corrupt) *corrupt = read.corrupt_lines;
  std::vector<TripletRecord> out;
  for (const auto& j : read.records) out.push_back(triplet_from_json(j));
  return out;
}

}  // namespace seeds::forge
