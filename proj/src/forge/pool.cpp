#include <optional>

#include "seeds/error.hpp"
#include "seeds/forge.hpp"
#include "seeds/workers.hpp"

namespace seeds::forge {

namespace {

struct PlannedPrompt {
  std::string prompt;
  std::string strategy;
  std::string origin;
};

std::string fill(const std::string& pattern, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < pattern.size()) {
    const auto open = pattern.find('{', pos);
    if (open == std::string::npos) {
      out += pattern.substr(pos);
      break;
    }
    const auto close = pattern.find('}', open);
    require(close != std::string::npos, ErrorCode::PreconditionViolated, "unterminated slot in template: " + pattern);
    const std::string name = pattern.substr(open + 1, close - open - 1);
    const auto it = values.find(name);
    require(it != values.end(), ErrorCode::PreconditionViolated, "template slot {" + name + "} has no values");
    out += pattern.substr(pos, open - pos);
    out += it->second;
    pos = close + 1;
  }
  return out;
}

}  // namespace

std::vector<std::string> expand_template(const PromptTemplate& t) {
  for (const auto& [name, values] : t.slots) {
    require(!values.empty(), ErrorCode::PreconditionViolated, "template slot {" + name + "} is empty");
    require(t.pattern.find("{" + name + "}") != std::string::npos, ErrorCode::PreconditionViolated,
            "slot {" + name + "} does not appear in template: " + t.pattern);
  }
  // Odometer over the slots in key order; the last slot varies fastest.
  std::vector<std::string> out;
  std::vector<std::size_t> digit(t.slots.size(), 0);
  while (true) {
    std::map<std::string, std::string> values;
    std::size_t d = 0;
    for (const auto& [name, options] : t.slots) values[name] = options[digit[d++]];
    out.push_back(fill(t.pattern, values));

    std::size_t pos = digit.size();
    auto slot = t.slots.rbegin();
    for (; pos > 0; --pos, ++slot) {
      if (++digit[pos - 1] < slot->second.size()) break;
      digit[pos - 1] = 0;
    }
    if (pos == 0) break;
  }
  return out;
}

PoolSpec PoolSpec::from_json(const nlohmann::json& j) {
  PoolSpec spec;
  spec.templated.clear();
  for (const auto& t : j.value("templated", nlohmann::json::array())) {
    PromptTemplate pt;
    pt.pattern = t.at("pattern").get<std::string>();
    pt.slots = t.value("slots", std::map<std::string, std::vector<std::string>>{});
    spec.templated.push_back(std::move(pt));
  }
  spec.vague = j.value("vague", std::vector<std::string>{});
  spec.variants_per_vague = j.value("variants_per_vague", spec.variants_per_vague);
  spec.generator_seeds = j.value("generator_seeds", spec.generator_seeds);
  spec.target_size = j.value("target_size", spec.target_size);
  return spec;
}

nlohmann::json PoolSpec::to_json() const {
  nlohmann::json templ = nlohmann::json::array();
  for (const auto& t : templated) templ.push_back({{"pattern", t.pattern}, {"slots", t.slots}});
  return {{"templated", templ},
          {"vague", vague},
          {"variants_per_vague", variants_per_vague},
          {"generator_seeds", generator_seeds},
          {"target_size", target_size}};
}

PoolSpec default_pool_spec() {
  // Representative only: multi-attribute objects in context, plus open-ended
  // prompts that the expander turns into richer variants.
  PoolSpec spec;
  spec.templated.push_back({"a {color} {material} {shape} {context}",
                            {{"color", {"crimson", "teal"}},
                             {"material", {"glass", "woven wicker"}},
                             {"shape", {"teapot", "armchair"}},
                             {"context", {"on a marble plinth"}}}});
  spec.vague = {"a place that never was", "a creature from a dream"};
  spec.variants_per_vague = 4;
  spec.generator_seeds = {0};
  spec.target_size = 16;
  return spec;
}

nlohmann::json to_json(const PoolEntry& e) {
  return {{"image", e.image}, {"prompt", e.prompt}, {"strategy", e.strategy}, {"origin", e.origin}, {"seed", e.seed}};
}

PoolEntry pool_entry_from_json(const nlohmann::json& j) {
  PoolEntry e;
  e.image = j.at("image").get<ImageRef>();
  e.prompt = j.at("prompt").get<std::string>();
  e.strategy = j.at("strategy").get<std::string>();
  e.origin = j.at("origin").get<std::string>();
  e.seed = j.at("seed").get<std::int64_t>();
  return e;
}

PoolBuild build_pool(const PoolSpec& spec, bridge::Bridge& bridge, ManifestWriter* manifest, std::size_t workers) {
  require(!spec.templated.empty() || !spec.vague.empty(), ErrorCode::PreconditionViolated,
          "pool spec needs at least one template or vague prompt");
  require(!spec.generator_seeds.empty(), ErrorCode::PreconditionViolated, "pool spec needs a generator seed");
  require(spec.vague.empty() || spec.variants_per_vague >= 1, ErrorCode::PreconditionViolated,
          "variants_per_vague must be at least 1");

  PoolBuild build;
  std::vector<PlannedPrompt> prompts;
  for (const auto& t : spec.templated)
    for (auto& p : expand_template(t)) prompts.push_back({std::move(p), "templated", t.pattern});
  for (const auto& v : spec.vague) {
    try {
      for (auto& p : bridge.expand_prompt(v, spec.variants_per_vague)) prompts.push_back({std::move(p), "vague", v});
    } catch (const Error& e) {
      build.failures.push_back("expand \"" + v + "\": " + e.what());
      log_warning(build.failures.back());
    }
  }

  const std::size_t n_seeds = spec.generator_seeds.size();
  const std::size_t total = prompts.size() * n_seeds;
  std::vector<std::optional<PoolEntry>> slots(total);
  std::vector<std::string> errors(total);
  run_bounded(total, workers, [&](std::size_t i) {
    const PlannedPrompt& p = prompts[i / n_seeds];
    const std::int64_t seed = spec.generator_seeds[i % n_seeds];
    try {
      slots[i] = PoolEntry{bridge.text_to_image(p.prompt, seed), p.prompt, p.strategy, p.origin, seed};
    } catch (const Error& e) {
      errors[i] = "generate \"" + p.prompt + "\" seed " + std::to_string(seed) + ": " + e.what();
    }
  });

  for (std::size_t i = 0; i < total; ++i) {
    if (!slots[i]) {
      build.failures.push_back(errors[i]);
      log_warning(errors[i]);
      continue;
    }
    if (manifest) manifest->append(to_json(*slots[i]));
    build.entries.push_back(std::move(*slots[i]));
  }
  return build;
}

std::vector<PoolEntry> read_pool(const std::filesystem::path& path, std::size_t* corrupt) {
  const auto read = read_manifest(path, kPoolSchema, kPoolVersion, [](const nlohmann::json& j) { pool_entry_from_json(j); });
  for (const auto& w : read.warnings) log_warning(w);
  if (corrupt) *corrupt = read.corrupt_lines;
  std::vector<PoolEntry> out;
  for (const auto& j : read.records) out.push_back(pool_entry_from_json(j));
  return out;
}

}  // namespace seeds::forge
