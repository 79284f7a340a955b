#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "seeds/bridge.hpp"
#include "seeds/error.hpp"
#include "seeds/hash.hpp"

namespace seeds::bridge {

namespace {

std::string embedding_key(const Embedding& e, std::int64_t seed) {
  std::string key;
  key.reserve(e.dim() * 8 + 8);
  const auto append_u64 = [&key](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) key.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
  };
  for (double v : e.values()) append_u64(std::bit_cast<std::uint64_t>(v));
  append_u64(static_cast<std::uint64_t>(seed));
  return key;
}

std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

// Procedural 64x64 picture: a two-colour gradient with a few soft discs.
// Colours follow the leading embedding coordinates; layout follows the hash.
Image paint(const Embedding& e, std::uint64_t layout_seed) {
  std::mt19937_64 rng(layout_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto coord = [&e](std::size_t i) { return e.dim() == 0 ? 0.0 : e[i % e.dim()]; };
  const auto channel = [](double x) { return 127.5 + 127.5 * std::tanh(4.0 * x); };

  const Rgb top{to_byte(channel(coord(0))), to_byte(channel(coord(1))), to_byte(channel(coord(2)))};
  const Rgb bottom{to_byte(channel(coord(3))), to_byte(channel(coord(4))), to_byte(channel(coord(5)))};
  struct Disc {
    double cx, cy, r;
    Rgb color;
  };
  std::vector<Disc> discs;
  for (int d = 0; d < 3; ++d) {
    const double cx = unit(rng) * kMockImageSize;
    const double cy = unit(rng) * kMockImageSize;
    const double r = 6.0 + unit(rng) * 14.0;
    const Rgb c{to_byte(unit(rng) * 255.0), to_byte(unit(rng) * 255.0), to_byte(unit(rng) * 255.0)};
    discs.push_back({cx, cy, r, c});
  }

  Image img(kMockImageSize, kMockImageSize);
  for (int y = 0; y < kMockImageSize; ++y) {
    const double t = static_cast<double>(y) / (kMockImageSize - 1);
    for (int x = 0; x < kMockImageSize; ++x) {
      double r = top.r * (1 - t) + bottom.r * t;
      double g = top.g * (1 - t) + bottom.g * t;
      double b = top.b * (1 - t) + bottom.b * t;
      for (const auto& d : discs) {
        const double dist = std::hypot(x + 0.5 - d.cx, y + 0.5 - d.cy);
        const double w = std::clamp(d.r - dist, 0.0, 1.0);
        r = r * (1 - w) + d.color.r * w;
        g = g * (1 - w) + d.color.g * w;
        b = b * (1 - w) + d.color.b * w;
      }
      img.set(x, y, {to_byte(r), to_byte(g), to_byte(b)});
    }
  }
  return img;
}

Image crop(const Image& src, int x0, int y0, int w, int h) {
  Image out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.set(x, y, src.at(x0 + x, y0 + y));
  return out;
}

}  // namespace

std::vector<std::string> default_canned_descriptions() {
  return {
      "* copy <image2>",
      "* Place the object from image1 into the scene from image2.",
      "* Use the silhouette of the object in image1.\n"
      "* Rebuild its surface from the woven material in image2.\n"
      "* Keep the soft lighting of image1.",
      "* Take the overall shape from image 1.\n"
      "* Apply the color palette and glossy texture from image 2.\n"
      "* Blend the background of both images into a gradient.",
  };
}

Embedding seeded_unit_vector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(dim);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (double& x : v) {
      x = normal(rng);
      norm += x * x;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return Embedding(std::move(v));
}

std::uint64_t difference_hash(const Image& image) {
  const Image thumb = resize_bilinear(image, 9, 8);
  std::uint64_t bits = 0;
  int bit = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      const auto luma = [&thumb, y](int px) {
        const Rgb c = thumb.at(px, y);
        return 299 * c.r + 587 * c.g + 114 * c.b;
      };
      if (luma(x) < luma(x + 1)) bits |= std::uint64_t{1} << bit;
      ++bit;
    }
  }
  return bits;
}

MockBridge::MockBridge(ContentStore& store, MockOptions options) : store_(store), options_(std::move(options)) {
  require(options_.embedding_dim > 0, ErrorCode::PreconditionViolated, "mock embedding_dim must be positive");
  if (options_.canned_descriptions.empty()) options_.canned_descriptions = default_canned_descriptions();
}

Embedding MockBridge::embed_image(const ImageRef& image) {
  const auto bytes = store_.read_bytes(image);
  decode_image(bytes);  // CorruptImage for anything unreadable
  if (auto it = options_.embedding_by_image.find(image.content_hash); it != options_.embedding_by_image.end()) {
    require(it->second.dim() == options_.embedding_dim, ErrorCode::DimMismatch, "embedding override has wrong dim");
    return it->second;
  }
  return seeded_unit_vector(options_.embedding_dim, digest_seed(image.content_hash));
}

ImageRef MockBridge::render_embedding(const Embedding& e, std::int64_t seed) {
  require(e.dim() == options_.embedding_dim, ErrorCode::DimMismatch,
          "decoder expects dim " + std::to_string(options_.embedding_dim) + ", got " + std::to_string(e.dim()));
  return store_.put(paint(e, digest_seed(sha256_hex(embedding_key(e, seed)))));
}

ImageRef MockBridge::generate_combination(const ImageRef& canvas, const std::string& prompt, std::int64_t seed) {
  const Image c = store_.load(canvas);
  require(c.width() == 1024 && c.height() == 1024, ErrorCode::BadCanvas,
          "canvas must be 1024x1024, got " + std::to_string(c.width()) + "x" + std::to_string(c.height()));

  const Image a = resize_bilinear(crop(c, 0, 0, 512, 512), kMockImageSize, kMockImageSize);
  const Image b = resize_bilinear(crop(c, 512, 512, 512, 512), kMockImageSize, kMockImageSize);
  std::mt19937_64 rng(digest_seed(sha256_hex(canvas.content_hash + "|" + prompt + "|" + std::to_string(seed))));
  const double angle = std::uniform_real_distribution<double>(0.0, 2.0 * M_PI)(rng);
  const double bias = std::uniform_real_distribution<double>(-0.3, 0.3)(rng);

  Image out(kMockImageSize, kMockImageSize);
  for (int y = 0; y < kMockImageSize; ++y) {
    for (int x = 0; x < kMockImageSize; ++x) {
      const double u = (x + 0.5) / kMockImageSize - 0.5;
      const double v = (y + 0.5) / kMockImageSize - 0.5;
      const double w = std::clamp(0.5 + bias + 1.5 * (u * std::cos(angle) + v * std::sin(angle)), 0.0, 1.0);
      const Rgb pa = a.at(x, y), pb = b.at(x, y);
      out.set(x, y, {to_byte(pa.r * w + pb.r * (1 - w)), to_byte(pa.g * w + pb.g * (1 - w)),
                     to_byte(pa.b * w + pb.b * (1 - w))});
    }
  }
  // Seed watermark: bit i of the seed in pixel (i, 0).
  const auto bits = static_cast<std::uint64_t>(seed);
  for (int i = 0; i < 64 && i < kMockImageSize; ++i)
    out.set(i, 0, ((bits >> i) & 1U) != 0 ? Rgb{0, 0, 0} : kWhite);
  return store_.put(out);
}

std::string MockBridge::describe_reconstruction(std::span<const ImageRef> inputs, const ImageRef& output,
                                                JudgeTemplate t) {
  require(inputs.size() == judge_input_count(t), ErrorCode::PreconditionViolated,
          "judge template expects " + std::to_string(judge_input_count(t)) + " input image(s), got " +
              std::to_string(inputs.size()));
  if (auto it = options_.description_by_output.find(output.content_hash); it != options_.description_by_output.end())
    return it->second;
  std::string key = t == JudgeTemplate::two_input ? "two_input" : "grid_input";
  for (const auto& in : inputs) key += "|" + in.content_hash;
  key += "|" + output.content_hash;
  const auto& canned = options_.canned_descriptions;
  return canned[digest_seed(sha256_hex(key)) % canned.size()];
}

std::vector<std::string> MockBridge::expand_prompt(const std::string& vague, int n_variants) {
  require(n_variants >= 1, ErrorCode::PreconditionViolated, "n_variants must be at least 1");
  static const std::vector<std::string> kFrames = {
      "carved from translucent jade under a violet dusk sky",
      "built from rusted copper gears floating above a desert",
      "woven out of glowing fibre-optic threads in a dark forest",
      "painted in thick impasto oils with a coral and teal palette",
      "made of stacked porcelain teacups on a foggy shoreline",
      "sculpted from melting candle wax inside a gothic cathedral",
      "grown from bioluminescent mushrooms in an underwater cave",
      "assembled from origami paper in a sunlit greenhouse",
  };
  const std::size_t offset = digest_seed(sha256_hex(vague)) % kFrames.size();
  std::vector<std::string> out;
  for (int i = 0; i < n_variants; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    std::string text = vague + ", " + kFrames[(offset + ui) % kFrames.size()];
    if (ui >= kFrames.size()) text += ", variation " + std::to_string(ui / kFrames.size() + 1);
    out.push_back(std::move(text));
  }
  return out;
}

double MockBridge::perceptual_similarity(const ImageRef& a, const ImageRef& b) {
  const std::uint64_t ha = difference_hash(store_.load(a));
  const std::uint64_t hb = difference_hash(store_.load(b));
  return 1.0 - static_cast<double>(std::popcount(ha ^ hb)) / 64.0;
}

ImageRef MockBridge::text_to_image(const std::string& prompt, std::int64_t seed) {
  return render_embedding(seeded_unit_vector(options_.embedding_dim, digest_seed(sha256_hex(prompt))), seed);
}

}  // namespace seeds::bridge
