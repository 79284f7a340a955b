#include "seeds/forge.hpp"

namespace seeds::forge {

nlohmann::json CanvasLayout::to_json() {
  return {{"size", {kSize, kSize}},
          {"tile", {kTile, kTile}},
          {"a_origin", kOriginA},
          {"b_origin", kOriginB},
          {"fill", {kFill.r, kFill.g, kFill.b}},
          {"resize_filter", kResizeFilter}};
}

Image compose_canvas_image(const Image& a, const Image& b) {
  Image canvas(CanvasLayout::kSize, CanvasLayout::kSize, CanvasLayout::kFill);
  canvas.blit(resize_bilinear(a, CanvasLayout::kTile, CanvasLayout::kTile), CanvasLayout::kOriginA[0],
              CanvasLayout::kOriginA[1]);
  canvas.blit(resize_bilinear(b, CanvasLayout::kTile, CanvasLayout::kTile), CanvasLayout::kOriginB[0],
              CanvasLayout::kOriginB[1]);
  return canvas;
}

ImageRef compose_canvas(const ImageRef& a, const ImageRef& b, ContentStore& store) {
  return store.put(compose_canvas_image(store.load(a), store.load(b)));
}

}  // namespace seeds::forge
