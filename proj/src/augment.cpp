/* Copyright 2026 The DCL Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dcl/augment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dcl {

void AugConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw std::invalid_argument("aug." + field + ": " + why);
  };
  auto unit = [&](const char* field, double v) {
    if (!(v >= 0.0 && v <= 1.0)) fail(field, "must lie in [0,1]");
  };
  unit("weak_intensity", weak_intensity);
  unit("strong_intensity", strong_intensity);
  if (enabled && !(weak_intensity < strong_intensity)) {
    fail("weak_intensity", "must be below strong_intensity");
  }
  unit("flip_prob", flip_prob);
  unit("max_translate", max_translate);
  unit("max_jitter", max_jitter);
  if (!(min_crop_scale > 0.0 && min_crop_scale <= 1.0)) fail("min_crop_scale", "must lie in (0,1]");
  if (erase_min_count < 0 || erase_max_count < erase_min_count) {
    fail("erase_count", "need 0 <= min <= max");
  }
  if (!(erase_min_area > 0.0 && erase_min_area <= erase_max_area && erase_max_area <= 1.0)) {
    fail("erase_area", "need 0 < min <= max <= 1");
  }
  unit("min_visible", min_visible);
  unit("crop_keep", crop_keep);
  if (crop_attempts < 1) fail("crop_attempts", "must be positive");
}

Image flip_image(const Image& img) {
  Image out(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < img.channels; ++c) out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
  return out;
}

Image translate_image(const Image& img, int shift_x, int shift_y) {
  if (shift_x == 0 && shift_y == 0) return img;
  const auto means = channel_means(img);
  Image out(img.height, img.width, img.channels);
  for (int y = 0; y < img.height; ++y) {
    const int sy = y - shift_y;
    for (int x = 0; x < img.width; ++x) {
      const int sx = x - shift_x;
      const bool inside = sx >= 0 && sx < img.width && sy >= 0 && sy < img.height;
      for (int c = 0; c < img.channels; ++c) {
        out.at(y, x, c) = inside ? img.at(sy, sx, c) : static_cast<float>(means[c]);
      }
    }
  }
  return out;
}

Image crop_resize_image(const Image& img, const BBox& window) {
  Image out(img.height, img.width, img.channels);
  const double ww = window.width();
  const double wh = window.height();
  for (int y = 0; y < img.height; ++y) {
    const double v = (y + 0.5) / img.height;
    const double fy = (window.ymin + v * wh) * img.height - 0.5;
    const int y0 = static_cast<int>(std::floor(fy));
    const double ty = fy - y0;
    const int ya = std::clamp(y0, 0, img.height - 1);
    const int yb = std::clamp(y0 + 1, 0, img.height - 1);
    for (int x = 0; x < img.width; ++x) {
      const double u = (x + 0.5) / img.width;
      const double fx = (window.xmin + u * ww) * img.width - 0.5;
      const int x0 = static_cast<int>(std::floor(fx));
      const double tx = fx - x0;
      const int xa = std::clamp(x0, 0, img.width - 1);
      const int xb = std::clamp(x0 + 1, 0, img.width - 1);
      for (int c = 0; c < img.channels; ++c) {
        const double top = (1.0 - tx) * img.at(ya, xa, c) + tx * img.at(ya, xb, c);
        const double bot = (1.0 - tx) * img.at(yb, xa, c) + tx * img.at(yb, xb, c);
        out.at(y, x, c) = static_cast<float>((1.0 - ty) * top + ty * bot);
      }
    }
  }
  clamp_unit(out);
  return out;
}

Image apply_geometry(const Image& img, const GeomTransform& t) {
  switch (t.kind) {
    case TransformKind::kHorizontalFlip:
      return flip_image(img);
    case TransformKind::kTranslate:
      return translate_image(img, static_cast<int>(std::lround(t.dx * img.width)),
                             static_cast<int>(std::lround(t.dy * img.height)));
    case TransformKind::kCropResize:
      return crop_resize_image(img, t.window);
  }
  return img;
}

void apply_color(Image& img, const ColorRecord& color) {
  const auto C = static_cast<std::size_t>(img.channels);
  for (std::size_t i = 0; i < img.data.size(); i += C) {
    for (std::size_t c = 0; c < C; ++c) {
      const double v = color.gain[c % 3] * img.data[i + c] + color.bias[c % 3];
      img.data[i + c] = static_cast<float>(std::clamp(v, 0.0, 1.0));
    }
  }
}

LabelSet map_labels(const GeomRecord& record, const LabelSet& labels, double min_visible) {
  LabelSet out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (auto b = apply_transforms(record, labels.boxes[i], min_visible)) {
      out.add(*b, labels.classes[i]);
    }
  }
  return out;
}

namespace {

ColorRecord sample_color(double spread, Rng& rng) {
  ColorRecord rec;
  for (int c = 0; c < 3; ++c) {
    rec.gain[c] = 1.0 + rng.uniform(-spread, spread);
    rec.bias[c] = rng.uniform(-0.5 * spread, 0.5 * spread);
  }
  return rec;
}

GeomTransform sample_translate(const Image& img, double max_frac, Rng& rng) {
  const int kx = static_cast<int>(std::floor(max_frac * img.width));
  const int ky = static_cast<int>(std::floor(max_frac * img.height));
  const int sx = rng.uniform_int(-kx, kx);
  const int sy = rng.uniform_int(-ky, ky);
  return GeomTransform::translate(static_cast<double>(sx) / img.width,
                                  static_cast<double>(sy) / img.height);
}

bool is_identity_translate(const GeomTransform& t) {
  return t.kind == TransformKind::kTranslate && t.dx == 0.0 && t.dy == 0.0;
}

}  // namespace

AugOutcome weak_augment(const Image& img, const AugConfig& cfg, Rng& rng) {
  AugOutcome out;
  out.image = img;
  const double k = cfg.weak_intensity;
  if (!cfg.enabled || k <= 0.0) return out;

  if (cfg.flip && rng.bernoulli(cfg.flip_prob)) out.geometry.push_back(GeomTransform::flip());
  if (cfg.translate) {
    auto t = sample_translate(img, cfg.max_translate * k, rng);
    if (!is_identity_translate(t)) out.geometry.push_back(t);
  }
  for (const auto& t : out.geometry) out.image = apply_geometry(out.image, t);
  if (cfg.color_jitter) {
    out.color = sample_color(cfg.max_jitter * k, rng);
    apply_color(out.image, out.color);
  }
  return out;
}

std::pair<AugOutcome, LabelSet> strong_augment(const Image& img, const LabelSet& labels,
                                               const AugConfig& cfg, Rng& rng) {
  AugOutcome out;
  out.image = img;
  const double k = cfg.strong_intensity;
  if (!cfg.enabled || k <= 0.0) return {out, labels};

  // Box-aware crop: rejection-sample until one label keeps crop_keep of its area.
  if (cfg.crop) {
    const double smin = 1.0 - (1.0 - cfg.min_crop_scale) * k;
    std::optional<BBox> window;
    for (int attempt = 0; attempt < cfg.crop_attempts && !window; ++attempt) {
      const double sw = rng.uniform(smin, 1.0);
      const double sh = rng.uniform(smin, 1.0);
      const double x0 = rng.uniform(0.0, 1.0 - sw);
      const double y0 = rng.uniform(0.0, 1.0 - sh);
      const BBox cand{x0, y0, x0 + sw, y0 + sh};
      bool ok = labels.empty();
      for (const auto& b : labels.boxes) {
        if (b.area() > 0.0 && intersection_area(b, cand) >= cfg.crop_keep * b.area()) {
          ok = true;
          break;
        }
      }
      if (ok) window = cand;
    }
    if (window) out.geometry.push_back(GeomTransform::crop(*window));
  }

  // One randomly selected geometric op.
  std::vector<TransformKind> ops;
  if (cfg.flip) ops.push_back(TransformKind::kHorizontalFlip);
  if (cfg.translate) ops.push_back(TransformKind::kTranslate);
  if (!ops.empty()) {
    const auto op = ops[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(ops.size()) - 1))];
    if (op == TransformKind::kHorizontalFlip) {
      if (rng.bernoulli(cfg.flip_prob)) out.geometry.push_back(GeomTransform::flip());
    } else {
      const bool any_left = !map_labels(out.geometry, labels, cfg.min_visible).empty();
      for (int attempt = 0; attempt < cfg.crop_attempts; ++attempt) {
        auto t = sample_translate(img, cfg.max_translate * k, rng);
        if (is_identity_translate(t)) break;
        GeomRecord trial = out.geometry;
        trial.push_back(t);
        if (!any_left || !map_labels(trial, labels, cfg.min_visible).empty()) {
          out.geometry = std::move(trial);
          break;
        }
      }
    }
  }
  for (const auto& t : out.geometry) out.image = apply_geometry(out.image, t);

  if (cfg.color_jitter) {
    out.color = sample_color(cfg.max_jitter * k, rng);
    apply_color(out.image, out.color);
  }

  if (cfg.erase) {
    const int n = rng.uniform_int(cfg.erase_min_count, cfg.erase_max_count);
    for (int e = 0; e < n; ++e) {
      const double area = rng.uniform(cfg.erase_min_area, cfg.erase_max_area);
      const double aspect = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
      const int w = std::clamp(static_cast<int>(std::lround(std::sqrt(area * aspect) * img.width)),
                               1, img.width);
      const int h = std::clamp(static_cast<int>(std::lround(std::sqrt(area / aspect) * img.height)),
                               1, img.height);
      EraseRect r;
      r.x0 = rng.uniform_int(0, img.width - w);
      r.y0 = rng.uniform_int(0, img.height - h);
      r.x1 = r.x0 + w;
      r.y1 = r.y0 + h;
      for (int y = r.y0; y < r.y1; ++y)
        for (int x = r.x0; x < r.x1; ++x)
          for (int c = 0; c < out.image.channels; ++c)
            out.image.at(y, x, c) = static_cast<float>(rng.uniform());
      out.erased.push_back(r);
    }
  }

  LabelSet mapped = map_labels(out.geometry, labels, cfg.min_visible);
  return {std::move(out), std::move(mapped)};
}

}  // namespace dcl
