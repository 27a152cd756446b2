// Copyright 2026 The HierGen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "hiergen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "hiergen/dataset.hpp"
#include "hiergen/error.hpp"
#include "hiergen/util.hpp"

namespace hiergen {

namespace {

GrayImage pad_gray(const GrayImage& g, int w, int h) {
  if (g.width == w && g.height == h) return g;
  GrayImage out;
  out.width = w;
  out.height = h;
  out.pixels.assign(static_cast<std::size_t>(w) * h, 255);
  for (int y = 0; y < g.height; ++y) {
    std::copy_n(g.pixels.begin() + static_cast<std::ptrdiff_t>(y) * g.width, g.width,
                out.pixels.begin() + static_cast<std::ptrdiff_t>(y) * w);
  }
  return out;
}

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> k(static_cast<std::size_t>(size));
  const int r = size / 2;
  double sum = 0;
  for (int i = 0; i < size; ++i) {
    const double x = i - r;
    k[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x / (sigma * sigma));
    sum += k[static_cast<std::size_t>(i)];
  }
  for (auto& v : k) v /= sum;
  return k;
}

// Valid-region separable filter: output is (w-k+1) x (h-k+1).
std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1;
  const int oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * h);
  for (int y = 0; y < h; ++y) {
    const double* row = &src[static_cast<std::size_t>(y) * w];
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * row[x + i];
      tmp[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      double s = 0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>(y + i) * ow + x];
      out[static_cast<std::size_t>(y) * ow + x] = s;
    }
  }
  return out;
}

}  // namespace

double ssim(const GrayImage& a_in, const GrayImage& b_in) {
  if (a_in.width < 8 || a_in.height < 8 || b_in.width < 8 || b_in.height < 8) {
    fail(ErrorCode::kTooSmall, "ssim needs images of at least 8x8");
  }
  const int w = std::max(a_in.width, b_in.width);
  const int h = std::max(a_in.height, b_in.height);
  const GrayImage a = pad_gray(a_in, w, h);
  const GrayImage b = pad_gray(b_in, w, h);
  int win = std::min({kSsimWindow, w, h});
  if (win % 2 == 0) --win;
  const auto k = gaussian_kernel(win, kSsimSigma);

  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = a.pixels[i];
    y[i] = b.pixels[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto ux = filter_valid(x, w, h, k);
  const auto uy = filter_valid(y, w, h, k);
  const auto uxx = filter_valid(xx, w, h, k);
  const auto uyy = filter_valid(yy, w, h, k);
  const auto uxy = filter_valid(xy, w, h, k);
  double total = 0;
  for (std::size_t i = 0; i < ux.size(); ++i) {
    const double vx = uxx[i] - ux[i] * ux[i];
    const double vy = uyy[i] - uy[i] * uy[i];
    const double vxy = uxy[i] - ux[i] * uy[i];
    const double num = (2 * ux[i] * uy[i] + kSsimC1) * (2 * vxy + kSsimC2);
    const double den = (ux[i] * ux[i] + uy[i] * uy[i] + kSsimC1) * (vx + vy + kSsimC2);
    total += num / den;
  }
  return total / static_cast<double>(ux.size());
}

double ssim(const Image& a, const Image& b) { return ssim(to_grayscale(a), to_grayscale(b)); }

namespace {

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    char32_t cp = c;
    std::size_t len = 1;
    if (c >= 0xF0) { cp = c & 0x07; len = 4; }
    else if (c >= 0xE0) { cp = c & 0x0F; len = 3; }
    else if (c >= 0xC0) { cp = c & 0x1F; len = 2; }
    for (std::size_t k = 1; k < len && i + k < s.size(); ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

double srgb_to_linear(double c) {
  c /= 255.0;
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double d = 6.0 / 29.0;
  return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
}

struct Lab {
  double l, a, b;
};

Lab to_lab(const Rgb& c) {
  const double r = srgb_to_linear(c.r), g = srgb_to_linear(c.g), b = srgb_to_linear(c.b);
  const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
  const double fx = lab_f(x / 0.95047), fy = lab_f(y / 1.0), fz = lab_f(z / 1.08883);
  return Lab{116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)};
}

double color_similarity(const Rgb& a, const Rgb& b) { return std::max(0.0, 1.0 - delta_e76(a, b) / 100.0); }

}  // namespace

double edit_similarity(std::string_view a_text, std::string_view b_text) {
  const auto a = decode_utf8(a_text);
  const auto b = decode_utf8(b_text);
  if (a.empty() && b.empty()) return 1.0;
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return 1.0 - static_cast<double>(prev[b.size()]) / static_cast<double>(std::max(a.size(), b.size()));
}

double delta_e76(const Rgb& a, const Rgb& b) {
  if (a == b) return 0.0;
  const Lab x = to_lab(a), y = to_lab(b);
  return std::sqrt((x.l - y.l) * (x.l - y.l) + (x.a - y.a) * (x.a - y.a) + (x.b - y.b) * (x.b - y.b));
}

std::vector<Block> extract_blocks(std::string_view html_text, Renderer& renderer) {
  return render_for_metrics(html_text, renderer, 1280).blocks;
}

RenderedPage render_for_metrics(std::string_view html_text, Renderer& renderer, int viewport_width) {
  RenderResult r = render_page(html_text, viewport_width, renderer);
  if (!r.blocks) {
    fail(ErrorCode::kRendererUnavailable, "renderer " + renderer.identifier() + " does not report text blocks");
  }
  RenderedPage page;
  page.screenshot = std::move(r.screenshot);
  for (auto& b : *r.blocks) {
    b.text = normalize_whitespace(b.text);
    if (!b.text.empty()) page.blocks.push_back(std::move(b));
  }
  return page;
}

std::vector<BlockMatch> match_blocks(const std::vector<Block>& ref, const std::vector<Block>& cand,
                                     double threshold) {
  std::vector<BlockMatch> pairs;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = 0; j < cand.size(); ++j) {
      const double s = edit_similarity(ref[i].text, cand[j].text);
      if (s >= threshold) pairs.push_back(BlockMatch{i, j, s});
    }
  }
  // Ties are broken by block content so the result does not depend on input order.
  const auto key = [](const Block& b) {
    return std::tie(b.text, b.bbox.y, b.bbox.x, b.bbox.w, b.bbox.h, b.fg.r, b.fg.g, b.fg.b, b.bg.r, b.bg.g, b.bg.b);
  };
  std::stable_sort(pairs.begin(), pairs.end(), [&](const BlockMatch& a, const BlockMatch& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (key(ref[a.ref]) != key(ref[b.ref])) return key(ref[a.ref]) < key(ref[b.ref]);
    return key(cand[a.cand]) < key(cand[b.cand]);
  });
  std::vector<bool> ref_used(ref.size()), cand_used(cand.size());
  std::vector<BlockMatch> out;
  for (const auto& p : pairs) {
    if (ref_used[p.ref] || cand_used[p.cand]) continue;
    ref_used[p.ref] = cand_used[p.cand] = true;
    out.push_back(p);
  }
  return out;
}

namespace {

// An unreachable embedder leaves the clip fields absent.
std::optional<double> optional_clip(const Image& a, const Image& b, Embedder* embedder) {
  if (!embedder) return std::nullopt;
  try {
    return clip_similarity(a, b, *embedder);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kEmbedderUnavailable) return std::nullopt;
    throw;
  }
}

}  // namespace

VisualScore visual_score(const RenderedPage& ref, const RenderedPage& cand, Embedder* embedder) {
  VisualScore v;
  v.ref_blocks = ref.blocks.size();
  v.cand_blocks = cand.blocks.size();
  if (ref.blocks.empty() && cand.blocks.empty()) {
    v.block_match = v.text = v.position = v.color = v.text_color = 1.0;
  } else {
    const auto matches = match_blocks(ref.blocks, cand.blocks);
    v.matches = matches.size();
    v.block_match = 2.0 * static_cast<double>(matches.size()) /
                    static_cast<double>(ref.blocks.size() + cand.blocks.size());
    const double diag = std::hypot(std::max(ref.screenshot.width(), cand.screenshot.width()),
                                   std::max(ref.screenshot.height(), cand.screenshot.height()));
    double text = 0, pos = 0, color = 0, fg = 0;
    for (const auto& m : matches) {
      const Block& a = ref.blocks[m.ref];
      const Block& b = cand.blocks[m.cand];
      text += m.similarity;
      const double dx = (a.bbox.x + a.bbox.w / 2.0) - (b.bbox.x + b.bbox.w / 2.0);
      const double dy = (a.bbox.y + a.bbox.h / 2.0) - (b.bbox.y + b.bbox.h / 2.0);
      pos += std::max(0.0, 1.0 - std::hypot(dx, dy) / diag);
      color += color_similarity(a.bg, b.bg);
      fg += color_similarity(a.fg, b.fg);
    }
    if (!matches.empty()) {
      const auto n = static_cast<double>(matches.size());
      v.text = text / n;
      v.position = pos / n;
      v.color = color / n;
      v.text_color = fg / n;
    }
  }
  if (const auto cos = optional_clip(ref.screenshot, cand.screenshot, embedder)) v.clip = (*cos + 1.0) / 2.0;
  update_composite(v);
  return v;
}

void update_composite(VisualScore& v) {
  const double sum = v.color + v.text + v.position + v.text_color;
  v.composite = v.clip ? (sum + *v.clip) / 5.0 : sum / 4.0;
}

VisualScore visual_score(std::string_view reference_html, std::string_view candidate_html,
                         Renderer& renderer, Embedder* embedder, int viewport_width) {
  return visual_score(render_for_metrics(reference_html, renderer, viewport_width),
                      render_for_metrics(candidate_html, renderer, viewport_width), embedder);
}

MetricReport evaluate_pair(std::string_view reference_html, std::string_view candidate_html,
                           Renderer& renderer, Embedder* embedder, int viewport_width) {
  const RenderedPage ref = render_for_metrics(reference_html, renderer, viewport_width);
  const RenderedPage cand = render_for_metrics(candidate_html, renderer, viewport_width);
  MetricReport r;
  r.ssim = ssim(ref.screenshot, cand.screenshot);
  r.visual = visual_score(ref, cand, nullptr);
  r.clip_sim = optional_clip(ref.screenshot, cand.screenshot, embedder);
  if (r.clip_sim) {
    r.visual.clip = (*r.clip_sim + 1.0) / 2.0;
    update_composite(r.visual);
  }
  return r;
}

}  // namespace hiergen
