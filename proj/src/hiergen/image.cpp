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

#include "hiergen/image.hpp"

#include <png.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

#include "hiergen/error.hpp"
#include "hiergen/util.hpp"

namespace hiergen {

Image::Image(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) fail(ErrorCode::kInvalidArgument, "negative image size");
  pixels_.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3);
  for (std::size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

void Image::fill_rect(const BBox& rect, Rgb c) {
  const BBox r = rect.clamped(width_, height_);
  for (int y = r.y; y < r.y + r.h; ++y) {
    for (int x = r.x; x < r.x + r.w; ++x) set(x, y, c);
  }
}

Image Image::crop(const BBox& rect) const {
  const BBox r = rect.clamped(width_, height_);
  Image out(r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    const auto src = index(r.x, r.y + y);
    std::memcpy(out.pixels_.data() + out.index(0, y), pixels_.data() + src,
                static_cast<std::size_t>(r.w) * 3);
  }
  return out;
}

Image Image::padded_to(int w, int h, Rgb fill) const {
  Image out(std::max(w, width_), std::max(h, height_), fill);
  for (int y = 0; y < height_; ++y) {
    std::memcpy(out.pixels_.data() + out.index(0, y), pixels_.data() + index(0, y),
                static_cast<std::size_t>(width_) * 3);
  }
  return out;
}

GrayImage to_grayscale(const Image& image) {
  GrayImage g;
  g.width = image.width();
  g.height = image.height();
  g.pixels.resize(static_cast<std::size_t>(g.width) * static_cast<std::size_t>(g.height));
  const auto bytes = image.bytes();
  for (std::size_t i = 0; i < g.pixels.size(); ++i) {
    const int r = bytes[i * 3];
    const int gr = bytes[i * 3 + 1];
    const int b = bytes[i * 3 + 2];
    // Fixed-point 0.299/0.587/0.114 with rounding.
    g.pixels[i] = static_cast<std::uint8_t>((r * 299 + gr * 587 + b * 114 + 500) / 1000);
  }
  return g;
}

namespace {

struct PngReadState {
  std::span<const std::uint8_t> data;
  std::size_t offset = 0;
};

void png_read_from_span(png_structp png, png_bytep out, png_size_t len) {
  auto* st = static_cast<PngReadState*>(png_get_io_ptr(png));
  if (st->offset + len > st->data.size()) png_error(png, "truncated PNG stream");
  std::memcpy(out, st->data.data() + st->offset, len);
  st->offset += len;
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t len) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + len);
}

void png_flush_noop(png_structp) {}

void png_error_throw(png_structp png, png_const_charp msg) {
  auto* message = static_cast<std::string*>(png_get_error_ptr(png));
  if (message) *message = msg;
  png_longjmp(png, 1);
}

void png_warning_ignore(png_structp, png_const_charp) {}

}  // namespace

std::vector<std::uint8_t> encode_png(const Image& image) {
  if (image.empty()) fail(ErrorCode::kInvalidArgument, "cannot encode an empty image");
  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            png_error_throw, png_warning_ignore);
  if (!png) fail(ErrorCode::kIoError, "png_create_write_struct failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::kIoError, "PNG encode failed: " + message);
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const auto bytes = image.bytes();
  for (int y = 0; y < image.height(); ++y) {
    rows[static_cast<std::size_t>(y)] = const_cast<png_bytep>(
        bytes.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(image.width()) * 3);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Image decode_png(std::span<const std::uint8_t> data) {
  if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0) {
    fail(ErrorCode::kImageDecodeError, "not a PNG stream");
  }
  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           png_error_throw, png_warning_ignore);
  if (!png) fail(ErrorCode::kImageDecodeError, "png_create_read_struct failed");
  png_infop info = png_create_info_struct(png);
  PngReadState state{data, 0};
  Image image;
  std::vector<std::uint8_t> row;
  std::vector<std::uint8_t> buffer;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::kImageDecodeError, "PNG decode failed: " + message);
  }
  png_set_read_fn(png, &state, png_read_from_span);
  png_read_info(png, info);
  const auto width = png_get_image_width(png, info);
  const auto height = png_get_image_height(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (width == 0 || height == 0 || width > 65535 || height > 200000) {
    png_error(png, "unsupported PNG dimensions");
  }
  if (depth == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_gray_to_rgb(png);
  }
  png_set_interlace_handling(png);
  png_read_update_info(png, info);
  const auto channels = png_get_channels(png, info);
  image = Image(static_cast<int>(width), static_cast<int>(height));
  row.resize(png_get_rowbytes(png, info));
  // Interlaced images need the full buffer; decode into one.
  buffer.resize(row.size() * height);
  rows.resize(height);
  for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * row.size();
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  for (png_uint_32 y = 0; y < height; ++y) {
    const std::uint8_t* src = rows[y];
    for (png_uint_32 x = 0; x < width; ++x) {
      const std::uint8_t* p = src + x * channels;
      Rgb c{p[0], p[1], p[2]};
      if (channels == 4) {
        // Composite over white; screenshots are opaque in practice.
        const int a = p[3];
        c.r = static_cast<std::uint8_t>((p[0] * a + 255 * (255 - a) + 127) / 255);
        c.g = static_cast<std::uint8_t>((p[1] * a + 255 * (255 - a) + 127) / 255);
        c.b = static_cast<std::uint8_t>((p[2] * a + 255 * (255 - a) + 127) / 255);
      }
      image.set(static_cast<int>(x), static_cast<int>(y), c);
    }
  }
  return image;
}

Image read_png_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kMissingFile, "cannot open image " + path);
  const std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)),
                                       std::istreambuf_iterator<char>());
  return decode_png(data);
}

void write_png_file(const std::string& path, const Image& image) {
  const auto data = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIoError, "cannot write image " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorCode::kIoError, "short write to " + path);
}

std::string image_digest(const Image& image) {
  std::string data = std::to_string(image.width()) + "x" + std::to_string(image.height()) + "\n";
  const auto px = image.bytes();
  data.append(reinterpret_cast<const char*>(px.data()), px.size());
  return sha256_hex(data);
}

}  // namespace hiergen
