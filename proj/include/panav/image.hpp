#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

namespace panav {

using Rgb = std::array<std::uint8_t, 3>;

/// 8-bit RGB raster, row 0 at the top.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  RgbImage() = default;
  RgbImage(int w, int h, Rgb fill = {0, 0, 0});

  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);
  void fill_rect(int x0, int y0, int x1, int y1, Rgb c);  // half-open, clipped

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// PNG bytes; output depends only on the pixels.
std::vector<std::uint8_t> encode_png(const RgbImage& image);
RgbImage decode_png(std::span<const std::uint8_t> bytes);

/// Draws `text` with a 5x7 bitmap font at (x, y), each font pixel `scale` wide.
/// Supports lower-case letters, digits, '_' and ' '.
void draw_text(RgbImage& image, int x, int y, std::string_view text, int scale, Rgb color);
int text_width(std::string_view text, int scale);

/// Viridis-like ramp, t clamped to [0, 1].
Rgb heat_color(double t);

void write_bytes(const std::filesystem::path& file, std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& file);

}  // namespace panav
