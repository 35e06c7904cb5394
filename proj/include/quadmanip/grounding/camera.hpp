#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "quadmanip/core/errors.hpp"
#include "quadmanip/geometry/geometry.hpp"

namespace quadmanip {

/// Pinhole camera. Optical frame: x right, y down, z forward. `extrinsic` is
/// the camera pose in the robot base frame.
struct CameraModel {
  double fx = 100.0, fy = 100.0;
  double cx = 64.0, cy = 48.0;
  int width = 128, height = 96;
  Pose extrinsic;

  void validate() const {
    if (!(fx > 0 && fy > 0)) throw UsageError("focal lengths must be positive");
    if (width < 1 || height < 1) throw UsageError("image size must be positive");
    if (!(cx >= 0 && cx <= width && cy >= 0 && cy <= height)) throw UsageError("principal point outside the image");
  }

  bool in_bounds(const Vec2& px) const { return px.x() >= 0 && px.y() >= 0 && px.x() < width && px.y() < height; }
};

/// Row-major depth in meters; 0 marks an invalid pixel.
class DepthImage {
 public:
  DepthImage() = default;
  DepthImage(int width, int height, float fill = 0.0f) : width_(width), height_(height) {
    if (width < 1 || height < 1) throw UsageError("depth image size must be positive");
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  const std::vector<float>& data() const { return data_; }

  float at(int u, int v) const { return data_[index(u, v)]; }
  void set(int u, int v, float d) { data_[index(u, v)] = d; }
  bool valid(int u, int v) const {
    const float d = at(u, v);
    return std::isfinite(d) && d > 0.0f;
  }

 private:
  std::size_t index(int u, int v) const {
    if (u < 0 || v < 0 || u >= width_ || v >= height_) throw UsageError("depth pixel out of range");
    return static_cast<std::size_t>(v) * width_ + u;
  }

  int width_ = 0, height_ = 0;
  std::vector<float> data_;
};

inline constexpr int kDepthFillRadius = 2;

/// Depth at the pixel nearest to `px`; holes take the nearest valid pixel
/// within kDepthFillRadius (ties: smaller row, then smaller column).
inline double depth_at(const DepthImage& depth, const Vec2& px) {
  const int u0 = std::clamp(static_cast<int>(std::lround(px.x())), 0, depth.width() - 1);
  const int v0 = std::clamp(static_cast<int>(std::lround(px.y())), 0, depth.height() - 1);
  if (depth.valid(u0, v0)) return depth.at(u0, v0);
  int best_d2 = kDepthFillRadius * kDepthFillRadius + 1;
  double best = 0.0;
  for (int dv = -kDepthFillRadius; dv <= kDepthFillRadius; ++dv)
    for (int du = -kDepthFillRadius; du <= kDepthFillRadius; ++du) {
      const int u = u0 + du, v = v0 + dv, d2 = du * du + dv * dv;
      if (u < 0 || v < 0 || u >= depth.width() || v >= depth.height()) continue;
      if (d2 < best_d2 && depth.valid(u, v)) {
        best_d2 = d2;
        best = depth.at(u, v);
      }
    }
  if (best_d2 > kDepthFillRadius * kDepthFillRadius)
    throw InvalidDepth(fmt::format("no valid depth near pixel ({}, {})", px.x(), px.y()));
  return best;
}

/// Back-projects pixel `px` at metric depth `z` into the base frame.
inline Vec3 back_project(const CameraModel& cam, const Vec2& px, double z) {
  const Vec3 c((px.x() - cam.cx) * z / cam.fx, (px.y() - cam.cy) * z / cam.fy, z);
  return cam.extrinsic.apply(c);
}

inline Vec3 pixel_to_point(const CameraModel& cam, const DepthImage& depth, const Vec2& px) {
  if (depth.width() != cam.width || depth.height() != cam.height)
    throw UsageError("depth image does not match the camera model");
  if (!cam.in_bounds(px)) throw UsageError(fmt::format("pixel ({}, {}) outside the image", px.x(), px.y()));
  return back_project(cam, px, depth_at(depth, px));
}

/// Base-frame point to (u, v, depth). Depth <= 0 means behind the camera.
inline Vec3 project_point(const CameraModel& cam, const Vec3& p_base) {
  const Vec3 c = cam.extrinsic.inverse().apply(p_base);
  if (!(c.z() > 0.0)) return {NAN, NAN, c.z()};
  return {cam.fx * c.x() / c.z() + cam.cx, cam.fy * c.y() / c.z() + cam.cy, c.z()};
}

// Depth file: text line "<width> <height>\n", then float32 little-endian, row-major.

inline std::string encode_depth(const DepthImage& img) {
  std::string out = fmt::format("{} {}\n", img.width(), img.height());
  for (float f : img.data()) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
  }
  return out;
}

inline DepthImage decode_depth(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw ParseError("depth file: missing header line", 1);
  std::istringstream head(bytes.substr(0, nl));
  int w = 0, h = 0;
  if (!(head >> w >> h) || w < 1 || h < 1) throw ParseError("depth file: bad header", 1);
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() - nl - 1 != 4 * n) throw ParseError("depth file: payload size mismatch", 1);
  DepthImage img(w, h);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[nl + 1 + 4 * i + k])) << (8 * k);
    img.set(static_cast<int>(i % w), static_cast<int>(i / w), std::bit_cast<float>(bits));
  }
  return img;
}

inline void write_depth(const DepthImage& img, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  const std::string bytes = encode_depth(img);
  if (!f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()))) throw IoError("cannot write " + path.string());
}

inline DepthImage read_depth(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return decode_depth(ss.str());
}

}  // namespace quadmanip
