#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <fmt/format.h>

#include "quadmanip/nav/occupancy_grid.hpp"

namespace quadmanip {

inline unsigned char cell_gray(CellState s) {
  switch (s) {
    case CellState::Free: return 0;
    case CellState::Occupied: return 255;
    case CellState::Unknown: break;
  }
  return 128;
}

/// Binary PGM (P5), top image row = highest grid row.
inline std::string grid_to_pgm(const OccupancyGrid& g) {
  std::string out = fmt::format("P5\n{} {}\n255\n", g.width(), g.height());
  out.reserve(out.size() + static_cast<std::size_t>(g.width()) * g.height());
  for (int y = g.height() - 1; y >= 0; --y)
    for (int x = 0; x < g.width(); ++x) out.push_back(static_cast<char>(cell_gray(g.at({x, y}))));
  return out;
}

inline std::string grid_sidecar(const OccupancyGrid& g) {
  const Vec3 o = g.origin();
  return fmt::format("resolution: {}\norigin: [{}, {}, {}]\nwidth: {}\nheight: {}\n", g.resolution(), o.x(), o.y(),
                     o.z(), g.width(), g.height());
}

/// Writes `<stem>.pgm` and `<stem>.yaml`.
inline void export_grid(const OccupancyGrid& g, const std::filesystem::path& stem) {
  const auto write = [](const std::filesystem::path& p, const std::string& data) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot write " + p.string());
    f.write(data.data(), static_cast<std::streamsize>(data.size()));
    if (!f) throw IoError("write failed: " + p.string());
  };
  auto pgm = stem, side = stem;
  write(pgm.replace_extension(".pgm"), grid_to_pgm(g));
  write(side.replace_extension(".yaml"), grid_sidecar(g));
}

}  // namespace quadmanip
