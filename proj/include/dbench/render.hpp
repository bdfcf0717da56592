#pragma once

#include "dbench/trajectory_log.hpp"

#include <filesystem>
#include <string>

namespace dbench {

/// World-to-image mapping used by the renderer: (x, y) -> (s x + tx, -s y + ty).
struct SvgTransform {
  double scale = 1;
  double tx = 0;
  double ty = 0;
};

SvgTransform fit_transform(const TrajectoryLog& log, double image_size = 1000, double margin = 20);

/// Static overview: lane surfaces from the embedded map, the last footprint
/// of every actor, one trajectory polyline per mission (one point per
/// snapshot it appears in) and a marker per collision event. World
/// coordinates sit inside a group carrying the transform as an SVG matrix.
std::string render_svg(const TrajectoryLog& log);

void render_svg_file(const std::filesystem::path& log_path, const std::filesystem::path& svg_path);

}  // namespace dbench
