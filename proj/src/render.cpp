#include "dbench/render.hpp"

#include "dbench/map.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace dbench {

namespace {

// Shortest text that reads back as the same double.
std::string num(double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string points_attr(const std::vector<Vec2>& pts) {
  std::string s;
  for (const auto& p : pts) {
    if (!s.empty()) s += ' ';
    s += num(p.x()) + "," + num(p.y());
  }
  return s;
}

std::string escape(const std::string& in) {
  std::string out;
  for (char c : in) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

SvgTransform fit_transform(const TrajectoryLog& log, double image_size, double margin) {
  double lo_x = std::numeric_limits<double>::infinity(), lo_y = lo_x;
  double hi_x = -lo_x, hi_y = -lo_x;
  auto grow = [&](const Vec2& p) {
    lo_x = std::min(lo_x, p.x());
    lo_y = std::min(lo_y, p.y());
    hi_x = std::max(hi_x, p.x());
    hi_y = std::max(hi_y, p.y());
  };
  if (!log.map.is_null()) {
    const auto net = RoadNetwork::from_json(log.map);
    for (const auto& l : net.lanes())
      for (const auto& p : l.centerline.points()) grow(p);
  }
  for (const auto& s : log.snapshots)
    for (const auto& a : s.actors) grow(a.state.position);
  if (!(lo_x <= hi_x)) lo_x = lo_y = 0, hi_x = hi_y = 1;
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1.0});
  SvgTransform t;
  t.scale = (image_size - 2 * margin) / span;
  t.tx = margin - t.scale * lo_x;
  t.ty = margin + t.scale * hi_y;
  return t;
}

std::string render_svg(const TrajectoryLog& log) {
  const SvgTransform t = fit_transform(log);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" "
        "viewBox=\"0 0 1000 1000\">\n";
  os << "<title>" << escape(log.scenario_id) << "</title>\n";
  os << "<style>.lane{fill:none;stroke:#d8d8d8;stroke-linecap:butt}"
        ".centerline{fill:none;stroke:#999;stroke-width:0.5;stroke-dasharray:4 4}"
        ".actor{stroke:#333;stroke-width:0.5}.mission{fill:#1f77b4}.social{fill:#aaa}"
        ".lead{fill:#ff7f0e}.trajectory{fill:none;stroke:#d62728;stroke-width:2}"
        ".collision{fill:none;stroke:#000;stroke-width:2}</style>\n";
  os << "<rect width=\"1000\" height=\"1000\" fill=\"#fff\"/>\n";
  os << "<g id=\"world\" transform=\"matrix(" << num(t.scale) << " 0 0 " << num(-t.scale) << ' '
     << num(t.tx) << ' ' << num(t.ty) << ")\">\n";

  if (!log.map.is_null()) {
    const auto net = RoadNetwork::from_json(log.map);
    for (const auto& l : net.lanes())
      os << "<polyline class=\"lane\" data-lane=\"" << escape(l.id) << "\" stroke-width=\""
         << num(l.width) << "\" points=\"" << points_attr(l.centerline.points()) << "\"/>\n";
    for (const auto& l : net.lanes())
      os << "<polyline class=\"centerline\" vector-effect=\"non-scaling-stroke\" points=\""
         << points_attr(l.centerline.points()) << "\"/>\n";
  }

  std::map<ActorId, const ActorRecord*> last;
  std::map<ActorId, std::vector<Vec2>> tracks;
  for (const auto& s : log.snapshots)
    for (const auto& a : s.actors) {
      last[a.id] = &a;
      if (a.role == ActorRole::mission) tracks[a.id].push_back(a.state.position);
    }
  for (const auto& [id, a] : last) {
    const auto corners = footprint(a->state).corners();
    os << "<polygon class=\"actor " << to_string(a->role) << "\" data-actor=\"" << escape(id)
       << "\" vector-effect=\"non-scaling-stroke\" points=\""
       << points_attr({corners.begin(), corners.end()}) << "\"/>\n";
  }
  for (const auto& [id, pts] : tracks)
    os << "<polyline class=\"trajectory\" data-actor=\"" << escape(id)
       << "\" vector-effect=\"non-scaling-stroke\" points=\"" << points_attr(pts) << "\"/>\n";

  for (const auto& e : log.events) {
    if (e.kind != EventKind::collision) continue;
    if (e.step < 0 || std::size_t(e.step) >= log.snapshots.size()) continue;
    const ActorRecord* a = log.snapshots[std::size_t(e.step)].find(e.actor);
    if (!a) continue;
    os << "<circle class=\"collision\" data-step=\"" << e.step << "\" data-actor=\""
       << escape(e.actor) << "\" vector-effect=\"non-scaling-stroke\" cx=\""
       << num(a->state.position.x()) << "\" cy=\"" << num(a->state.position.y())
       << "\" r=\"3\"/>\n";
  }
  os << "</g>\n</svg>\n";
  return os.str();
}

void render_svg_file(const std::filesystem::path& log_path, const std::filesystem::path& svg_path) {
  const TrajectoryLog log = read_log_file(log_path);
  std::ofstream f(svg_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + svg_path.string());
  f << render_svg(log);
}

}  // namespace dbench
