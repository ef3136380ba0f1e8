#include <fstream>
#include <sstream>

#include "artreg/cloud.hpp"

namespace artreg {

namespace {

struct Property {
  std::string name;
  bool is_uchar = false;
};

}  // namespace

PointCloud load_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open PLY file: " + path);

  int line_no = 0;
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };

  if (!next_line() || line != "ply") throw ParseError("missing 'ply' magic", line_no);
  if (!next_line() || line != "format ascii 1.0")
    throw ParseError("expected 'format ascii 1.0'", line_no);

  std::size_t vertex_count = 0;
  bool in_vertex_element = false;
  bool seen_vertex = false;
  std::vector<Property> props;

  while (next_line()) {
    std::istringstream ss(line);
    std::string word;
    ss >> word;
    if (word == "comment") continue;
    if (word == "end_header") break;
    if (word == "element") {
      std::string name;
      long count = -1;
      ss >> name >> count;
      if (count < 0) throw ParseError("malformed element line", line_no);
      if (name == "vertex") {
        vertex_count = static_cast<std::size_t>(count);
        in_vertex_element = true;
        seen_vertex = true;
      } else {
        if (count > 0)
          throw UnsupportedProperty("unsupported element '" + name + "' in " + path);
        in_vertex_element = false;
      }
      continue;
    }
    if (word == "property") {
      if (!in_vertex_element) continue;
      std::string type, name;
      ss >> type >> name;
      if (name.empty()) throw ParseError("malformed property line", line_no);
      const bool numeric = type == "float" || type == "float32" || type == "double";
      const bool uchar = type == "uchar" || type == "uint8";
      if (!numeric && !uchar)
        throw UnsupportedProperty("unsupported property type '" + type + "'");
      static const char* known[] = {"x", "y", "z", "nx", "ny", "nz", "red", "green", "blue"};
      bool ok = false;
      for (const char* k : known) ok = ok || name == k;
      if (!ok) throw UnsupportedProperty("unsupported property '" + name + "'");
      props.push_back({name, uchar});
      continue;
    }
    throw ParseError("unexpected header token '" + word + "'", line_no);
  }
  if (!seen_vertex) throw ParseError("no vertex element in header", line_no);

  bool has_xyz[3] = {false, false, false};
  int color_props = 0, normal_props = 0;
  for (const auto& p : props) {
    if (p.name == "x") has_xyz[0] = true;
    if (p.name == "y") has_xyz[1] = true;
    if (p.name == "z") has_xyz[2] = true;
    if (p.name == "red" || p.name == "green" || p.name == "blue") ++color_props;
    if (p.name == "nx" || p.name == "ny" || p.name == "nz") ++normal_props;
  }
  if (!has_xyz[0] || !has_xyz[1] || !has_xyz[2])
    throw ParseError("vertex element lacks x/y/z properties", line_no);
  const bool has_colors = color_props == 3;
  const bool has_normals = normal_props == 3;
  if (color_props != 0 && color_props != 3)
    throw ParseError("incomplete color properties", line_no);
  if (normal_props != 0 && normal_props != 3)
    throw ParseError("incomplete normal properties", line_no);

  PointCloud cloud;
  cloud.points.reserve(vertex_count);
  for (std::size_t i = 0; i < vertex_count; ++i) {
    if (!next_line()) throw ParseError("unexpected end of file", line_no);
    std::istringstream ss(line);
    Eigen::Vector3d pt = Eigen::Vector3d::Zero();
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    Eigen::Vector3d normal = Eigen::Vector3d::Zero();
    for (const auto& p : props) {
      double value;
      if (!(ss >> value)) throw ParseError("bad vertex value", line_no);
      if (p.is_uchar) value /= 255.0;
      if (p.name == "x") pt.x() = value;
      else if (p.name == "y") pt.y() = value;
      else if (p.name == "z") pt.z() = value;
      else if (p.name == "red") color.x() = value;
      else if (p.name == "green") color.y() = value;
      else if (p.name == "blue") color.z() = value;
      else if (p.name == "nx") normal.x() = value;
      else if (p.name == "ny") normal.y() = value;
      else if (p.name == "nz") normal.z() = value;
    }
    cloud.points.push_back(pt);
    if (has_colors) cloud.colors.push_back(color);
    if (has_normals) {
      const double n = normal.norm();
      cloud.normals.push_back(n > 1e-12 ? Eigen::Vector3d(normal / n) : normal);
    }
  }
  return cloud;
}

void save_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write PLY file: " + path);

  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  if (cloud.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  if (cloud.has_normals())
    out << "property float nx\nproperty float ny\nproperty float nz\n";
  out << "end_header\n";

  char buf[256];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    int n = std::snprintf(buf, sizeof(buf), "%.9g %.9g %.9g", p.x(), p.y(), p.z());
    out.write(buf, n);
    if (cloud.has_colors()) {
      const auto& c = cloud.colors[i];
      auto to_byte = [](double v) { return static_cast<int>(std::lround(clamp(v, 0.0, 1.0) * 255.0)); };
      n = std::snprintf(buf, sizeof(buf), " %d %d %d", to_byte(c.x()), to_byte(c.y()),
                        to_byte(c.z()));
      out.write(buf, n);
    }
    if (cloud.has_normals()) {
      const auto& v = cloud.normals[i];
      n = std::snprintf(buf, sizeof(buf), " %.9g %.9g %.9g", v.x(), v.y(), v.z());
      out.write(buf, n);
    }
    out.put('\n');
  }
  if (!out) throw Error("write failed: " + path);
}

}  // namespace artreg
