#include "masknet/mesh_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace masknet {

namespace {

// Line-oriented reader that tracks line numbers and skips blanks/comments.
class LineReader {
 public:
  explicit LineReader(const std::filesystem::path& path) : in_(path) {
    if (!in_) throw IoError("cannot open " + path.string());
  }

  // Next content line, or false at EOF.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      if (line[first] == '#') continue;
      return true;
    }
    return false;
  }

  long line_number() const { return line_; }

 private:
  std::ifstream in_;
  long line_ = 0;
};

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream iss(s);
  std::string tok;
  while (iss >> tok) out.push_back(tok);
  return out;
}

double parse_double(const std::string& tok, long line) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + tok + "'", line);
  }
  if (used != tok.size()) throw ParseError("trailing junk in number '" + tok + "'", line);
  return v;
}

long parse_long(const std::string& tok, long line) {
  std::size_t used = 0;
  long v;
  try {
    v = std::stol(tok, &used);
  } catch (const std::exception&) {
    throw ParseError("expected an integer, got '" + tok + "'", line);
  }
  if (used != tok.size()) throw ParseError("trailing junk in integer '" + tok + "'", line);
  return v;
}

void append_fan(TriMesh& mesh, const std::vector<long>& poly, long line) {
  for (long idx : poly)
    if (idx < 0 || idx >= static_cast<long>(mesh.vertices.size()))
      throw ParseError("vertex index " + std::to_string(idx) + " out of range", line);
  for (std::size_t i = 1; i + 1 < poly.size(); ++i)
    mesh.faces.push_back({static_cast<int>(poly[0]), static_cast<int>(poly[i]),
                          static_cast<int>(poly[i + 1])});
}

}  // namespace

TriMesh load_off(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line)) throw ParseError("empty OFF file", 1);

  auto tokens = split_ws(line);
  long nv = -1, nf = -1;
  if (tokens[0] == "OFF") {
    if (tokens.size() == 4) {
      // counts on the header line
      nv = parse_long(tokens[1], reader.line_number());
      nf = parse_long(tokens[2], reader.line_number());
    } else if (tokens.size() != 1) {
      throw ParseError("malformed OFF header", reader.line_number());
    }
  } else {
    throw ParseError("missing OFF header", reader.line_number());
  }
  if (nv < 0) {
    if (!reader.next(line)) throw ParseError("missing OFF counts line", reader.line_number() + 1);
    tokens = split_ws(line);
    if (tokens.size() < 3) throw ParseError("malformed OFF counts line", reader.line_number());
    nv = parse_long(tokens[0], reader.line_number());
    nf = parse_long(tokens[1], reader.line_number());
  }
  if (nv < 1) throw ParseError("OFF declares no vertices", reader.line_number());

  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!reader.next(line)) throw ParseError("unexpected end of vertex list", reader.line_number() + 1);
    tokens = split_ws(line);
    if (tokens.size() < 3) throw ParseError("vertex needs 3 coordinates", reader.line_number());
    mesh.vertices.emplace_back(parse_double(tokens[0], reader.line_number()),
                               parse_double(tokens[1], reader.line_number()),
                               parse_double(tokens[2], reader.line_number()));
  }
  for (long i = 0; i < nf; ++i) {
    if (!reader.next(line)) throw ParseError("unexpected end of face list", reader.line_number() + 1);
    tokens = split_ws(line);
    const long count = parse_long(tokens[0], reader.line_number());
    if (count < 3 || static_cast<long>(tokens.size()) < count + 1)
      throw ParseError("face needs at least 3 vertex indices", reader.line_number());
    std::vector<long> poly;
    for (long j = 1; j <= count; ++j)
      poly.push_back(parse_long(tokens[static_cast<std::size_t>(j)], reader.line_number()));
    append_fan(mesh, poly, reader.line_number());
  }
  return mesh;
}

TriMesh load_ply_ascii(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  if (!reader.next(line) || split_ws(line)[0] != "ply")
    throw ParseError("missing ply magic", std::max(reader.line_number(), 1L));

  long nv = -1, nf = 0;
  bool header_done = false;
  std::vector<std::string> vertex_props;
  std::string current_element;
  while (!header_done && reader.next(line)) {
    auto tokens = split_ws(line);
    if (tokens[0] == "format") {
      if (tokens.size() < 2 || tokens[1] != "ascii")
        throw UnsupportedFormat("only ascii PLY input is supported");
    } else if (tokens[0] == "element") {
      if (tokens.size() < 3) throw ParseError("malformed element line", reader.line_number());
      current_element = tokens[1];
      if (tokens[1] == "vertex") nv = parse_long(tokens[2], reader.line_number());
      else if (tokens[1] == "face") nf = parse_long(tokens[2], reader.line_number());
    } else if (tokens[0] == "property") {
      if (current_element == "vertex" && tokens.size() >= 3 && tokens[1] != "list")
        vertex_props.push_back(tokens.back());
    } else if (tokens[0] == "end_header") {
      header_done = true;
    }
  }
  if (!header_done) throw ParseError("missing end_header", reader.line_number());
  if (nv < 1) throw ParseError("PLY declares no vertices", reader.line_number());

  long ix = -1, iy = -1, iz = -1;
  for (std::size_t i = 0; i < vertex_props.size(); ++i) {
    if (vertex_props[i] == "x") ix = static_cast<long>(i);
    if (vertex_props[i] == "y") iy = static_cast<long>(i);
    if (vertex_props[i] == "z") iz = static_cast<long>(i);
  }
  if (ix < 0 || iy < 0 || iz < 0)
    throw ParseError("vertex element lacks x/y/z properties", reader.line_number());

  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    if (!reader.next(line)) throw ParseError("unexpected end of vertex list", reader.line_number() + 1);
    auto tokens = split_ws(line);
    if (static_cast<long>(tokens.size()) < static_cast<long>(vertex_props.size()))
      throw ParseError("vertex row too short", reader.line_number());
    mesh.vertices.emplace_back(
        parse_double(tokens[static_cast<std::size_t>(ix)], reader.line_number()),
        parse_double(tokens[static_cast<std::size_t>(iy)], reader.line_number()),
        parse_double(tokens[static_cast<std::size_t>(iz)], reader.line_number()));
  }
  for (long i = 0; i < nf; ++i) {
    if (!reader.next(line)) throw ParseError("unexpected end of face list", reader.line_number() + 1);
    auto tokens = split_ws(line);
    const long count = parse_long(tokens[0], reader.line_number());
    if (count < 3 || static_cast<long>(tokens.size()) < count + 1)
      throw ParseError("face needs at least 3 vertex indices", reader.line_number());
    std::vector<long> poly;
    for (long j = 1; j <= count; ++j)
      poly.push_back(parse_long(tokens[static_cast<std::size_t>(j)], reader.line_number()));
    append_fan(mesh, poly, reader.line_number());
  }
  return mesh;
}

PointCloud load_xyz(const std::filesystem::path& path) {
  LineReader reader(path);
  std::string line;
  std::vector<Vec3> points;
  while (reader.next(line)) {
    auto tokens = split_ws(line);
    if (tokens.size() != 3)
      throw ParseError("expected 3 floats per line, got " + std::to_string(tokens.size()),
                       reader.line_number());
    points.emplace_back(parse_double(tokens[0], reader.line_number()),
                        parse_double(tokens[1], reader.line_number()),
                        parse_double(tokens[2], reader.line_number()));
  }
  if (points.empty()) throw ParseError("no points in file", reader.line_number());
  PointCloud cloud;
  cloud.pts.resize(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i)
    cloud.pts.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  return cloud;
}

PointCloud sample_mesh_surface(const TriMesh& mesh, int n, Rng& rng) {
  if (mesh.faces.empty()) throw BadSpec("sample_mesh_surface: mesh has no faces");
  if (n < 1) throw BadSpec("sample_mesh_surface: n must be >= 1");

  std::vector<double> cum_area(mesh.faces.size());
  double total = 0.0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto& tri = mesh.faces[f];
    const Vec3 e1 = mesh.vertices[static_cast<std::size_t>(tri[1])] -
                    mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Vec3 e2 = mesh.vertices[static_cast<std::size_t>(tri[2])] -
                    mesh.vertices[static_cast<std::size_t>(tri[0])];
    total += 0.5 * e1.cross(e2).norm();
    cum_area[f] = total;
  }
  if (total <= 0.0) throw BadSpec("sample_mesh_surface: zero total surface area");

  PointCloud cloud;
  cloud.pts.resize(n, 3);
  for (int i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    const auto it = std::lower_bound(cum_area.begin(), cum_area.end(), pick);
    const auto f = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cum_area.begin(), static_cast<std::ptrdiff_t>(cum_area.size()) - 1));
    const auto& tri = mesh.faces[f];
    double u = rng.uniform(), v = rng.uniform();
    if (u + v > 1.0) {  // fold into the triangle
      u = 1.0 - u;
      v = 1.0 - v;
    }
    const Vec3 p = mesh.vertices[static_cast<std::size_t>(tri[0])] * (1.0 - u - v) +
                   mesh.vertices[static_cast<std::size_t>(tri[1])] * u +
                   mesh.vertices[static_cast<std::size_t>(tri[2])] * v;
    cloud.pts.row(i) = p.transpose();
  }
  return cloud;
}

PointCloud load_point_cloud(const std::filesystem::path& path, Rng& rng, int sample_n) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (ext == ".xyz") return load_xyz(path);
  if (ext == ".off" || ext == ".ply") {
    const TriMesh mesh = ext == ".off" ? load_off(path) : load_ply_ascii(path);
    if (mesh.faces.empty()) {
      // vertex-only file: use the vertices directly
      PointCloud cloud;
      cloud.pts.resize(static_cast<Eigen::Index>(mesh.vertices.size()), 3);
      for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        cloud.pts.row(static_cast<Eigen::Index>(i)) = mesh.vertices[i].transpose();
      return cloud;
    }
    return sample_mesh_surface(mesh, sample_n, rng);
  }
  throw UnsupportedFormat("unsupported point cloud format: " + path.string());
}

namespace {

void write_coords(std::ostream& out, const PointCloud& cloud) {
  char buf[128];
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", cloud.pts(i, 0),
                  cloud.pts(i, 1), cloud.pts(i, 2));
    out << buf;
  }
}

}  // namespace

void save_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  write_coords(out, cloud);
  if (!out) throw IoError("write failed: " + path.string());
}

void save_ply_ascii(const std::filesystem::path& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  write_coords(out, cloud);
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace masknet
