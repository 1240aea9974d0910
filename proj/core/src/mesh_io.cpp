#include "cornerfem/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "cornerfem/errors.hpp"

namespace cornerfem {
namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next significant line split on whitespace; empty at end of input.
  std::vector<std::string_view> next() {
    while (std::getline(in_, line_)) {
      ++number_;
      std::vector<std::string_view> fields;
      std::string_view rest(line_);
      while (!rest.empty()) {
        const auto start = rest.find_first_not_of(" \t\r");
        if (start == std::string_view::npos) break;
        rest.remove_prefix(start);
        const auto end = rest.find_first_of(" \t\r");
        fields.push_back(rest.substr(0, end));
        rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
      }
      if (fields.empty() || fields.front().front() == '#') continue;
      return fields;
    }
    return {};
  }

  [[nodiscard]] std::size_t line() const { return number_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(fmt::format("mesh line {}: {}", number_, what), number_);
  }

  template <typename T>
  T number(std::string_view field) const {
    T value{};
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, value);
    if (ec != std::errc{} || ptr != end) fail(fmt::format("cannot parse '{}'", field));
    return value;
  }

  std::size_t header(std::string_view keyword) {
    const auto fields = next();
    if (fields.empty()) fail(fmt::format("unexpected end of input, expected {}", keyword));
    if (fields.size() != 2 || fields[0] != keyword) {
      fail(fmt::format("expected '{} <count>'", keyword));
    }
    return number<std::size_t>(fields[1]);
  }

  std::vector<std::string_view> record(std::size_t width, std::string_view section) {
    auto fields = next();
    if (fields.empty()) fail(fmt::format("unexpected end of input in {} section", section));
    if (fields.size() != width) {
      fail(fmt::format("expected {} fields in {} section, got {}", width, section, fields.size()));
    }
    return fields;
  }

 private:
  std::istream& in_;
  std::string line_;
  std::size_t number_ = 0;
};

}  // namespace

void write_mesh(std::ostream& out, const TriangleMesh& mesh) {
  fmt::memory_buffer buf;
  fmt::format_to(std::back_inserter(buf), "NODES {}\n", mesh.num_nodes());
  for (std::size_t i = 0; i < mesh.num_nodes(); ++i) {
    fmt::format_to(std::back_inserter(buf), "{} {:.17g} {:.17g}\n", i, mesh.nodes[i].x,
                   mesh.nodes[i].y);
  }
  fmt::format_to(std::back_inserter(buf), "TRIANGLES {}\n", mesh.num_triangles());
  for (const auto& [a, b, c] : mesh.triangles) {
    fmt::format_to(std::back_inserter(buf), "{} {} {}\n", a, b, c);
  }
  fmt::format_to(std::back_inserter(buf), "BOUNDARY {}\n", mesh.boundary_edges.size());
  for (const auto& e : mesh.boundary_edges) {
    fmt::format_to(std::back_inserter(buf), "{} {} {}\n", e.nodes[0], e.nodes[1], e.tag);
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

TriangleMesh read_mesh(std::istream& in) {
  LineReader reader(in);
  TriangleMesh mesh;

  const auto n = reader.header("NODES");
  mesh.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto f = reader.record(3, "NODES");
    if (reader.number<std::size_t>(f[0]) != i) reader.fail("node indices must be consecutive");
    mesh.nodes[i] = {reader.number<double>(f[1]), reader.number<double>(f[2])};
  }

  auto node_index = [&](std::string_view field) {
    const auto v = reader.number<Index>(field);
    if (v < 0 || static_cast<std::size_t>(v) >= n) {
      reader.fail(fmt::format("node index {} out of range", v));
    }
    return v;
  };

  const auto m = reader.header("TRIANGLES");
  mesh.triangles.resize(m);
  for (auto& tri : mesh.triangles) {
    const auto f = reader.record(3, "TRIANGLES");
    tri = {node_index(f[0]), node_index(f[1]), node_index(f[2])};
  }

  const auto k = reader.header("BOUNDARY");
  mesh.boundary_edges.resize(k);
  for (auto& e : mesh.boundary_edges) {
    const auto f = reader.record(3, "BOUNDARY");
    e.nodes = {node_index(f[0]), node_index(f[1])};
    e.tag = reader.number<int>(f[2]);
    const Point d = mesh.nodes[e.nodes[1]] - mesh.nodes[e.nodes[0]];
    const double len = norm(d);
    if (!(len > 0.0)) reader.fail("degenerate boundary edge");
    e.normal = {d.y / len, -d.x / len};
  }
  if (!reader.next().empty()) reader.fail("trailing data after BOUNDARY section");

  double h = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) h = std::max(h, triangle_diameter(mesh, t));
  mesh.h_global = h;
  return mesh;
}

TriangleMesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open mesh file '{}'", path));
  return read_mesh(in);
}

void write_mesh_file(const std::string& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path));
  write_mesh(out, mesh);
  if (!out) throw IoError(fmt::format("failed writing mesh to '{}'", path));
}

}  // namespace cornerfem
