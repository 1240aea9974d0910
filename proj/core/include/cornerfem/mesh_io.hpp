#pragma once

#include <iosfwd>
#include <string>

#include "cornerfem/geometry.hpp"

namespace cornerfem {

/// ASCII mesh format:
///
///   NODES n
///   <index> <x> <y>          (n lines, coordinates with 17 significant digits)
///   TRIANGLES m
///   <a> <b> <c>              (m lines, 0-based, counter-clockwise)
///   BOUNDARY k
///   <a> <b> <tag>            (k lines, oriented with the domain to the left)
///
/// Lines starting with '#' and blank lines are ignored on input. Boundary
/// normals are recomputed on import; level and h_global are not stored.
void write_mesh(std::ostream& out, const TriangleMesh& mesh);

/// Throws ParseError carrying the 1-based line number of the first problem.
TriangleMesh read_mesh(std::istream& in);

TriangleMesh read_mesh_file(const std::string& path);
void write_mesh_file(const std::string& path, const TriangleMesh& mesh);

}  // namespace cornerfem
