#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fvdd/geometry.hpp"

namespace fvdd {

enum class BoundaryKind { Interior, Neumann, Dirichlet };

struct BoundaryTag {
  BoundaryKind kind = BoundaryKind::Interior;
  int segment = -1;  // Dirichlet segment id, -1 otherwise

  static BoundaryTag neumann() { return {BoundaryKind::Neumann, -1}; }
  static BoundaryTag dirichlet(int id) { return {BoundaryKind::Dirichlet, id}; }
  bool is_dirichlet() const { return kind == BoundaryKind::Dirichlet; }
  friend bool operator==(const BoundaryTag&, const BoundaryTag&) = default;
};

struct Edge {
  std::array<int, 2> vertices;  // oriented as traversed by cells[0]
  std::array<int, 2> cells;     // cells[1] == -1 on the boundary
  BoundaryTag tag;

  bool is_boundary() const { return cells[1] < 0; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Polygonal mesh of a planar domain. Immutable once built; all derived
/// geometry (measures, normals, edge connectivity) is computed on construction.
class PrimalMesh {
 public:
  /// Builds connectivity from vertex-index polygons. Centers default to cell
  /// barycentres. Throws Error(InvalidArgument) on malformed topology
  /// (fewer than 3 vertices, repeated vertex, edge shared by more than 2 cells).
  static PrimalMesh from_polygons(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
                                  std::vector<Point> centers = {});

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::vector<int>>& cells() const { return cells_; }
  const std::vector<Point>& centers() const { return centers_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& boundary_edges() const { return boundary_edges_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_cells() const { return static_cast<int>(cells_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_boundary_edges() const { return static_cast<int>(boundary_edges_.size()); }
  int num_interior_edges() const { return num_edges() - num_boundary_edges(); }

  Polygon cell_polygon(int cell) const;
  /// Global edge ids of a cell; local edge j joins cell vertices j and j+1.
  const std::vector<int>& cell_edges(int cell) const { return cell_edges_[cell]; }
  /// Signed shoelace area (positive for valid CCW cells).
  double cell_measure(int cell) const { return cell_measures_[cell]; }
  double edge_measure(int edge) const { return edge_measures_[edge]; }
  Point edge_midpoint(int edge) const;
  /// Unit normal of local edge j of `cell`, outward for a CCW cell.
  const Point& normal(int cell, int local_edge) const { return normals_[cell][local_edge]; }
  bool vertex_on_boundary(int vertex) const { return vertex_on_boundary_[vertex]; }
  /// Boundary edge ids touching each vertex (empty for interior vertices).
  const std::vector<int>& vertex_boundary_edges(int vertex) const { return vertex_boundary_edges_[vertex]; }

  double total_measure() const;

  /// Copy with boundary tags replaced; `tags[i]` applies to boundary_edges()[i].
  PrimalMesh with_boundary_tags(const std::vector<BoundaryTag>& tags) const;

  friend bool operator==(const PrimalMesh& a, const PrimalMesh& b) {
    return a.vertices_ == b.vertices_ && a.cells_ == b.cells_ && a.centers_ == b.centers_ && a.edges_ == b.edges_;
  }

 private:
  std::vector<Point> vertices_;
  std::vector<std::vector<int>> cells_;
  std::vector<Point> centers_;
  std::vector<Edge> edges_;
  std::vector<int> boundary_edges_;
  std::vector<std::vector<int>> cell_edges_;
  std::vector<double> cell_measures_;
  std::vector<double> edge_measures_;
  std::vector<std::vector<Point>> normals_;
  std::vector<bool> vertex_on_boundary_;
  std::vector<std::vector<int>> vertex_boundary_edges_;
};

struct BoundarySegment {
  Point a;
  Point b;
  BoundaryTag tag;
};

/// Tagged pieces of the domain boundary.
struct BoundaryGeometry {
  std::vector<BoundarySegment> segments;

  /// Γ^D_0 = [0,1]x{0}, Γ^D_1 = [0,0.25]x{1}, Neumann elsewhere on the unit square.
  static BoundaryGeometry pn_junction();
};

PrimalMesh build_cartesian(int nx, int ny);
/// n x n squares, each split along its lower-left to upper-right diagonal.
PrimalMesh build_triangular(int n);

/// Moves interior vertices by `amplitude` times the shortest incident edge,
/// with per-vertex directions drawn from a seeded hash. Boundary vertices stay
/// put, so the domain and any aligned boundary tags are preserved.
PrimalMesh distort_quads(const PrimalMesh& mesh, double amplitude, std::uint64_t seed);

PrimalMesh tag_boundary(const PrimalMesh& mesh, const BoundaryGeometry& geometry);

enum class ViolationKind { Orientation, NotSimple, NotStarShaped, InwardNormal, OpenCell, Partition, BoundaryTag };

struct Violation {
  ViolationKind kind;
  int cell;  // -1 when not tied to one cell
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(ViolationKind kind) const;
};

/// Checks orientation, simplicity, star-shapedness w.r.t. x_K, outward
/// normals, closure of each cell and the partition of the unit square.
ValidationReport validate(const PrimalMesh& mesh, double domain_measure = 1.0);

void save_mesh(const PrimalMesh& mesh, const std::filesystem::path& path);
void write_mesh(const PrimalMesh& mesh, std::ostream& out);
PrimalMesh load_mesh(const std::filesystem::path& path);
PrimalMesh read_mesh(std::istream& in);

}  // namespace fvdd
