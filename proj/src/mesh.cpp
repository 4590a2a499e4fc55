#include "fvdd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "fvdd/error.hpp"

namespace fvdd {

PrimalMesh PrimalMesh::from_polygons(std::vector<Point> vertices, std::vector<std::vector<int>> cells,
                                     std::vector<Point> centers) {
  PrimalMesh m;
  m.vertices_ = std::move(vertices);
  m.cells_ = std::move(cells);
  const int nv = m.num_vertices();
  const int nc = m.num_cells();
  if (nc == 0) throw Error(ErrorCode::InvalidArgument, "mesh has no cells");
  if (!centers.empty() && static_cast<int>(centers.size()) != nc)
    throw Error(ErrorCode::InvalidArgument, "center count does not match cell count");

  std::map<std::pair<int, int>, int> edge_of;
  m.cell_edges_.resize(nc);
  m.cell_measures_.resize(nc);
  m.normals_.resize(nc);
  for (int k = 0; k < nc; ++k) {
    const auto& cell = m.cells_[k];
    const int n = static_cast<int>(cell.size());
    const std::string where = "cell " + std::to_string(k);
    if (n < 3) throw Error(ErrorCode::InvalidArgument, where + " has fewer than 3 vertices");
    for (int j = 0; j < n; ++j) {
      if (cell[j] < 0 || cell[j] >= nv) throw Error(ErrorCode::InvalidArgument, where + " references a missing vertex");
      for (int i = 0; i < j; ++i)
        if (cell[i] == cell[j]) throw Error(ErrorCode::InvalidArgument, where + " repeats a vertex");
    }
    for (int j = 0; j < n; ++j) {
      const int a = cell[j];
      const int b = cell[(j + 1) % n];
      const auto [it, inserted] = edge_of.try_emplace(std::minmax(a, b), m.num_edges());
      if (inserted) {
        m.edges_.push_back(Edge{{a, b}, {k, -1}, BoundaryTag{}});
      } else {
        Edge& e = m.edges_[it->second];
        if (e.cells[1] >= 0 || e.cells[0] == k)
          throw Error(ErrorCode::InvalidArgument, "edge shared by more than two cells at " + where);
        e.cells[1] = k;
      }
      m.cell_edges_[k].push_back(it->second);
    }
    const Polygon poly = m.cell_polygon(k);
    m.cell_measures_[k] = signed_area(poly);
    for (int j = 0; j < n; ++j) {
      const Point d = poly[(j + 1) % n] - poly[j];
      m.normals_[k].push_back(rotate_cw(d).normalized());
    }
  }

  if (centers.empty()) {
    centers.reserve(nc);
    for (int k = 0; k < nc; ++k) centers.push_back(centroid(m.cell_polygon(k)));
  }
  m.centers_ = std::move(centers);

  m.vertex_on_boundary_.assign(nv, false);
  m.vertex_boundary_edges_.assign(nv, {});
  for (int e = 0; e < m.num_edges(); ++e) {
    Edge& edge = m.edges_[e];
    m.edge_measures_.push_back((m.vertices_[edge.vertices[1]] - m.vertices_[edge.vertices[0]]).norm());
    if (edge.is_boundary()) {
      edge.tag = BoundaryTag::neumann();
      m.boundary_edges_.push_back(e);
      for (int v : edge.vertices) {
        m.vertex_on_boundary_[v] = true;
        m.vertex_boundary_edges_[v].push_back(e);
      }
    }
  }
  return m;
}

Polygon PrimalMesh::cell_polygon(int cell) const {
  Polygon poly;
  poly.reserve(cells_[cell].size());
  for (int v : cells_[cell]) poly.push_back(vertices_[v]);
  return poly;
}

Point PrimalMesh::edge_midpoint(int edge) const {
  const auto& e = edges_[edge];
  return 0.5 * (vertices_[e.vertices[0]] + vertices_[e.vertices[1]]);
}

double PrimalMesh::total_measure() const {
  double sum = 0.0;
  for (double m : cell_measures_) sum += m;
  return sum;
}

PrimalMesh PrimalMesh::with_boundary_tags(const std::vector<BoundaryTag>& tags) const {
  if (tags.size() != boundary_edges_.size())
    throw Error(ErrorCode::InvalidArgument, "boundary tag count does not match boundary edge count");
  PrimalMesh copy = *this;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i].kind == BoundaryKind::Interior)
      throw Error(ErrorCode::InvalidArgument, "boundary edge cannot be tagged interior");
    copy.edges_[boundary_edges_[i]].tag = tags[i];
  }
  return copy;
}

BoundaryGeometry BoundaryGeometry::pn_junction() {
  const auto N = BoundaryTag::neumann();
  return BoundaryGeometry{{
      {{0.0, 0.0}, {1.0, 0.0}, BoundaryTag::dirichlet(0)},
      {{1.0, 0.0}, {1.0, 1.0}, N},
      {{1.0, 1.0}, {0.25, 1.0}, N},
      {{0.25, 1.0}, {0.0, 1.0}, BoundaryTag::dirichlet(1)},
      {{0.0, 1.0}, {0.0, 0.0}, N},
  }};
}

PrimalMesh build_cartesian(int nx, int ny) {
  if (nx < 1 || ny < 1) throw Error(ErrorCode::InvalidArgument, "cartesian grid needs nx, ny >= 1");
  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) vertices.emplace_back(double(i) / nx, double(j) / ny);
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) cells.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  return PrimalMesh::from_polygons(std::move(vertices), std::move(cells));
}

PrimalMesh build_triangular(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "triangular grid needs n >= 1");
  const PrimalMesh grid = build_cartesian(n, n);
  std::vector<std::vector<int>> cells;
  cells.reserve(static_cast<std::size_t>(2 * n * n));
  for (const auto& q : grid.cells()) {
    cells.push_back({q[0], q[1], q[2]});
    cells.push_back({q[0], q[2], q[3]});
  }
  return PrimalMesh::from_polygons(grid.vertices(), std::move(cells));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform in [-1, 1] from the top 53 bits.
double hash_unit(std::uint64_t seed, std::uint64_t vertex, std::uint64_t component) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ splitmix64(vertex * 2 + component + 1));
  return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

PrimalMesh distort_quads(const PrimalMesh& mesh, double amplitude, std::uint64_t seed) {
  if (!(amplitude >= 0.0 && amplitude < 0.45))
    throw Error(ErrorCode::InvalidArgument, "distortion amplitude must lie in [0, 0.45)");
  for (const auto& c : mesh.cells())
    if (c.size() != 4) throw Error(ErrorCode::InvalidArgument, "distort_quads expects a quadrilateral mesh");
  if (amplitude == 0.0) return mesh;

  std::vector<double> shortest(mesh.num_vertices(), std::numeric_limits<double>::infinity());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    for (int v : mesh.edges()[e].vertices) shortest[v] = std::min(shortest[v], mesh.edge_measure(e));
  }
  std::vector<Point> moved = mesh.vertices();
  for (int v = 0; v < mesh.num_vertices(); ++v) {
    if (mesh.vertex_on_boundary(v)) continue;
    const double h = amplitude * shortest[v];
    moved[v] += h * Point(hash_unit(seed, v, 0), hash_unit(seed, v, 1));
  }
  PrimalMesh out = PrimalMesh::from_polygons(std::move(moved), mesh.cells());
  std::vector<BoundaryTag> tags;
  for (int e : mesh.boundary_edges()) tags.push_back(mesh.edges()[e].tag);
  out = out.with_boundary_tags(tags);
  const ValidationReport report = validate(out, mesh.total_measure());
  if (!report.ok()) throw Error(ErrorCode::DistortionTooLarge, report.violations.front().message);
  return out;
}

namespace {

bool point_on_segment(const Point& p, const BoundarySegment& s) {
  const double scale = std::max(1.0, (s.b - s.a).norm());
  return point_segment_distance(p, s.a, s.b) <= 1e-12 * scale;
}

}  // namespace

PrimalMesh tag_boundary(const PrimalMesh& mesh, const BoundaryGeometry& geometry) {
  std::vector<BoundaryTag> tags;
  tags.reserve(mesh.boundary_edges().size());
  for (int e : mesh.boundary_edges()) {
    const Point& a = mesh.vertices()[mesh.edges()[e].vertices[0]];
    const Point& b = mesh.vertices()[mesh.edges()[e].vertices[1]];
    const BoundarySegment* found = nullptr;
    bool touches = false;
    for (const auto& s : geometry.segments) {
      const bool on_a = point_on_segment(a, s);
      const bool on_b = point_on_segment(b, s);
      touches = touches || on_a || on_b;
      if (on_a && on_b) {
        found = &s;
        break;
      }
    }
    std::ostringstream what;
    what << "boundary edge (" << a.x() << "," << a.y() << ")-(" << b.x() << "," << b.y() << ")";
    if (found == nullptr) {
      if (touches) throw Error(ErrorCode::EdgeStraddlesSegments, what.str() + " crosses a tag change");
      throw Error(ErrorCode::InvalidArgument, what.str() + " is not covered by the boundary geometry");
    }
    tags.push_back(found->tag);
  }
  return mesh.with_boundary_tags(tags);
}

bool ValidationReport::has(ViolationKind kind) const {
  return std::any_of(violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; });
}

ValidationReport validate(const PrimalMesh& mesh, double domain_measure) {
  ValidationReport report;
  auto flag = [&](ViolationKind kind, int cell, const std::string& msg) {
    report.violations.push_back({kind, cell, (cell >= 0 ? "cell " + std::to_string(cell) + ": " : "") + msg});
  };
  for (int k = 0; k < mesh.num_cells(); ++k) {
    const Polygon poly = mesh.cell_polygon(k);
    const Point& xk = mesh.centers()[k];
    if (mesh.cell_measure(k) <= 0.0) flag(ViolationKind::Orientation, k, "vertices are not counter-clockwise");
    if (!is_simple(poly)) flag(ViolationKind::NotSimple, k, "polygon is self-intersecting");
    if (!is_star_shaped_wrt(poly, xk)) flag(ViolationKind::NotStarShaped, k, "not star-shaped w.r.t. its center");
    Point closure = Point::Zero();
    const int n = static_cast<int>(poly.size());
    double perimeter = 0.0;
    for (int j = 0; j < n; ++j) {
      const int e = mesh.cell_edges(k)[j];
      closure += mesh.edge_measure(e) * mesh.normal(k, j);
      perimeter += mesh.edge_measure(e);
      const Point mid = 0.5 * (poly[j] + poly[(j + 1) % n]);
      if (mesh.normal(k, j).dot(mid - xk) <= 0.0) {
        flag(ViolationKind::InwardNormal, k, "normal of local edge " + std::to_string(j) + " points inward");
      }
    }
    if (closure.norm() > 1e-12 * std::max(1.0, perimeter)) flag(ViolationKind::OpenCell, k, "sum of m_s n_s is not zero");
  }
  if (std::abs(mesh.total_measure() - domain_measure) > 1e-12 * std::max(1.0, domain_measure)) {
    flag(ViolationKind::Partition, -1, "cell measures do not sum to the domain measure");
  }
  for (int e : mesh.boundary_edges()) {
    if (mesh.edges()[e].tag.kind == BoundaryKind::Interior)
      flag(ViolationKind::BoundaryTag, -1, "boundary edge " + std::to_string(e) + " has no tag");
  }
  return report;
}

}  // namespace fvdd
