#include "fvdd/ddfv.hpp"

#include <cmath>
#include <string>

#include "fvdd/error.hpp"

namespace fvdd::ddfv {

std::array<Point, 4> Diamond::gradient_coefficients() const {
  const Point p = primal_length / (2.0 * measure) * primal_normal;
  const Point d = dual_length / (2.0 * measure) * dual_normal;
  return {-p, p, -d, d};
}

namespace {

struct Corner {
  int cell;
  int local;  // position of the vertex in the cell polygon
};

int vertex_position(const PrimalMesh& mesh, int cell, int vertex) {
  const auto& c = mesh.cells()[cell];
  for (std::size_t j = 0; j < c.size(); ++j)
    if (c[j] == vertex) return static_cast<int>(j);
  return -1;
}

int edge_after(const PrimalMesh& mesh, const Corner& c) { return mesh.cell_edges(c.cell)[c.local]; }

int edge_before(const PrimalMesh& mesh, const Corner& c) {
  const int n = static_cast<int>(mesh.cells()[c.cell].size());
  return mesh.cell_edges(c.cell)[(c.local + n - 1) % n];
}

int other_cell(const Edge& e, int cell) { return e.cells[0] == cell ? e.cells[1] : e.cells[0]; }

// Dual cell around `vertex`: walks the incident cells counter-clockwise,
// crossing the edge that precedes the vertex in each cell.
Polygon dual_polygon(const PrimalMesh& mesh, int vertex, const std::vector<Corner>& corners) {
  Polygon poly;
  if (corners.empty()) throw Error(ErrorCode::InvalidArgument, "vertex " + std::to_string(vertex) + " has no cell");
  Corner cur = corners.front();
  const bool on_boundary = mesh.vertex_on_boundary(vertex);
  if (on_boundary) {
    for (const auto& c : corners) {
      if (mesh.edges()[edge_after(mesh, c)].is_boundary()) {
        cur = c;
        break;
      }
    }
    poly.push_back(mesh.vertices()[vertex]);
    poly.push_back(mesh.edge_midpoint(edge_after(mesh, cur)));
  }
  const int start = cur.cell;
  for (std::size_t guard = 0; guard <= corners.size(); ++guard) {
    poly.push_back(mesh.centers()[cur.cell]);
    const int e = edge_before(mesh, cur);
    const Edge& edge = mesh.edges()[e];
    if (edge.is_boundary()) {
      if (!on_boundary) break;
      poly.push_back(mesh.edge_midpoint(e));
      return poly;
    }
    const int next = other_cell(edge, cur.cell);
    if (!on_boundary && next == start) return poly;
    cur = Corner{next, vertex_position(mesh, next, vertex)};
  }
  throw Error(ErrorCode::InvalidArgument, "cannot walk around vertex " + std::to_string(vertex));
}

}  // namespace

DdfvMesh build_ddfv(const PrimalMesh& primal) {
  DdfvMesh m;
  m.primal_ = primal;
  const int nc = primal.num_cells();
  const int nbe = primal.num_boundary_edges();
  const int nv = primal.num_vertices();

  std::vector<int> slot_of_edge(primal.num_edges(), -1);
  for (int s = 0; s < nbe; ++s) slot_of_edge[primal.boundary_edges()[s]] = s;

  std::vector<std::vector<Corner>> corners(nv);
  for (int k = 0; k < nc; ++k) {
    const auto& c = primal.cells()[k];
    for (std::size_t j = 0; j < c.size(); ++j) corners[c[j]].push_back({k, static_cast<int>(j)});
  }

  m.dual_of_vertex_.assign(nv, -1);
  int next = nc + nbe;
  for (int pass = 0; pass < 2; ++pass) {
    for (int v = 0; v < nv; ++v) {
      if (primal.vertex_on_boundary(v) != (pass == 1)) continue;
      m.dual_of_vertex_[v] = next++;
      m.vertex_of_dual_.push_back(v);
      (pass == 0 ? m.num_interior_dual_ : m.num_boundary_dual_)++;
    }
  }

  const int size = next;
  m.points_.resize(size);
  m.measures_.assign(size, 0.0);
  m.control_volumes_.assign(size, {});
  m.dirichlet_segment_.assign(size, -1);

  for (int k = 0; k < nc; ++k) {
    m.points_[k] = primal.centers()[k];
    m.measures_[k] = primal.cell_measure(k);
    m.control_volumes_[k] = primal.cell_polygon(k);
  }
  for (int s = 0; s < nbe; ++s) {
    const int e = primal.boundary_edges()[s];
    m.points_[nc + s] = primal.edge_midpoint(e);
    const auto& tag = primal.edges()[e].tag;
    if (tag.is_dirichlet()) m.dirichlet_segment_[nc + s] = tag.segment;
  }
  for (int v = 0; v < nv; ++v) {
    const int i = m.dual_of_vertex_[v];
    m.points_[i] = primal.vertices()[v];
    m.control_volumes_[i] = dual_polygon(primal, v, corners[v]);
    m.measures_[i] = signed_area(m.control_volumes_[i]);
    if (m.measures_[i] <= 0.0)
      throw Error(ErrorCode::InvalidArgument, "dual cell around vertex " + std::to_string(v) + " is not CCW");
    for (int e : primal.vertex_boundary_edges(v)) {
      const auto& tag = primal.edges()[e].tag;
      if (tag.is_dirichlet()) {
        m.dirichlet_segment_[i] = tag.segment;
        break;
      }
    }
  }

  m.diamonds_.reserve(primal.num_edges());
  for (int e = 0; e < primal.num_edges(); ++e) {
    const Edge& edge = primal.edges()[e];
    Diamond d;
    d.edge = e;
    d.boundary = edge.is_boundary();
    const int K = edge.cells[0];
    const int L = d.boundary ? nc + slot_of_edge[e] : edge.cells[1];
    d.unknowns = {K, L, m.dual_of_vertex_[edge.vertices[0]], m.dual_of_vertex_[edge.vertices[1]]};
    for (int j = 0; j < 4; ++j) d.vertices[j] = m.points_[d.unknowns[j]];
    const Point f = d.vertices[3] - d.vertices[2];
    const Point g = d.vertices[1] - d.vertices[0];
    d.primal_length = f.norm();
    d.dual_length = g.norm();
    d.primal_normal = rotate_cw(f) / d.primal_length;
    d.dual_normal = rotate_ccw(g) / d.dual_length;
    d.measure = 0.5 * cross(g, f);
    if (!(d.measure > 1e-14 * d.primal_length * d.dual_length))
      throw Error(ErrorCode::DegenerateDiamond, "diamond of edge " + std::to_string(e) + " has non-positive measure");
    // x_K + s g = x_K* + t f
    const double s = cross(d.vertices[2] - d.vertices[0], f) / cross(g, f);
    d.center = d.vertices[0] + s * g;
    m.diamonds_.push_back(d);
  }
  return m;
}

DiamondVectorField gradient(const DdfvMesh& mesh, const Field& u) {
  DiamondVectorField out;
  out.reserve(mesh.diamonds().size());
  for (const auto& d : mesh.diamonds()) {
    const auto [K, L, Ks, Ls] = d.unknowns;
    out.push_back((d.primal_length * (u[L] - u[K]) * d.primal_normal +
                   d.dual_length * (u[Ls] - u[Ks]) * d.dual_normal) /
                  (2.0 * d.measure));
  }
  return out;
}

std::vector<double> reconstruct(const DdfvMesh& mesh, const Field& u) {
  std::vector<double> out;
  out.reserve(mesh.diamonds().size());
  for (const auto& d : mesh.diamonds()) {
    const auto [K, L, Ks, Ls] = d.unknowns;
    out.push_back(0.25 * (u[K] + u[L] + u[Ks] + u[Ls]));
  }
  return out;
}

double inner(const DdfvMesh& mesh, const Field& u, const Field& v) {
  double primal = 0.0;
  for (int k = 0; k < mesh.num_primal(); ++k) primal += mesh.measures()[k] * u[k] * v[k];
  double dual = 0.0;
  for (int i = mesh.first_dual(); i < mesh.size(); ++i) dual += mesh.measures()[i] * u[i] * v[i];
  return 0.5 * (primal + dual);
}

double diamond_inner(const DdfvMesh& mesh, const DiamondVectorField& xi, const DiamondVectorField& phi) {
  double sum = 0.0;
  for (std::size_t i = 0; i < mesh.diamonds().size(); ++i) sum += mesh.diamonds()[i].measure * xi[i].dot(phi[i]);
  return sum;
}

double trilinear(const DdfvMesh& mesh, const Field& u, const Field& w, const Field& v) {
  const auto r = reconstruct(mesh, u);
  const auto gw = gradient(mesh, w);
  const auto gv = gradient(mesh, v);
  double sum = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) sum += mesh.diamonds()[i].measure * r[i] * gw[i].dot(gv[i]);
  return sum;
}

DirichletValues project_dirichlet(const DdfvMesh& mesh, const BoundaryFunction& g) {
  DirichletValues out;
  for (int i = 0; i < mesh.size(); ++i) {
    const int segment = mesh.dirichlet_segment()[i];
    if (segment < 0) continue;
    out.unknowns.push_back(i);
    out.values.push_back(g(mesh.points()[i], segment));
  }
  return out;
}

}  // namespace fvdd::ddfv
