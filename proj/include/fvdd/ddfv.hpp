#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "fvdd/boundary.hpp"
#include "fvdd/mesh.hpp"

namespace fvdd::ddfv {

/// Quadrilateral with diagonals sigma = [x_K*, x_L*] (primal edge) and
/// sigma* = [x_K, x_L] (joining cell centers). On the boundary L is the
/// degenerate boundary cell and the diamond is the triangle (x_K, x_K*, x_L*).
struct Diamond {
  int edge = -1;
  bool boundary = false;
  // Global DDFV unknown indices in the order K, L, K*, L*.
  std::array<int, 4> unknowns{};
  double measure = 0.0;        // m_D
  double primal_length = 0.0;  // m_sigma
  Point primal_normal;         // n_{sigma K}, from K towards L
  double dual_length = 0.0;    // m_sigma*
  Point dual_normal;           // n_{sigma* K*}, from K* towards L*
  Point center;                // x_D, intersection of the diagonals
  std::array<Point, 4> vertices;  // x_K, x_L, x_K*, x_L*

  /// Coefficients c_j such that grad^D u = sum_j c_j u_{unknowns[j]}.
  std::array<Point, 4> gradient_coefficients() const;
};

/// Primal, dual and diamond meshes. Unknown indexing is fixed:
/// interior primal cells, boundary primal cells (one per boundary edge),
/// interior dual cells (interior vertices), boundary dual cells.
class DdfvMesh {
 public:
  const PrimalMesh& primal() const { return primal_; }

  int size() const { return static_cast<int>(points_.size()); }
  int num_primal() const { return primal_.num_cells(); }
  int num_boundary_primal() const { return primal_.num_boundary_edges(); }
  int num_dual() const { return num_interior_dual_ + num_boundary_dual_; }
  int num_interior_dual() const { return num_interior_dual_; }
  int num_boundary_dual() const { return num_boundary_dual_; }

  int primal_index(int cell) const { return cell; }
  int boundary_primal_index(int boundary_edge_slot) const { return primal_.num_cells() + boundary_edge_slot; }
  int dual_index(int vertex) const { return dual_of_vertex_[vertex]; }
  int vertex_of_dual(int unknown) const { return vertex_of_dual_[unknown - first_dual()]; }
  int first_dual() const { return primal_.num_cells() + primal_.num_boundary_edges(); }
  bool is_primal(int unknown) const { return unknown < first_dual(); }

  /// x_K for primal unknowns (edge midpoint for boundary ones), x_K* for dual.
  const std::vector<Point>& points() const { return points_; }
  /// m_K, zero for boundary primal cells, m_K* for dual cells.
  const std::vector<double>& measures() const { return measures_; }
  /// Control volume polygon of each unknown (empty for boundary primal cells).
  const std::vector<Polygon>& control_volumes() const { return control_volumes_; }
  const std::vector<Diamond>& diamonds() const { return diamonds_; }

  /// Dirichlet segment id of each unknown, -1 if the unknown is free.
  /// Boundary primal cells on Gamma_D and boundary dual cells whose vertex
  /// lies in the closure of Gamma_D are Dirichlet.
  const std::vector<int>& dirichlet_segment() const { return dirichlet_segment_; }
  bool is_dirichlet(int unknown) const { return dirichlet_segment_[unknown] >= 0; }

 private:
  friend DdfvMesh build_ddfv(const PrimalMesh& primal);

  PrimalMesh primal_;
  int num_interior_dual_ = 0;
  int num_boundary_dual_ = 0;
  std::vector<int> dual_of_vertex_;
  std::vector<int> vertex_of_dual_;
  std::vector<Point> points_;
  std::vector<double> measures_;
  std::vector<Polygon> control_volumes_;
  std::vector<Diamond> diamonds_;
  std::vector<int> dirichlet_segment_;
};

/// Throws Error(DegenerateDiamond) if some diamond has non-positive measure.
DdfvMesh build_ddfv(const PrimalMesh& primal);

using Field = Eigen::VectorXd;
using DiamondVectorField = std::vector<Point>;

DiamondVectorField gradient(const DdfvMesh& mesh, const Field& u);
/// r^D u = (u_K + u_L + u_K* + u_L*) / 4 on every diamond.
std::vector<double> reconstruct(const DdfvMesh& mesh, const Field& u);
/// [[u, v]]_T = (sum_K m_K u_K v_K + sum_K* m_K* u_K* v_K*) / 2.
double inner(const DdfvMesh& mesh, const Field& u, const Field& v);
double diamond_inner(const DdfvMesh& mesh, const DiamondVectorField& xi, const DiamondVectorField& phi);
/// T_D(u, w, v) = sum_D m_D r^D(u) grad^D w . grad^D v.
double trilinear(const DdfvMesh& mesh, const Field& u, const Field& w, const Field& v);
/// Point values g(x_K) on Dirichlet boundary primal cells and g(x_K*) on
/// Dirichlet boundary dual cells.
DirichletValues project_dirichlet(const DdfvMesh& mesh, const BoundaryFunction& g);

}  // namespace fvdd::ddfv
