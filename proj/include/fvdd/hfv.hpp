#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>

#include "fvdd/boundary.hpp"
#include "fvdd/mesh.hpp"

namespace fvdd {

struct SparseSystem;

namespace hfv {

/// Triangle P_{K,sigma} with base sigma and apex x_K.
struct Pyramid {
  int cell = -1;
  int local = -1;  // local edge index in the cell
  int edge = -1;   // global edge id
  double measure = 0.0;
  double distance = 0.0;  // d_{K,sigma}, orthogonal distance from x_K to sigma
  double edge_length = 0.0;
  Point normal;       // n_{K,sigma}
  Point edge_center;  // barycentre of sigma
};

inline constexpr double kDefaultEta = 1.5;

/// Hybrid discretisation D = (M, E). Unknowns: cells first, then edges in
/// PrimalMesh edge order.
class HybridMesh {
 public:
  const PrimalMesh& primal() const { return primal_; }
  double eta() const { return eta_; }

  int size() const { return primal_.num_cells() + primal_.num_edges(); }
  int cell_index(int cell) const { return cell; }
  int edge_index(int edge) const { return primal_.num_cells() + edge; }

  /// Pyramids grouped by cell, in local edge order.
  const std::vector<Pyramid>& pyramids(int cell) const { return pyramids_[cell]; }
  /// All pyramids, cell-major; gradient() returns values in this order.
  std::vector<Pyramid> all_pyramids() const;
  int num_pyramids() const { return num_pyramids_; }

  /// Dirichlet segment id of each unknown (-1 when free); only edges on Gamma_D.
  const std::vector<int>& dirichlet_segment() const { return dirichlet_segment_; }
  /// x_K for cells and the edge barycentre for edges.
  const std::vector<Point>& points() const { return points_; }

 private:
  friend HybridMesh build_hybrid(const PrimalMesh& primal, double eta);

  PrimalMesh primal_;
  double eta_ = kDefaultEta;
  std::vector<std::vector<Pyramid>> pyramids_;
  int num_pyramids_ = 0;
  std::vector<int> dirichlet_segment_;
  std::vector<Point> points_;
};

/// Throws Error(NotStarShaped) if a cell is not star-shaped w.r.t. its center,
/// Error(InvalidArgument) if eta <= 0.
HybridMesh build_hybrid(const PrimalMesh& primal, double eta = kDefaultEta);

using Field = Eigen::VectorXd;

/// Piecewise constant gradient G_K v + S_{K,sigma} v, one vector per pyramid.
std::vector<Point> gradient(const HybridMesh& mesh, const Field& v);
/// a_D(u, v): integral of the product of the piecewise constant gradients.
double bilinear_a(const HybridMesh& mesh, const Field& u, const Field& v);
/// r^K(u) = (1/|E_K|) sum_sigma (u_K + u_sigma) / 2.
double reconstruct(const HybridMesh& mesh, const Field& u, int cell);
/// T_D(u, w, v) = sum_K r^K(u) int_K grad w . grad v.
double trilinear(const HybridMesh& mesh, const Field& u, const Field& w, const Field& v);
/// [[u, v]]_M = sum_K m_K u_K v_K. Edge unknowns carry no mass.
double cell_inner(const HybridMesh& mesh, const Field& u, const Field& v);
/// u_sigma = g(barycentre of sigma) on Dirichlet edges.
DirichletValues project_dirichlet(const HybridMesh& mesh, const BoundaryFunction& g);

/// Local gradient coefficients of one cell: row block p (2 x (1 + |E_K|))
/// maps (v_K, v_sigma_1, ...) to the gradient on pyramid p.
std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> local_gradient_operators(const HybridMesh& mesh, int cell);

/// Schur complement of a linear system on its non-eliminated ("face")
/// unknowns. Each eliminated group must couple only to itself and to faces.
class CondensedSystem {
 public:
  const Eigen::SparseMatrix<double>& matrix() const { return matrix_; }
  const Eigen::VectorXd& rhs() const { return rhs_; }
  /// Original index of each condensed unknown.
  const std::vector<int>& face_indices() const { return faces_; }
  /// Full solution from the condensed one by per-group back-substitution.
  Eigen::VectorXd recover(const Eigen::VectorXd& face_solution) const;

 private:
  friend CondensedSystem condense(const SparseSystem& system, const std::vector<std::vector<int>>& groups);

  struct Group {
    std::vector<int> indices;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    std::vector<int> coupled_faces;  // local face numbers of nonzero columns in A_gf
    Eigen::MatrixXd to_faces;        // A_gf restricted to coupled_faces
    Eigen::VectorXd rhs;
  };

  int dimension_ = 0;
  Eigen::SparseMatrix<double> matrix_;
  Eigen::VectorXd rhs_;
  std::vector<int> faces_;
  std::vector<Group> groups_;
};

/// Throws Error(SingularCellBlock) if a group block is singular and
/// Error(InvalidArgument) if two groups are coupled.
CondensedSystem condense(const SparseSystem& system, const std::vector<std::vector<int>>& groups);

/// Condense, solve the face system with the sparse direct solver, recover.
Eigen::VectorXd solve_condensed(const SparseSystem& system, const std::vector<std::vector<int>>& groups);

}  // namespace hfv
}  // namespace fvdd
