#include "fvdd/hfv.hpp"

#include <cmath>
#include <string>

#include "fvdd/error.hpp"

namespace fvdd::hfv {

HybridMesh build_hybrid(const PrimalMesh& primal, double eta) {
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "stabilisation parameter eta must be positive");
  HybridMesh m;
  m.primal_ = primal;
  m.eta_ = eta;
  const int nc = primal.num_cells();
  m.pyramids_.resize(nc);
  for (int k = 0; k < nc; ++k) {
    const Polygon poly = primal.cell_polygon(k);
    const Point& xk = primal.centers()[k];
    if (!is_star_shaped_wrt(poly, xk))
      throw Error(ErrorCode::NotStarShaped, "cell " + std::to_string(k) + " is not star-shaped w.r.t. its center");
    const auto& edges = primal.cell_edges(k);
    for (std::size_t j = 0; j < edges.size(); ++j) {
      Pyramid p;
      p.cell = k;
      p.local = static_cast<int>(j);
      p.edge = edges[j];
      p.edge_length = primal.edge_measure(p.edge);
      p.normal = primal.normal(k, static_cast<int>(j));
      p.edge_center = primal.edge_midpoint(p.edge);
      p.distance = (p.edge_center - xk).dot(p.normal);
      p.measure = 0.5 * p.edge_length * p.distance;
      m.pyramids_[k].push_back(p);
      ++m.num_pyramids_;
    }
  }
  m.points_ = primal.centers();
  m.dirichlet_segment_.assign(m.size(), -1);
  for (int e = 0; e < primal.num_edges(); ++e) {
    m.points_.push_back(primal.edge_midpoint(e));
    const auto& tag = primal.edges()[e].tag;
    if (tag.is_dirichlet()) m.dirichlet_segment_[m.edge_index(e)] = tag.segment;
  }
  return m;
}

std::vector<Pyramid> HybridMesh::all_pyramids() const {
  std::vector<Pyramid> out;
  out.reserve(num_pyramids_);
  for (const auto& cell : pyramids_) out.insert(out.end(), cell.begin(), cell.end());
  return out;
}

std::vector<Point> gradient(const HybridMesh& mesh, const Field& v) {
  const PrimalMesh& primal = mesh.primal();
  std::vector<Point> out;
  out.reserve(mesh.num_pyramids());
  for (int k = 0; k < primal.num_cells(); ++k) {
    const auto& pyramids = mesh.pyramids(k);
    Point consistent = Point::Zero();
    for (const auto& p : pyramids) consistent += p.edge_length * v[mesh.edge_index(p.edge)] * p.normal;
    consistent /= primal.cell_measure(k);
    const Point& xk = primal.centers()[k];
    for (const auto& p : pyramids) {
      const double jump = v[mesh.edge_index(p.edge)] - v[k] - consistent.dot(p.edge_center - xk);
      out.push_back(consistent + (mesh.eta() / p.distance) * jump * p.normal);
    }
  }
  return out;
}

double bilinear_a(const HybridMesh& mesh, const Field& u, const Field& v) {
  const auto gu = gradient(mesh, u);
  const auto gv = gradient(mesh, v);
  double sum = 0.0;
  std::size_t i = 0;
  for (int k = 0; k < mesh.primal().num_cells(); ++k)
    for (const auto& p : mesh.pyramids(k)) {
      sum += p.measure * gu[i].dot(gv[i]);
      ++i;
    }
  return sum;
}

double reconstruct(const HybridMesh& mesh, const Field& u, int cell) {
  const auto& pyramids = mesh.pyramids(cell);
  double sum = 0.0;
  for (const auto& p : pyramids) sum += 0.5 * (u[cell] + u[mesh.edge_index(p.edge)]);
  return sum / static_cast<double>(pyramids.size());
}

double trilinear(const HybridMesh& mesh, const Field& u, const Field& w, const Field& v) {
  const auto gw = gradient(mesh, w);
  const auto gv = gradient(mesh, v);
  double sum = 0.0;
  std::size_t i = 0;
  for (int k = 0; k < mesh.primal().num_cells(); ++k) {
    double cell_integral = 0.0;
    for (const auto& p : mesh.pyramids(k)) {
      cell_integral += p.measure * gw[i].dot(gv[i]);
      ++i;
    }
    sum += reconstruct(mesh, u, k) * cell_integral;
  }
  return sum;
}

double cell_inner(const HybridMesh& mesh, const Field& u, const Field& v) {
  double sum = 0.0;
  for (int k = 0; k < mesh.primal().num_cells(); ++k) sum += mesh.primal().cell_measure(k) * u[k] * v[k];
  return sum;
}

DirichletValues project_dirichlet(const HybridMesh& mesh, const BoundaryFunction& g) {
  DirichletValues out;
  for (int i = 0; i < mesh.size(); ++i) {
    const int segment = mesh.dirichlet_segment()[i];
    if (segment < 0) continue;
    out.unknowns.push_back(i);
    out.values.push_back(g(mesh.points()[i], segment));
  }
  return out;
}

std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> local_gradient_operators(const HybridMesh& mesh, int cell) {
  const auto& pyramids = mesh.pyramids(cell);
  const int n = static_cast<int>(pyramids.size());
  const double mk = mesh.primal().cell_measure(cell);
  const Point& xk = mesh.primal().centers()[cell];
  // Column 0 is v_K, column 1 + j is the local edge j.
  Eigen::Matrix<double, 2, Eigen::Dynamic> consistent = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, n + 1);
  for (int j = 0; j < n; ++j) consistent.col(1 + j) = pyramids[j].edge_length / mk * pyramids[j].normal;
  std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> out;
  out.reserve(n);
  for (int j = 0; j < n; ++j) {
    const auto& p = pyramids[j];
    // Row vector of the scalar jump v_sigma - v_K - G_K v . (x_sigma - x_K).
    Eigen::RowVectorXd jump = -(p.edge_center - xk).transpose() * consistent;
    jump[0] -= 1.0;
    jump[1 + j] += 1.0;
    out.push_back(consistent + (mesh.eta() / p.distance) * p.normal * jump);
  }
  return out;
}

}  // namespace fvdd::hfv
