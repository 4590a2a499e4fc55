#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "fvdd/ddfv.hpp"
#include "support.hpp"

using namespace fvdd;
using ddfv::DdfvMesh;

namespace {

Eigen::VectorXd sample(const DdfvMesh& m, double a, double b, double c) {
  Eigen::VectorXd u(m.size());
  for (int i = 0; i < m.size(); ++i) u[i] = a * m.points()[i].x() + b * m.points()[i].y() + c;
  return u;
}

// Gradient from the two diagonal differences: [g^T; f^T] grad = [u_L - u_K; u_L* - u_K*].
Point oracle_gradient(const ddfv::Diamond& d, const Eigen::VectorXd& u) {
  const auto& x = d.vertices;
  Eigen::Matrix2d M;
  M.row(0) = (x[1] - x[0]).transpose();
  M.row(1) = (x[3] - x[2]).transpose();
  const Eigen::Vector2d rhs(u[d.unknowns[1]] - u[d.unknowns[0]], u[d.unknowns[3]] - u[d.unknowns[2]]);
  return M.fullPivLu().solve(rhs);
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("dual cells and diamonds partition the domain") {
  for (const auto& [name, primal] : testing::sample_meshes()) {
    CAPTURE(name);
    const DdfvMesh m = ddfv::build_ddfv(primal);
    double primal_sum = 0.0, dual_sum = 0.0, diamond_sum = 0.0;
    for (int i = 0; i < m.size(); ++i) (m.is_primal(i) ? primal_sum : dual_sum) += m.measures()[i];
    for (const auto& d : m.diamonds()) diamond_sum += d.measure;
    CHECK(std::abs(primal_sum - 1.0) < 1e-12);
    CHECK(std::abs(dual_sum - 1.0) < 1e-12);
    CHECK(std::abs(diamond_sum - 1.0) < 1e-12);
    CHECK(m.num_dual() == primal.num_vertices());
    CHECK(static_cast<int>(m.diamonds().size()) == primal.num_edges());
    for (int i = m.first_dual(); i < m.size(); ++i)
      CHECK(std::abs(signed_area(m.control_volumes()[i]) - m.measures()[i]) < 1e-14);
  }
}

TEST_CASE("small grids by hand") {
  const DdfvMesh two = ddfv::build_ddfv(build_cartesian(2, 2));
  REQUIRE(two.num_interior_dual() == 1);
  const int centre = two.first_dual() + 0;
  CHECK(two.points()[centre].isApprox(Point(0.5, 0.5)));
  CHECK(two.measures()[centre] == doctest::Approx(0.25));

  const DdfvMesh one = ddfv::build_ddfv(build_cartesian(1, 1));
  CHECK(one.diamonds().size() == 4);
  for (const auto& d : one.diamonds()) {
    CHECK(d.boundary);
    CHECK(d.measure == doctest::Approx(0.25));
  }
  CHECK(one.num_boundary_primal() == 4);
  CHECK(one.measures()[one.boundary_primal_index(0)] == 0.0);
}

TEST_CASE("gradient on a hand-built diamond") {
  // Two unit cells centred at (0, 0.5) and (1, 0.5) sharing the edge x = 0.5.
  const PrimalMesh primal = PrimalMesh::from_polygons(
      {{-0.5, 0}, {0.5, 0}, {1.5, 0}, {1.5, 1}, {0.5, 1}, {-0.5, 1}}, {{0, 1, 4, 5}, {1, 2, 3, 4}});
  const DdfvMesh m = ddfv::build_ddfv(primal);
  const ddfv::Diamond* inner = nullptr;
  for (const auto& d : m.diamonds())
    if (!d.boundary) inner = &d;
  REQUIRE(inner != nullptr);
  CHECK(inner->measure == doctest::Approx(0.5));
  CHECK(inner->primal_length == doctest::Approx(1.0));
  CHECK(inner->dual_length == doctest::Approx(1.0));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m.size());
  u[m.primal_index(1)] = 1.0;  // the cell centred at x = 1
  const auto grad = ddfv::gradient(m, u);
  const int k = static_cast<int>(inner - m.diamonds().data());
  CHECK(grad[k].x() == doctest::Approx(1.0));
  CHECK(std::abs(grad[k].y()) < 1e-15);
}

TEST_CASE("gradient is exact on affine functions") {
  for (const auto& [name, primal] : testing::sample_meshes()) {
    CAPTURE(name);
    const DdfvMesh m = ddfv::build_ddfv(primal);
    for (const auto& [a, b] : {std::pair{2.0, 3.0}, std::pair{-1.5, 0.25}}) {
      const auto grad = ddfv::gradient(m, sample(m, a, b, 0.7));
      for (const auto& g : grad) CHECK((g - Point(a, b)).norm() < 1e-12);
    }
    CHECK(ddfv::gradient(m, Eigen::VectorXd::Constant(m.size(), 4.2))[0].norm() == 0.0);
  }
}

TEST_CASE("conjugacy identity of the diamond geometry") {
  for (const auto& [name, primal] : testing::sample_meshes()) {
    CAPTURE(name);
    const DdfvMesh m = ddfv::build_ddfv(primal);
    const Eigen::VectorXd xi = testing::random_vector(2, 11);
    for (const auto& d : m.diamonds()) {
      const auto& x = d.vertices;
      const Point lhs = (d.primal_length * xi.dot(x[1] - x[0]) * d.primal_normal +
                         d.dual_length * xi.dot(x[3] - x[2]) * d.dual_normal) /
                        (2.0 * d.measure);
      CHECK((lhs - xi).norm() < 1e-12);
    }
  }
}

TEST_CASE("gradient matches the diagonal-difference oracle") {
  for (const auto& [name, primal] : testing::sample_meshes()) {
    CAPTURE(name);
    const DdfvMesh m = ddfv::build_ddfv(primal);
    const Eigen::VectorXd u = testing::random_vector(m.size(), 5);
    const auto grad = ddfv::gradient(m, u);
    for (std::size_t k = 0; k < m.diamonds().size(); ++k)
      CHECK((grad[k] - oracle_gradient(m.diamonds()[k], u)).norm() < 1e-11 * (1.0 + grad[k].norm()));
  }
}

TEST_CASE("reconstruction") {
  const DdfvMesh m = ddfv::build_ddfv(build_cartesian(3, 3));
  const auto& d = m.diamonds()[0];
  Eigen::VectorXd u = Eigen::VectorXd::Zero(m.size());
  for (int j = 0; j < 4; ++j) u[d.unknowns[j]] = j + 1.0;
  CHECK(ddfv::reconstruct(m, u)[0] == doctest::Approx(2.5));
  for (double r : ddfv::reconstruct(m, Eigen::VectorXd::Constant(m.size(), 3.0))) CHECK(r == doctest::Approx(3.0));
  const Eigen::VectorXd pos = testing::random_vector(m.size(), 3, 0.1, 2.0);
  for (double r : ddfv::reconstruct(m, pos)) {
    CHECK(r >= pos.minCoeff());
    CHECK(r <= pos.maxCoeff());
  }
}

TEST_CASE("inner products") {
  for (const auto& [name, primal] : testing::sample_meshes()) {
    CAPTURE(name);
    const DdfvMesh m = ddfv::build_ddfv(primal);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.size());
    CHECK(std::abs(ddfv::inner(m, one, one) - 1.0) < 1e-12);
    const Eigen::VectorXd u = testing::random_vector(m.size(), 1), v = testing::random_vector(m.size(), 2);
    CHECK(ddfv::inner(m, u, v) == doctest::Approx(ddfv::inner(m, v, u)));
    CHECK(ddfv::inner(m, u, u) > 0.0);

    const std::vector<Point> ex(m.diamonds().size(), Point(1, 0));
    const std::vector<Point> zero(m.diamonds().size(), Point(0, 0));
    CHECK(std::abs(ddfv::diamond_inner(m, ex, ex) - 1.0) < 1e-12);
    CHECK(ddfv::diamond_inner(m, ex, zero) == 0.0);
    const auto gu = ddfv::gradient(m, u), gv = ddfv::gradient(m, v);
    CHECK(ddfv::diamond_inner(m, gu, gv) == doctest::Approx(ddfv::diamond_inner(m, gv, gu)));
  }
}

TEST_CASE("trilinear form") {
  for (const auto& [name, primal] : testing::sample_meshes()) {
    CAPTURE(name);
    const DdfvMesh m = ddfv::build_ddfv(primal);
    const Eigen::VectorXd u = testing::random_vector(m.size(), 7, 0.5, 2.0);
    const Eigen::VectorXd w = testing::random_vector(m.size(), 8), v = testing::random_vector(m.size(), 9);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(m.size());
    const double a = ddfv::diamond_inner(m, ddfv::gradient(m, w), ddfv::gradient(m, v));
    CHECK(std::abs(ddfv::trilinear(m, one, w, v) - a) <= 1e-14 * std::abs(a));
    CHECK(ddfv::trilinear(m, u, one, v) == 0.0);

    double oracle = 0.0;
    for (const auto& d : m.diamonds()) {
      double r = 0.0;
      for (int j : d.unknowns) r += u[j] / 4.0;
      oracle += d.measure * r * oracle_gradient(d, w).dot(oracle_gradient(d, v));
    }
    CHECK(ddfv::trilinear(m, u, w, v) == doctest::Approx(oracle).epsilon(1e-11));
  }
}

TEST_CASE("coercivity on fields vanishing on the Dirichlet unknowns") {
  const DdfvMesh m = ddfv::build_ddfv(testing::sample_meshes()[2].mesh);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Eigen::VectorXd v = testing::random_vector(m.size(), 100 + seed);
    for (int i = 0; i < m.size(); ++i)
      if (m.is_dirichlet(i)) v[i] = 0.0;
    const auto g = ddfv::gradient(m, v);
    CHECK(ddfv::diamond_inner(m, g, g) > 0.0);
  }
}

TEST_CASE("Dirichlet projection") {
  const DdfvMesh m = ddfv::build_ddfv(tag_boundary(build_cartesian(4, 4), BoundaryGeometry::pn_junction()));
  const auto zero = ddfv::project_dirichlet(m, [](const Point&, int) { return 0.0; });
  for (double v : zero.values) CHECK(v == 0.0);
  const auto y = ddfv::project_dirichlet(m, [](const Point& p, int) { return p.y(); });
  for (std::size_t i = 0; i < y.unknowns.size(); ++i)
    if (m.dirichlet_segment()[y.unknowns[i]] == 0) CHECK(y.values[i] == 0.0);

  // The vertex (0.25, 1) closes the top contact: its dual cell is Dirichlet.
  int corner = -1;
  for (int v = 0; v < m.primal().num_vertices(); ++v)
    if ((m.primal().vertices()[v] - Point(0.25, 1.0)).norm() < 1e-12) corner = v;
  REQUIRE(corner >= 0);
  CHECK(m.dirichlet_segment()[m.dual_index(corner)] == 1);
  int edge_dual = -1;  // (0.5, 1) only touches Neumann edges
  for (int v = 0; v < m.primal().num_vertices(); ++v)
    if ((m.primal().vertices()[v] - Point(0.5, 1.0)).norm() < 1e-12) edge_dual = v;
  CHECK_FALSE(m.is_dirichlet(m.dual_index(edge_dual)));

  const auto seg = ddfv::project_dirichlet(m, [](const Point&, int s) { return s == 1 ? 7.0 : -1.0; });
  for (std::size_t i = 0; i < seg.unknowns.size(); ++i)
    CHECK(seg.values[i] == (m.dirichlet_segment()[seg.unknowns[i]] == 1 ? 7.0 : -1.0));
}
