#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fvdd/error.hpp"
#include "fvdd/mesh.hpp"

namespace testing {

struct NamedMesh {
  std::string name;
  fvdd::PrimalMesh mesh;
};

inline std::vector<NamedMesh> sample_meshes() {
  const auto pn = fvdd::BoundaryGeometry::pn_junction();
  return {
      {"cartesian 4x4", fvdd::tag_boundary(fvdd::build_cartesian(4, 4), pn)},
      {"cartesian 3x5", fvdd::build_cartesian(3, 5)},
      {"distorted 8x8", fvdd::tag_boundary(fvdd::distort_quads(fvdd::build_cartesian(8, 8), 0.3, 42), pn)},
      {"triangles 4", fvdd::tag_boundary(fvdd::build_triangular(4), pn)},
  };
}

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

template <class F>
fvdd::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const fvdd::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an fvdd::Error");
}

}  // namespace testing
