#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "fvdd/geometry.hpp"

namespace fvdd {

/// Boundary data g(x, segment): the segment id is the Dirichlet segment the
/// point was reached from, so per-contact constants can be expressed.
using BoundaryFunction = std::function<double(const Point&, int segment)>;

/// Values prescribed on a subset of unknowns.
struct DirichletValues {
  std::vector<int> unknowns;
  std::vector<double> values;

  void apply(Eigen::VectorXd& field) const {
    for (std::size_t i = 0; i < unknowns.size(); ++i) field[unknowns[i]] = values[i];
  }
};

}  // namespace fvdd
