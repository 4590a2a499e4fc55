#include <algorithm>
#include <string>

#include "fvdd/error.hpp"
#include "fvdd/hfv.hpp"
#include "fvdd/solver.hpp"

namespace fvdd::hfv {

CondensedSystem condense(const SparseSystem& system, const std::vector<std::vector<int>>& groups) {
  const int n = system.dimension();
  if (system.matrix.rows() != n || system.matrix.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "condense needs a square system");

  // group_of[i] >= 0: eliminated, local position in that group is position[i].
  std::vector<int> group_of(n, -1), position(n, -1);
  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t j = 0; j < groups[g].size(); ++j) {
      const int i = groups[g][j];
      if (i < 0 || i >= n || group_of[i] >= 0)
        throw Error(ErrorCode::InvalidArgument, "condensation groups must be disjoint and in range");
      group_of[i] = static_cast<int>(g);
      position[i] = static_cast<int>(j);
    }
  }
  CondensedSystem out;
  out.dimension_ = n;
  std::vector<int> face_of(n, -1);
  for (int i = 0; i < n; ++i) {
    if (group_of[i] < 0) {
      face_of[i] = static_cast<int>(out.faces_.size());
      out.faces_.push_back(i);
    }
  }
  const int nf = static_cast<int>(out.faces_.size());

  const Eigen::SparseMatrix<double, Eigen::RowMajor> rows = system.matrix;
  const SparseMatrix& cols = system.matrix;  // column-major

  std::vector<Triplet> triplets;
  out.rhs_.resize(nf);
  for (int f = 0; f < nf; ++f) out.rhs_[f] = system.rhs[out.faces_[f]];
  // A_ff
  for (int f = 0; f < nf; ++f)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, out.faces_[f]); it; ++it)
      if (face_of[it.col()] >= 0) triplets.emplace_back(f, face_of[it.col()], it.value());

  out.groups_.reserve(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto& idx = groups[g];
    const int m = static_cast<int>(idx.size());
    CondensedSystem::Group group;
    group.indices = idx;
    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(m, m);
    std::vector<int> coupled;  // faces in row(s) of the group, i.e. A_gf columns
    std::vector<std::pair<int, std::pair<int, double>>> gf;
    for (int j = 0; j < m; ++j) {
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(rows, idx[j]); it; ++it) {
        const int c = static_cast<int>(it.col());
        if (group_of[c] == static_cast<int>(g)) {
          block(j, position[c]) += it.value();
        } else if (group_of[c] >= 0) {
          if (it.value() != 0.0) throw Error(ErrorCode::InvalidArgument, "eliminated groups are coupled");
        } else {
          coupled.push_back(face_of[c]);
          gf.push_back({j, {face_of[c], it.value()}});
        }
      }
    }
    std::sort(coupled.begin(), coupled.end());
    coupled.erase(std::unique(coupled.begin(), coupled.end()), coupled.end());
    group.coupled_faces = coupled;
    group.to_faces = Eigen::MatrixXd::Zero(m, static_cast<int>(coupled.size()));
    for (const auto& [j, entry] : gf) {
      const int c = static_cast<int>(std::lower_bound(coupled.begin(), coupled.end(), entry.first) - coupled.begin());
      group.to_faces(j, c) += entry.second;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> check(block);
    const double scale = block.cwiseAbs().maxCoeff();
    check.setThreshold(1e-13);
    if (!(scale > 0.0) || !check.isInvertible())
      throw Error(ErrorCode::SingularCellBlock, "eliminated block " + std::to_string(g) + " is singular");
    group.lu.compute(block);

    group.rhs.resize(m);
    for (int j = 0; j < m; ++j) group.rhs[j] = system.rhs[idx[j]];

    // A_fg: faces whose rows reference the group (read from the columns).
    std::vector<int> face_rows;
    std::vector<std::pair<int, std::pair<int, double>>> fg;
    for (int j = 0; j < m; ++j) {
      for (SparseMatrix::InnerIterator it(cols, idx[j]); it; ++it) {
        const int r = static_cast<int>(it.row());
        if (face_of[r] < 0) continue;
        face_rows.push_back(face_of[r]);
        fg.push_back({face_of[r], {j, it.value()}});
      }
    }
    std::sort(face_rows.begin(), face_rows.end());
    face_rows.erase(std::unique(face_rows.begin(), face_rows.end()), face_rows.end());
    if (!face_rows.empty()) {
      Eigen::MatrixXd from_group = Eigen::MatrixXd::Zero(static_cast<int>(face_rows.size()), m);
      for (const auto& [f, entry] : fg) {
        const int r = static_cast<int>(std::lower_bound(face_rows.begin(), face_rows.end(), f) - face_rows.begin());
        from_group(r, entry.first) += entry.second;
      }
      // S -= A_fg A_gg^{-1} A_gf ; rhs_f -= A_fg A_gg^{-1} b_g
      const Eigen::MatrixXd coupling = group.lu.solve(group.to_faces);
      const Eigen::VectorXd local_rhs = group.lu.solve(group.rhs);
      const Eigen::MatrixXd update = from_group * coupling;
      const Eigen::VectorXd rhs_update = from_group * local_rhs;
      for (std::size_t r = 0; r < face_rows.size(); ++r) {
        out.rhs_[face_rows[r]] -= rhs_update[static_cast<int>(r)];
        for (std::size_t c = 0; c < coupled.size(); ++c)
          triplets.emplace_back(face_rows[r], coupled[c], -update(static_cast<int>(r), static_cast<int>(c)));
      }
    }
    out.groups_.push_back(std::move(group));
  }
  out.matrix_.resize(nf, nf);
  out.matrix_.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

Eigen::VectorXd CondensedSystem::recover(const Eigen::VectorXd& face_solution) const {
  Eigen::VectorXd x(dimension_);
  for (std::size_t f = 0; f < faces_.size(); ++f) x[faces_[f]] = face_solution[static_cast<int>(f)];
  for (const auto& g : groups_) {
    Eigen::VectorXd rhs = g.rhs;
    for (std::size_t c = 0; c < g.coupled_faces.size(); ++c)
      rhs -= g.to_faces.col(static_cast<int>(c)) * face_solution[g.coupled_faces[c]];
    const Eigen::VectorXd local = g.lu.solve(rhs);
    for (std::size_t j = 0; j < g.indices.size(); ++j) x[g.indices[j]] = local[static_cast<int>(j)];
  }
  return x;
}

Eigen::VectorXd solve_condensed(const SparseSystem& system, const std::vector<std::vector<int>>& groups) {
  const CondensedSystem condensed = condense(system, groups);
  const Eigen::VectorXd faces = solve_linear(SparseSystem{condensed.matrix(), condensed.rhs()});
  return condensed.recover(faces);
}

}  // namespace fvdd::hfv
