#include "fvdd/solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include "fvdd/error.hpp"

namespace fvdd {

SparseSystem SparseSystem::from_triplets(int dimension, const std::vector<Triplet>& triplets, Eigen::VectorXd rhs) {
  if (rhs.size() != dimension) throw Error(ErrorCode::InvalidArgument, "right-hand side has the wrong size");
  for (const auto& t : triplets) {
    if (t.row() < 0 || t.row() >= dimension || t.col() < 0 || t.col() >= dimension)
      throw Error(ErrorCode::InvalidArgument, "triplet index out of range");
  }
  SparseSystem s;
  s.matrix.resize(dimension, dimension);
  s.matrix.setFromTriplets(triplets.begin(), triplets.end());
  s.rhs = std::move(rhs);
  return s;
}

Eigen::VectorXd solve_linear(const SparseSystem& system) {
  const auto& A = system.matrix;
  if (A.rows() != A.cols() || A.rows() != system.rhs.size())
    throw Error(ErrorCode::InvalidArgument, "linear system is not square or rhs size mismatches");
  if (A.rows() == 0) return Eigen::VectorXd();
  SparseMatrix compressed = A;
  compressed.makeCompressed();
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(compressed);
  if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularMatrix, lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(system.rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw Error(ErrorCode::SingularMatrix, "sparse LU solve failed");
  Eigen::VectorXd r = system.rhs - compressed * x;
  x += lu.solve(r);
  r = system.rhs - compressed * x;
  // Normwise backward error: ill-conditioned but nonsingular systems pass.
  double row_max = 0.0;
  const Eigen::VectorXd row_sums = compressed.cwiseAbs() * Eigen::VectorXd::Ones(A.cols());
  row_max = row_sums.maxCoeff();
  const double bound = 1e-10 * (1.0 + system.rhs.lpNorm<Eigen::Infinity>() + row_max * x.lpNorm<Eigen::Infinity>());
  if (!(r.lpNorm<Eigen::Infinity>() <= bound))
    throw Error(ErrorCode::SingularMatrix, "residual too large; matrix is (nearly) singular");
  return x;
}

void NewtonConfig::check() const {
  if (!(residual_tolerance > 0 && step_tolerance > 0)) throw Error(ErrorCode::InvalidArgument, "Newton tolerances must be positive");
  if (max_iterations < 1) throw Error(ErrorCode::InvalidArgument, "Newton needs at least one iteration");
}

namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

constexpr double kPositivityFraction = 1e-12;

double damping_factor(const Eigen::VectorXd& x, const Eigen::VectorXd& dx, const std::vector<bool>& positive) {
  double theta = 1.0;
  for (std::size_t i = 0; i < positive.size(); ++i) {
    if (!positive[i] || dx[i] >= 0.0) continue;
    // x + theta dx >= eps x
    theta = std::min(theta, (1.0 - kPositivityFraction) * x[i] / -dx[i]);
  }
  return theta;
}

}  // namespace

NewtonResult newton(const NonlinearProblem& problem, Eigen::VectorXd x0, const NewtonConfig& config) {
  config.check();
  NewtonResult result;
  result.x = std::move(x0);
  if (!problem.positive.empty() && problem.positive.size() != static_cast<std::size_t>(result.x.size()))
    throw Error(ErrorCode::InvalidArgument, "positivity mask size mismatch");

  double last_update = 0.0;
  bool stepped = false;
  for (;;) {
    Eigen::VectorXd F;
    try {
      F = problem.residual(result.x);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonPositiveIterate) throw;
      result.failure = e.what();
      return result;
    }
    const double norm = inf_norm(F);
    result.residual_norms.push_back(norm);
    if (!std::isfinite(norm)) {
      result.failure = "non-finite residual";
      return result;
    }
    if (norm <= config.residual_tolerance && (!stepped || last_update <= config.step_tolerance)) {
      result.converged = true;
      return result;
    }
    if (result.iterations >= config.max_iterations) {
      result.failure = "no convergence after " + std::to_string(result.iterations) + " iterations";
      return result;
    }

    SparseSystem system{problem.jacobian(result.x), -F};
    Eigen::VectorXd dx;
    try {
      dx = problem.linear_solver(system);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::SingularMatrix && e.code() != ErrorCode::SingularCellBlock) throw;
      result.failure = e.what();
      return result;
    }
    if (!dx.allFinite()) {
      result.failure = "non-finite Newton direction";
      return result;
    }
    const double theta =
        config.positivity_damping && !problem.positive.empty() ? damping_factor(result.x, dx, problem.positive) : 1.0;
    result.x += theta * dx;
    ++result.iterations;
    stepped = true;
    last_update = theta * inf_norm(dx) / std::max(1.0, inf_norm(result.x));
  }
}

TimeStepper TimeStepper::make(double dt_ini, double dt_max) {
  TimeStepper s;
  s.dt_ini = dt_ini;
  s.dt_max = dt_max;
  s.dt = dt_ini;
  s.check();
  return s;
}

void TimeStepper::check() const {
  if (!(dt_ini > 0 && dt_ini <= dt_max)) throw Error(ErrorCode::InvalidArgument, "need 0 < dt_ini <= dt_max");
  if (!(floor > 0)) throw Error(ErrorCode::InvalidArgument, "time step floor must be positive");
}

TimeStepper step_control(const TimeStepper& stepper, StepOutcome outcome) {
  TimeStepper next = stepper;
  if (outcome == StepOutcome::Failure) {
    next.dt = stepper.shrink * stepper.dt;
    if (next.dt < stepper.floor)
      throw Error(ErrorCode::StepFloorReached, "time step " + std::to_string(next.dt) + " below floor");
  } else {
    next.dt = std::min(stepper.growth * stepper.dt, stepper.dt_max);
  }
  return next;
}

TransientResult run_transient(const StepFactory& factory, const Eigen::VectorXd& initial, double t_end,
                              TimeStepper stepper, const NewtonConfig& config) {
  stepper.check();
  TransientResult out;
  out.states.push_back(initial);
  double t = 0.0;
  const double eps = 1e-12 * std::max(1.0, std::abs(t_end));
  while (t < t_end - eps) {
    const double dt = std::min(stepper.dt, t_end - t);
    const Eigen::VectorXd& previous = out.states.back();
    const NonlinearProblem problem = factory(previous, dt);
    NewtonResult solve = newton(problem, problem.initial_guess ? *problem.initial_guess : previous, config);
    if (!solve.converged) {
      ++out.rejections;
      stepper = step_control(stepper, StepOutcome::Failure);
      continue;
    }
    t = (t_end - t - dt <= eps) ? t_end : t + dt;
    out.records.push_back({t, dt, solve.iterations});
    out.total_newton_iterations += solve.iterations;
    out.states.push_back(std::move(solve.x));
    stepper = step_control(stepper, StepOutcome::Success);
  }
  return out;
}

}  // namespace fvdd
