#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace fvdd {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

struct SparseSystem {
  SparseMatrix matrix;
  Eigen::VectorXd rhs;

  int dimension() const { return static_cast<int>(rhs.size()); }

  /// Duplicate triplets are summed. Throws Error(InvalidArgument) on indices
  /// out of range.
  static SparseSystem from_triplets(int dimension, const std::vector<Triplet>& triplets, Eigen::VectorXd rhs);
};

/// Sparse LU with one step of iterative refinement. Throws
/// Error(SingularMatrix) if the factorisation fails or the residual exceeds
/// 1e-10 (1 + |b|).
Eigen::VectorXd solve_linear(const SparseSystem& system);

using LinearSolver = std::function<Eigen::VectorXd(const SparseSystem&)>;

struct NewtonConfig {
  double residual_tolerance = 1e-10;  // on the l-infinity residual
  double step_tolerance = 1e-8;       // on |dx|_inf / max(1, |x|_inf)
  int max_iterations = 30;
  bool positivity_damping = true;

  void check() const;
};

/// Residual, Jacobian and the linear solver used for each Newton direction.
struct NonlinearProblem {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> residual;
  std::function<SparseMatrix(const Eigen::VectorXd&)> jacobian;
  LinearSolver linear_solver = solve_linear;
  /// Components kept positive by damping (empty: none).
  std::vector<bool> positive;
  /// Newton start used by run_transient instead of the previous state.
  std::optional<Eigen::VectorXd> initial_guess;
};

struct NewtonResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = false;
  std::string failure;
  std::vector<double> residual_norms;  // l-infinity, one per residual evaluation
};

/// Damped Newton iteration. Converges when the residual is below tolerance and
/// the last update (if any) is small; fails after max_iterations updates or on a
/// non-finite residual. Damping scales each step by the largest theta in (0, 1]
/// keeping every positive component >= 1e-12 times its current value.
NewtonResult newton(const NonlinearProblem& problem, Eigen::VectorXd x0, const NewtonConfig& config);

/// Backward Euler step size controller: x0.5 on failure, x1.4 (capped) on success.
struct TimeStepper {
  double dt_ini = 1e-3;
  double dt_max = 1e-1;
  double dt = 1e-3;
  double growth = 1.4;
  double shrink = 0.5;
  double floor = 1e-12;

  static TimeStepper make(double dt_ini, double dt_max);
  void check() const;
};

enum class StepOutcome { Success, Failure };

/// Pure update of the stepper. Throws Error(StepFloorReached) when the new
/// step falls below the floor.
TimeStepper step_control(const TimeStepper& stepper, StepOutcome outcome);

struct StepRecord {
  double time = 0.0;
  double dt = 0.0;
  int newton_iterations = 0;
};

struct TransientResult {
  std::vector<Eigen::VectorXd> states;  // states[0] is the initial state
  std::vector<StepRecord> records;      // one per accepted step
  int rejections = 0;
  int total_newton_iterations = 0;
};

/// Builds the nonlinear problem for one step from the previous state and dt.
using StepFactory = std::function<NonlinearProblem(const Eigen::VectorXd& previous, double dt)>;

/// Advances from t = 0 until t_end. The last step is shortened to land on
/// t_end. A failed Newton solve rewinds and retries with a halved step.
TransientResult run_transient(const StepFactory& factory, const Eigen::VectorXd& initial, double t_end,
                              TimeStepper stepper, const NewtonConfig& config);

}  // namespace fvdd
