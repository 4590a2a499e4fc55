#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "fvdd/error.hpp"
#include "fvdd/solver.hpp"
#include "support.hpp"

using namespace fvdd;

namespace {

NonlinearProblem scalar_problem(std::function<double(double)> f, std::function<double(double)> df) {
  NonlinearProblem p;
  p.residual = [f](const Eigen::VectorXd& x) { return Eigen::VectorXd::Constant(1, f(x[0])); };
  p.jacobian = [df](const Eigen::VectorXd& x) {
    SparseMatrix J(1, 1);
    J.insert(0, 0) = df(x[0]);
    return J;
  };
  return p;
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

// Backward Euler for u' = -L u + f with L the 1D Dirichlet Laplacian.
StepFactory heat_factory(int n) {
  return [n](const Eigen::VectorXd& previous, double dt) {
    const double h2 = 1.0 / ((n + 1.0) * (n + 1.0));
    std::vector<Triplet> t;
    for (int i = 0; i < n; ++i) {
      t.emplace_back(i, i, 2.0 / h2);
      if (i > 0) t.emplace_back(i, i - 1, -1.0 / h2);
      if (i + 1 < n) t.emplace_back(i, i + 1, -1.0 / h2);
    }
    SparseMatrix L(n, n);
    L.setFromTriplets(t.begin(), t.end());
    NonlinearProblem p;
    p.residual = [L, previous, dt, n](const Eigen::VectorXd& u) -> Eigen::VectorXd {
      return (u - previous) / dt + L * u - Eigen::VectorXd::Ones(n);
    };
    p.jacobian = [L, dt, n](const Eigen::VectorXd&) -> SparseMatrix {
      SparseMatrix I(n, n);
      I.setIdentity();
      return SparseMatrix(I / dt + L);
    };
    return p;
  };
}

}  // namespace

TEST_CASE("sparse triplet systems") {
  const SparseSystem s = SparseSystem::from_triplets(2, {{0, 0, 1.0}, {0, 0, 1.0}, {1, 1, 3.0}}, Eigen::Vector2d(2, 3));
  CHECK(s.matrix.coeff(0, 0) == 2.0);
  CHECK(testing::error_code_of([] { SparseSystem::from_triplets(2, {{2, 0, 1.0}}, Eigen::Vector2d::Zero()); }) ==
        ErrorCode::InvalidArgument);
  CHECK(testing::error_code_of([] { SparseSystem::from_triplets(2, {}, Eigen::Vector3d::Zero()); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("solve_linear") {
  const SparseSystem diag = SparseSystem::from_triplets(3, {{0, 0, 2.0}, {1, 1, 4.0}, {2, 2, -1.0}}, Eigen::Vector3d(2, 2, 3));
  CHECK((solve_linear(diag) - Eigen::Vector3d(1, 0.5, -3)).norm() < 1e-15);

  const SparseSystem singular = SparseSystem::from_triplets(2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}},
                                                            Eigen::Vector2d(1, 2));
  CHECK(testing::error_code_of([&] { solve_linear(singular); }) == ErrorCode::SingularMatrix);

  const int n = 50;
  const Eigen::MatrixXd B = Eigen::Map<const Eigen::MatrixXd>(testing::random_vector(n * n, 3).data(), n, n);
  const Eigen::MatrixXd spd = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd b = testing::random_vector(n, 4);
  const SparseSystem sys{spd.sparseView(), b};
  const Eigen::VectorXd dense = spd.lu().solve(b);
  CHECK((solve_linear(sys) - dense).lpNorm<Eigen::Infinity>() <= 1e-9 * dense.lpNorm<Eigen::Infinity>());
}

TEST_CASE("configuration checks") {
  NewtonConfig c;
  c.max_iterations = 0;
  CHECK(testing::error_code_of([&] { c.check(); }) == ErrorCode::InvalidArgument);
  c = NewtonConfig{};
  c.residual_tolerance = 0.0;
  CHECK(testing::error_code_of([&] { c.check(); }) == ErrorCode::InvalidArgument);
  CHECK(testing::error_code_of([] { TimeStepper::make(0.2, 0.1); }) == ErrorCode::InvalidArgument);
  CHECK(testing::error_code_of([] { TimeStepper::make(0.0, 0.1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Newton on scalar equations") {
  const auto square = scalar_problem([](double x) { return x * x - 4.0; }, [](double x) { return 2.0 * x; });
  const NewtonResult r = newton(square, scalar(3.0), NewtonConfig{});
  CHECK(r.converged);
  CHECK(r.iterations <= 6);
  CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(r.residual_norms.size() == static_cast<std::size_t>(r.iterations + 1));

  const NewtonResult at_root = newton(square, scalar(2.0), NewtonConfig{});
  CHECK(at_root.converged);
  CHECK(at_root.iterations == 0);

  NewtonConfig few;
  few.max_iterations = 10;
  const auto exp_problem = scalar_problem([](double x) { return std::exp(x); }, [](double x) { return std::exp(x); });
  const NewtonResult never = newton(exp_problem, scalar(0.0), few);
  CHECK_FALSE(never.converged);
  CHECK(never.iterations == 10);
  CHECK_FALSE(never.failure.empty());
}

TEST_CASE("Newton keeps positive components positive") {
  // Undamped Newton for 1/x - 10 from x = 1 jumps to x = -8.
  auto p = scalar_problem([](double x) { return 1.0 / x - 10.0; }, [](double x) { return -1.0 / (x * x); });
  p.positive = {true};
  NewtonConfig config;
  config.max_iterations = 60;
  const NewtonResult r = newton(p, scalar(1.0), config);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(0.1));

  p.residual = [](const Eigen::VectorXd& x) {
    if (x[0] <= 0.0) throw Error(ErrorCode::NonPositiveIterate, "x <= 0");
    return Eigen::VectorXd::Constant(1, 1.0 / x[0] - 10.0);
  };
  config.positivity_damping = false;
  const NewtonResult undamped = newton(p, scalar(1.0), config);
  CHECK_FALSE(undamped.converged);
  CHECK(undamped.iterations == 1);

  p.positive = {true, false};
  CHECK(testing::error_code_of([&] { newton(p, scalar(1.0), NewtonConfig{}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("Newton converges quadratically") {
  const auto p = scalar_problem([](double x) { return std::atan(x) + x * x * x; }, [](double x) {
    return 1.0 / (1.0 + x * x) + 3.0 * x * x;
  });
  NewtonConfig config;
  config.residual_tolerance = 1e-300;
  config.step_tolerance = 1e-300;
  config.max_iterations = 6;
  const NewtonResult r = newton(p, scalar(0.4), config);
  const auto& e = r.residual_norms;
  int checked = 0;
  for (std::size_t k = 1; k + 1 < e.size(); ++k) {
    if (e[k + 1] < 1e-14 || e[k] > 1e-2) continue;
    CHECK(std::log(e[k + 1]) / std::log(e[k]) >= 1.5);
    ++checked;
  }
  CHECK(checked >= 1);
}

TEST_CASE("step control") {
  const TimeStepper s = TimeStepper::make(1.4e-3, 0.1);
  CHECK(step_control(s, StepOutcome::Success).dt == doctest::Approx(1.96e-3));
  TimeStepper big = s;
  big.dt = 0.08;
  CHECK(step_control(big, StepOutcome::Success).dt == 0.1);
  big.dt = 0.1;
  CHECK(step_control(big, StepOutcome::Failure).dt == doctest::Approx(0.05));
  TimeStepper tiny = s;
  tiny.dt = 1.5e-12;
  CHECK(testing::error_code_of([&] { step_control(tiny, StepOutcome::Failure); }) == ErrorCode::StepFloorReached);
}

TEST_CASE("transient driver") {
  const int n = 20;
  const Eigen::VectorXd u0 = Eigen::VectorXd::Zero(n);
  const TimeStepper stepper = TimeStepper::make(1e-3, 0.5);

  const TransientResult none = run_transient(heat_factory(n), u0, 0.0, stepper, NewtonConfig{});
  CHECK(none.states.size() == 1);
  CHECK(none.records.empty());

  const TransientResult heat = run_transient(heat_factory(n), u0, 20.0, stepper, NewtonConfig{});
  CHECK(heat.rejections == 0);
  CHECK(heat.records.back().time == 20.0);
  CHECK(heat.states.size() == heat.records.size() + 1);
  for (std::size_t k = 1; k < heat.records.size(); ++k) CHECK(heat.records[k].time > heat.records[k - 1].time);
  // Steady state: u = x (1 - x) / 2.
  for (int i = 0; i < n; ++i) {
    const double x = (i + 1.0) / (n + 1.0);
    CHECK(heat.states.back()[i] == doctest::Approx(0.5 * x * (1.0 - x)).epsilon(1e-8));
  }
  CHECK(heat.records[1].dt == doctest::Approx(1.4e-3));

  // The first attempt fails; the retry uses half the step.
  int calls = 0;
  const StepFactory flaky = [&](const Eigen::VectorXd& previous, double dt) {
    NonlinearProblem p = heat_factory(n)(previous, dt);
    if (calls++ == 0)
      p.residual = [n](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(n, std::nan("")); };
    return p;
  };
  const TransientResult retried = run_transient(flaky, u0, 0.01, stepper, NewtonConfig{});
  CHECK(retried.rejections == 1);
  CHECK(retried.records.front().dt == doctest::Approx(5e-4));
}
