#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "fvdd/ddfv.hpp"
#include "fvdd/hfv.hpp"
#include "fvdd/mesh.hpp"
#include "fvdd/solver.hpp"

namespace fvdd {

enum class Framework { Ddfv, Hfv };

const char* to_string(Framework framework);
Framework framework_from_string(const std::string& name);

/// Piecewise constant function: `background` outside the boxes.
struct Doping {
  struct Region {
    Box box;
    double value;
  };
  double background = 0.0;
  std::vector<Region> regions;

  double at(const Point& p) const;
  /// Exact mean over a polygon (boxes are assumed disjoint).
  double mean_over(std::span<const Point> polygon) const;
};

struct ContactData {
  double n = 1.0;
  double p = 1.0;
  double phi = 0.0;
};

/// Physical data of one drift-diffusion problem. Dirichlet data is constant
/// per Dirichlet segment of `geometry`.
struct CaseSpec {
  double lambda = 1.0;
  double alpha_n = 0.0;
  double alpha_p = 0.0;
  std::map<int, ContactData> contacts;
  Doping doping;
  std::function<double(const Point&)> n_initial;
  std::function<double(const Point&)> p_initial;
  BoundaryGeometry geometry = BoundaryGeometry::pn_junction();

  /// Positivity of lambda and the contact densities, and
  /// log N^D - phi^D = alpha_N, log P^D + phi^D = alpha_P on every contact.
  void check() const;
  const ContactData& contact(int segment) const;
};

/// PN junction on the unit square: C = +1 on the N-region [0,0.5]x[0.5,1]
/// under the top contact, -1 elsewhere; P^D = e^alpha0 / N^D,
/// phi^D = (log N^D - log P^D)/2, alpha_N = alpha_P = alpha0/2 and initial
/// densities interpolating the contacts in sqrt(y).
CaseSpec pn_junction(double nd0, double nd1, double alpha0, double lambda);

/// Region of C = +1 used by pn_junction.
Box pn_junction_n_region();

/// One element of the shared assembly: the forms restricted to a diamond
/// (DDFV) or a cell (HFV) read  T(u, w, v) = r(u) w^T A v  with
/// r(u) = sum_j weights_j u_{dofs_j}.
struct LocalElement {
  std::vector<int> dofs;
  std::vector<double> weights;
  Eigen::MatrixXd stiffness;
};

/// Framework-neutral view of a discretisation: unknown locations, masses of
/// the discrete L2 product, local elements and Dirichlet unknowns.
class DiscreteSpace {
 public:
  static DiscreteSpace ddfv(const PrimalMesh& mesh);
  static DiscreteSpace hfv(const PrimalMesh& mesh, double eta = hfv::kDefaultEta);

  Framework framework() const { return framework_; }
  int size() const { return static_cast<int>(points_.size()); }
  /// Weight of each unknown in [[., .]]: m_K/2, m_K*/2 (0 on boundary primal
  /// cells) for DDFV; m_K for HFV cells and 0 for edges.
  const Eigen::VectorXd& mass() const { return mass_; }
  const std::vector<Point>& points() const { return points_; }
  const std::vector<Polygon>& control_volumes() const { return control_volumes_; }
  const std::vector<LocalElement>& elements() const { return elements_; }
  const std::vector<int>& dirichlet_segment() const { return dirichlet_segment_; }
  const std::vector<int>& free_unknowns() const { return free_; }
  /// Position of an unknown among the free ones, -1 if Dirichlet.
  const std::vector<int>& free_position() const { return free_position_; }
  int num_free() const { return static_cast<int>(free_.size()); }

  double mass_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double stiffness(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const;
  double trilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& w, const Eigen::VectorXd& v) const;

  /// Point values on the Dirichlet unknowns.
  DirichletValues project(const BoundaryFunction& g) const;

  const ddfv::DdfvMesh* ddfv_mesh() const { return ddfv_.get(); }
  const hfv::HybridMesh* hybrid_mesh() const { return hybrid_.get(); }

 private:
  void finish();

  Framework framework_ = Framework::Ddfv;
  Eigen::VectorXd mass_;
  std::vector<Point> points_;
  std::vector<Polygon> control_volumes_;
  std::vector<LocalElement> elements_;
  std::vector<int> dirichlet_segment_;
  std::vector<int> free_;
  std::vector<int> free_position_;
  std::shared_ptr<const ddfv::DdfvMesh> ddfv_;
  std::shared_ptr<const hfv::HybridMesh> hybrid_;
};

struct SystemState {
  Framework framework = Framework::Ddfv;
  Eigen::VectorXd n;
  Eigen::VectorXd p;
  Eigen::VectorXd phi;
  double time = 0.0;
  double dt = 0.0;
};

struct Equilibrium {
  Eigen::VectorXd phi;
  Eigen::VectorXd n;
  Eigen::VectorXd p;
  int newton_iterations = 0;
};

struct DiscreteData {
  Eigen::VectorXd n0;
  Eigen::VectorXd p0;
  Eigen::VectorXd doping;
  DirichletValues n_dirichlet;
  DirichletValues p_dirichlet;
  DirichletValues phi_dirichlet;
};

/// Mean values of the data on every control volume (barycentre value for
/// the densities, exact area average for the doping) with Dirichlet unknowns
/// overwritten by point values. Throws Error(NonPositiveInitialData).
DiscreteData discretise_case(const CaseSpec& spec, const DiscreteSpace& space);

/// Newton guess for the potential of the first step. The residual never
/// reads the previous potential; phi^0 is O(1/lambda^2) for non-neutral data
/// and defeats Newton for small lambda, the equilibrium potential does not.
enum class PotentialGuess { Equilibrium, Previous };

const char* to_string(PotentialGuess kind);
PotentialGuess potential_guess_from_string(const std::string& name);

/// Backward Euler drift-diffusion scheme on a DiscreteSpace. The nonlinear
/// unknown vector is x = [N_free, P_free, phi_free].
class DriftDiffusionScheme {
 public:
  DriftDiffusionScheme(DiscreteSpace space, CaseSpec spec);

  const DiscreteSpace& space() const { return space_; }
  const CaseSpec& spec() const { return spec_; }
  const DiscreteData& data() const { return data_; }
  int num_free() const { return space_.num_free(); }

  Eigen::VectorXd pack(const SystemState& state) const;
  SystemState unpack(const Eigen::VectorXd& x) const;

  /// Residual of the N, P and Poisson equations tested against every free
  /// basis function. Throws Error(NonPositiveIterate) on a non-positive density.
  Eigen::VectorXd residual(const Eigen::VectorXd& x, const SystemState& previous, double dt) const;
  SparseMatrix jacobian(const Eigen::VectorXd& x, const SystemState& previous, double dt) const;
  Eigen::VectorXd residual(const SystemState& state, const SystemState& previous, double dt) const {
    return residual(pack(state), previous, dt);
  }

  /// Newton problem for one time step (static condensation for HFV).
  NonlinearProblem step_problem(const SystemState& previous, double dt) const;
  /// Linear solver used for Newton directions.
  LinearSolver linear_solver() const;

  /// (N^0, P^0, phi^0) with phi^0 from the linear Poisson equation.
  SystemState initial_state() const;
  /// Nonlinear Poisson-Boltzmann equilibrium.
  Equilibrium solve_poisson_boltzmann(const NewtonConfig& config = equilibrium_newton_config()) const;
  static NewtonConfig equilibrium_newton_config();

  double relative_entropy(const SystemState& state, const Equilibrium& eq) const;
  std::pair<double, double> min_density(const SystemState& state) const;

 private:
  DiscreteSpace space_;
  CaseSpec spec_;
  DiscreteData data_;
};

/// H(s) = s log s - s + 1 evaluated as e * H(u / e) without cancellation
/// near u = e.
double relative_boltzmann(double u, double e);

}  // namespace fvdd
