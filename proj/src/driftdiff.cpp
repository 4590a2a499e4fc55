#include "fvdd/driftdiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fvdd/error.hpp"

namespace fvdd {

const char* to_string(Framework framework) { return framework == Framework::Ddfv ? "ddfv" : "hfv"; }

Framework framework_from_string(const std::string& name) {
  if (name == "ddfv" || name == "DDFV") return Framework::Ddfv;
  if (name == "hfv" || name == "HFV") return Framework::Hfv;
  throw Error(ErrorCode::InvalidArgument, "unknown scheme '" + name + "' (expected ddfv or hfv)");
}

const char* to_string(PotentialGuess kind) { return kind == PotentialGuess::Equilibrium ? "equilibrium" : "previous"; }

PotentialGuess potential_guess_from_string(const std::string& name) {
  if (name == "equilibrium") return PotentialGuess::Equilibrium;
  if (name == "previous") return PotentialGuess::Previous;
  throw Error(ErrorCode::InvalidArgument, "unknown potential guess '" + name + "' (expected equilibrium or previous)");
}

double Doping::at(const Point& p) const {
  for (const auto& r : regions)
    if (r.box.contains(p)) return r.value;
  return background;
}

double Doping::mean_over(std::span<const Point> polygon) const {
  const double area = signed_area(polygon);
  if (!(std::abs(area) > 0.0)) return at(centroid(polygon));
  double mean = background;
  for (const auto& r : regions) mean += (r.value - background) * signed_area(clip_to_box(polygon, r.box)) / area;
  return mean;
}

void CaseSpec::check() const {
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "Debye length must be positive");
  if (!n_initial || !p_initial) throw Error(ErrorCode::InvalidArgument, "initial data missing");
  if (contacts.empty()) throw Error(ErrorCode::InvalidArgument, "no Dirichlet contact data");
  for (const auto& [id, c] : contacts) {
    if (!(c.n > 0.0 && c.p > 0.0))
      throw Error(ErrorCode::InvalidArgument, "contact " + std::to_string(id) + " has non-positive density");
    if (std::abs(std::log(c.n) - c.phi - alpha_n) > 1e-12 || std::abs(std::log(c.p) + c.phi - alpha_p) > 1e-12)
      throw Error(ErrorCode::InvalidArgument, "contact " + std::to_string(id) + " violates the compatibility condition");
  }
}

const ContactData& CaseSpec::contact(int segment) const {
  const auto it = contacts.find(segment);
  if (it == contacts.end()) throw Error(ErrorCode::InvalidArgument, "no data for Dirichlet segment " + std::to_string(segment));
  return it->second;
}

Box pn_junction_n_region() { return Box{{0.0, 0.5}, {0.5, 1.0}}; }

CaseSpec pn_junction(double nd0, double nd1, double alpha0, double lambda) {
  if (!(nd0 > 0.0 && nd1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "contact densities must be positive");
  CaseSpec spec;
  spec.lambda = lambda;
  spec.alpha_n = spec.alpha_p = 0.5 * alpha0;
  auto contact = [alpha0](double nd) {
    const double pd = std::exp(alpha0) / nd;
    return ContactData{nd, pd, 0.5 * (std::log(nd) - std::log(pd))};
  };
  spec.contacts = {{0, contact(nd0)}, {1, contact(nd1)}};
  const double pd0 = spec.contacts[0].p;
  const double pd1 = spec.contacts[1].p;
  spec.n_initial = [nd0, nd1](const Point& x) { return nd1 + (nd0 - nd1) * (1.0 - std::sqrt(std::max(0.0, x.y()))); };
  spec.p_initial = [pd0, pd1](const Point& x) { return pd1 + (pd0 - pd1) * (1.0 - std::sqrt(std::max(0.0, x.y()))); };
  spec.doping.background = -1.0;
  spec.doping.regions = {{pn_junction_n_region(), 1.0}};
  spec.geometry = BoundaryGeometry::pn_junction();
  return spec;
}

DiscreteSpace DiscreteSpace::ddfv(const PrimalMesh& mesh) {
  DiscreteSpace s;
  s.framework_ = Framework::Ddfv;
  auto dm = std::make_shared<const ddfv::DdfvMesh>(ddfv::build_ddfv(mesh));
  s.points_ = dm->points();
  s.control_volumes_ = dm->control_volumes();
  s.dirichlet_segment_ = dm->dirichlet_segment();
  s.mass_ = 0.5 * Eigen::Map<const Eigen::VectorXd>(dm->measures().data(), dm->size());
  s.elements_.reserve(dm->diamonds().size());
  for (const auto& d : dm->diamonds()) {
    LocalElement e;
    e.dofs.assign(d.unknowns.begin(), d.unknowns.end());
    e.weights.assign(4, 0.25);
    const auto c = d.gradient_coefficients();
    e.stiffness.resize(4, 4);
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) e.stiffness(j, k) = d.measure * c[j].dot(c[k]);
    s.elements_.push_back(std::move(e));
  }
  s.ddfv_ = std::move(dm);
  s.finish();
  return s;
}

DiscreteSpace DiscreteSpace::hfv(const PrimalMesh& mesh, double eta) {
  DiscreteSpace s;
  s.framework_ = Framework::Hfv;
  auto hm = std::make_shared<const hfv::HybridMesh>(hfv::build_hybrid(mesh, eta));
  const int nc = mesh.num_cells();
  s.points_ = hm->points();
  s.dirichlet_segment_ = hm->dirichlet_segment();
  s.control_volumes_.assign(hm->size(), {});
  s.mass_ = Eigen::VectorXd::Zero(hm->size());
  for (int k = 0; k < nc; ++k) {
    s.control_volumes_[k] = mesh.cell_polygon(k);
    s.mass_[k] = mesh.cell_measure(k);
  }
  s.elements_.reserve(nc);
  for (int k = 0; k < nc; ++k) {
    const auto& pyramids = hm->pyramids(k);
    const int n = static_cast<int>(pyramids.size());
    LocalElement e;
    e.dofs.push_back(k);
    e.weights.push_back(0.5);
    for (const auto& p : pyramids) {
      e.dofs.push_back(hm->edge_index(p.edge));
      e.weights.push_back(0.5 / n);
    }
    e.stiffness = Eigen::MatrixXd::Zero(n + 1, n + 1);
    const auto ops = hfv::local_gradient_operators(*hm, k);
    for (int j = 0; j < n; ++j) e.stiffness += pyramids[j].measure * ops[j].transpose() * ops[j];
    s.elements_.push_back(std::move(e));
  }
  s.hybrid_ = std::move(hm);
  s.finish();
  return s;
}

void DiscreteSpace::finish() {
  free_.clear();
  free_position_.assign(size(), -1);
  for (int i = 0; i < size(); ++i) {
    if (dirichlet_segment_[i] >= 0) continue;
    free_position_[i] = static_cast<int>(free_.size());
    free_.push_back(i);
  }
}

double DiscreteSpace::mass_inner(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  return (mass_.array() * u.array() * v.array()).sum();
}

double DiscreteSpace::stiffness(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
  double sum = 0.0;
  for (const auto& e : elements_) {
    const int n = static_cast<int>(e.dofs.size());
    Eigen::VectorXd ul(n), vl(n);
    for (int j = 0; j < n; ++j) {
      ul[j] = u[e.dofs[j]];
      vl[j] = v[e.dofs[j]];
    }
    sum += ul.dot(e.stiffness * vl);
  }
  return sum;
}

double DiscreteSpace::trilinear(const Eigen::VectorXd& u, const Eigen::VectorXd& w, const Eigen::VectorXd& v) const {
  double sum = 0.0;
  for (const auto& e : elements_) {
    const int n = static_cast<int>(e.dofs.size());
    Eigen::VectorXd wl(n), vl(n);
    double r = 0.0;
    for (int j = 0; j < n; ++j) {
      wl[j] = w[e.dofs[j]];
      vl[j] = v[e.dofs[j]];
      r += e.weights[j] * u[e.dofs[j]];
    }
    sum += r * wl.dot(e.stiffness * vl);
  }
  return sum;
}

DirichletValues DiscreteSpace::project(const BoundaryFunction& g) const {
  if (ddfv_) return ddfv::project_dirichlet(*ddfv_, g);
  return hfv::project_dirichlet(*hybrid_, g);
}

DiscreteData discretise_case(const CaseSpec& spec, const DiscreteSpace& space) {
  spec.check();
  DiscreteData d;
  const int n = space.size();
  d.n0.resize(n);
  d.p0.resize(n);
  d.doping.resize(n);
  for (int i = 0; i < n; ++i) {
    const Polygon& cv = space.control_volumes()[i];
    const Point x = cv.empty() ? space.points()[i] : centroid(cv);
    d.n0[i] = spec.n_initial(x);
    d.p0[i] = spec.p_initial(x);
    d.doping[i] = cv.empty() ? spec.doping.at(x) : spec.doping.mean_over(cv);
  }
  d.n_dirichlet = space.project([&](const Point&, int s) { return spec.contact(s).n; });
  d.p_dirichlet = space.project([&](const Point&, int s) { return spec.contact(s).p; });
  d.phi_dirichlet = space.project([&](const Point&, int s) { return spec.contact(s).phi; });
  d.n_dirichlet.apply(d.n0);
  d.p_dirichlet.apply(d.p0);
  for (int i = 0; i < n; ++i) {
    if (!(d.n0[i] > 0.0 && d.p0[i] > 0.0) || !std::isfinite(d.n0[i]) || !std::isfinite(d.p0[i]))
      throw Error(ErrorCode::NonPositiveInitialData, "initial density not positive at unknown " + std::to_string(i));
  }
  return d;
}

double relative_boltzmann(double u, double e) {
  const double delta = (u - e) / e;
  if (std::abs(delta) < 1e-2) {
    // H(1 + d) = sum_{k >= 2} (-1)^k d^k / (k (k - 1))
    double term = delta * delta;
    double sum = 0.0;
    for (int k = 2; k <= 14; ++k) {
      sum += (k % 2 == 0 ? 1.0 : -1.0) * term / (k * (k - 1.0));
      term *= delta;
    }
    return e * sum;
  }
  return u * std::log(u / e) - u + e;
}

DriftDiffusionScheme::DriftDiffusionScheme(DiscreteSpace space, CaseSpec spec)
    : space_(std::move(space)), spec_(std::move(spec)), data_(discretise_case(spec_, space_)) {}

Eigen::VectorXd DriftDiffusionScheme::pack(const SystemState& state) const {
  const int nf = num_free();
  Eigen::VectorXd x(3 * nf);
  for (int f = 0; f < nf; ++f) {
    const int i = space_.free_unknowns()[f];
    x[f] = state.n[i];
    x[nf + f] = state.p[i];
    x[2 * nf + f] = state.phi[i];
  }
  return x;
}

SystemState DriftDiffusionScheme::unpack(const Eigen::VectorXd& x) const {
  const int nf = num_free();
  const int n = space_.size();
  SystemState s;
  s.framework = space_.framework();
  s.n.resize(n);
  s.p.resize(n);
  s.phi.resize(n);
  for (int f = 0; f < nf; ++f) {
    const int i = space_.free_unknowns()[f];
    s.n[i] = x[f];
    s.p[i] = x[nf + f];
    s.phi[i] = x[2 * nf + f];
  }
  data_.n_dirichlet.apply(s.n);
  data_.p_dirichlet.apply(s.p);
  data_.phi_dirichlet.apply(s.phi);
  return s;
}

namespace {

void require_positive(const SystemState& s) {
  for (Eigen::Index i = 0; i < s.n.size(); ++i) {
    if (!(s.n[i] > 0.0) || !(s.p[i] > 0.0))
      throw Error(ErrorCode::NonPositiveIterate, "density not positive at unknown " + std::to_string(i));
  }
}

}  // namespace

Eigen::VectorXd DriftDiffusionScheme::residual(const Eigen::VectorXd& x, const SystemState& previous, double dt) const {
  const SystemState s = unpack(x);
  require_positive(s);
  const int nf = num_free();
  const auto& pos = space_.free_position();
  const auto& mass = space_.mass();
  const double l2 = spec_.lambda * spec_.lambda;
  Eigen::VectorXd R = Eigen::VectorXd::Zero(3 * nf);
  for (int f = 0; f < nf; ++f) {
    const int i = space_.free_unknowns()[f];
    R[f] += mass[i] * (s.n[i] - previous.n[i]) / dt;
    R[nf + f] += mass[i] * (s.p[i] - previous.p[i]) / dt;
    R[2 * nf + f] -= mass[i] * (data_.doping[i] + s.p[i] - s.n[i]);
  }
  for (const auto& e : space_.elements()) {
    const int m = static_cast<int>(e.dofs.size());
    Eigen::VectorXd wn(m), wp(m), ph(m);
    double rn = 0.0, rp = 0.0;
    for (int j = 0; j < m; ++j) {
      const int i = e.dofs[j];
      wn[j] = std::log(s.n[i]) - s.phi[i];
      wp[j] = std::log(s.p[i]) + s.phi[i];
      ph[j] = s.phi[i];
      rn += e.weights[j] * s.n[i];
      rp += e.weights[j] * s.p[i];
    }
    const Eigen::VectorXd an = e.stiffness * wn;
    const Eigen::VectorXd ap = e.stiffness * wp;
    const Eigen::VectorXd aphi = e.stiffness * ph;
    for (int j = 0; j < m; ++j) {
      const int f = pos[e.dofs[j]];
      if (f < 0) continue;
      R[f] += rn * an[j];
      R[nf + f] += rp * ap[j];
      R[2 * nf + f] += l2 * aphi[j];
    }
  }
  return R;
}

SparseMatrix DriftDiffusionScheme::jacobian(const Eigen::VectorXd& x, const SystemState& previous, double dt) const {
  (void)previous;
  const SystemState s = unpack(x);
  require_positive(s);
  const int nf = num_free();
  const auto& pos = space_.free_position();
  const auto& mass = space_.mass();
  const double l2 = spec_.lambda * spec_.lambda;
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(nf) * 40);
  for (int f = 0; f < nf; ++f) {
    const int i = space_.free_unknowns()[f];
    if (mass[i] == 0.0) continue;
    t.emplace_back(f, f, mass[i] / dt);
    t.emplace_back(nf + f, nf + f, mass[i] / dt);
    t.emplace_back(2 * nf + f, f, mass[i]);
    t.emplace_back(2 * nf + f, nf + f, -mass[i]);
  }
  for (const auto& e : space_.elements()) {
    const int m = static_cast<int>(e.dofs.size());
    Eigen::VectorXd wn(m), wp(m);
    double rn = 0.0, rp = 0.0;
    for (int j = 0; j < m; ++j) {
      const int i = e.dofs[j];
      wn[j] = std::log(s.n[i]) - s.phi[i];
      wp[j] = std::log(s.p[i]) + s.phi[i];
      rn += e.weights[j] * s.n[i];
      rp += e.weights[j] * s.p[i];
    }
    const Eigen::VectorXd an = e.stiffness * wn;
    const Eigen::VectorXd ap = e.stiffness * wp;
    for (int j = 0; j < m; ++j) {
      const int row = pos[e.dofs[j]];
      if (row < 0) continue;
      for (int k = 0; k < m; ++k) {
        const int col = pos[e.dofs[k]];
        if (col < 0) continue;
        const int i = e.dofs[k];
        const double a = e.stiffness(j, k);
        t.emplace_back(row, col, e.weights[k] * an[j] + rn * a / s.n[i]);
        t.emplace_back(row, 2 * nf + col, -rn * a);
        t.emplace_back(nf + row, nf + col, e.weights[k] * ap[j] + rp * a / s.p[i]);
        t.emplace_back(nf + row, 2 * nf + col, rp * a);
        t.emplace_back(2 * nf + row, 2 * nf + col, l2 * a);
      }
    }
  }
  SparseMatrix J(3 * nf, 3 * nf);
  J.setFromTriplets(t.begin(), t.end());
  return J;
}

namespace {

// Groups {c, nf + c, 2 nf + c, ...} of the HFV cell unknowns for condensation.
std::vector<std::vector<int>> cell_groups(const DiscreteSpace& space, int num_vars) {
  std::vector<std::vector<int>> groups;
  const int nf = space.num_free();
  const int nc = space.hybrid_mesh()->primal().num_cells();
  groups.reserve(nc);
  for (int k = 0; k < nc; ++k) {
    const int f = space.free_position()[k];
    std::vector<int> g;
    for (int v = 0; v < num_vars; ++v) g.push_back(v * nf + f);
    groups.push_back(std::move(g));
  }
  return groups;
}

LinearSolver make_solver(const DiscreteSpace& space, int num_vars) {
  if (space.framework() == Framework::Ddfv) return solve_linear;
  auto groups = std::make_shared<const std::vector<std::vector<int>>>(cell_groups(space, num_vars));
  return [groups](const SparseSystem& system) { return hfv::solve_condensed(system, *groups); };
}

}  // namespace

LinearSolver DriftDiffusionScheme::linear_solver() const { return make_solver(space_, 3); }

NonlinearProblem DriftDiffusionScheme::step_problem(const SystemState& previous, double dt) const {
  NonlinearProblem problem;
  problem.residual = [this, previous, dt](const Eigen::VectorXd& x) { return residual(x, previous, dt); };
  problem.jacobian = [this, previous, dt](const Eigen::VectorXd& x) { return jacobian(x, previous, dt); };
  problem.linear_solver = linear_solver();
  problem.positive.assign(3 * num_free(), false);
  std::fill(problem.positive.begin(), problem.positive.begin() + 2 * num_free(), true);
  return problem;
}

namespace {

// Free-free stiffness block and the Dirichlet lift K_fD phi_D.
struct PoissonOperator {
  SparseMatrix stiffness;
  Eigen::VectorXd lift;
};

PoissonOperator assemble_poisson(const DiscreteSpace& space, const Eigen::VectorXd& phi_full) {
  const int nf = space.num_free();
  const auto& pos = space.free_position();
  std::vector<Triplet> t;
  PoissonOperator op;
  op.lift = Eigen::VectorXd::Zero(nf);
  for (const auto& e : space.elements()) {
    const int m = static_cast<int>(e.dofs.size());
    for (int j = 0; j < m; ++j) {
      const int row = pos[e.dofs[j]];
      if (row < 0) continue;
      for (int k = 0; k < m; ++k) {
        const int col = pos[e.dofs[k]];
        if (col < 0)
          op.lift[row] += e.stiffness(j, k) * phi_full[e.dofs[k]];
        else
          t.emplace_back(row, col, e.stiffness(j, k));
      }
    }
  }
  op.stiffness.resize(nf, nf);
  op.stiffness.setFromTriplets(t.begin(), t.end());
  return op;
}

}  // namespace

SystemState DriftDiffusionScheme::initial_state() const {
  SystemState s;
  s.framework = space_.framework();
  s.n = data_.n0;
  s.p = data_.p0;
  s.phi = Eigen::VectorXd::Zero(space_.size());
  data_.phi_dirichlet.apply(s.phi);
  const PoissonOperator op = assemble_poisson(space_, s.phi);
  const double l2 = spec_.lambda * spec_.lambda;
  const int nf = num_free();
  Eigen::VectorXd rhs(nf);
  for (int f = 0; f < nf; ++f) {
    const int i = space_.free_unknowns()[f];
    rhs[f] = space_.mass()[i] * (data_.doping[i] + s.p[i] - s.n[i]) - l2 * op.lift[f];
  }
  const Eigen::VectorXd phi = make_solver(space_, 1)(SparseSystem{l2 * op.stiffness, rhs});
  for (int f = 0; f < nf; ++f) s.phi[space_.free_unknowns()[f]] = phi[f];
  return s;
}

NewtonConfig DriftDiffusionScheme::equilibrium_newton_config() {
  NewtonConfig c;
  c.residual_tolerance = 1e-12;
  c.step_tolerance = 1e-12;
  c.max_iterations = 100;
  c.positivity_damping = false;
  return c;
}

Equilibrium DriftDiffusionScheme::solve_poisson_boltzmann(const NewtonConfig& config) const {
  const int nf = num_free();
  const int n = space_.size();
  const double l2 = spec_.lambda * spec_.lambda;
  const double an = spec_.alpha_n, ap = spec_.alpha_p;
  Eigen::VectorXd phi_full = Eigen::VectorXd::Zero(n);
  data_.phi_dirichlet.apply(phi_full);
  const PoissonOperator op = assemble_poisson(space_, phi_full);

  // Charge-neutral start: C + e^(ap - phi) - e^(an + phi) = 0.
  Eigen::VectorXd x0(nf);
  for (int f = 0; f < nf; ++f) {
    const double c = data_.doping[space_.free_unknowns()[f]];
    const double a = std::exp(ap), b = std::exp(an);
    x0[f] = std::log((c + std::sqrt(c * c + 4.0 * a * b)) / (2.0 * b));
  }
  Eigen::VectorXd mass(nf), charge(nf);
  for (int f = 0; f < nf; ++f) {
    const int i = space_.free_unknowns()[f];
    mass[f] = space_.mass()[i];
    charge[f] = data_.doping[i];
  }
  NonlinearProblem problem;
  problem.residual = [&](const Eigen::VectorXd& phi) -> Eigen::VectorXd {
    const Eigen::ArrayXd carriers = (ap - phi.array()).exp() - (an + phi.array()).exp();
    return l2 * (op.stiffness * phi + op.lift) - (mass.array() * (charge.array() + carriers)).matrix();
  };
  problem.jacobian = [&](const Eigen::VectorXd& phi) -> SparseMatrix {
    SparseMatrix J = l2 * op.stiffness;
    const Eigen::ArrayXd d = mass.array() * ((ap - phi.array()).exp() + (an + phi.array()).exp());
    for (int f = 0; f < nf; ++f) J.coeffRef(f, f) += d[f];
    return J;
  };
  problem.linear_solver = make_solver(space_, 1);
  const NewtonResult result = newton(problem, x0, config);
  if (!result.converged) throw Error(ErrorCode::NewtonFailure, "Poisson-Boltzmann solve failed: " + result.failure);

  Equilibrium eq;
  eq.newton_iterations = result.iterations;
  eq.phi = phi_full;
  for (int f = 0; f < nf; ++f) eq.phi[space_.free_unknowns()[f]] = result.x[f];
  eq.n = (an + eq.phi.array()).exp().matrix();
  eq.p = (ap - eq.phi.array()).exp().matrix();
  return eq;
}

double DriftDiffusionScheme::relative_entropy(const SystemState& state, const Equilibrium& eq) const {
  const auto& mass = space_.mass();
  double sum = 0.0;
  for (int i = 0; i < space_.size(); ++i) {
    if (mass[i] == 0.0) continue;
    sum += mass[i] * (relative_boltzmann(state.n[i], eq.n[i]) + relative_boltzmann(state.p[i], eq.p[i]));
  }
  const Eigen::VectorXd dphi = state.phi - eq.phi;
  return sum + 0.5 * spec_.lambda * spec_.lambda * space_.stiffness(dphi, dphi);
}

std::pair<double, double> DriftDiffusionScheme::min_density(const SystemState& state) const {
  return {state.n.minCoeff(), state.p.minCoeff()};
}

}  // namespace fvdd
