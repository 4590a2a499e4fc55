#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>

#include "fvdd/driftdiff.hpp"
#include "support.hpp"

using namespace fvdd;

namespace {

const PrimalMesh& small_mesh() {
  static const PrimalMesh m = tag_boundary(distort_quads(build_cartesian(4, 4), 0.2, 3), BoundaryGeometry::pn_junction());
  return m;
}

DiscreteSpace make(Framework f, const PrimalMesh& mesh = small_mesh()) {
  return f == Framework::Ddfv ? DiscreteSpace::ddfv(mesh) : DiscreteSpace::hfv(mesh);
}

// No doping, neutral contacts: the equilibrium is phi = 0, N = P = 1.
CaseSpec neutral_case(double lambda) {
  CaseSpec c;
  c.lambda = lambda;
  c.contacts = {{0, {1.0, 1.0, 0.0}}, {1, {1.0, 1.0, 0.0}}};
  c.n_initial = [](const Point& x) { return 1.0 + 0.5 * x.x() * x.y(); };
  c.p_initial = [](const Point& x) { return 2.0 - x.y(); };
  return c;
}

SystemState random_state(const DriftDiffusionScheme& s, std::uint64_t seed) {
  const int nf = s.num_free();
  Eigen::VectorXd x(3 * nf);
  x.head(2 * nf) = testing::random_vector(2 * nf, seed, 0.5, 2.0);
  x.tail(nf) = testing::random_vector(nf, seed + 1, -1.0, 1.0);
  return s.unpack(x);
}

// Residual assembled from the module-level forms, one basis function at a time.
Eigen::VectorXd oracle_residual(const DriftDiffusionScheme& scheme, const SystemState& s, const SystemState& prev, double dt) {
  const DiscreteSpace& space = scheme.space();
  const int nf = space.num_free(), n = space.size();
  const double l2 = scheme.spec().lambda * scheme.spec().lambda;
  const Eigen::VectorXd wn = s.n.array().log().matrix() - s.phi;
  const Eigen::VectorXd wp = s.p.array().log().matrix() + s.phi;
  const Eigen::VectorXd charge = scheme.data().doping + s.p - s.n;
  Eigen::VectorXd R(3 * nf);
  for (int f = 0; f < nf; ++f) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[space.free_unknowns()[f]] = 1.0;
    if (space.framework() == Framework::Ddfv) {
      const auto& m = *space.ddfv_mesh();
      R[f] = ddfv::inner(m, (s.n - prev.n) / dt, e) + ddfv::trilinear(m, s.n, wn, e);
      R[nf + f] = ddfv::inner(m, (s.p - prev.p) / dt, e) + ddfv::trilinear(m, s.p, wp, e);
      R[2 * nf + f] = l2 * ddfv::diamond_inner(m, ddfv::gradient(m, s.phi), ddfv::gradient(m, e)) - ddfv::inner(m, charge, e);
    } else {
      const auto& m = *space.hybrid_mesh();
      R[f] = hfv::cell_inner(m, (s.n - prev.n) / dt, e) + hfv::trilinear(m, s.n, wn, e);
      R[nf + f] = hfv::cell_inner(m, (s.p - prev.p) / dt, e) + hfv::trilinear(m, s.p, wp, e);
      R[2 * nf + f] = l2 * hfv::bilinear_a(m, s.phi, e) - hfv::cell_inner(m, charge, e);
    }
  }
  return R;
}

}  // namespace

TEST_CASE("framework names") {
  CHECK(std::string(to_string(Framework::Hfv)) == "hfv");
  CHECK(framework_from_string("ddfv") == Framework::Ddfv);
  CHECK(testing::error_code_of([] { framework_from_string("fem"); }) == ErrorCode::InvalidArgument);
  CHECK(potential_guess_from_string("previous") == PotentialGuess::Previous);
  CHECK(std::string(to_string(PotentialGuess::Equilibrium)) == "equilibrium");
}

TEST_CASE("PN junction data") {
  const CaseSpec a = pn_junction(0.1, 1.0, -4.0, 0.05);
  CHECK(a.contact(0).p == doctest::Approx(std::exp(-4.0) / 0.1));
  CHECK(a.alpha_n == -2.0);
  CHECK(a.alpha_p == -2.0);
  CHECK(a.contact(1).n == 1.0);
  CHECK(a.n_initial(Point(0.3, 0.0)) == doctest::Approx(0.1));
  CHECK(a.n_initial(Point(0.3, 1.0)) == doctest::Approx(1.0));
  CHECK(a.doping.at(Point(0.25, 0.75)) == 1.0);
  CHECK(a.doping.at(Point(0.75, 0.75)) == -1.0);
  CHECK(a.doping.at(Point(0.25, 0.25)) == -1.0);
  a.check();
  for (const auto& [id, c] : a.contacts) {
    CHECK(std::log(c.n) - c.phi == doctest::Approx(a.alpha_n));
    CHECK(std::log(c.p) + c.phi == doctest::Approx(a.alpha_p));
  }

  const CaseSpec b = pn_junction(std::exp(1.0), 1.0, 0.0, 1.0);
  CHECK(b.contact(0).p == doctest::Approx(std::exp(-1.0)));
  CHECK(b.contact(0).phi == doctest::Approx(1.0));
  CHECK(b.contact(1).phi == doctest::Approx(0.0));

  CaseSpec bad = a;
  bad.contacts[0].phi += 1e-6;
  CHECK(testing::error_code_of([&] { bad.check(); }) == ErrorCode::InvalidArgument);
  CHECK(testing::error_code_of([&] { a.contact(5); }) == ErrorCode::InvalidArgument);
  CHECK(testing::error_code_of([] { pn_junction(0.0, 1.0, 0.0, 1.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("doping means") {
  const CaseSpec c = pn_junction(0.1, 1.0, -4.0, 0.05);
  const Polygon straddle{{0.4, 0.4}, {0.6, 0.4}, {0.6, 0.6}, {0.4, 0.6}};
  CHECK(c.doping.mean_over(straddle) == doctest::Approx(-0.5));
  const Polygon inside{{0.1, 0.6}, {0.2, 0.6}, {0.2, 0.7}};
  CHECK(c.doping.mean_over(inside) == doctest::Approx(1.0));
}

TEST_CASE("discretisation of the data") {
  const CaseSpec c = pn_junction(0.1, 1.0, -4.0, 0.05);
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    CAPTURE(to_string(f));
    const DiscreteSpace space = make(f, tag_boundary(build_cartesian(4, 4), BoundaryGeometry::pn_junction()));
    const DiscreteData d = discretise_case(c, space);
    double total = 0.0, mass = 0.0;
    for (int i = 0; i < space.size(); ++i) {
      CHECK(std::abs(d.doping[i]) <= 1.0 + 1e-14);
      total += space.mass()[i] * d.doping[i];
      mass += space.mass()[i];
      const int seg = space.dirichlet_segment()[i];
      if (seg == 0) CHECK(d.n0[i] == 0.1);
      if (seg == 1) CHECK(d.p0[i] == doctest::Approx(std::exp(-4.0)));
    }
    CHECK(mass == doctest::Approx(1.0));
    CHECK(total == doctest::Approx(-0.5));  // +1 on a quarter, -1 elsewhere
    CHECK(d.phi_dirichlet.unknowns.size() == d.n_dirichlet.unknowns.size());

    CaseSpec constant = neutral_case(1.0);
    constant.n_initial = [](const Point&) { return 1.0; };
    const DiscreteData k = discretise_case(constant, space);
    CHECK((k.n0.array() == 1.0).all());
    CHECK((k.doping.array() == 0.0).all());

    CaseSpec negative = neutral_case(1.0);
    negative.p_initial = [](const Point& x) { return x.x() - 0.5; };
    CHECK(testing::error_code_of([&] { discretise_case(negative, space); }) == ErrorCode::NonPositiveInitialData);
  }
}

TEST_CASE("relative Boltzmann entropy density") {
  for (double e : {0.01, 1.0, 30.0}) {
    CHECK(relative_boltzmann(e, e) == 0.0);
    for (double d : {-0.5, -1e-3, 1e-5, 5e-3, 0.009, 0.011, 2.0}) {
      const double u = e * (1.0 + d);
      const double direct = u * std::log(u / e) - u + e;
      CHECK(relative_boltzmann(u, e) >= 0.0);
      CHECK(relative_boltzmann(u, e) == doctest::Approx(direct).epsilon(std::abs(d) < 1e-2 ? 1e-6 : 1e-12));
    }
    // Series against the closed form of the leading terms.
    const double d = 1e-4;
    CHECK(relative_boltzmann(e * (1 + d), e) == doctest::Approx(e * (d * d / 2 - d * d * d / 6)).epsilon(1e-10));
  }
}

TEST_CASE("packing round trip") {
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    const DriftDiffusionScheme s(make(f), pn_junction(0.1, 1.0, -4.0, 0.05));
    const Eigen::VectorXd x = testing::random_vector(3 * s.num_free(), 2, 0.5, 1.0);
    CHECK(s.pack(s.unpack(x)) == x);
    const SystemState st = s.unpack(x);
    for (int i = 0; i < s.space().size(); ++i)
      if (s.space().dirichlet_segment()[i] == 1) CHECK(st.n[i] == 1.0);
  }
}

TEST_CASE("residual matches the weak form") {
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    CAPTURE(to_string(f));
    const DriftDiffusionScheme s(make(f), pn_junction(0.1, 1.0, -4.0, 0.3));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const SystemState state = random_state(s, 10 * seed), prev = random_state(s, 10 * seed + 5);
      const Eigen::VectorXd r = s.residual(state, prev, 0.01);
      const Eigen::VectorXd o = oracle_residual(s, state, prev, 0.01);
      CHECK((r - o).lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + o.lpNorm<Eigen::Infinity>()));
    }
    SystemState bad = random_state(s, 1);
    bad.p[s.space().free_unknowns()[0]] = 0.0;
    CHECK(testing::error_code_of([&] { s.residual(s.pack(bad), bad, 0.1); }) == ErrorCode::NonPositiveIterate);
  }
}

TEST_CASE("constant state of a neutral case is stationary") {
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    const DriftDiffusionScheme s(make(f), neutral_case(0.7));
    SystemState one = s.unpack(Eigen::VectorXd::Zero(3 * s.num_free()));
    one.n.setOnes();
    one.p.setOnes();
    CHECK(s.residual(one, one, 0.1).lpNorm<Eigen::Infinity>() < 1e-14);
  }
}

TEST_CASE("Jacobian matches central differences") {
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    CAPTURE(to_string(f));
    const DriftDiffusionScheme s(make(f), pn_junction(0.1, 1.0, -4.0, 0.2));
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      const SystemState prev = random_state(s, 100 + seed);
      const Eigen::VectorXd x = s.pack(random_state(s, 200 + seed));
      const Eigen::MatrixXd J = Eigen::MatrixXd(s.jacobian(x, prev, 0.05));
      for (int c = 0; c < x.size(); ++c) {
        const double h = 1e-7 * std::max(1.0, std::abs(x[c]));
        Eigen::VectorXd xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const Eigen::VectorXd fd = (s.residual(xp, prev, 0.05) - s.residual(xm, prev, 0.05)) / (2.0 * h);
        const double scale = std::max(1.0, J.col(c).lpNorm<Eigen::Infinity>());
        CHECK((fd - J.col(c)).lpNorm<Eigen::Infinity>() <= 1e-5 * scale);
      }
    }
  }
}

TEST_CASE("Poisson-Boltzmann equilibrium") {
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    CAPTURE(to_string(f));
    const DriftDiffusionScheme neutral(make(f), neutral_case(0.5));
    const Equilibrium z = neutral.solve_poisson_boltzmann();
    CHECK(z.phi.lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK((z.n.array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK(z.newton_iterations == 0);

    const DriftDiffusionScheme s(make(f), pn_junction(0.1, 1.0, -4.0, 0.05));
    const Equilibrium eq = s.solve_poisson_boltzmann();
    CHECK(eq.newton_iterations > 0);
    for (int i = 0; i < s.space().size(); ++i)
      CHECK(std::abs(eq.n[i] * eq.p[i] - std::exp(-4.0)) <= 1e-12 * std::exp(-4.0));
    const SystemState st{f, eq.n, eq.p, eq.phi};
    // Equilibrium is a steady state of the full scheme.
    const Eigen::VectorXd r = s.residual(st, st, 1.0);
    CHECK(r.lpNorm<Eigen::Infinity>() < 1e-10);

    CHECK(s.relative_entropy(st, eq) == 0.0);
    SystemState scaled = st;
    scaled.n *= std::exp(1.0);
    CHECK(s.relative_entropy(scaled, eq) == doctest::Approx(s.space().mass_inner(eq.n, Eigen::VectorXd::Ones(eq.n.size()))));
    for (std::uint64_t seed = 0; seed < 3; ++seed) CHECK(s.relative_entropy(random_state(s, seed), eq) > 0.0);
  }
}

TEST_CASE("initial state solves the linear Poisson problem") {
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    const DriftDiffusionScheme s(make(f), pn_junction(0.1, 1.0, -4.0, 0.5));
    const SystemState st = s.initial_state();
    const Eigen::VectorXd r = s.residual(st, st, 1.0);
    const int nf = s.num_free();
    CHECK(r.tail(nf).lpNorm<Eigen::Infinity>() < 1e-12);
    CHECK(st.n == s.data().n0);
    const auto [mn, mp] = s.min_density(st);
    CHECK(mn == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(mp == st.p.minCoeff());
    CHECK(mp > 0.0);
  }
}

TEST_CASE("one step from equilibrium stays there") {
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    CAPTURE(to_string(f));
    const DriftDiffusionScheme s(make(f), pn_junction(0.1, 1.0, -4.0, 0.05));
    const Equilibrium eq = s.solve_poisson_boltzmann();
    const SystemState st{f, eq.n, eq.p, eq.phi};
    const NewtonConfig config;
    const NewtonResult r = newton(s.step_problem(st, 0.1), s.pack(st), config);
    CHECK(r.converged);
    CHECK((r.x - s.pack(st)).lpNorm<Eigen::Infinity>() <= 10.0 * config.residual_tolerance);
    CHECK(s.relative_entropy(s.unpack(r.x), eq) <= 1e-10);
  }
}

TEST_CASE("Newton converges quadratically on a time step") {
  for (Framework f : {Framework::Ddfv, Framework::Hfv}) {
    CAPTURE(to_string(f));
    const DriftDiffusionScheme s(make(f), pn_junction(0.1, 1.0, -4.0, 0.5));
    const SystemState st = s.initial_state();
    NewtonConfig config;
    config.residual_tolerance = 1e-13;
    const NewtonResult r = newton(s.step_problem(st, 1e-2), s.pack(st), config);
    REQUIRE(r.converged);
    const auto& e = r.residual_norms;
    int checked = 0;
    for (std::size_t k = 1; k + 1 < e.size(); ++k) {
      if (e[k] > 1e-2 || e[k + 1] < 1e-12) continue;
      CHECK(std::log(e[k + 1]) / std::log(e[k]) >= 1.5);
      ++checked;
    }
    CHECK(checked >= 1);
  }
}

TEST_CASE("condensed and direct Newton directions agree") {
  const DriftDiffusionScheme s(make(Framework::Hfv), pn_junction(0.1, 1.0, -4.0, 0.2));
  const SystemState prev = random_state(s, 7);
  const Eigen::VectorXd x = s.pack(random_state(s, 8));
  const SparseSystem sys{s.jacobian(x, prev, 0.05), -s.residual(x, prev, 0.05)};
  const Eigen::VectorXd direct = solve_linear(sys);
  const Eigen::VectorXd condensed = s.linear_solver()(sys);
  CHECK((direct - condensed).lpNorm<Eigen::Infinity>() <= 1e-10 * (1.0 + direct.lpNorm<Eigen::Infinity>()));
}
