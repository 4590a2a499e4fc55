#include "fvdd/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "fvdd/error.hpp"

namespace fvdd {

PrimalMesh make_mesh(const MeshSource& source) {
  PrimalMesh mesh = [&] {
    if (source.kind == "file") return load_mesh(source.file);
    if (source.n < 1) throw Error(ErrorCode::InvalidArgument, "mesh size n must be at least 1");
    if (source.kind == "cartesian") return build_cartesian(source.n, source.n);
    if (source.kind == "quad-distort") return distort_quads(build_cartesian(source.n, source.n), source.amp, source.seed);
    if (source.kind == "tri") return build_triangular(source.n);
    throw Error(ErrorCode::InvalidArgument, "unknown mesh kind '" + source.kind + "'");
  }();
  return tag_boundary(mesh, BoundaryGeometry::pn_junction());
}

void RunConfig::check() const {
  if (!(nd0 > 0.0 && nd1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "nd0 and nd1 must be positive");
  if (!(lambda > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(t_end >= 0.0)) throw Error(ErrorCode::InvalidArgument, "t_end must be non-negative");
  if (!(eta > 0.0)) throw Error(ErrorCode::InvalidArgument, "eta must be positive");
  TimeStepper::make(dt_ini, dt_max);
  newton.check();
}

namespace {

std::string normalise_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size())
    throw Error(ErrorCode::InvalidArgument, "bad number '" + value + "' for " + key);
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size())
    throw Error(ErrorCode::InvalidArgument, "bad integer '" + value + "' for " + key);
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void apply_setting(RunConfig& c, const std::string& raw_key, const std::string& value) {
  const std::string key = normalise_key(raw_key);
  if (key == "nd0") c.nd0 = parse_double(key, value);
  else if (key == "nd1") c.nd1 = parse_double(key, value);
  else if (key == "alpha0") c.alpha0 = parse_double(key, value);
  else if (key == "lambda") c.lambda = parse_double(key, value);
  else if (key == "scheme") c.scheme = framework_from_string(value);
  else if (key == "mesh") c.mesh.kind = value;
  else if (key == "mesh-file") {
    c.mesh.kind = "file";
    c.mesh.file = value;
  } else if (key == "n") c.mesh.n = static_cast<int>(parse_int(key, value));
  else if (key == "amp") c.mesh.amp = parse_double(key, value);
  else if (key == "seed") c.mesh.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "dt-ini") c.dt_ini = parse_double(key, value);
  else if (key == "dt-max") c.dt_max = parse_double(key, value);
  else if (key == "dt") c.dt_ini = c.dt_max = parse_double(key, value);
  else if (key == "t-end") c.t_end = parse_double(key, value);
  else if (key == "eta") c.eta = parse_double(key, value);
  else if (key == "potential-guess") c.potential_guess = potential_guess_from_string(value);
  else if (key == "newton-residual-tol") c.newton.residual_tolerance = parse_double(key, value);
  else if (key == "newton-step-tol") c.newton.step_tolerance = parse_double(key, value);
  else if (key == "newton-max-iter") c.newton.max_iterations = static_cast<int>(parse_int(key, value));
  else if (key == "output") c.output = value;
  else if (key == "summary") c.summary = value;
  else throw Error(ErrorCode::InvalidArgument, "unknown setting '" + raw_key + "'");
}

void load_config(RunConfig& config, std::istream& in) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ParseError, "config line " + std::to_string(number) + ": expected key = value");
    apply_setting(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void load_config(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open config file " + path.string());
  load_config(config, in);
}

DiscreteSpace make_space(const RunConfig& config, const PrimalMesh& mesh) {
  return config.scheme == Framework::Ddfv ? DiscreteSpace::ddfv(mesh) : DiscreteSpace::hfv(mesh, config.eta);
}

RunResult simulate(const RunConfig& config, const PrimalMesh& mesh) {
  config.check();
  const DriftDiffusionScheme scheme(make_space(config, mesh), config.case_spec());
  const Equilibrium eq = scheme.solve_poisson_boltzmann();
  SystemState initial = scheme.initial_state();

  RunResult result;
  result.scheme = config.scheme;
  result.equilibrium_newton_iterations = eq.newton_iterations;
  auto record = [&](const SystemState& s, double time, double dt, int iterations) {
    const auto [mn, mp] = scheme.min_density(s);
    result.records.push_back({time, dt, iterations, mn, mp, scheme.relative_entropy(s, eq)});
  };
  record(initial, 0.0, 0.0, 0);

  const Eigen::VectorXd x0 = scheme.pack(initial);
  SystemState guess = initial;
  guess.phi = eq.phi;
  const Eigen::VectorXd first_guess = scheme.pack(guess);
  const bool replace_guess = config.potential_guess == PotentialGuess::Equilibrium;
  const StepFactory factory = [&](const Eigen::VectorXd& previous, double dt) {
    NonlinearProblem problem = scheme.step_problem(scheme.unpack(previous), dt);
    if (replace_guess && previous == x0) problem.initial_guess = first_guess;
    return problem;
  };
  const TransientResult run =
      run_transient(factory, x0, config.t_end, TimeStepper::make(config.dt_ini, config.dt_max), config.newton);
  for (std::size_t k = 0; k < run.records.size(); ++k) {
    const auto& r = run.records[k];
    record(scheme.unpack(run.states[k + 1]), r.time, r.dt, r.newton_iterations);
  }
  result.total_newton_iterations = run.total_newton_iterations;
  result.rejections = run.rejections;
  result.final_entropy = result.records.back().entropy;
  return result;
}

DecayFit fit_entropy_decay(const std::vector<TimeSeriesRecord>& records, double plateau_factor) {
  DecayFit fit;
  if (records.empty()) return fit;
  const double threshold = plateau_factor * records.back().entropy;
  std::vector<double> t, y;
  for (const auto& r : records) {
    if (r.dt <= 0.0) continue;  // initial row
    if (r.entropy > threshold && r.entropy > 0.0) {
      t.push_back(r.time);
      y.push_back(std::log(r.entropy));
    }
  }
  fit.points = static_cast<int>(t.size());
  if (fit.points < 3) return fit;
  const double n = fit.points;
  double mt = 0.0, my = 0.0;
  for (int i = 0; i < fit.points; ++i) {
    mt += t[i] / n;
    my += y[i] / n;
  }
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (int i = 0; i < fit.points; ++i) {
    stt += (t[i] - mt) * (t[i] - mt);
    sty += (t[i] - mt) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(stt > 0.0)) return fit;
  fit.sufficient = true;
  fit.slope = sty / stt;
  fit.intercept = my - fit.slope * mt;
  fit.r_squared = syy > 0.0 ? sty * sty / (stt * syy) : 1.0;
  return fit;
}

void write_csv(const std::vector<TimeSeriesRecord>& records, std::ostream& out) {
  out << kCsvHeader << '\n' << std::setprecision(17);
  for (const auto& r : records)
    out << r.time << ',' << r.dt << ',' << r.newton_iters << ',' << r.min_n << ',' << r.min_p << ',' << r.entropy << '\n';
}

void write_summary(const RunResult& result, std::ostream& out) {
  double min_n = result.records.front().min_n, min_p = result.records.front().min_p;
  for (const auto& r : result.records) {
    min_n = std::min(min_n, r.min_n);
    min_p = std::min(min_p, r.min_p);
  }
  out << std::setprecision(17);
  out << "scheme " << to_string(result.scheme) << '\n'
      << "accepted_steps " << result.records.size() - 1 << '\n'
      << "total_newton_iterations " << result.total_newton_iterations << '\n'
      << "rejections " << result.rejections << '\n'
      << "final_time " << result.records.back().time << '\n'
      << "final_entropy " << result.final_entropy << '\n'
      << "min_N " << min_n << '\n'
      << "min_P " << min_p << '\n';
}

EquilibriumReport compute_equilibrium(const RunConfig& config, const PrimalMesh& mesh) {
  config.check();
  const DriftDiffusionScheme scheme(make_space(config, mesh), config.case_spec());
  Equilibrium eq = scheme.solve_poisson_boltzmann();
  const double entropy = scheme.relative_entropy(scheme.initial_state(), eq);
  return {scheme.space(), std::move(eq), entropy};
}

void write_equilibrium(const EquilibriumReport& report, std::ostream& out) {
  out << "index,x,y,phi,N,P\n" << std::setprecision(17);
  const auto& pts = report.space.points();
  const auto& eq = report.equilibrium;
  for (int i = 0; i < report.space.size(); ++i)
    out << i << ',' << pts[i].x() << ',' << pts[i].y() << ',' << eq.phi[i] << ',' << eq.n[i] << ',' << eq.p[i] << '\n';
}

int thread_limit() {
  if (const char* env = std::getenv("FVDD_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<int>(v);
    return 1;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

CompareResult compare(const RunConfig& config, const PrimalMesh& mesh) {
  RunConfig ddfv = config, hfv = config;
  ddfv.scheme = Framework::Ddfv;
  hfv.scheme = Framework::Hfv;
  CompareResult out;
  if (thread_limit() >= 2) {
    std::exception_ptr failure;
    std::thread worker([&] {
      try {
        out.hfv = simulate(hfv, mesh);
      } catch (...) {
        failure = std::current_exception();
      }
    });
    try {
      out.ddfv = simulate(ddfv, mesh);
    } catch (...) {
      worker.join();
      throw;
    }
    worker.join();
    if (failure) std::rethrow_exception(failure);
  } else {
    out.ddfv = simulate(ddfv, mesh);
    out.hfv = simulate(hfv, mesh);
  }
  out.ddfv_fit = fit_entropy_decay(out.ddfv.records);
  out.hfv_fit = fit_entropy_decay(out.hfv.records);
  return out;
}

void write_report(const CompareResult& result, std::ostream& out) {
  out << std::setprecision(17);
  auto one = [&out](const RunResult& r, const DecayFit& fit) {
    const std::string s = to_string(r.scheme);
    out << s << ".total_newton_iterations " << r.total_newton_iterations << '\n'
        << s << ".rejections " << r.rejections << '\n'
        << s << ".final_entropy " << r.final_entropy << '\n';
    if (fit.sufficient)
      out << s << ".decay_slope " << fit.slope << '\n' << s << ".decay_r2 " << fit.r_squared << '\n';
    else
      out << s << ".decay_slope insufficient data\n";
  };
  one(result.ddfv, result.ddfv_fit);
  one(result.hfv, result.hfv_fit);
  if (result.ddfv_fit.sufficient && result.hfv_fit.sufficient) {
    const double a = result.ddfv_fit.slope, b = result.hfv_fit.slope;
    out << "slope_relative_difference " << std::abs(a - b) / std::max(std::abs(a), std::abs(b)) << '\n';
  } else {
    out << "slope_relative_difference insufficient data\n";
  }
}

}  // namespace fvdd
