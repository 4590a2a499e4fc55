#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fvdd/driftdiff.hpp"

namespace fvdd {

/// Generator spec or mesh file. `kind` is cartesian, quad-distort, tri or file.
struct MeshSource {
  std::string kind = "tri";
  int n = 16;
  double amp = 0.3;
  std::uint64_t seed = 42;
  std::filesystem::path file;
};

/// Builds the mesh and tags the boundary for the PN junction.
PrimalMesh make_mesh(const MeshSource& source);

struct RunConfig {
  double nd0 = 0.1;
  double nd1 = 1.0;
  double alpha0 = -4.0;
  double lambda = 0.05;
  Framework scheme = Framework::Ddfv;
  MeshSource mesh;
  double dt_ini = 1.4e-3;
  double dt_max = 0.1;
  double t_end = 1.0;
  double eta = hfv::kDefaultEta;
  PotentialGuess potential_guess = PotentialGuess::Equilibrium;
  NewtonConfig newton;
  std::filesystem::path output;
  std::filesystem::path summary;

  void check() const;
  CaseSpec case_spec() const { return pn_junction(nd0, nd1, alpha0, lambda); }
};

/// Sets one field from its key (the CLI flag name without dashes).
/// Throws Error(InvalidArgument) on an unknown key or unparsable value.
void apply_setting(RunConfig& config, const std::string& key, const std::string& value);
/// Reads `key = value` lines; `#` starts a comment.
void load_config(RunConfig& config, std::istream& in);
void load_config(RunConfig& config, const std::filesystem::path& path);

DiscreteSpace make_space(const RunConfig& config, const PrimalMesh& mesh);

struct TimeSeriesRecord {
  double time = 0.0;
  double dt = 0.0;
  int newton_iters = 0;
  double min_n = 0.0;
  double min_p = 0.0;
  double entropy = 0.0;
};

struct RunResult {
  Framework scheme = Framework::Ddfv;
  /// records[0] is the initial state (dt = 0, no Newton iterations).
  std::vector<TimeSeriesRecord> records;
  int total_newton_iterations = 0;
  int rejections = 0;
  int equilibrium_newton_iterations = 0;
  double final_entropy = 0.0;
};

RunResult simulate(const RunConfig& config, const PrimalMesh& mesh);

/// Least-squares fit of log E against t over the accepted steps (the initial
/// row is excluded) with E > plateau_factor * E_final. Needs 3 points.
struct DecayFit {
  bool sufficient = false;
  int points = 0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

DecayFit fit_entropy_decay(const std::vector<TimeSeriesRecord>& records, double plateau_factor = 100.0);

inline constexpr const char* kCsvHeader = "time,dt,newton_iters,min_N,min_P,entropy";

void write_csv(const std::vector<TimeSeriesRecord>& records, std::ostream& out);
void write_summary(const RunResult& result, std::ostream& out);

struct EquilibriumReport {
  DiscreteSpace space;
  Equilibrium equilibrium;
  double initial_entropy = 0.0;
};

EquilibriumReport compute_equilibrium(const RunConfig& config, const PrimalMesh& mesh);
/// One line per unknown: index,x,y,phi,N,P.
void write_equilibrium(const EquilibriumReport& report, std::ostream& out);

struct CompareResult {
  RunResult ddfv;
  RunResult hfv;
  DecayFit ddfv_fit;
  DecayFit hfv_fit;
};

/// Runs both schemes; concurrently when FVDD_THREADS (default: hardware
/// concurrency) allows two threads.
CompareResult compare(const RunConfig& config, const PrimalMesh& mesh);
void write_report(const CompareResult& result, std::ostream& out);

/// Concurrency cap from FVDD_THREADS, at least 1.
int thread_limit();

}  // namespace fvdd
