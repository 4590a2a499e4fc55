#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fvdd/error.hpp"
#include "fvdd/simulation.hpp"

namespace {

// Flags shared by run, equilibrium and compare; names are RunConfig keys.
const std::vector<std::pair<std::string, std::string>> kRunFlags = {
    {"nd0", "electron density on the bottom contact"},
    {"nd1", "electron density on the top contact"},
    {"alpha0", "log(N^D P^D) on the contacts"},
    {"lambda", "rescaled Debye length"},
    {"mesh", "mesh generator: cartesian, quad-distort or tri"},
    {"mesh-file", "read the mesh from a file instead"},
    {"n", "generator resolution (n x n squares)"},
    {"amp", "quad-distort amplitude in [0, 0.45)"},
    {"seed", "quad-distort seed"},
    {"dt-ini", "initial time step"},
    {"dt-max", "maximal time step"},
    {"dt", "sets dt-ini and dt-max"},
    {"t-end", "final time"},
    {"eta", "HFV stabilisation parameter"},
    {"potential-guess", "first-step Newton guess for phi: equilibrium or previous"},
    {"newton-residual-tol", "Newton residual tolerance (max norm)"},
    {"newton-step-tol", "Newton relative update tolerance"},
    {"newton-max-iter", "Newton iteration cap"},
};

struct RunFlags {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_run_flags(CLI::App* cmd, RunFlags& flags, bool with_scheme) {
  cmd->add_option("--config", flags.config_file, "key = value file, overridden by flags")->check(CLI::ExistingFile);
  for (const auto& [name, help] : kRunFlags) cmd->add_option("--" + name, flags.values[name], help);
  if (with_scheme)
    cmd->add_option("--scheme", flags.values["scheme"], "ddfv or hfv")->check(CLI::IsMember({"ddfv", "hfv"}));
}

fvdd::RunConfig resolve(const CLI::App* cmd, const RunFlags& flags) {
  fvdd::RunConfig config;
  if (!flags.config_file.empty()) fvdd::load_config(config, flags.config_file);
  for (const auto& [name, value] : flags.values)
    if (cmd->count("--" + name) > 0) fvdd::apply_setting(config, name, value);
  config.check();
  return config;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw fvdd::Error(fvdd::ErrorCode::InvalidArgument, "cannot write " + path);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Drift-diffusion finite volume simulator (DDFV and HFV schemes)"};
  app.require_subcommand(1);

  auto* mesh_cmd = app.add_subcommand("mesh", "generate a PN-junction mesh file");
  std::string mesh_kind, mesh_output;
  fvdd::MeshSource source;
  mesh_cmd->add_option("kind", mesh_kind, "cartesian, quad-distort or tri")
      ->required()
      ->check(CLI::IsMember({"cartesian", "quad-distort", "tri"}));
  mesh_cmd->add_option("--n", source.n, "number of squares per side")->check(CLI::PositiveNumber);
  mesh_cmd->add_option("--amp", source.amp, "distortion amplitude");
  mesh_cmd->add_option("--seed", source.seed, "distortion seed");
  mesh_cmd->add_option("-o,--output", mesh_output, "output file")->required();

  auto* run_cmd = app.add_subcommand("run", "transient simulation; writes the CSV time series");
  RunFlags run_flags;
  std::string run_output, run_summary;
  add_run_flags(run_cmd, run_flags, true);
  run_cmd->add_option("-o,--output", run_output, "CSV file (default: stdout)");
  run_cmd->add_option("--summary", run_summary, "summary file");

  auto* eq_cmd = app.add_subcommand("equilibrium", "Poisson-Boltzmann equilibrium dump");
  RunFlags eq_flags;
  std::string eq_output;
  add_run_flags(eq_cmd, eq_flags, true);
  eq_cmd->add_option("-o,--output", eq_output, "dump file (default: stdout)");

  auto* cmp_cmd = app.add_subcommand("compare", "run both schemes on the same mesh and case");
  RunFlags cmp_flags;
  std::string cmp_ddfv, cmp_hfv, cmp_report;
  add_run_flags(cmp_cmd, cmp_flags, false);
  cmp_cmd->add_option("--ddfv-output", cmp_ddfv, "DDFV CSV file")->required();
  cmp_cmd->add_option("--hfv-output", cmp_hfv, "HFV CSV file")->required();
  cmp_cmd->add_option("--report", cmp_report, "report file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mesh_cmd) {
      source.kind = mesh_kind;
      fvdd::save_mesh(fvdd::make_mesh(source), mesh_output);
      return 0;
    }
    if (*run_cmd) {
      const fvdd::RunConfig config = resolve(run_cmd, run_flags);
      const fvdd::RunResult result = fvdd::simulate(config, fvdd::make_mesh(config.mesh));
      if (run_output.empty()) {
        fvdd::write_csv(result.records, std::cout);
        fvdd::write_summary(result, std::cerr);
      } else {
        auto out = open_output(run_output);
        fvdd::write_csv(result.records, out);
        fvdd::write_summary(result, std::cout);
      }
      if (!run_summary.empty()) {
        auto out = open_output(run_summary);
        fvdd::write_summary(result, out);
      }
      return 0;
    }
    if (*eq_cmd) {
      const fvdd::RunConfig config = resolve(eq_cmd, eq_flags);
      const fvdd::EquilibriumReport report = fvdd::compute_equilibrium(config, fvdd::make_mesh(config.mesh));
      std::ostream* log = &std::cout;
      if (eq_output.empty()) {
        fvdd::write_equilibrium(report, std::cout);
        log = &std::cerr;
      } else {
        auto out = open_output(eq_output);
        fvdd::write_equilibrium(report, out);
      }
      *log << std::setprecision(17) << "newton_iterations " << report.equilibrium.newton_iterations << '\n'
           << "initial_entropy " << report.initial_entropy << '\n';
      return 0;
    }
    if (*cmp_cmd) {
      const fvdd::RunConfig config = resolve(cmp_cmd, cmp_flags);
      const fvdd::CompareResult result = fvdd::compare(config, fvdd::make_mesh(config.mesh));
      {
        auto out = open_output(cmp_ddfv);
        fvdd::write_csv(result.ddfv.records, out);
      }
      {
        auto out = open_output(cmp_hfv);
        fvdd::write_csv(result.hfv.records, out);
      }
      if (cmp_report.empty()) {
        fvdd::write_report(result, std::cout);
      } else {
        auto out = open_output(cmp_report);
        fvdd::write_report(result, out);
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "fvdd: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
