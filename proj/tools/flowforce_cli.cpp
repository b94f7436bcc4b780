// flowforce: region tables, stream tables, wave solves, branches and
// verification reports.
//
// Exit status: 0 success, 1 a check failed, 2 usage or input error,
// 3 numerical failure.

#include <flowforce/flowforce.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace ff = flowforce;
namespace fs = std::filesystem;

namespace {

enum Exit { exit_ok = 0, exit_check = 1, exit_usage = 2, exit_numerical = 3 };

struct Global {
  std::string out;
  std::optional<double> tol;
  bool quiet = false;
};

fs::path output_dir(const Global& g) {
  if (!g.out.empty()) return g.out;
  if (const char* env = std::getenv("FLOWFORCE_OUT"); env && *env) return env;
  return ".";
}

void say(const Global& g, const std::string& s) {
  if (!g.quiet) std::cout << s;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) s += ',';
    s += cells[i];
  }
  return s + '\n';
}

std::string num(double v) { return ff::format_number(v); }

ff::ProblemTag parse_problem(const std::string& s) {
  if (s == "scaled" || s == "flow_force_scaled") return ff::ProblemTag::flow_force_scaled;
  if (s == "psi" || s == "irrotational_psi") return ff::ProblemTag::irrotational_psi;
  throw ff::DomainError("unknown problem '" + s + "' (expected scaled or psi)");
}

// region ---------------------------------------------------------------------

struct RegionArgs {
  double r_min = 1.5;
  double r_max = 3.0;
  std::size_t samples = 256;
};

int run_region(const Global& g, const RegionArgs& a) {
  const std::vector<ff::RegionSample> rows = ff::region_samples(a.r_min, a.r_max, a.samples);
  std::string csv = "r,F_minus,barrier,F_plus\n";
  for (const auto& r : rows) csv += csv_row({num(r.r), num(r.F_minus), num(r.barrier), num(r.F_plus)});
  const fs::path dir = output_dir(g);
  ff::write_file_atomic(dir / "region.csv", csv);
  ff::write_file_atomic(dir / "region.svg", ff::region_svg(rows));
  say(g, "wrote " + (dir / "region.csv").string() + " and region.svg (" + std::to_string(rows.size()) + " rows)\n");
  return exit_ok;
}

// streams --------------------------------------------------------------------

struct StreamsArgs {
  std::vector<double> depths{1.0, std::pow(2.0, -2.0 / 3.0), 2.0};
  std::vector<double> scaled_depths{std::sqrt(2.0 / 3.0), 1.0, 1.1, std::sqrt(2.0)};
  std::vector<double> scaled_heads{1.3};
};

int run_streams(const Global& g, const StreamsArgs& a) {
  std::string csv = "kind,input,r,S,froude,R,d_minus,d_plus,status\n";
  std::size_t rows = 0, failed = 0;
  auto row = [&](const char* kind, double input, auto fill) {
    ++rows;
    std::vector<std::string> c(9);
    c[0] = kind;
    c[1] = num(input);
    try {
      fill(c);
      c[8] = c[8].empty() ? "ok" : c[8];
    } catch (const std::exception& e) {
      ++failed;
      for (std::size_t k = 2; k < 8; ++k) c[k].clear();
      c[8] = std::string("error: ") + e.what();
    }
    csv += csv_row(c);
  };
  for (double d : a.depths)
    row("depth", d, [&](std::vector<std::string>& c) {
      const ff::StreamFlow s = ff::stream_from_depth(d);
      c[2] = num(s.bernoulli);
      c[3] = num(s.flow_force);
      c[4] = num(s.froude);
      c[5] = num(s.bernoulli / std::sqrt(s.flow_force));
      if (s.bernoulli > ff::cusp_head) {
        const ff::ConjugateDepths cd = ff::conjugate_depths(s.bernoulli);
        c[6] = num(cd.d_minus);
        c[7] = num(cd.d_plus);
      }
    });
  for (double d : a.scaled_depths)
    row("scaled_depth", d, [&](std::vector<std::string>& c) {
      const double R = ff::scaled_bernoulli(d, true);
      c[5] = num(R);
      if (d > std::sqrt(2.0)) c[8] = "beyond unidirectional range";
    });
  for (double R : a.scaled_heads)
    row("scaled_head", R, [&](std::vector<std::string>& c) {
      const auto [lo, hi] = ff::scaled_conjugate_depths(R, true);
      c[5] = num(R);
      c[6] = num(lo);
      c[7] = num(hi);
    });
  const ff::CriticalConstants cc = ff::critical_constants();
  const ff::RegionCrossing x = ff::barrier_lower_intersection();
  std::string consts = "name,value\n";
  for (const auto& [k, v] : std::vector<std::pair<std::string, double>>{
           {"d0", cc.d0}, {"R0", cc.R0}, {"d_c", cc.d_c}, {"R_c", cc.R_c}, {"cusp_r", ff::cusp_head},
           {"cusp_F", ff::cusp_head}, {"r_star", x.r_star}, {"F_star", x.F_star}, {"froude_star", x.froude}})
    consts += k + "," + num(v) + "\n";
  const fs::path dir = output_dir(g);
  ff::write_file_atomic(dir / "streams.csv", csv);
  ff::write_file_atomic(dir / "constants.csv", consts);
  say(g, "wrote " + (dir / "streams.csv").string() + " (" + std::to_string(rows) + " rows, " +
             std::to_string(failed) + " failed) and constants.csv\n");
  return rows > 0 && failed == rows ? exit_usage : exit_ok;
}

// solve / branch -------------------------------------------------------------

struct SolveArgs {
  std::string problem = "scaled";
  double depth = 1.1;
  double amplitude = 0.0;
  std::size_t nq = 256;
  std::size_t np = 64;
  std::optional<double> period;
  std::string name = "solution";
};

struct BranchArgs {
  std::string problem = "scaled";
  double depth = 1.1;
  double a_max = 0.05;
  int steps = 200;
  std::size_t nq = 256;
  std::size_t np = 64;
  std::string name = "branch";
};

ff::BranchOptions branch_options(const Global& g) {
  ff::BranchOptions o;
  if (g.tol) o.newton.residual_tol = *g.tol;
  return o;
}

std::string summary_header(ff::ProblemTag tag) {
  char line[160];
  if (tag == ff::ProblemTag::irrotational_psi)
    std::snprintf(line, sizeof line, "%4s %-14s %-18s %-18s %-14s %-10s\n", "n", "amplitude", "head", "flow_force",
                  "FF-r^2/2", "residual");
  else
    std::snprintf(line, sizeof line, "%4s %-14s %-18s %-14s %-14s %-10s\n", "n", "amplitude", "head", "R-R_c",
                  "R0-R", "residual");
  return line;
}

std::string summary_row(std::size_t n, const ff::WaveSolution& s, ff::ProblemTag tag) {
  char line[200];
  const ff::CriticalConstants cc = ff::critical_constants();
  if (tag == ff::ProblemTag::irrotational_psi)
    std::snprintf(line, sizeof line, "%4zu %-14.8g %-18.12g %-18.12g %-14.6e %-10.2e\n", n, s.amplitude, s.head,
                  s.flow_force, s.flow_force - ff::barrier(s.head), s.residual_norm);
  else
    std::snprintf(line, sizeof line, "%4zu %-14.8g %-18.12g %-14.6e %-14.6e %-10.2e\n", n, s.amplitude, s.head,
                  s.head - cc.R_c, cc.R0 - s.head, s.residual_norm);
  return line;
}

int run_solve(const Global& g, const SolveArgs& a) {
  const ff::ProblemTag tag = parse_problem(a.problem);
  if (a.amplitude < 0.0) throw ff::DomainError("amplitude must be non-negative");
  ff::WaveSolution sol;
  if (a.amplitude == 0.0) {
    double period = a.period.value_or(0.0);
    if (!a.period) {
      const std::optional<double> k =
          tag == ff::ProblemTag::flow_force_scaled && a.depth >= std::sqrt(2.0) ? std::nullopt
                                                                                 : ff::bifurcation_wavenumber(a.depth, tag);
      period = k ? 2.0 * std::numbers::pi / *k : 2.0 * std::numbers::pi;
    }
    sol = ff::stream_solution(tag, a.depth, a.nq, a.np, period);
  } else {
    const ff::Branch br = ff::continue_branch(tag, a.depth, a.amplitude, 100000, a.nq, a.np, branch_options(g));
    sol = br.points.back();
    if (std::abs(sol.amplitude - a.amplitude) > 1e-9)
      throw ff::NonConvergenceError("continuation stopped at amplitude " + num(sol.amplitude) + ": " + br.diagnostic,
                                    sol.diagnostics.residual_history);
  }
  const fs::path dir = output_dir(g) / a.name;
  ff::write_height_container(dir, ff::stored(sol));
  say(g, summary_header(tag) + summary_row(0, sol, tag));
  say(g, "wrote " + dir.string() + "\n");
  return exit_ok;
}

int run_branch(const Global& g, const BranchArgs& a) {
  const ff::ProblemTag tag = parse_problem(a.problem);
  const ff::Branch br = ff::continue_branch(tag, a.depth, a.a_max, a.steps, a.nq, a.np, branch_options(g));
  const fs::path dir = output_dir(g) / a.name;
  ff::write_branch(dir, br);
  std::string table = summary_header(tag);
  for (std::size_t n = 0; n < br.points.size(); ++n) table += summary_row(n, br.points[n], tag);
  say(g, table);
  if (br.truncated) say(g, "branch truncated: " + br.diagnostic + "\n");
  say(g, "wrote " + dir.string() + " (" + std::to_string(br.points.size()) + " points)\n");
  return exit_ok;
}

// verify ---------------------------------------------------------------------

struct VerifyArgs {
  std::string path;
  std::string report = "report.json";
};

ff::CheckReport verify_container(const fs::path& dir, const ff::CheckTolerances& t) {
  ff::CheckReport rep;
  if (ff::container_kind(dir) == "wave_field") {
    rep = ff::verify_wave_field(ff::read_wave_container(dir), t);
  } else {
    const ff::StoredHeightField s = ff::read_height_container(dir);
    rep = ff::verify_height_field(s.h, s.residual, t);
  }
  rep.inputs = ff::container_provenance(dir);
  return rep;
}

int run_verify(const Global& g, const VerifyArgs& a) {
  ff::CheckTolerances t;
  if (g.tol) t.closed_form = *g.tol;
  const fs::path src = a.path;
  ff::CheckReport rep;
  if (fs::exists(src / "branch.json")) {
    std::vector<fs::path> points;
    for (const auto& e : fs::directory_iterator(src))
      if (e.is_directory() && fs::exists(e.path() / "manifest.json")) points.push_back(e.path());
    std::sort(points.begin(), points.end());
    rep.inputs.push_back({"branch.json", ff::sha256_hex(ff::read_file(src / "branch.json"))});
    for (const fs::path& p : points) {
      ff::CheckReport one = verify_container(p, t);
      const std::string prefix = p.filename().string() + "/";
      for (ff::CheckEntry& e : one.entries) {
        e.name = prefix + e.name;
        rep.entries.push_back(std::move(e));
      }
      for (ff::InputProvenance& in : one.inputs) rep.inputs.push_back({prefix + in.path, in.sha256});
      rep.nq = one.nq;
      rep.np = one.np;
    }
  } else {
    rep = verify_container(src, t);
  }
  const fs::path out = output_dir(g) / a.report;
  ff::write_file_atomic(out, ff::report_json(rep).dump(2) + "\n");
  say(g, ff::report_table(rep));
  say(g, "wrote " + out.string() + "\n");
  return rep.pass() ? exit_ok : exit_check;
}

// asymptotics ----------------------------------------------------------------

struct AsymptoticsArgs {
  std::vector<double> heads{5.0, 10.0, 20.0, 40.0};
};

int run_asymptotics(const Global& g, const AsymptoticsArgs& a) {
  std::string csv = "r,F_plus,gap,gap_times_r2,within_bound\n";
  bool all = true;
  for (double r : a.heads) {
    const double gap = ff::asymptotic_gap(r);
    const bool ok = gap > 0.0 && gap <= 1.0 / (r * r);
    all = all && ok;
    csv += csv_row({num(r), num(ff::bl_boundaries(r).F_plus), num(gap), num(gap * r * r), ok ? "true" : "false"});
  }
  const fs::path dir = output_dir(g);
  ff::write_file_atomic(dir / "asymptotics.csv", csv);
  say(g, csv);
  return all ? exit_ok : exit_check;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady water waves: parameter region, flow-force solver and verification."};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key-value configuration file (command-line flags take precedence)");
  Global g;
  app.add_option("--out", g.out, "Output directory (default: $FLOWFORCE_OUT, else .)");
  app.add_option("--tol", g.tol, "Newton residual tolerance (solve, branch) or check tolerance (verify)")
      ->check(CLI::PositiveNumber);
  app.add_flag("--quiet", g.quiet, "Suppress console output");

  RegionArgs ra;
  auto* region = app.add_subcommand("region", "Tabulate and plot the parameter region");
  region->add_option("--r-min", ra.r_min, "Smallest head (>= 1.5)");
  region->add_option("--r-max", ra.r_max, "Largest head");
  region->add_option("--samples", ra.samples, "Number of rows")->check(CLI::Range(2, 1000000));

  StreamsArgs sa;
  auto* streams = app.add_subcommand("streams", "Tabulate uniform streams and critical constants");
  streams->add_option("--depths", sa.depths, "Depths of unit-flux streams")->delimiter(',');
  streams->add_option("--scaled-depths", sa.scaled_depths, "Depths of scaled streams")->delimiter(',');
  streams->add_option("--scaled-heads", sa.scaled_heads, "Scaled heads to invert")->delimiter(',');

  SolveArgs so;
  auto* solve = app.add_subcommand("solve", "Compute one wave (amplitude 0 gives the stream)");
  solve->add_option("--problem", so.problem, "scaled or psi")->check(CLI::IsMember({"scaled", "psi"}));
  solve->add_option("--depth", so.depth, "Stream depth")->check(CLI::PositiveNumber);
  solve->add_option("--amplitude", so.amplitude, "Target amplitude");
  solve->add_option("--nq", so.nq, "Horizontal nodes")->check(CLI::Range(16, 4096));
  solve->add_option("--np", so.np, "Vertical intervals")->check(CLI::Range(16, 4096));
  solve->add_option("--period", so.period, "Period for amplitude 0 (default 2 pi / k*)")->check(CLI::PositiveNumber);
  solve->add_option("--name", so.name, "Container directory name");

  BranchArgs bo;
  auto* branch = app.add_subcommand("branch", "Continue a wave branch from its bifurcation point");
  branch->add_option("--problem", bo.problem, "scaled or psi")->check(CLI::IsMember({"scaled", "psi"}));
  branch->add_option("--depth", bo.depth, "Stream depth")->check(CLI::PositiveNumber);
  branch->add_option("--a-max", bo.a_max, "Final amplitude")->check(CLI::PositiveNumber);
  branch->add_option("--steps", bo.steps, "Maximum number of waves")->check(CLI::Range(1, 100000));
  branch->add_option("--nq", bo.nq, "Horizontal nodes")->check(CLI::Range(16, 4096));
  branch->add_option("--np", bo.np, "Vertical intervals")->check(CLI::Range(16, 4096));
  branch->add_option("--name", bo.name, "Branch directory name");

  VerifyArgs vo;
  auto* verify = app.add_subcommand("verify", "Run the inequality and identity checks on a container or branch");
  verify->add_option("path", vo.path, "Container or branch directory")->required()->check(CLI::ExistingDirectory);
  verify->add_option("--report", vo.report, "Report file name");

  AsymptoticsArgs ao;
  auto* asym = app.add_subcommand("asymptotics", "Tabulate the large-head remainder of the upper boundary");
  asym->add_option("--r", ao.heads, "Heads (>= 3)")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (*region) return run_region(g, ra);
    if (*streams) return run_streams(g, sa);
    if (*solve) return run_solve(g, so);
    if (*branch) return run_branch(g, bo);
    if (*verify) return run_verify(g, vo);
    if (*asym) return run_asymptotics(g, ao);
  } catch (const ff::SchemaError& e) {
    std::cerr << "schema error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ff::DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return exit_usage;
  } catch (const ff::NonConvergenceError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n  residual history:";
    for (double r : e.history()) std::cerr << ' ' << ff::format_number(r, 3);
    std::cerr << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  }
  return exit_usage;
}
