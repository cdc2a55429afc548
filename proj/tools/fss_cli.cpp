// fss command line tool. All computation goes through the C API in
// fss/fss.h; this file only parses arguments, moves bytes, and maps status
// codes to exit codes (0 ok, 1 usage, 2 data, 3 numeric).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fss/fss.h"

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out = "-";
  bool json = false;
  int threads = 1;
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--seed", common.seed, "Random seed");
  cmd->add_option("--out", common.out, "Output path (- for stdout)");
  cmd->add_flag("--json", common.json, "Emit JSON where CSV is the default");
  cmd->add_option("--threads", common.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
}

int exit_code(fss_status status) {
  if (status != FSS_OK)
    std::cerr << "error: " << fss_last_error() << "\n";
  return static_cast<int>(status);
}

int write_output(const std::string& path, const char* text) {
  if (path == "-") {
    std::cout << text;
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write output file: " << path << "\n";
    return 2;
  }
  out << text;
  return 0;
}

// RAII wrappers over the C handles.
struct SpecHandle {
  fss_spec_t* p = nullptr;
  ~SpecHandle() { fss_spec_free(p); }
};
struct SampleHandle {
  fss_sample_t* p = nullptr;
  ~SampleHandle() { fss_sample_free(p); }
};
struct CurveHandle {
  fss_curve_t* p = nullptr;
  ~CurveHandle() { fss_curve_free(p); }
};
struct StringHandle {
  char* p = nullptr;
  ~StringHandle() { fss_string_free(p); }
};

int load_spec(const std::string& path, SpecHandle& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open spec file: " << path << "\n";
    return 2;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return exit_code(fss_spec_from_json(text.c_str(), &spec.p));
}

int load_curve(const std::string& path, CurveHandle& curve) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot open curve file: " << path << "\n";
    return 2;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  return exit_code(fss_curve_from_csv(text.c_str(), &curve.p));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frechet means, finite-sample smeariness diagnostics, and "
               "mean-equality tests on circles and spheres"};
  app.require_subcommand(1);

  // simulate-modulation
  auto* sim = app.add_subcommand(
      "simulate-modulation", "Monte Carlo modulation curve for a distribution");
  Common sim_c;
  std::string sim_dist, sim_grid;
  long sim_replicates = 1000;
  sim->add_option("--dist", sim_dist, "Distribution spec JSON file")->required();
  sim->add_option("--n-grid", sim_grid, "Sample sizes: a,b,c or log:a:b:k")
      ->required();
  sim->add_option("--replicates", sim_replicates, "Replicates per grid point")
      ->check(CLI::PositiveNumber);
  add_common(sim, sim_c);

  // bootstrap-modulation
  auto* bm = app.add_subcommand("bootstrap-modulation",
                                "Bootstrap modulation of an angle dataset");
  Common bm_c;
  std::string bm_input, bm_unit = "rad";
  long bm_B = 1000;
  bm->add_option("--input", bm_input, "Angle CSV file")->required();
  bm->add_option("--unit", bm_unit, "Angle unit: deg or rad")
      ->check(CLI::IsMember({"deg", "rad", "degrees", "radians"}));
  bm->add_option("--B", bm_B, "Bootstrap repetitions")->check(CLI::PositiveNumber);
  add_common(bm, bm_c);

  // limit
  auto* lim = app.add_subcommand(
      "limit", "CLT analysis and limit modulation of a distribution");
  Common lim_c;
  std::string lim_dist;
  lim->add_option("--dist", lim_dist, "Distribution spec JSON file")->required();
  add_common(lim, lim_c);

  // classify
  auto* cls = app.add_subcommand("classify",
                                 "Classify a modulation curve (FSS type)");
  Common cls_c;
  std::string cls_curve, cls_limit;
  cls->add_option("--curve", cls_curve, "Modulation curve CSV file")->required();
  cls->add_option("--limit", cls_limit,
                  "Analytic limit modulation (number or 'inf')");
  add_common(cls, cls_c);

  // fit-regimes
  auto* fit = app.add_subcommand("fit-regimes",
                                 "Fit the rising power-law regime of a curve");
  Common fit_c;
  std::string fit_curve;
  fit->add_option("--curve", fit_curve, "Modulation curve CSV file")->required();
  add_common(fit, fit_c);

  // test
  auto* tst = app.add_subcommand("test", "Two-sample test for equal means");
  Common tst_c;
  std::string tst_method = "quantile", tst_s1, tst_s2;
  long tst_B = 1000;
  tst->add_option("--method", tst_method, "quantile or bootstrap")
      ->check(CLI::IsMember({"quantile", "bootstrap"}));
  tst->add_option("--sample1", tst_s1, "First sample CSV")->required();
  tst->add_option("--sample2", tst_s2, "Second sample CSV")->required();
  tst->add_option("--B", tst_B, "Bootstrap repetitions")->check(CLI::PositiveNumber);
  add_common(tst, tst_c);

  // rejection-curve
  auto* rej = app.add_subcommand(
      "rejection-curve", "Empirical rejection rates against mean offsets");
  Common rej_c;
  std::string rej_dist, rej_method = "quantile";
  std::vector<double> rej_offsets;
  long rej_n = 50, rej_replicates = 1000, rej_B = 300;
  double rej_level = 0.05;
  rej->add_option("--dist", rej_dist, "Distribution spec JSON file")->required();
  rej->add_option("--offsets", rej_offsets, "Mean offsets in radians")
      ->required()
      ->delimiter(',');
  rej->add_option("--n", rej_n, "Sample size per group")->check(CLI::PositiveNumber);
  rej->add_option("--replicates", rej_replicates, "Replicate pairs per offset")
      ->check(CLI::PositiveNumber);
  rej->add_option("--method", rej_method, "quantile or bootstrap")
      ->check(CLI::IsMember({"quantile", "bootstrap"}));
  rej->add_option("--level", rej_level, "Test level");
  rej->add_option("--B", rej_B, "Bootstrap repetitions")->check(CLI::PositiveNumber);
  add_common(rej, rej_c);

  // ring-search
  auto* ring = app.add_subcommand(
      "ring-search", "Ring mixture with limit modulation above a target");
  Common ring_c;
  int ring_m = 4;
  double ring_target = 10.0;
  ring->add_option("--m", ring_m, "Sphere dimension (>= 2)")->required();
  ring->add_option("--target", ring_target, "Target limit modulation")
      ->required();
  add_common(ring, ring_c);

  // ingest-angles
  auto* ing = app.add_subcommand(
      "ingest-angles", "Normalize an angle CSV to radians in [-pi, pi)");
  Common ing_c;
  std::string ing_input, ing_unit = "rad";
  ing->add_option("--input", ing_input, "Angle CSV file")->required();
  ing->add_option("--unit", ing_unit, "Angle unit: deg or rad")
      ->check(CLI::IsMember({"deg", "rad", "degrees", "radians"}));
  add_common(ing, ing_c);

  // draw
  auto* drw = app.add_subcommand("draw", "Draw a sample from a distribution");
  Common drw_c;
  std::string drw_dist;
  long drw_n = 100;
  std::uint64_t drw_stream = 0;
  drw->add_option("--dist", drw_dist, "Distribution spec JSON file")->required();
  drw->add_option("--n", drw_n, "Sample size")->check(CLI::PositiveNumber);
  drw->add_option("--stream", drw_stream, "Stream id");
  add_common(drw, drw_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;  // help/version exit 0; any parse error is usage
  }

  if (sim->parsed()) {
    SpecHandle spec;
    if (int rc = load_spec(sim_dist, spec)) return rc;
    long* grid = nullptr;
    int grid_len = 0;
    if (auto st = fss_parse_n_grid(sim_grid.c_str(), &grid, &grid_len))
      return exit_code(st);
    CurveHandle curve;
    const auto st =
        fss_modulation_curve(spec.p, grid, grid_len, sim_replicates, sim_c.seed,
                             sim_c.threads, &curve.p);
    fss_longs_free(grid);
    if (st != FSS_OK) return exit_code(st);
    StringHandle text;
    const auto st2 = sim_c.json ? fss_curve_to_json(curve.p, &text.p)
                                : fss_curve_to_csv(curve.p, &text.p);
    if (st2 != FSS_OK) return exit_code(st2);
    return write_output(sim_c.out, text.p);
  }

  if (bm->parsed()) {
    SampleHandle sample;
    long skipped = 0;
    if (auto st = fss_sample_read_angles_csv(bm_input.c_str(), bm_unit.c_str(),
                                             &skipped, &sample.p))
      return exit_code(st);
    if (skipped > 0)
      std::cerr << "note: skipped " << skipped << " calm rows\n";
    StringHandle text;
    if (auto st = fss_bootstrap_modulation_json(sample.p, bm_B, bm_c.seed,
                                                bm_c.threads, &text.p))
      return exit_code(st);
    return write_output(bm_c.out, text.p);
  }

  if (lim->parsed()) {
    SpecHandle spec;
    if (int rc = load_spec(lim_dist, spec)) return rc;
    StringHandle text;
    if (auto st = fss_limit_analysis(spec.p, &text.p)) return exit_code(st);
    return write_output(lim_c.out, text.p);
  }

  if (cls->parsed()) {
    CurveHandle curve;
    if (int rc = load_curve(cls_curve, curve)) return rc;
    double limit = 0.0;
    const double* limit_ptr = nullptr;
    if (!cls_limit.empty()) {
      if (cls_limit == "inf" || cls_limit == "infinity") {
        limit = std::numeric_limits<double>::infinity();
      } else {
        try {
          limit = std::stod(cls_limit);
        } catch (const std::exception&) {
          std::cerr << "error: --limit must be a number or 'inf'\n";
          return 1;
        }
      }
      limit_ptr = &limit;
    }
    StringHandle text;
    if (auto st = fss_classify(curve.p, limit_ptr, &text.p))
      return exit_code(st);
    return write_output(cls_c.out, text.p);
  }

  if (fit->parsed()) {
    CurveHandle curve;
    if (int rc = load_curve(fit_curve, curve)) return rc;
    StringHandle text;
    if (auto st = fss_fit_regimes(curve.p, &text.p)) return exit_code(st);
    return write_output(fit_c.out, text.p);
  }

  if (tst->parsed()) {
    SampleHandle s1, s2;
    if (auto st = fss_sample_read_csv(tst_s1.c_str(), &s1.p))
      return exit_code(st);
    if (auto st = fss_sample_read_csv(tst_s2.c_str(), &s2.p))
      return exit_code(st);
    StringHandle text;
    if (auto st = fss_two_sample_test(s1.p, s2.p, tst_method.c_str(), tst_B,
                                      tst_c.seed, tst_c.threads, &text.p))
      return exit_code(st);
    return write_output(tst_c.out, text.p);
  }

  if (rej->parsed()) {
    SpecHandle spec;
    if (int rc = load_spec(rej_dist, spec)) return rc;
    StringHandle text;
    if (auto st = fss_rejection_curve(
            spec.p, rej_offsets.data(), static_cast<int>(rej_offsets.size()),
            rej_n, rej_replicates, rej_level, rej_method.c_str(), rej_B,
            rej_c.seed, rej_c.threads, rej_c.json ? 1 : 0, &text.p))
      return exit_code(st);
    return write_output(rej_c.out, text.p);
  }

  if (ring->parsed()) {
    StringHandle text;
    if (auto st = fss_ring_search(ring_m, ring_target, &text.p))
      return exit_code(st);
    return write_output(ring_c.out, text.p);
  }

  if (ing->parsed()) {
    StringHandle text;
    if (auto st = fss_ingest_angles(ing_input.c_str(), ing_unit.c_str(),
                                    ing_c.json ? 1 : 0, &text.p))
      return exit_code(st);
    return write_output(ing_c.out, text.p);
  }

  if (drw->parsed()) {
    SpecHandle spec;
    if (int rc = load_spec(drw_dist, spec)) return rc;
    SampleHandle sample;
    if (auto st =
            fss_sample_draw(spec.p, drw_n, drw_c.seed, drw_stream, &sample.p))
      return exit_code(st);
    StringHandle text;
    if (auto st = fss_sample_to_csv(sample.p, &text.p)) return exit_code(st);
    return write_output(drw_c.out, text.p);
  }

  return 0;
}
