#include "fss/fss.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include "fss/analysis.hpp"
#include "fss/distributions.hpp"
#include "fss/error.hpp"
#include "fss/frechet.hpp"
#include "fss/io.hpp"
#include "fss/testing.hpp"

namespace {

thread_local std::string g_last_error;

fss_status to_status(const fss::Error& e) {
  g_last_error = e.what();
  switch (e.kind()) {
    case fss::ErrorKind::usage: return FSS_ERR_USAGE;
    case fss::ErrorKind::data: return FSS_ERR_DATA;
    case fss::ErrorKind::numeric: return FSS_ERR_NUMERIC;
  }
  return FSS_ERR_NUMERIC;
}

template <typename F>
fss_status guarded(F&& f) {
  try {
    f();
    return FSS_OK;
  } catch (const fss::Error& e) {
    return to_status(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FSS_ERR_NUMERIC;
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* msg) {
  if (!ok) fss::fail_usage(msg);
}

}  // namespace

struct fss_spec_s {
  fss::DistributionSpec spec;
};

struct fss_sample_s {
  fss::Sample sample;
};

struct fss_curve_s {
  fss::ModulationCurve curve;
};

extern "C" {

const char* fss_version(void) { return "1.0.0"; }

const char* fss_last_error(void) { return g_last_error.c_str(); }

void fss_string_free(char* s) { std::free(s); }
void fss_longs_free(long* values) { std::free(values); }

/* --- specs --- */

fss_status fss_spec_from_json(const char* json, fss_spec_t** out) {
  return guarded([&] {
    require(json && out, "fss_spec_from_json: null argument");
    *out = new fss_spec_s{fss::spec_from_json(json)};
  });
}

fss_status fss_spec_to_json(const fss_spec_t* spec, char** out) {
  return guarded([&] {
    require(spec && out, "fss_spec_to_json: null argument");
    *out = dup_string(fss::spec_to_json(spec->spec));
  });
}

int fss_spec_dim(const fss_spec_t* spec) {
  return spec ? fss::spec_dim(spec->spec) : 0;
}

void fss_spec_free(fss_spec_t* spec) { delete spec; }

/* --- samples --- */

fss_status fss_sample_draw(const fss_spec_t* spec, long n, uint64_t seed,
                           uint64_t stream, fss_sample_t** out) {
  return guarded([&] {
    require(spec && out, "fss_sample_draw: null argument");
    *out = new fss_sample_s{fss::sample(spec->spec, n, seed, stream)};
  });
}

fss_status fss_sample_from_angles(const double* angles, long n,
                                  fss_sample_t** out) {
  return guarded([&] {
    require(angles && out && n >= 1, "fss_sample_from_angles: bad arguments");
    *out = new fss_sample_s{
        fss::Sample::circle(std::vector<double>(angles, angles + n))};
  });
}

fss_status fss_sample_from_vectors(const double* data, long n, int m,
                                   fss_sample_t** out) {
  return guarded([&] {
    require(data && out && n >= 1 && m >= 2,
            "fss_sample_from_vectors: bad arguments");
    const std::size_t len = static_cast<std::size_t>(n) *
                            (static_cast<std::size_t>(m) + 1);
    *out = new fss_sample_s{
        fss::Sample::embedded(m, std::vector<double>(data, data + len))};
  });
}

fss_status fss_sample_read_angles_csv(const char* path, const char* unit,
                                      long* skipped_calm, fss_sample_t** out) {
  return guarded([&] {
    require(path && unit && out, "fss_sample_read_angles_csv: null argument");
    const auto data = fss::ingest_angles(path, unit);
    if (skipped_calm) *skipped_calm = data.skipped_calm;
    *out = new fss_sample_s{fss::angle_dataset_to_sample(data)};
  });
}

fss_status fss_sample_read_csv(const char* path, fss_sample_t** out) {
  return guarded([&] {
    require(path && out, "fss_sample_read_csv: null argument");
    *out = new fss_sample_s{fss::read_sample_csv(path)};
  });
}

fss_status fss_sample_to_csv(const fss_sample_t* sample, char** out) {
  return guarded([&] {
    require(sample && out, "fss_sample_to_csv: null argument");
    *out = dup_string(fss::sample_to_csv(sample->sample));
  });
}

long fss_sample_size(const fss_sample_t* sample) {
  return sample ? sample->sample.size() : 0;
}

int fss_sample_dim(const fss_sample_t* sample) {
  return sample ? sample->sample.dim() : 0;
}

void fss_sample_free(fss_sample_t* sample) { delete sample; }

/* --- means --- */

fss_status fss_frechet_mean(const fss_sample_t* sample, double* point_out,
                            double* value_out) {
  return guarded([&] {
    require(sample && point_out, "fss_frechet_mean: null argument");
    const auto r = fss::frechet_mean(sample->sample);
    if (sample->sample.dim() == 1) {
      point_out[0] = r.mean.angle();
    } else {
      const auto& c = r.mean.coords();
      std::copy(c.begin(), c.end(), point_out);
    }
    if (value_out) *value_out = r.value;
  });
}

fss_status fss_frechet_function(const fss_sample_t* sample,
                                const double* point, double* out) {
  return guarded([&] {
    require(sample && point && out, "fss_frechet_function: null argument");
    const int m = sample->sample.dim();
    const fss::SpherePoint p =
        m == 1 ? fss::SpherePoint::circle(point[0])
               : fss::SpherePoint::embedded_normalized(std::vector<double>(
                     point, point + m + 1));
    *out = fss::frechet_function(sample->sample, p);
  });
}

/* --- curves --- */

fss_status fss_modulation_curve(const fss_spec_t* spec, const long* n_grid,
                                int grid_len, long replicates, uint64_t seed,
                                int threads, fss_curve_t** out) {
  return guarded([&] {
    require(spec && n_grid && out && grid_len > 0,
            "fss_modulation_curve: bad arguments");
    *out = new fss_curve_s{fss::monte_carlo_modulation(
        spec->spec, std::vector<long>(n_grid, n_grid + grid_len), replicates,
        seed, threads)};
  });
}

fss_status fss_curve_to_csv(const fss_curve_t* curve, char** out) {
  return guarded([&] {
    require(curve && out, "fss_curve_to_csv: null argument");
    *out = dup_string(fss::curve_to_csv(curve->curve));
  });
}

fss_status fss_curve_to_json(const fss_curve_t* curve, char** out) {
  return guarded([&] {
    require(curve && out, "fss_curve_to_json: null argument");
    *out = dup_string(fss::curve_to_json(curve->curve));
  });
}

fss_status fss_curve_from_csv(const char* text, fss_curve_t** out) {
  return guarded([&] {
    require(text && out, "fss_curve_from_csv: null argument");
    *out = new fss_curve_s{fss::curve_from_csv(text)};
  });
}

long fss_curve_size(const fss_curve_t* curve) {
  return curve ? static_cast<long>(curve->curve.entries.size()) : 0;
}

void fss_curve_free(fss_curve_t* curve) { delete curve; }

fss_status fss_parse_n_grid(const char* text, long** values, int* count) {
  return guarded([&] {
    require(text && values && count, "fss_parse_n_grid: null argument");
    const auto grid = fss::parse_n_grid(text);
    *values = static_cast<long*>(std::malloc(grid.size() * sizeof(long)));
    std::copy(grid.begin(), grid.end(), *values);
    *count = static_cast<int>(grid.size());
  });
}

fss_status fss_bootstrap_modulation(const fss_sample_t* sample, long B,
                                    uint64_t seed, int threads,
                                    double* estimate, double* se) {
  return guarded([&] {
    require(sample && estimate, "fss_bootstrap_modulation: null argument");
    const auto r = fss::bootstrap_modulation(sample->sample, B, seed, threads);
    *estimate = r.estimate;
    if (se) *se = r.se;
  });
}

fss_status fss_bootstrap_modulation_json(const fss_sample_t* sample, long B,
                                         uint64_t seed, int threads,
                                         char** json_out) {
  return guarded([&] {
    require(sample && json_out, "fss_bootstrap_modulation_json: null argument");
    const auto r = fss::bootstrap_modulation(sample->sample, B, seed, threads);
    *json_out = dup_string(fss::bootstrap_modulation_to_json(r));
  });
}

/* --- asymptotics --- */

fss_status fss_limit_analysis(const fss_spec_t* spec, char** json_out) {
  return guarded([&] {
    require(spec && json_out, "fss_limit_analysis: null argument");
    *json_out = dup_string(fss::clt_result_to_json(fss::clt_analysis(spec->spec)));
  });
}

fss_status fss_antipodal_density(const fss_spec_t* spec, double* out) {
  return guarded([&] {
    require(spec && out, "fss_antipodal_density: null argument");
    *out = fss::antipodal_density(spec->spec);
  });
}

fss_status fss_circle_limit_modulation(double f_pi, double* out) {
  return guarded([&] {
    require(out != nullptr, "fss_circle_limit_modulation: null argument");
    *out = fss::circle_limit_modulation(f_pi);
  });
}

fss_status fss_classify(const fss_curve_t* curve, const double* limit,
                        char** json_out) {
  return guarded([&] {
    require(curve && json_out, "fss_classify: null argument");
    std::optional<double> analytic;
    if (limit) analytic = *limit;
    *json_out =
        dup_string(fss::fss_class_to_json(fss::classify_fss(curve->curve, analytic)));
  });
}

fss_status fss_fit_regimes(const fss_curve_t* curve, char** json_out) {
  return guarded([&] {
    require(curve && json_out, "fss_fit_regimes: null argument");
    *json_out =
        dup_string(fss::regime_fit_to_json(fss::fit_regimes(curve->curve)));
  });
}

fss_status fss_ring_search(int m, double target, char** json_out) {
  return guarded([&] {
    require(json_out != nullptr, "fss_ring_search: null argument");
    *json_out =
        dup_string(fss::ring_search_to_json(fss::ring_mixture_search(m, target)));
  });
}

fss_status fss_ring_feasibility_threshold(int m, double* theta_out) {
  return guarded([&] {
    require(theta_out != nullptr,
            "fss_ring_feasibility_threshold: null argument");
    *theta_out = fss::ring_feasibility_threshold(m);
  });
}

/* --- tests --- */

fss_status fss_one_sample_test(const fss_sample_t* sample, const double* mu0,
                               char** json_out) {
  return guarded([&] {
    require(sample && mu0 && json_out, "fss_one_sample_test: null argument");
    const int m = sample->sample.dim();
    const fss::SpherePoint p =
        m == 1 ? fss::SpherePoint::circle(mu0[0])
               : fss::SpherePoint::embedded_normalized(
                     std::vector<double>(mu0, mu0 + m + 1));
    *json_out = dup_string(fss::test_report_to_json(
        fss::one_sample_quantile_test(sample->sample, p)));
  });
}

fss_status fss_two_sample_test(const fss_sample_t* s1, const fss_sample_t* s2,
                               const char* method, long B, uint64_t seed,
                               int threads, char** json_out) {
  return guarded([&] {
    require(s1 && s2 && method && json_out,
            "fss_two_sample_test: null argument");
    const auto kind = fss::test_method_from_name(method);
    fss::TestReport report;
    if (kind == fss::TestMethod::quantile)
      report = fss::two_sample_quantile_test(s1->sample, s2->sample);
    else
      report = fss::two_sample_bootstrap_test(s1->sample, s2->sample, B, seed,
                                              threads);
    *json_out = dup_string(fss::test_report_to_json(report));
  });
}

fss_status fss_rejection_curve(const fss_spec_t* spec, const double* offsets,
                               int offsets_len, long n, long replicates,
                               double level, const char* method, long B,
                               uint64_t seed, int threads, int as_json,
                               char** out) {
  return guarded([&] {
    require(spec && offsets && method && out && offsets_len > 0,
            "fss_rejection_curve: bad arguments");
    const auto rows = fss::rejection_curve(
        spec->spec, std::vector<double>(offsets, offsets + offsets_len), n,
        replicates, level, fss::test_method_from_name(method), B, seed,
        threads);
    *out = dup_string(as_json ? fss::rejection_table_to_json(rows)
                              : fss::rejection_table_to_csv(rows));
  });
}

/* --- ingestion --- */

fss_status fss_ingest_angles(const char* path, const char* unit, int as_json,
                             char** out) {
  return guarded([&] {
    require(path && unit && out, "fss_ingest_angles: null argument");
    const auto data = fss::ingest_angles(path, unit);
    *out = dup_string(as_json ? fss::angle_dataset_to_json(data)
                              : fss::angles_to_csv(data.angles));
  });
}

} /* extern "C" */
