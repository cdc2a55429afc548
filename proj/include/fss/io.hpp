#ifndef FSS_IO_HPP
#define FSS_IO_HPP

#include <string>
#include <vector>

#include "fss/analysis.hpp"
#include "fss/distributions.hpp"
#include "fss/frechet.hpp"
#include "fss/testing.hpp"

namespace fss {

struct AngleDataset {
  std::string name;
  std::vector<double> angles;       // wrapped into [-pi, pi)
  std::string source_unit;          // "degrees" or "radians"
  long skipped_calm = 0;            // rows dropped via a truthy `calm` column
};

// Reads a CSV with an `angle` column (and an optional `calm` column whose
// truthy rows are skipped). unit is "deg"/"degrees" or "rad"/"radians";
// degrees are wrapped in degree space first so that 180 maps exactly to -pi.
AngleDataset ingest_angles(const std::string& path, const std::string& unit);

// Reads a CSV with header x0,...,xm; rows must be unit vectors within 1e-6
// and are rescaled to exact unit length.
Sample ingest_sphere_points(const std::string& path, int m);

// Reads either format, deciding by the header (angle vs x0,...,xm).
Sample read_sample_csv(const std::string& path);

Sample angle_dataset_to_sample(const AngleDataset& data);

// CSV writers. Angles and coordinates use 17 significant digits (exact
// round trip); modulation curves use 9 per the interface contract.
std::string sample_to_csv(const Sample& sample);
std::string angles_to_csv(const std::vector<double>& angles);
std::string curve_to_csv(const ModulationCurve& curve);
ModulationCurve curve_from_csv(const std::string& text);
std::string rejection_table_to_csv(const std::vector<RejectionRow>& rows);

// JSON writers (all deterministic field order).
std::string curve_to_json(const ModulationCurve& curve);
std::string test_report_to_json(const TestReport& report);
std::string clt_result_to_json(const CLTResult& result);
std::string fss_class_to_json(const FSSClass& cls);
std::string regime_fit_to_json(const RegimeFit& fit);
std::string ring_search_to_json(const RingSearchResult& result);
std::string bootstrap_modulation_to_json(const BootstrapModulationResult& r);
std::string rejection_table_to_json(const std::vector<RejectionRow>& rows);
std::string angle_dataset_to_json(const AngleDataset& data);

// Grid syntax: "a,b,c" or "log:a:b:k" (k log-spaced integers from a to b
// inclusive, deduplicated).
std::vector<long> parse_n_grid(const std::string& text);

}  // namespace fss

#endif
