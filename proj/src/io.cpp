#include "fss/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "fss/error.hpp"

namespace fss {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string g17(double v) { return format_double(v, "%.17g"); }
std::string g9(double v) { return format_double(v, "%.9g"); }

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_cell(const std::string& cell, long row, const char* what) {
  if (cell.empty())
    fail_data(std::string(what) + ": empty cell at row " + std::to_string(row));
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &pos);
  } catch (const std::exception&) {
    fail_data(std::string(what) + ": malformed numeric \"" + cell +
              "\" at row " + std::to_string(row));
  }
  if (pos != cell.size() || std::isnan(v))
    fail_data(std::string(what) + ": malformed numeric \"" + cell +
              "\" at row " + std::to_string(row));
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail_data("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::stringstream ss(text);
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

// Wrap in degree space first (exact in floating point), then scale so that
// -180 maps to exactly -pi.
double degrees_to_radians(double deg) {
  double r = std::fmod(deg + 180.0, 360.0);
  if (r < 0.0) r += 360.0;
  return (r - 180.0) / 180.0 * kPi;
}

bool truthy(const std::string& cell) {
  return !(cell.empty() || cell == "0" || cell == "false" || cell == "no");
}

}  // namespace

AngleDataset ingest_angles(const std::string& path, const std::string& unit) {
  bool degrees = false;
  if (unit == "deg" || unit == "degrees")
    degrees = true;
  else if (unit != "rad" && unit != "radians")
    fail_usage("unknown unit flag \"" + unit + "\" (expected deg or rad)");

  const auto lines = read_lines(read_file(path));
  if (lines.empty()) fail_data("angle CSV is empty: " + path);
  const auto header = split_csv_line(lines[0]);
  long angle_col = -1, calm_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "angle") angle_col = static_cast<long>(c);
    if (header[c] == "calm") calm_col = static_cast<long>(c);
  }
  if (angle_col < 0)
    fail_data("angle CSV must have an `angle` header column: " + path);

  AngleDataset out;
  out.name = path;
  out.source_unit = degrees ? "degrees" : "radians";
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    const long row = static_cast<long>(i);
    if (static_cast<long>(cells.size()) <= angle_col)
      fail_data("angle CSV: missing angle cell at row " + std::to_string(row));
    if (calm_col >= 0 && static_cast<long>(cells.size()) > calm_col &&
        truthy(cells[static_cast<std::size_t>(calm_col)])) {
      ++out.skipped_calm;
      continue;
    }
    const double v =
        parse_cell(cells[static_cast<std::size_t>(angle_col)], row, "angle CSV");
    out.angles.push_back(degrees ? wrap_angle(degrees_to_radians(v))
                                 : wrap_angle(v));
  }
  if (out.angles.empty()) fail_data("angle CSV has no data rows: " + path);
  return out;
}

Sample ingest_sphere_points(const std::string& path, int m) {
  if (m < 2) fail_usage("ingest_sphere_points: m must be >= 2");
  const auto lines = read_lines(read_file(path));
  if (lines.empty()) fail_data("point CSV is empty: " + path);
  const auto header = split_csv_line(lines[0]);
  const std::size_t w = static_cast<std::size_t>(m) + 1;
  if (header.size() != w)
    fail_data("point CSV: expected " + std::to_string(w) + " columns x0,...,x" +
              std::to_string(m));
  for (std::size_t c = 0; c < w; ++c)
    if (header[c] != "x" + std::to_string(c))
      fail_data("point CSV: unexpected header column \"" + header[c] + "\"");

  std::vector<double> flat;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    const long row = static_cast<long>(i);
    if (cells.size() != w)
      fail_data("point CSV: wrong column count at row " + std::to_string(row));
    std::vector<double> v(w);
    double norm2 = 0.0;
    for (std::size_t c = 0; c < w; ++c) {
      v[c] = parse_cell(cells[c], row, "point CSV");
      norm2 += v[c] * v[c];
    }
    const double norm = std::sqrt(norm2);
    if (!(norm > 0.0))
      fail_data("point CSV: zero vector at row " + std::to_string(row));
    if (std::fabs(norm - 1.0) > 1e-6)
      fail_data("point CSV: row " + std::to_string(row) +
                " has norm " + g9(norm) + ", beyond the 1e-6 tolerance");
    for (double& x : v) x /= norm;
    flat.insert(flat.end(), v.begin(), v.end());
  }
  if (flat.empty()) fail_data("point CSV has no data rows: " + path);
  return Sample::embedded(m, std::move(flat));
}

Sample read_sample_csv(const std::string& path) {
  const auto lines = read_lines(read_file(path));
  if (lines.empty()) fail_data("sample CSV is empty: " + path);
  const auto header = split_csv_line(lines[0]);
  if (!header.empty() && header[0] == "angle") {
    const auto data = ingest_angles(path, "rad");
    return angle_dataset_to_sample(data);
  }
  if (!header.empty() && header[0] == "x0")
    return ingest_sphere_points(path, static_cast<int>(header.size()) - 1);
  fail_data("sample CSV: header must start with `angle` or `x0`: " + path);
}

Sample angle_dataset_to_sample(const AngleDataset& data) {
  return Sample::circle(data.angles);
}

std::string sample_to_csv(const Sample& sample) {
  std::ostringstream out;
  if (sample.dim() == 1) {
    out << "angle\n";
    for (long i = 0; i < sample.size(); ++i)
      out << g17(sample.angle(i)) << "\n";
    return out.str();
  }
  for (std::size_t c = 0; c <= static_cast<std::size_t>(sample.dim()); ++c)
    out << (c ? "," : "") << "x" << c;
  out << "\n";
  for (long i = 0; i < sample.size(); ++i) {
    const auto v = sample.vec(i);
    for (std::size_t c = 0; c < v.size(); ++c)
      out << (c ? "," : "") << g17(v[c]);
    out << "\n";
  }
  return out.str();
}

std::string angles_to_csv(const std::vector<double>& angles) {
  std::ostringstream out;
  out << "angle\n";
  for (const double a : angles) out << g17(a) << "\n";
  return out.str();
}

std::string curve_to_csv(const ModulationCurve& curve) {
  std::ostringstream out;
  out << "n,modulation,se,replicates\n";
  for (const auto& e : curve.entries)
    out << e.n << "," << g9(e.modulation) << "," << g9(e.se) << ","
        << e.replicates << "\n";
  return out.str();
}

ModulationCurve curve_from_csv(const std::string& text) {
  const auto lines = read_lines(text);
  if (lines.empty()) fail_data("modulation curve CSV is empty");
  if (trim(lines[0]) != "n,modulation,se,replicates")
    fail_data("modulation curve CSV: unexpected header \"" + lines[0] + "\"");
  ModulationCurve curve;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto cells = split_csv_line(lines[i]);
    const long row = static_cast<long>(i);
    if (cells.size() != 4)
      fail_data("modulation curve CSV: wrong column count at row " +
                std::to_string(row));
    ModulationEntry e;
    e.n = static_cast<long>(parse_cell(cells[0], row, "curve CSV"));
    e.modulation = parse_cell(cells[1], row, "curve CSV");
    e.se = parse_cell(cells[2], row, "curve CSV");
    e.replicates = static_cast<long>(parse_cell(cells[3], row, "curve CSV"));
    if (!curve.entries.empty() && e.n <= curve.entries.back().n)
      fail_data("modulation curve CSV: n must be strictly increasing");
    if (e.se < 0.0) fail_data("modulation curve CSV: negative se");
    curve.entries.push_back(e);
  }
  if (curve.entries.empty()) fail_data("modulation curve CSV has no rows");
  return curve;
}

std::string rejection_table_to_csv(const std::vector<RejectionRow>& rows) {
  std::ostringstream out;
  out << "offset,method,n,level,rejections,replicates,rate,se\n";
  for (const auto& r : rows)
    out << g9(r.offset) << "," << test_method_name(r.method) << "," << r.n
        << "," << g9(r.level) << "," << r.rejections << "," << r.replicates
        << "," << g9(r.rate) << "," << g9(r.se) << "\n";
  return out.str();
}

namespace {

ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
  auto rows = ordered_json::array();
  for (long i = 0; i < m.rows(); ++i) {
    auto row = ordered_json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

// JSON has no infinity literal; emit the string "inf" instead.
ordered_json finite_or_inf(double v) {
  if (std::isinf(v)) return ordered_json(v > 0 ? "inf" : "-inf");
  return ordered_json(v);
}

}  // namespace

std::string curve_to_json(const ModulationCurve& curve) {
  ordered_json j;
  auto arr = ordered_json::array();
  for (const auto& e : curve.entries)
    arr.push_back(ordered_json{{"n", e.n},
                               {"modulation", e.modulation},
                               {"se", e.se},
                               {"replicates", e.replicates}});
  j["entries"] = arr;
  return j.dump();
}

std::string test_report_to_json(const TestReport& report) {
  ordered_json j;
  j["method"] = test_method_name(report.method);
  j["statistic"] = report.statistic;
  j["dof"] = report.dof;
  j["p_value"] = report.p_value;
  j["n1"] = report.n1;
  j["n2"] = report.n2;
  j["B"] = report.bootstrap_count;
  j["seed"] = report.seed;
  return j.dump();
}

std::string clt_result_to_json(const CLTResult& result) {
  ordered_json j;
  j["m"] = result.m;
  j["hessian"] = matrix_to_json(result.hessian);
  j["sigma"] = matrix_to_json(result.sigma);
  j["asymptotic_cov"] = matrix_to_json(result.asymptotic_cov);
  j["limit_modulation"] = finite_or_inf(result.limit_modulation);
  j["population_variance"] = result.population_variance;
  return j.dump();
}

std::string fss_class_to_json(const FSSClass& cls) {
  ordered_json j;
  j["label"] = fss_label_name(cls.label);
  j["limit_modulation"] = finite_or_inf(cls.limit_modulation);
  j["sup_modulation"] = finite_or_inf(cls.sup_modulation);
  if (!cls.diagnostics.empty()) j["diagnostics"] = cls.diagnostics;
  return j.dump();
}

std::string regime_fit_to_json(const RegimeFit& fit) {
  ordered_json j;
  j["c_minus"] = fit.c_minus;
  j["c_plus"] = fit.c_plus;
  j["alpha_minus"] = fit.alpha_minus;
  j["alpha_plus"] = fit.alpha_plus;
  j["n_minus"] = fit.n_minus;
  j["n_plus"] = fit.n_plus;
  j["n_zero"] = fit.n_zero;
  j["k_bound"] = fit.k_bound;
  j["residual"] = fit.residual;
  return j.dump();
}

std::string ring_search_to_json(const RingSearchResult& result) {
  ordered_json j;
  j["m"] = result.m;
  j["target"] = result.target;
  j["theta"] = result.theta;
  j["alpha"] = result.alpha;
  j["achieved_limit"] = result.achieved_limit;
  // The closed-form construction behind the search is stated for m >= 4; the
  // formula itself is well-defined for any m >= 2.
  j["within_stated_regime"] = result.m >= 4;
  return j.dump();
}

std::string bootstrap_modulation_to_json(const BootstrapModulationResult& r) {
  ordered_json j;
  j["estimate"] = r.estimate;
  j["se"] = r.se;
  j["n"] = r.n;
  j["B"] = r.replicates;
  return j.dump();
}

std::string rejection_table_to_json(const std::vector<RejectionRow>& rows) {
  auto arr = ordered_json::array();
  for (const auto& r : rows)
    arr.push_back(ordered_json{{"offset", r.offset},
                               {"method", test_method_name(r.method)},
                               {"n", r.n},
                               {"level", r.level},
                               {"rejections", r.rejections},
                               {"replicates", r.replicates},
                               {"rate", r.rate},
                               {"se", r.se}});
  return arr.dump();
}

std::string angle_dataset_to_json(const AngleDataset& data) {
  ordered_json j;
  j["name"] = data.name;
  j["n"] = static_cast<long>(data.angles.size());
  j["source_unit"] = data.source_unit;
  j["skipped_calm"] = data.skipped_calm;
  j["angles"] = data.angles;
  return j.dump();
}

std::vector<long> parse_n_grid(const std::string& text) {
  std::vector<long> grid;
  if (text.rfind("log:", 0) == 0) {
    const auto rest = text.substr(4);
    std::vector<std::string> parts;
    std::stringstream ss(rest);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(part);
    if (parts.size() != 3)
      fail_usage("n-grid: expected log:a:b:k, got \"" + text + "\"");
    const double a = parse_cell(parts[0], 0, "n-grid");
    const double b = parse_cell(parts[1], 0, "n-grid");
    const double k = parse_cell(parts[2], 0, "n-grid");
    if (!(a >= 1) || !(b >= a) || !(k >= 1) || k != std::floor(k))
      fail_usage("n-grid: log:a:b:k needs 1 <= a <= b and integer k >= 1");
    const long kk = static_cast<long>(k);
    for (long i = 0; i < kk; ++i) {
      const double t = kk == 1 ? 0.0
                               : static_cast<double>(i) /
                                     static_cast<double>(kk - 1);
      const double v = std::exp(std::log(a) + t * (std::log(b) - std::log(a)));
      grid.push_back(static_cast<long>(std::llround(v)));
    }
  } else {
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
      part = trim(part);
      if (part.empty()) continue;
      const double v = parse_cell(part, 0, "n-grid");
      if (!(v >= 1) || v != std::floor(v))
        fail_usage("n-grid: entries must be integers >= 1");
      grid.push_back(static_cast<long>(v));
    }
  }
  if (grid.empty()) fail_usage("n-grid: no entries parsed from \"" + text + "\"");
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace fss
