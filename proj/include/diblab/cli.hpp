#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "diblab/positivity.hpp"

namespace diblab {

// key = value configuration with [section] headers.  Keys are addressed as
// "section.key"; unknown keys are rejected at RunConfig construction so a
// typo cannot silently fall back to a default.
struct ConfigFile {
  std::map<std::string, std::string> values;

  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text);

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

enum class Task {
  curvature_compare,
  positivity_certify,
  trace_constant,
  flatness_scan,
  convergence_sweep,
};

Task task_from_name(const std::string& name);
const char* to_string(Task t);

struct RunConfig {
  Task task = Task::curvature_compare;
  std::string family = "hartogs_ball";
  int n = 1, m = 1;
  std::string metric = "flat";
  int r = 1;
  int degree = 3;
  QuadratureOptions quad;
  double fd_base_step = 1e-3;
  bool fd_richardson = true;

  // Grid in the first base coordinate; remaining base coordinates stay 0.
  double re_min = 0.0, re_max = 0.0;
  int re_count = 1;
  double im_min = 0.0, im_max = 0.0;
  int im_count = 1;

  double atol = 1e-5, rtol = 1e-4;
  double flat_tol = 1e-8;
  std::string sweep_parameter = "resolution";  // degree | resolution | stencil
  unsigned seed = 20240801;
  std::string out_dir = "reports";

  std::vector<VectorXcd> t_grid() const;  // re-major order
};

// Validates schema version, catalog names, dimensions, grid and tolerances;
// throws ConfigError with the offending key in the message.
RunConfig run_config_from(const ConfigFile& cfg);

struct TaskRecord {
  double key0 = 0.0, key1 = 0.0;  // t0 re/im, or (sweep parameter, 0)
  std::vector<double> fields;
  bool pass = true;
};

struct RunReport {
  Task task = Task::curvature_compare;
  std::vector<std::string> key_names;    // column names for key0/key1
  std::vector<std::string> field_names;  // column names for fields
  std::vector<TaskRecord> records;
  bool pass = false;
  std::string summary;  // human-readable

  // Machine-readable record block: a '#' header documenting the columns,
  // then one tab-separated line per record with %.12e formatting.
  // Byte-identical across runs of the same config and seed.
  std::string records_text() const;
};

// Executes the configured task over the t-grid (parallel map, one record
// per grid point; sweeps run at the first grid point).  Honors the
// DIBLAB_THREADS environment variable; results do not depend on it.
RunReport run_task(const RunConfig& cfg);

// Writes <out_dir>/<task>_summary.txt and <task>_records.tsv.
void write_report(const RunReport& rep, const std::string& out_dir);

inline int exit_code_for(const RunReport& rep) { return rep.pass ? 0 : 1; }

}  // namespace diblab
