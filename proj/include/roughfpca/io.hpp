#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "roughfpca/bulk.hpp"
#include "roughfpca/rmt.hpp"
#include "roughfpca/simulate.hpp"
#include "roughfpca/theory.hpp"

namespace roughfpca {

using json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = "0.3.1";

/// Throws ConfigError naming the first key of obj not in allowed.
void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view context);

/// {"family": "poly"|"exp"|"linear"|"table", "b0": 1, "a": 0.68} or with "threshold" in place of
/// "a" to calibrate the rate; tables use {"family": "table", "table": [[x, b], ...], "a": 1}.
BulkFunction bulk_from_json(const json& j);
json bulk_to_json(const BulkFunction& b);

/// {"spikes": [2.0], "bulk": {...}}
ModelSpec model_from_json(const json& j);
json model_to_json(const ModelSpec& m);

json report_to_json(const CriticalityReport& r);

/// {"locations": [...], "weights": [...]} (weights default to uniform) or
/// {"bulk": {...}, "gamma": 1, "atoms": 2000} for the discretised push-forward of a bulk.
AtomicMeasure measure_from_json(const json& j);

json read_json_file(const std::string& path);

enum class CurveLayout { RowPerCurve, ColumnPerCurve };
enum class NaPolicy { Error, Interpolate };

CurveLayout parse_layout(std::string_view s);  // "row" | "column"
NaPolicy parse_na_policy(std::string_view s);  // "error" | "interpolate"

/// Header row then one curve per row, values printed with 17 significant digits. The first
/// column holds the label when labels are present.
std::string curves_to_csv(const CurveSet& curves);
void write_curves_csv(const CurveSet& curves, const std::string& path);

/// Rectangular numeric CSV with a header row. Empty cells and NA/NaN count as missing. With a
/// non-numeric first column the column is read as labels. Errors name the offending file line.
CurveSet parse_curves(std::string_view text, CurveLayout layout, NaPolicy na);
CurveSet ingest_curves(const std::string& path, CurveLayout layout, NaPolicy na);

std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header);

std::uint64_t fnv1a(std::string_view data);
std::string hex64(std::uint64_t h);

struct OutputRecord {
  std::string path;
  std::string hash;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t master_seed = 0;
  std::string version{kVersion};
  double wall_time_s = 0.0;
  std::vector<OutputRecord> outputs;
};

json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);

/// Writes text to path and records its hash.
void write_output(RunManifest& manifest, const std::string& path, std::string_view text);

std::string read_text_file(const std::string& path);

}  // namespace roughfpca
