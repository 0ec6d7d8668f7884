#include "roughfpca/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "roughfpca/errors.hpp"

namespace roughfpca {

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view context) {
  if (!obj.is_object()) throw ConfigError(std::string(context) + ": expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(std::string(context) + ": unknown field \"" + key + "\"");
  }
}

namespace {

double number(const json& j, std::string_view key, std::string_view context) {
  const auto it = j.find(std::string(key));
  if (it == j.end()) throw ConfigError(std::string(context) + ": missing field \"" + std::string(key) + "\"");
  if (!it->is_number()) throw ConfigError(std::string(context) + ": field \"" + std::string(key) + "\" must be a number");
  return it->get<double>();
}

}  // namespace

BulkFunction bulk_from_json(const json& j) {
  reject_unknown_keys(j, {"family", "b0", "a", "threshold", "table"}, "bulk");
  if (!j.contains("family") || !j["family"].is_string()) throw ConfigError("bulk: missing string field \"family\"");
  const BulkFamily family = parse_family(j["family"].get<std::string>());
  if (j.contains("a") && j.contains("threshold")) throw ConfigError("bulk: give either \"a\" or \"threshold\"");
  BulkFunction b = BulkFunction::poly(1.0, 1.0);
  if (family == BulkFamily::TabulatedMonotone) {
    if (j.contains("b0")) throw ConfigError("bulk: tables take b0 from their first knot");
    if (!j.contains("table") || !j["table"].is_array()) throw ConfigError("bulk: table family needs \"table\"");
    BulkFunction::Table t;
    for (const auto& row : j["table"]) {
      if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
        throw ConfigError("bulk: table rows must be [x, b] number pairs");
      }
      t.emplace_back(row[0].get<double>(), row[1].get<double>());
    }
    b = BulkFunction::tabulated(std::move(t), j.contains("a") ? number(j, "a", "bulk") : 1.0);
  } else {
    if (j.contains("table")) throw ConfigError("bulk: \"table\" is only valid for the table family");
    const double b0 = j.contains("b0") ? number(j, "b0", "bulk") : 1.0;
    if (j.contains("threshold")) return calibrate_rate(family, b0, number(j, "threshold", "bulk"));
    b = BulkFunction::make(family, b0, number(j, "a", "bulk"));
  }
  if (j.contains("threshold")) return calibrate_rate(b, number(j, "threshold", "bulk"));
  return b;
}

json bulk_to_json(const BulkFunction& b) {
  json j;
  j["family"] = std::string(family_name(b.family()));
  if (b.family() == BulkFamily::TabulatedMonotone) {
    json t = json::array();
    for (const auto& [x, v] : b.table()) t.push_back({x, v});
    j["table"] = t;
  } else {
    j["b0"] = b.b0();
  }
  j["a"] = b.rate();
  return j;
}

ModelSpec model_from_json(const json& j) {
  reject_unknown_keys(j, {"spikes", "bulk"}, "model");
  std::vector<double> spikes;
  if (j.contains("spikes")) {
    if (!j["spikes"].is_array()) throw ConfigError("model: \"spikes\" must be an array");
    for (const auto& s : j["spikes"]) {
      if (!s.is_number()) throw ConfigError("model: spikes must be numbers");
      spikes.push_back(s.get<double>());
    }
  }
  if (!j.contains("bulk")) throw ConfigError("model: missing field \"bulk\"");
  return ModelSpec(std::move(spikes), bulk_from_json(j["bulk"]));
}

json model_to_json(const ModelSpec& m) {
  json j;
  j["spikes"] = m.spikes();
  j["bulk"] = bulk_to_json(m.bulk());
  return j;
}

json report_to_json(const CriticalityReport& r) {
  json j;
  j["xi_inf"] = r.xi_inf;
  j["threshold"] = r.threshold;
  j["subcritical_limit"] = r.subcritical_limit;
  j["M"] = r.M;
  json spikes = json::array();
  for (const auto& s : r.per_spike) {
    json e;
    e["index"] = s.index;
    e["spike"] = s.spike;
    e["regime"] = s.regime == Regime::Super ? "super" : "sub";
    e["limit_eigenvalue"] = s.limit_eigenvalue;
    e["limit_abs_cosine"] = s.limit_abs_cosine;
    e["limit_angle_deg"] = s.limit_angle_deg();
    spikes.push_back(e);
  }
  j["spikes"] = spikes;
  return j;
}

AtomicMeasure measure_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("measure: expected a JSON object");
  if (j.contains("bulk")) {
    reject_unknown_keys(j, {"bulk", "gamma", "atoms"}, "measure");
    const BulkFunction b = bulk_from_json(j["bulk"]);
    const double gamma = j.contains("gamma") ? number(j, "gamma", "measure") : 1.0;
    const int atoms = j.contains("atoms") ? j["atoms"].get<int>() : 2000;
    if (!(gamma > 0.0) || atoms < 1) throw ConfigError("measure: need gamma > 0 and atoms >= 1");
    std::vector<double> loc(atoms);
    for (int i = 0; i < atoms; ++i) loc[i] = b(gamma * (i + 0.5) / atoms);
    return AtomicMeasure::uniform(std::move(loc));
  }
  reject_unknown_keys(j, {"locations", "weights"}, "measure");
  if (!j.contains("locations")) throw ConfigError("measure: missing field \"locations\"");
  auto loc = j["locations"].get<std::vector<double>>();
  if (!j.contains("weights")) return AtomicMeasure::uniform(std::move(loc));
  return AtomicMeasure(std::move(loc), j["weights"].get<std::vector<double>>());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

CurveLayout parse_layout(std::string_view s) {
  if (s == "row") return CurveLayout::RowPerCurve;
  if (s == "column") return CurveLayout::ColumnPerCurve;
  throw ConfigError("layout must be \"row\" or \"column\"");
}

NaPolicy parse_na_policy(std::string_view s) {
  if (s == "error") return NaPolicy::Error;
  if (s == "interpolate") return NaPolicy::Interpolate;
  throw ConfigError("NA policy must be \"error\" or \"interpolate\"");
}

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  for (auto& s : cells) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    s = a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  }
  return cells;
}

bool is_missing(const std::string& s) { return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "na"; }

bool parse_number(const std::string& s, double& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

void fill_missing(Eigen::Ref<Eigen::VectorXd> v, const std::string& who) {
  std::vector<int> known;
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isnan(v(i))) known.push_back(i);
  }
  if (known.empty()) throw DataError(who + ": every value is missing");
  for (int i = 0; i < v.size(); ++i) {
    if (!std::isnan(v(i))) continue;
    const auto it = std::upper_bound(known.begin(), known.end(), i);
    if (it == known.begin()) {
      v(i) = v(known.front());
    } else if (it == known.end()) {
      v(i) = v(known.back());
    } else {
      const int a = *(it - 1);
      const int b = *it;
      v(i) = v(a) + (v(b) - v(a)) * (i - a) / static_cast<double>(b - a);
    }
  }
}

}  // namespace

std::string curves_to_csv(const CurveSet& curves) {
  std::string out;
  const bool labelled = !curves.labels.empty();
  if (labelled) out += "label";
  for (int g = 0; g < curves.grid_size(); ++g) {
    if (labelled || g > 0) out += ',';
    out += "t" + std::to_string(g + 1);
  }
  out += '\n';
  for (int i = 0; i < curves.size(); ++i) {
    if (labelled) out += curves.labels.at(i);
    for (int g = 0; g < curves.grid_size(); ++g) {
      if (labelled || g > 0) out += ',';
      out += format_double(curves.values(i, g));
    }
    out += '\n';
  }
  return out;
}

void write_curves_csv(const CurveSet& curves, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << curves_to_csv(curves);
}

CurveSet parse_curves(std::string_view text, CurveLayout layout, NaPolicy na) {
  std::vector<std::vector<std::string>> rows;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) rows.push_back(split_line(line));
    pos = end + 1;
  }
  if (rows.size() < 2) throw DataError("CSV needs a header row and at least one data row");
  const std::size_t width = rows[0].size();
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != width) {
      std::ostringstream os;
      os << "row " << r + 1 << " has " << rows[r].size() << " fields, expected " << width;
      throw DataError(os.str());
    }
  }
  // a first column that is not numeric in some data row holds labels
  bool label_col = false;
  for (std::size_t r = 1; r < rows.size() && !label_col; ++r) {
    double v;
    label_col = !is_missing(rows[r][0]) && !parse_number(rows[r][0], v);
  }
  const std::size_t first = label_col ? 1 : 0;
  if (width <= first) throw DataError("CSV has no value columns");
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size() - 1);
  const Eigen::Index nc = static_cast<Eigen::Index>(width - first);
  Eigen::MatrixXd m(nr, nc);
  bool any_missing = false;
  for (Eigen::Index r = 0; r < nr; ++r) {
    for (Eigen::Index c = 0; c < nc; ++c) {
      const std::string& cell = rows[r + 1][first + c];
      double v;
      if (is_missing(cell)) {
        if (na == NaPolicy::Error) {
          std::ostringstream os;
          os << "row " << r + 2 << ", column " << first + c + 1 << ": missing value";
          throw DataError(os.str());
        }
        m(r, c) = std::numeric_limits<double>::quiet_NaN();
        any_missing = true;
      } else if (parse_number(cell, v)) {
        m(r, c) = v;
      } else {
        std::ostringstream os;
        os << "row " << r + 2 << ", column " << first + c + 1 << ": non-numeric value \"" << cell << "\"";
        throw DataError(os.str());
      }
    }
  }
  CurveSet out;
  if (layout == CurveLayout::RowPerCurve) {
    out.values = std::move(m);
    if (label_col) {
      for (std::size_t r = 1; r < rows.size(); ++r) out.labels.push_back(rows[r][0]);
    }
  } else {
    out.values = m.transpose();
    for (std::size_t c = first; c < width; ++c) out.labels.push_back(rows[0][c]);
  }
  if (any_missing) {
    for (int i = 0; i < out.size(); ++i) {
      const std::string who = layout == CurveLayout::RowPerCurve ? "row " + std::to_string(i + 2)
                                                                 : "column " + std::to_string(first + i + 1);
      Eigen::VectorXd v = out.values.row(i).transpose();
      fill_missing(v, who);
      out.values.row(i) = v.transpose();
    }
  }
  return out;
}

CurveSet ingest_curves(const std::string& path, CurveLayout layout, NaPolicy na) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
  try {
    return parse_curves(text, layout, na);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

std::string matrix_to_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  if (!header.empty()) out += '\n';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out += (c ? "," : "") + format_double(m(r, c));
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json manifest_to_json(const RunManifest& m) {
  json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["master_seed"] = m.master_seed;
  j["version"] = m.version;
  j["wall_time_s"] = m.wall_time_s;
  json outs = json::array();
  for (const auto& o : m.outputs) outs.push_back({{"path", o.path}, {"hash", o.hash}});
  j["outputs"] = outs;
  return j;
}

RunManifest manifest_from_json(const json& j) {
  reject_unknown_keys(j, {"command", "config_hash", "master_seed", "version", "wall_time_s", "outputs"}, "manifest");
  RunManifest m;
  m.command = j.value("command", "");
  m.config_hash = j.value("config_hash", "");
  m.master_seed = j.value("master_seed", std::uint64_t{0});
  m.version = j.value("version", std::string(kVersion));
  m.wall_time_s = j.value("wall_time_s", 0.0);
  if (j.contains("outputs")) {
    for (const auto& o : j["outputs"]) m.outputs.push_back({o.at("path").get<std::string>(), o.at("hash").get<std::string>()});
  }
  return m;
}

void write_output(RunManifest& manifest, const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  manifest.outputs.push_back({path, hex64(fnv1a(text))});
}

}  // namespace roughfpca
