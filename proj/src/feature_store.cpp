#include "glottal/feature_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "glottal/dsp_core.hpp"
#include "glottal/error.hpp"
#include "json.hpp"

namespace glottal::store {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kFixedColumns = 6;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string number(double v) { return std::isfinite(v) ? fmt("%.17g", v) : "nan"; }

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw Error(ErrorKind::kIo, "cannot open " + p.string());
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

FeatureStore build(const std::vector<pipe::RecordingResult>& results, const pipe::ExtractConfig& config) {
  FeatureStore s;
  s.module_version = pipe::kModuleVersion;
  s.params_hash = pipe::params_hash(config);
  s.config = pipe::config_json(config);
  s.columns = fsets::columns(fsets::feature_set("FS-12"));
  for (const auto& r : results) {
    if (!r.ok) {
      s.excluded.push_back({r.id, r.reason});
      continue;
    }
    Row row{r.id, r.entry.label, r.entry.speaker, r.entry.task, {}};
    row.values.reserve(s.columns.size());
    for (const auto& col : s.columns) {
      const auto dot = col.rfind('.');
      const auto it = r.stats.find(col.substr(0, dot));
      if (it == r.stats.end()) row.values.push_back(kNaN);
      else row.values.push_back(col.substr(dot + 1) == "mean" ? it->second.mean : it->second.std);
    }
    s.rows.push_back(std::move(row));
  }
  return s;
}

void write(const FeatureStore& store, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::kIo, "cannot create " + dir.string());
  std::ofstream os(dir / kFeaturesFile, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write feature store");
  os << "id,label,speaker,task,module_version,params_hash";
  for (const auto& c : store.columns) os << ',' << c;
  os << '\n';
  for (const auto& r : store.rows) {
    os << r.id << ',' << to_string(r.label) << ',' << r.speaker << ',' << to_string(r.task) << ','
       << store.module_version << ',' << store.params_hash;
    for (double v : r.values) os << ',' << number(v);
    os << '\n';
  }

  nlohmann::ordered_json j;
  j["module_version"] = store.module_version;
  j["params_hash"] = store.params_hash;
  j["config"] = nlohmann::ordered_json::parse(store.config);
  j["columns"] = store.columns;
  j["n_rows"] = store.rows.size();
  auto ex = nlohmann::ordered_json::array();
  for (const auto& e : store.excluded) ex.push_back({{"id", e.id}, {"reason", e.reason}});
  j["excluded"] = ex;
  std::ofstream js(dir / kSchemaFile, std::ios::binary);
  if (!js) throw Error(ErrorKind::kIo, "cannot write schema");
  js << j.dump(1) << '\n';
}

FeatureStore read(const std::filesystem::path& dir) {
  FeatureStore s;
  try {
    const auto j = nlohmann::ordered_json::parse(slurp(dir / kSchemaFile));
    s.module_version = j.at("module_version").get<std::string>();
    s.params_hash = j.at("params_hash").get<std::string>();
    s.config = j.at("config").dump();
    s.columns = j.at("columns").get<std::vector<std::string>>();
    for (const auto& e : j.at("excluded")) s.excluded.push_back({e.at("id"), e.at("reason")});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormat, std::string("schema: ") + e.what());
  }

  std::istringstream is(slurp(dir / kFeaturesFile));
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::kFormat, "empty feature store");
  const auto header = split(line, ',');
  if (header.size() != s.columns.size() + kFixedColumns ||
      !std::equal(s.columns.begin(), s.columns.end(), header.begin() + kFixedColumns))
    throw Error(ErrorKind::kFormat, "feature store header does not match its schema");
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw Error(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": wrong cell count");
    Row r{cells[0], parse_label(cells[1]), cells[2], parse_task(cells[3]), {}};
    for (std::size_t c = kFixedColumns; c < cells.size(); ++c) {
      if (cells[c] == "nan") {
        r.values.push_back(kNaN);
        continue;
      }
      try {
        r.values.push_back(std::stod(cells[c]));
      } catch (const std::exception&) {
        throw Error(ErrorKind::kFormat, "line " + std::to_string(line_no) + ": bad number");
      }
    }
    s.rows.push_back(std::move(r));
  }
  return s;
}

std::string content_hash(const std::filesystem::path& dir) {
  return pipe::fnv1a_hex(slurp(dir / kFeaturesFile) + slurp(dir / kSchemaFile));
}

clf::Dataset dataset(const FeatureStore& store, const fsets::FeatureSetSpec& spec,
                     std::optional<Task> task) {
  const auto cols = fsets::columns(spec);
  std::vector<std::size_t> idx;
  for (const auto& c : cols) {
    const auto it = std::find(store.columns.begin(), store.columns.end(), c);
    if (it == store.columns.end()) throw Error(ErrorKind::kFormat, "store lacks column " + c);
    idx.push_back(static_cast<std::size_t>(it - store.columns.begin()));
  }
  std::vector<const Row*> rows;
  for (const auto& r : store.rows)
    if (!task || r.task == *task) rows.push_back(&r);

  clf::Dataset d;
  d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < idx.size(); ++c)
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i]->values[idx[c]];
    d.y.push_back(rows[i]->label == VoiceLabel::kPathological ? 1 : -1);
    d.speakers.push_back(rows[i]->speaker);
    d.ids.push_back(rows[i]->id);
  }
  return d;
}

BoxStats box_stats(std::vector<double> values) {
  std::erase_if(values, [](double v) { return !std::isfinite(v); });
  BoxStats b;
  b.n = values.size();
  if (values.empty()) {
    b.median = b.q1 = b.q3 = b.lower_whisker = b.upper_whisker = kNaN;
    return b;
  }
  b.median = dsp::quantile(values, 0.5);
  b.q1 = dsp::quantile(values, 0.25);
  b.q3 = dsp::quantile(values, 0.75);
  const double iqr = b.q3 - b.q1;
  const double lo = b.q1 - 1.5 * iqr, hi = b.q3 + 1.5 * iqr;
  b.lower_whisker = b.q1;
  b.upper_whisker = b.q3;
  for (double v : values) {
    if (v < lo || v > hi) {
      ++b.outliers;
      continue;
    }
    b.lower_whisker = std::min(b.lower_whisker, v);
    b.upper_whisker = std::max(b.upper_whisker, v);
  }
  return b;
}

std::vector<AnalysisRow> analyze(const FeatureStore& store, const std::vector<std::string>& features) {
  bool normal = false, path = false;
  for (const auto& r : store.rows) (r.label == VoiceLabel::kNormal ? normal : path) = true;
  if (!normal || !path) throw Error(ErrorKind::kSingleClass, "analysis needs both classes");
  std::vector<AnalysisRow> out;
  for (const auto& f : features) {
    const auto it = std::find(store.columns.begin(), store.columns.end(), f + ".mean");
    if (it == store.columns.end()) throw Error(ErrorKind::kConfig, "unknown feature " + f);
    const auto c = static_cast<std::size_t>(it - store.columns.begin());
    for (VoiceLabel lab : {VoiceLabel::kNormal, VoiceLabel::kPathological}) {
      std::vector<double> v;
      for (const auto& r : store.rows)
        if (r.label == lab) v.push_back(r.values[c]);
      out.push_back({f, lab, box_stats(std::move(v))});
    }
  }
  return out;
}

std::string analysis_csv(const std::vector<AnalysisRow>& rows) {
  std::ostringstream os;
  os << "feature,label,n,median,q1,q3,lower_whisker,upper_whisker,outliers\n";
  for (const auto& r : rows)
    os << r.feature << ',' << to_string(r.label) << ',' << r.stats.n << ',' << number(r.stats.median)
       << ',' << number(r.stats.q1) << ',' << number(r.stats.q3) << ','
       << number(r.stats.lower_whisker) << ',' << number(r.stats.upper_whisker) << ','
       << r.stats.outliers << '\n';
  return os.str();
}

std::string format_row(const clf::MetricsReport& r) {
  return r.feature_set + " | " + fmt("%.2f", r.acc) + "±" + fmt("%.2f", r.acc_std) + " | " +
         fmt("%.2f", r.se) + " | " + fmt("%.2f", r.sp) + " | " + fmt("%.2f", r.auc) + " | " +
         fmt("%.3f", r.eer);
}

std::string report_table(const std::vector<clf::MetricsReport>& reports) {
  std::ostringstream os;
  for (std::size_t i = 0; i < std::size(kReportColumns); ++i)
    os << (i ? " | " : "") << kReportColumns[i];
  os << '\n';
  for (const auto& r : reports) os << format_row(r) << '\n';
  return os.str();
}

std::string report_csv(const std::vector<clf::MetricsReport>& reports) {
  std::ostringstream os;
  os << "feature_set,accuracy,accuracy_std,se,sp,auc,eer\n";
  for (const auto& r : reports)
    os << r.feature_set << ',' << number(r.acc) << ',' << number(r.acc_std) << ',' << number(r.se)
       << ',' << number(r.sp) << ',' << number(r.auc) << ',' << number(r.eer) << '\n';
  return os.str();
}

std::string folds_csv(const clf::MetricsReport& r) {
  std::ostringstream os;
  os << "fold,n_test,accuracy,se,sp,C,gamma\n";
  for (const auto& f : r.folds)
    os << f.fold << ',' << f.n_test << ',' << number(f.acc) << ',' << number(f.se) << ','
       << number(f.sp) << ',' << number(f.c) << ',' << number(f.gamma) << '\n';
  return os.str();
}

}  // namespace glottal::store
