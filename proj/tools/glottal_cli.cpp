#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "glottal/error.hpp"
#include "glottal/feature_store.hpp"
#include "glottal/pipeline.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace glottal;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  os << text;
}

void log_line(const std::string& msg) { std::cerr << "[glottal] " << msg << '\n'; }

nlohmann::ordered_json report_to_json(const clf::MetricsReport& r) {
  nlohmann::ordered_json j;
  j["feature_set"] = r.feature_set;
  j["acc"] = r.acc;
  j["acc_std"] = r.acc_std;
  j["se"] = r.se;
  j["sp"] = r.sp;
  j["auc"] = r.auc;
  j["eer"] = r.eer;
  return j;
}

clf::MetricsReport report_from_json(const nlohmann::json& j) {
  clf::MetricsReport r;
  r.feature_set = j.at("feature_set").get<std::string>();
  r.acc = j.at("acc").get<double>();
  r.acc_std = j.at("acc_std").get<double>();
  r.se = j.at("se").get<double>();
  r.sp = j.at("sp").get<double>();
  r.auc = j.at("auc").get<double>();
  r.eer = j.at("eer").get<double>();
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Glottal-source voice pathology toolkit"};
  app.require_subcommand(1);

  int jobs = 1;
  std::vector<std::string> params;
  std::string out;

  auto* synth = app.add_subcommand("synth", "Generate the synthetic two-class corpus");
  std::string spec_file;
  std::uint64_t synth_seed = 42;
  std::size_t pairs = 100;
  synth->add_option("--spec", spec_file, "Corpus spec JSON (pairs, seed, duration, fs)")->check(CLI::ExistingFile);
  synth->add_option("--seed", synth_seed, "RNG seed (overrides the spec file)");
  synth->add_option("--pairs", pairs, "Normal/pathological pairs");
  synth->add_option("--out", out, "Output directory")->required();
  synth->add_option("--jobs", jobs, "Worker threads");

  auto* extract = app.add_subcommand("extract", "Extract features into a store");
  std::string manifest;
  extract->add_option("--manifest", manifest, "Manifest CSV (path,label,speaker,task)")->required()->check(CLI::ExistingFile);
  extract->add_option("--out", out, "Store directory")->required();
  extract->add_option("--jobs", jobs, "Worker threads");
  extract->add_option("--param", params, "Parameter override key=value");

  auto* analyze = app.add_subcommand("analyze", "Box-plot statistics per feature and class");
  std::string store_dir;
  std::string features = "FS-8";
  analyze->add_option("--store", store_dir, "Store directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--features", features, "Feature set whose features are summarised, or 'all'");
  analyze->add_option("--out", out, "CSV output file");

  auto* trainval = app.add_subcommand("trainval", "Cross-validated detection per feature set");
  std::string sets = "all";
  clf::CvConfig cv;
  std::string task_name;
  trainval->add_option("--store", store_dir, "Store directory")->required()->check(CLI::ExistingDirectory);
  trainval->add_option("--feature-sets", sets, "Comma-separated ids (FS-1,FS-9) or 'all'");
  trainval->add_option("--folds", cv.folds, "Outer folds");
  trainval->add_option("--seed", cv.seed, "Partition seed");
  trainval->add_flag("--speaker-disjoint", cv.speaker_disjoint, "Keep each speaker in one fold");
  trainval->add_option("--task", task_name, "Restrict to one task (a, i, u, sentence)");
  trainval->add_option("--jobs", jobs, "Worker threads (folds)");
  trainval->add_option("--param", params, "Parameter override key=value (cv.*)");
  trainval->add_option("--out", out, "Report directory")->required();

  auto* report = app.add_subcommand("report", "Render saved reports as the combined table");
  std::string report_dir;
  bool as_csv = false;
  report->add_option("--in", report_dir, "Report directory written by trainval")->required()->check(CLI::ExistingDirectory);
  report->add_flag("--csv", as_csv, "CSV instead of the aligned table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    pipe::ExtractConfig xcfg;
    for (const auto& p : params) pipe::apply_param(xcfg, cv, p);

    if (*synth) {
      pipe::CorpusSpec spec;
      if (!spec_file.empty()) spec = pipe::load_corpus_spec(spec_file);
      if (synth->count("--seed")) spec.seed = synth_seed;
      if (synth->count("--pairs")) spec.pairs = pairs;
      const auto m = pipe::write_corpus(out, pipe::oracle_corpus(spec), jobs);
      log_line("wrote " + std::to_string(m.entries.size()) + " recordings to " + out);
    } else if (*extract) {
      const auto m = io::load_manifest(manifest);
      const auto t0 = std::chrono::steady_clock::now();
      const auto results = pipe::extract_manifest(m, xcfg, jobs, log_line);
      const auto st = store::build(results, xcfg);
      store::write(st, out);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      log_line("extracted " + std::to_string(st.rows.size()) + " of " + std::to_string(results.size()) +
               " recordings in " + std::to_string(secs) + " s; store hash " + store::content_hash(out));
    } else if (*analyze) {
      const auto st = store::read(store_dir);
      std::vector<std::string> names;
      const auto ids = fsets::parse_list(features);
      for (const auto& id : ids)
        for (auto fam : fsets::feature_set(id).families)
          for (auto& n : fsets::family_features(fam))
            if (std::find(names.begin(), names.end(), n) == names.end()) names.push_back(n);
      const auto csv = store::analysis_csv(store::analyze(st, names));
      if (out.empty()) std::cout << csv;
      else write_text(out, csv);
    } else if (*trainval) {
      cv.jobs = jobs;
      const auto st = store::read(store_dir);
      std::optional<Task> task;
      if (!task_name.empty()) task = parse_task(task_name);
      fs::create_directories(out);
      std::vector<clf::MetricsReport> reports;
      nlohmann::ordered_json all = nlohmann::ordered_json::array();
      for (const auto& id : fsets::parse_list(sets)) {
        const auto data = store::dataset(st, fsets::feature_set(id), task);
        auto r = clf::cross_validate(data, cv, id);
        log_line(store::format_row(r));
        write_text(fs::path(out) / ("folds_" + id + ".csv"), store::folds_csv(r));
        all.push_back(report_to_json(r));
        reports.push_back(std::move(r));
      }
      write_text(fs::path(out) / "report.csv", store::report_csv(reports));
      write_text(fs::path(out) / "report.txt", store::report_table(reports));
      nlohmann::ordered_json meta;
      meta["store_params_hash"] = st.params_hash;
      meta["folds"] = cv.folds;
      meta["seed"] = cv.seed;
      meta["speaker_disjoint"] = cv.speaker_disjoint;
      meta["reports"] = all;
      write_text(fs::path(out) / "reports.json", meta.dump(1) + "\n");
      std::cout << store::report_table(reports);
    } else if (*report) {
      std::ifstream is(fs::path(report_dir) / "reports.json");
      if (!is) throw Error(ErrorKind::kIo, "no reports.json in " + report_dir);
      std::vector<clf::MetricsReport> reports;
      try {
        nlohmann::json j;
        is >> j;
        for (const auto& r : j.at("reports")) reports.push_back(report_from_json(r));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kFormat, std::string("reports.json: ") + e.what());
      }
      std::cout << (as_csv ? store::report_csv(reports) : store::report_table(reports));
    }
  } catch (const Error& e) {
    log_line(e.what());
    return (e.kind() == ErrorKind::kConfig || e.kind() == ErrorKind::kInvalidArgument) ? kExitConfig
                                                                                        : kExitData;
  } catch (const std::exception& e) {
    log_line(std::string("error: ") + e.what());
    return kExitData;
  }
  return 0;
}
