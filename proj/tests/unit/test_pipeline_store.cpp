#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>

#include "glottal/error.hpp"
#include "glottal/feature_sets.hpp"
#include "glottal/feature_store.hpp"
#include "glottal/pipeline.hpp"
#include "signals.hpp"

using namespace glottal;
namespace fs = std::filesystem;

namespace {

// Small corpus shared by the tests in this file: 3 pairs of 0.6 s.
struct Fixture {
  fs::path dir;
  DatasetManifest manifest;
  std::vector<pipe::CorpusItem> items;
  store::FeatureStore st;
  fs::path store_dir;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    x.dir = testsig::temp_dir("pipe");
    x.items = pipe::oracle_corpus({.pairs = 3, .seed = 11, .duration = 0.6, .fs = 25000.0});
    x.manifest = pipe::write_corpus(x.dir / "corpus", x.items);
    pipe::ExtractConfig cfg;
    x.st = store::build(pipe::extract_manifest(x.manifest, cfg), cfg);
    x.store_dir = x.dir / "store";
    store::write(x.st, x.store_dir);
    return x;
  }();
  return f;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GLOTTAL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

bool same_value(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

}  // namespace

TEST(Corpus, PairsShareF0AndTract) {
  const auto& f = fixture();
  ASSERT_EQ(f.items.size(), 6u);
  ASSERT_EQ(f.manifest.entries.size(), 6u);
  for (std::size_t p = 0; p < 3; ++p) {
    const auto& n = f.items[2 * p];
    const auto& q = f.items[2 * p + 1];
    EXPECT_EQ(n.label, VoiceLabel::kNormal);
    EXPECT_EQ(q.label, VoiceLabel::kPathological);
    EXPECT_EQ(n.spec.lf.f0, q.spec.lf.f0);
    EXPECT_LT(n.spec.lf.rd, q.spec.lf.rd);
    EXPECT_EQ(n.spec.formants.size(), q.spec.formants.size());
  }
  EXPECT_EQ(pipe::oracle_corpus({.pairs = 3, .seed = 11, .duration = 0.6}).front().spec.seed, f.items.front().spec.seed);
}

TEST(Corpus, SidecarRoundtrip) {
  const auto& f = fixture();
  const auto sc = pipe::read_sidecar(f.dir / "corpus" / (f.items[1].id + ".json"));
  EXPECT_EQ(sc.item.id, f.items[1].id);
  EXPECT_EQ(sc.item.label, f.items[1].label);
  EXPECT_EQ(sc.item.spec.lf.rd, f.items[1].spec.lf.rd);
  EXPECT_EQ(sc.item.spec.seed, f.items[1].spec.seed);
  EXPECT_EQ(sc.gcis, lf::synthesize(f.items[1].spec).truth.true_gcis);
}

TEST(Pipeline, TracksCoverFamilies) {
  const auto& f = fixture();
  const auto sig = io::load_wav(f.manifest.entries[0].path);
  const auto tracks = pipe::extract_tracks(sig, Task::kVowelA, {});
  auto count_family = [&](fsets::Family fam) {
    std::size_t n = 0;
    for (const auto& name : fsets::family_features(fam)) n += tracks.count(name);
    return n;
  };
  EXPECT_EQ(count_family(fsets::Family::kQcpGlottal), 12u);
  EXPECT_EQ(count_family(fsets::Family::kZffExcitation), 4u);
  EXPECT_EQ(count_family(fsets::Family::kSourceMisc), 4u);
  EXPECT_EQ(count_family(fsets::Family::kMfcc), 39u);
  EXPECT_EQ(tracks.at("MFCC_QCP_00").size(), tracks.at("MFCC_00").size());
  EXPECT_EQ(tracks.at("MFCC_ZFF_00").size(), tracks.at("MFCC_00").size());
}

TEST(Pipeline, ParamOverrides) {
  pipe::ExtractConfig x;
  clf::CvConfig cv;
  pipe::apply_param(x, cv, "qcp.order=20");
  EXPECT_EQ(x.qcp.order, 20);
  const auto h = pipe::params_hash(x);
  EXPECT_EQ(h, pipe::params_hash(x));
  EXPECT_NE(h, pipe::params_hash({}));
  EXPECT_THROW(pipe::apply_param(x, cv, "nonsense.key=1"), Error);
  EXPECT_THROW(pipe::apply_param(x, cv, "qcp.order=abc"), Error);
  EXPECT_EQ(pipe::fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(pipe::fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Store, RoundtripAndHash) {
  const auto& f = fixture();
  EXPECT_EQ(f.st.rows.size() + f.st.excluded.size(), 6u);
  EXPECT_EQ(f.st.columns.size(), fsets::dimension(fsets::feature_set("FS-12")));
  const auto back = store::read(f.store_dir);
  EXPECT_EQ(back.columns, f.st.columns);
  EXPECT_EQ(back.params_hash, f.st.params_hash);
  ASSERT_EQ(back.rows.size(), f.st.rows.size());
  for (std::size_t i = 0; i < back.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].id, f.st.rows[i].id);
    EXPECT_EQ(back.rows[i].label, f.st.rows[i].label);
    for (std::size_t j = 0; j < back.rows[i].values.size(); ++j)
      EXPECT_TRUE(same_value(back.rows[i].values[j], f.st.rows[i].values[j])) << f.st.columns[j];
  }
  const auto again = f.dir / "store2";
  store::write(back, again);
  EXPECT_EQ(store::content_hash(again), store::content_hash(f.store_dir));
}

TEST(Store, DatasetSlices) {
  const auto& f = fixture();
  const auto d = store::dataset(f.st, fsets::feature_set("FS-1"));
  EXPECT_EQ(d.x.cols(), 24);
  EXPECT_EQ(static_cast<std::size_t>(d.x.rows()), f.st.rows.size());
  EXPECT_EQ(store::dataset(f.st, fsets::feature_set("FS-2")).x.cols(), 8);
}

TEST(Store, BoxStats) {
  const auto c = store::box_stats(std::vector<double>(9, 2.0));
  EXPECT_EQ(c.n, 9u);
  EXPECT_EQ(c.median, 2.0);
  EXPECT_EQ(c.q1, 2.0);
  EXPECT_EQ(c.q3, 2.0);
  EXPECT_EQ(c.lower_whisker, 2.0);
  EXPECT_EQ(c.upper_whisker, 2.0);
  EXPECT_EQ(c.outliers, 0u);
  const auto o = store::box_stats({1, 2, 3, 4, 5, 6, 7, 8, 100, std::nan("")});
  EXPECT_EQ(o.n, 9u);
  EXPECT_EQ(o.median, 5.0);
  EXPECT_EQ(o.outliers, 1u);
  EXPECT_EQ(o.upper_whisker, 8.0);
}

TEST(Store, AnalyzeNeedsBothClasses) {
  const auto& f = fixture();
  const auto rows = store::analyze(f.st, {"NAQ", "CPP"});
  EXPECT_EQ(rows.size(), 4u);
  auto one = f.st;
  std::erase_if(one.rows, [](const store::Row& r) { return r.label == VoiceLabel::kNormal; });
  EXPECT_THROW(store::analyze(one, {"NAQ"}), Error);
}

TEST(Report, FormatAndColumns) {
  clf::MetricsReport r;
  r.feature_set = "FS-1";
  r.acc = 78.3712;
  r.acc_std = 4.1849;
  r.se = 0.7712;
  r.sp = 0.8;
  r.auc = 0.861;
  r.eer = 0.2104;
  EXPECT_EQ(store::format_row(r), "FS-1 | 78.37±4.18 | 0.77 | 0.80 | 0.86 | 0.210");
  std::vector<clf::MetricsReport> all;
  for (const auto& s : fsets::all_feature_sets()) {
    r.feature_set = s.id;
    all.push_back(r);
  }
  const auto table = store::report_table(all);
  EXPECT_EQ(table.substr(0, table.find('\n')), "Feature set | Accuracy [%] | SE | SP | AUC | EER");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 13);
  const auto csv = store::report_csv(all);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 13);
}

TEST(Cli, ExitCodes) {
  const auto& f = fixture();
  const auto out = (f.dir / "cli").string();
  const auto manifest = (f.dir / "corpus" / "manifest.csv").string();
  EXPECT_EQ(run_cli("--help"), 0);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("extract --manifest " + manifest + " --out " + out + " --param bogus=1"), 2);
  EXPECT_EQ(run_cli("trainval --store " + f.store_dir.string() + " --feature-sets FS-99 --out " + out), 2);
  fs::create_directories(f.dir / "empty");
  EXPECT_EQ(run_cli("trainval --store " + (f.dir / "empty").string() + " --out " + out), 3);
  EXPECT_EQ(run_cli("trainval --store " + f.store_dir.string() + " --feature-sets FS-2 --folds 3 --out " + out), 0);
  EXPECT_EQ(run_cli("report --in " + out), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "report.csv"));
}
