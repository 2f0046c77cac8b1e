#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "duet/svm.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "duet_cli_test";

int run(const std::string& args) {
  std::string cmd = std::string(DUET_CLI_PATH) + " " + args;
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int line_count(const std::string& s) {
  int n = 0;
  for (char c : s)
    if (c == '\n') ++n;
  return n;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

struct Workspace {
  Workspace() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

const fs::path& dataset_dir() {
  static fs::path dir = [] {
    fs::path d = kWork / "ds";
    REQUIRE(run("synth --out " + q(d) + " --per-class 2 --length 10 --seed 5") == 0);
    return d;
  }();
  return dir;
}

[[maybe_unused]] Workspace workspace_init;

}  // namespace

TEST_CASE("synth writes a loadable dataset tree deterministically") {
  const fs::path& ds = dataset_dir();
  int skeletons = 0;
  for (auto it = fs::recursive_directory_iterator(ds); it != fs::recursive_directory_iterator();
       ++it)
    if (it->path().filename() == "skeleton.txt") ++skeletons;
  CHECK(skeletons == 16);  // 8 classes x 2

  fs::path again = kWork / "ds2";
  REQUIRE(run("synth --out " + q(again) + " --per-class 2 --length 10 --seed 5") == 0);
  CHECK(slurp(ds / "s1/approaching/v0000/skeleton.txt") ==
        slurp(again / "s1/approaching/v0000/skeleton.txt"));

  fs::path other_seed = kWork / "ds3";
  REQUIRE(run("synth --out " + q(other_seed) + " --per-class 2 --length 10 --seed 6") == 0);
  CHECK(slurp(ds / "s1/approaching/v0000/skeleton.txt") !=
        slurp(other_seed / "s1/approaching/v0000/skeleton.txt"));

  CHECK(run("synth --out " + q(kWork / "bad") + " --per-class 0") == 2);
  CHECK(run("synth --out " + q(kWork / "bad") + " --length 1") == 2);
}

TEST_CASE("ingest writes a manifest and flags corrupt files") {
  fs::path out = kWork / "ingest_out";
  REQUIRE(run("ingest --dataset " + q(dataset_dir()) + " --out " + q(out)) == 0);
  std::string manifest = slurp(out / "manifest.csv");
  CHECK(line_count(manifest) == 17);  // header + 16 rows
  CHECK(manifest.rfind("video_id,set_id,label,frames\n", 0) == 0);

  // empty directory: exit 2
  fs::path empty = kWork / "empty";
  fs::create_directories(empty);
  CHECK(run("ingest --dataset " + q(empty) + " --out " + q(kWork / "nope")) == 2);
  CHECK(run("ingest --dataset " + q(kWork / "missing_dir") + " --out " + q(kWork / "nope")) == 2);

  // one corrupt skeleton: manifest of the remainder plus a warning file
  fs::path broken = kWork / "broken_ds";
  fs::create_directories(broken / "s1/punching/v0");
  std::ofstream(broken / "s1/punching/v0/skeleton.txt") << "1,2,junk\n";
  fs::create_directories(broken / "s1/hugging/v1");
  std::ofstream(broken / "s1/hugging/v1/skeleton.txt")
      << slurp(dataset_dir() / "s1/approaching/v0000/skeleton.txt");
  fs::path bout = kWork / "broken_out";
  REQUIRE(run("ingest --dataset " + q(broken) + " --out " + q(bout) + " 2>/dev/null") == 0);
  CHECK(line_count(slurp(bout / "manifest.csv")) == 2);
  CHECK(slurp(bout / "warnings.txt").find("punching") != std::string::npos);
}

TEST_CASE("evaluate produces byte-identical reports for identical seeds") {
  fs::path a = kWork / "eval_a", b = kWork / "eval_b";
  std::string common = "evaluate --dataset " + q(dataset_dir()) +
                       " --features XY,DRJ --anchors 7 --seed 11 --jobs 2 --out ";
  REQUIRE(run(common + q(a) + " > /dev/null") == 0);
  REQUIRE(run(common + q(b) + " > /dev/null") == 0);
  for (const char* f : {"report.txt", "report.csv", "confusion.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK_FALSE(slurp(a / f).empty());
  }
  CHECK(slurp(a / "report.txt").find("whole-sequence") != std::string::npos);
  CHECK(slurp(a / "report.csv").find("seed,11") != std::string::npos);
}

TEST_CASE("evaluate validates config before running") {
  fs::path err = kWork / "stderr.txt";
  std::string base = "evaluate --dataset " + q(dataset_dir()) + " --out " + q(kWork / "nope");
  CHECK(run(base + " --gamma 0 2> " + q(err)) == 2);
  CHECK(slurp(err).find("gamma") != std::string::npos);
  CHECK(run(base + " --c -1 2> " + q(err)) == 2);
  CHECK(slurp(err).find("c:") != std::string::npos);
  CHECK(run(base + " --features XY,BOGUS 2> " + q(err)) == 2);
  CHECK(slurp(err).find("BOGUS") != std::string::npos);
  CHECK(run(base + " --protocol sideways 2> " + q(err)) == 2);
  CHECK(run("evaluate --dataset " + q(kWork / "missing_dir") + " 2> " + q(err)) == 2);
  CHECK(slurp(err).find("dataset") != std::string::npos);
  CHECK(run("evaluate 2> " + q(err)) == 2);  // --dataset is required
}

TEST_CASE("per-frame protocol runs from the CLI") {
  fs::path out = kWork / "eval_pf";
  REQUIRE(run("evaluate --dataset " + q(dataset_dir()) +
              " --protocol per-frame --window 9 --seed 11 --out " + q(out) + " > /dev/null") == 0);
  CHECK(slurp(out / "report.txt").find("per-frame") != std::string::npos);
}

TEST_CASE("config files supply defaults and flags override them") {
  fs::path cfg = kWork / "run.ini";
  std::ofstream(cfg) << "[evaluate]\n"
                     << "dataset=" << dataset_dir().string() << "\n"
                     << "anchors=7\nseed=11\nfeatures=\"XY,DRJ\"\njobs=2\n";
  fs::path out = kWork / "eval_cfg";
  REQUIRE(run("evaluate --config " + q(cfg) + " --out " + q(out) + " > /dev/null") == 0);
  // identical settings as eval_a, so identical reports
  CHECK(slurp(out / "report.csv") == slurp(kWork / "eval_a" / "report.csv"));

  // a flag overrides its config key
  fs::path err = kWork / "stderr2.txt";
  CHECK(run("evaluate --config " + q(cfg) + " --gamma 0 --out " + q(kWork / "nope") + " 2> " +
            q(err)) == 2);
  CHECK(slurp(err).find("gamma") != std::string::npos);
}

TEST_CASE("sweep emits the standard 12 rows by default") {
  fs::path out = kWork / "sweep_out";
  REQUIRE(run("sweep --dataset " + q(dataset_dir()) + " --window 5 --anchors 7 --seed 11 --out " +
              q(out) + " > /dev/null") == 0);
  std::string csv = slurp(out / "sweep.csv");
  CHECK(line_count(csv) == 13);  // header + 12 combos
  CHECK(csv.find("XY+DRJ+DOJ+JA+AD+VEL,") != std::string::npos);

  fs::path custom = kWork / "sweep_custom";
  REQUIRE(run("sweep --dataset " + q(dataset_dir()) +
              " --combos 'XY;DRJ,JA' --window 5 --anchors 7 --seed 11 --out " + q(custom) +
              " > /dev/null") == 0);
  std::string small = slurp(custom / "sweep.csv");
  CHECK(line_count(small) == 3);

  fs::path again = kWork / "sweep_custom2";
  REQUIRE(run("sweep --dataset " + q(dataset_dir()) +
              " --combos 'XY;DRJ,JA' --window 5 --anchors 7 --seed 11 --out " + q(again) +
              " > /dev/null") == 0);
  CHECK(slurp(custom / "sweep.csv") == slurp(again / "sweep.csv"));
}

TEST_CASE("train persists a model that loads back") {
  fs::path out = kWork / "train_out";
  REQUIRE(run("train --dataset " + q(dataset_dir()) +
              " --features XY --anchors 7 --export-samples --out " + q(out) + " > /dev/null") ==
          0);
  std::ifstream in(out / "model.txt");
  REQUIRE(in.good());
  duet::MulticlassModel m = duet::load_model(in);
  CHECK(m.classes.size() == 8);
  CHECK(m.binaries.size() == 28);
  CHECK(m.feature_dim == 7 * 48);

  std::string samples = slurp(out / "samples.csv");
  CHECK(line_count(samples) == 17);  // header + 16 sequences
  CHECK(samples.rfind("f0.xy.p1.head.x,", 0) == 0);
}

TEST_CASE("track follows a detections file and names the two persons") {
  // two walkers on parallel lines, 640x480 frame
  fs::path dets = kWork / "dets.json";
  {
    std::ofstream out(dets);
    out << "{\"width\":640,\"height\":480,\"frames\":[";
    for (int t = 0; t < 30; ++t) {
      double ax = 64 + 3 * t, bx = 576 - 3 * t;
      out << (t ? "," : "") << "{\"index\":" << t << ",\"detections\":[[" << ax - 20 << ",124,"
          << ax + 20 << ",236,0.9],[" << bx - 20 << ",304," << bx + 20 << ",416,0.8]]}";
    }
    out << "]}";
  }
  fs::path out = kWork / "track_out";
  REQUIRE(run("track --detections " + q(dets) + " --out " + q(out) + " > /dev/null") == 0);
  std::string tracks = slurp(out / "tracks.json");
  CHECK(tracks.find("\"person1\"") != std::string::npos);
  CHECK(tracks.find("\"person2\"") != std::string::npos);
  CHECK(tracks.find("confirmed") != std::string::npos);

  // byte-identical rerun
  fs::path out2 = kWork / "track_out2";
  REQUIRE(run("track --detections " + q(dets) + " --out " + q(out2) + " > /dev/null") == 0);
  CHECK(slurp(out / "tracks.json") == slurp(out2 / "tracks.json"));

  // all-empty detections: not enough persons
  fs::path none = kWork / "dets_none.json";
  std::ofstream(none) << R"({"width":640,"height":480,"frames":[{"index":0,"detections":[]}]})";
  fs::path err = kWork / "stderr3.txt";
  CHECK(run("track --detections " + q(none) + " --out " + q(kWork / "nope") + " 2> " + q(err)) ==
        1);
  CHECK(slurp(err).find("not enough persons") != std::string::npos);

  CHECK(run("track --detections " + q(dets) + " --gate 0 --out " + q(kWork / "nope") +
            " 2> /dev/null") == 2);
  CHECK(run("track --detections " + q(kWork / "missing.json") + " 2> /dev/null") == 2);

  fs::path malformed = kWork / "dets_bad.json";
  std::ofstream(malformed) << R"({"width":640,"frames":[]})";
  CHECK(run("track --detections " + q(malformed) + " 2> /dev/null") == 1);
}
