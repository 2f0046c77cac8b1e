// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. The corpus-reproduction
// criterion is skipped unless DUET_SBU_ROOT points at a dataset tree.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "duet/duet.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace duet;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool skipped = false;
  std::vector<std::string> failures;

  static Outcome skip() {
    Outcome o;
    o.skipped = true;
    return o;
  }
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// --- criterion 1: Hungarian vs brute force, 1000 matrices up to 7x7 -------

Outcome hungarian_oracle() {
  Outcome o;
  detail::Rng rng(1001);
  for (int iter = 0; iter < 1000; ++iter) {
    int n = 1 + static_cast<int>(rng.below(7));
    int m = 1 + static_cast<int>(rng.below(7));
    std::vector<std::vector<double>> cost(n, std::vector<double>(m));
    for (auto& row : cost)
      for (auto& v : row) v = rng.uniform01();
    auto asg = hungarian(cost);
    double got = 0;
    for (auto [r, c] : asg) got += cost[r][c];
    double want = oracle::brute_force_assignment_cost(cost);
    if (got != want) {
      o.failures.push_back("case " + std::to_string(iter) + ": cost " + fmt(got) +
                           " != brute force " + fmt(want));
      return o;
    }
  }
  return o;
}

// --- criterion 2: the analytic two-point SMO solution ----------------------

Outcome smo_analytic() {
  Outcome o;
  SvcConfig cfg;  // C = 8, gamma = 0.0625
  BinaryModel m = train_binary({{0.0}, {1.0}}, {1, -1}, cfg);
  o.expect(m.support_vectors.size() == 2, "expected 2 support vectors");
  if (m.support_vectors.size() == 2) {
    o.expect(std::abs(std::abs(m.coef[0]) - 8.0) <= 1e-9, "alpha1 != 8");
    o.expect(std::abs(std::abs(m.coef[1]) - 8.0) <= 1e-9, "alpha2 != 8");
  }
  o.expect(std::abs(m.bias) <= 1e-6, "|b| > 1e-6 (" + fmt(m.bias) + ")");
  double expected = 8.0 * (1.0 - std::exp(-0.0625));
  double dec = decision_value(m, {0.0}, cfg.kernel.gamma);
  o.expect(std::abs(dec - expected) <= 1e-6,
           "decision at 0: " + fmt(dec) + " vs " + fmt(expected));
  return o;
}

// --- criterion 3: SMO vs projected-gradient reference ----------------------

Outcome smo_oracle() {
  Outcome o;
  detail::Rng rng(20260808);
  SvcConfig cfg;
  cfg.tol = 1e-6;
  for (int run = 0; run < 50; ++run) {
    int n = 5 + static_cast<int>(rng.below(26));
    int d = 1 + static_cast<int>(rng.below(5));
    std::vector<std::vector<double>> x;
    std::vector<int> y;
    for (int i = 0; i < n; ++i) {
      std::vector<double> row(d);
      for (double& v : row) v = rng.uniform(-1.0, 1.0);
      x.push_back(std::move(row));
      y.push_back(rng.below(2) ? 1 : -1);
    }
    y[0] = 1;
    y[1] = -1;
    cfg.c = rng.below(2) ? 8.0 : 1.0;
    cfg.kernel.gamma = rng.below(2) ? 0.0625 : 0.5;

    BinaryModel m = train_binary(x, y, cfg);
    o.expect(m.converged, "run " + std::to_string(run) + ": SMO did not converge");

    double coef_sum = 0;
    for (double c : m.coef) {
      o.expect(std::abs(c) <= cfg.c + 1e-9, "run " + std::to_string(run) + ": alpha above C");
      coef_sum += c;
    }
    o.expect(std::abs(coef_sum) <= 1e-6,
             "run " + std::to_string(run) + ": sum alpha_i y_i = " + fmt(coef_sum));

    std::vector<double> yd(y.begin(), y.end());
    auto ref = oracle::pgd_csvc_dual(x, yd, cfg.c, cfg.kernel.gamma, 60000);
    double diff = std::abs(m.dual_objective - ref.objective);
    o.expect(diff <= 1e-3, "run " + std::to_string(run) + ": objective gap " + fmt(diff));
    if (!o.failures.empty()) return o;
  }
  return o;
}

// --- criterion 4: feature invariant property suites, 1000 cases each -------

PoseFrame random_frame(detail::Rng& rng, int index, double lo = 0.0, double hi = 1.0) {
  PoseFrame f;
  f.frame_index = index;
  for (PersonPose* p : {&f.person1, &f.person2})
    for (auto& pt : p->joints) pt = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return f;
}

Outcome feature_invariants() {
  Outcome o;
  detail::Rng rng(44);
  const int dims[] = {48, 12, 24, 22, 24, 48};

  for (int iter = 0; iter < 1000 && o.failures.empty(); ++iter) {
    // dimensional contracts
    PoseFrame f = random_frame(rng, 0);
    PoseFrame g = random_frame(rng, 1);
    o.expect(xy_features(f).size() == 48, "xy dim");
    o.expect(drj(f).size() == 12, "drj dim");
    o.expect(doj(f).size() == 24, "doj dim");
    o.expect(ja(f).size() == 22, "ja dim");
    o.expect(ad(f).size() == 24, "ad dim");
    o.expect(vel(f, g).size() == 48, "vel dim");

    FeatureConfig fc;
    fc.kinds.clear();
    int per_frame = 0;
    for (int k = 0; k < kNumFeatureKinds; ++k)
      if (rng.below(2)) {
        fc.kinds.push_back(static_cast<FeatureKind>(k));
        per_frame += dims[k];
      }
    if (fc.kinds.empty()) {
      fc.kinds = {FeatureKind::AD};
      per_frame = 24;
    }
    fc.window_size = 1 + static_cast<int>(rng.below(4));
    fc.anchors = 2 + static_cast<int>(rng.below(8));
    InteractionSequence seq;
    seq.label = InteractionLabel::Kicking;
    int t = fc.window_size + 1 + static_cast<int>(rng.below(4));
    for (int i = 0; i < t; ++i) seq.frames.push_back(random_frame(rng, i));
    for (const auto& s : per_frame_windows(seq, fc))
      o.expect(s.values.size() == static_cast<std::size_t>(fc.window_size) * per_frame,
               "window sample dim");
    o.expect(whole_sequence_sample(seq, fc).values.size() ==
                 static_cast<std::size_t>(fc.anchors) * per_frame,
             "anchor sample dim");
  }

  detail::Rng rng2(45);
  for (int iter = 0; iter < 1000 && o.failures.empty(); ++iter) {
    // translation invariance
    PoseFrame f = random_frame(rng2, 0, 0.2, 0.8);
    PoseFrame f2 = random_frame(rng2, 1, 0.2, 0.8);
    double dx = rng2.uniform(-0.15, 0.15);
    double dy = rng2.uniform(-0.15, 0.15);
    auto shift = [&](PoseFrame h) {
      for (PersonPose* p : {&h.person1, &h.person2})
        for (auto& pt : p->joints) pt = {pt.x + dx, pt.y + dy};
      return h;
    };
    PoseFrame gshift = shift(f);
    PoseFrame g2 = shift(f2);
    auto same = [&](const std::vector<double>& a, const std::vector<double>& b,
                    const char* what) {
      for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-12) {
          o.failures.push_back(std::string(what) + " not translation invariant");
          return;
        }
    };
    same(drj(f), drj(gshift), "drj");
    same(doj(f), doj(gshift), "doj");
    same(ad(f), ad(gshift), "ad");
    same(ja(f), ja(gshift), "ja");
    same(vel(f, f2), vel(gshift, g2), "vel");
    auto a = xy_features(f), b = xy_features(gshift);
    for (std::size_t i = 0; i < a.size(); i += 2)
      if (std::abs(b[i] - a[i] - dx) > 1e-12 || std::abs(b[i + 1] - a[i + 1] - dy) > 1e-12) {
        o.failures.push_back("xy did not shift by (dx, dy)");
        break;
      }

    // DRJ-AD consistency
    auto d = drj(f);
    auto abs_diff = ad(f);
    for (int j = 0; j < 12; ++j)
      if (std::abs(d[j] - std::hypot(abs_diff[2 * j], abs_diff[2 * j + 1])) > 1e-12) {
        o.failures.push_back("drj != hypot(ad)");
        break;
      }

    // VEL antisymmetry under pose exchange
    PoseFrame p1 = random_frame(rng2, 0), p2 = random_frame(rng2, 1);
    PoseFrame q1 = p2, q2 = p1;
    q1.frame_index = 0;
    q2.frame_index = 1;
    auto v = vel(p1, p2), w = vel(q1, q2);
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != -w[i]) {
        o.failures.push_back("vel not antisymmetric");
        break;
      }
  }

  detail::Rng rng3(46);
  for (int iter = 0; iter < 1000 && o.failures.empty(); ++iter) {
    // anchor_frames boundary laws
    int t = 2 + static_cast<int>(rng3.below(300));
    int a = 2 + static_cast<int>(rng3.below(40));
    auto idx = anchor_frames(t, a);
    o.expect(idx.size() == static_cast<std::size_t>(a), "anchor count");
    o.expect(idx.front() == 0, "anchors start at 0");
    o.expect(idx.back() == t - 1, "anchors end at t-1");
    for (std::size_t k = 1; k < idx.size(); ++k)
      o.expect(idx[k] >= idx[k - 1], "anchors non-decreasing");
  }
  return o;
}

// --- criterion 5: tracking scenario + Kalman residual ----------------------

Outcome tracking_scenario() {
  Outcome o;
  TrackerConfig cfg;
  Tracker tracker(cfg);
  detail::Rng drop(777);
  auto target_a = [](int t) { return Point{0.10 + 0.006 * t, 0.30}; };
  auto target_b = [](int t) { return Point{0.90 - 0.006 * t, 0.70}; };

  std::map<int, int> identity;
  int swaps = 0;
  std::vector<Track> confirmed;
  for (int t = 0; t < 100; ++t) {
    std::vector<Point> dets;
    if (drop.uniform01() >= 0.1) dets.push_back(target_a(t));
    if (drop.uniform01() >= 0.1) dets.push_back(target_b(t));
    if (t % 2 == 1) std::reverse(dets.begin(), dets.end());
    confirmed = tracker.step(t, dets);
    for (const Track& tr : confirmed) {
      int nearest =
          distance(tr.position(), target_a(t)) < distance(tr.position(), target_b(t)) ? 0 : 1;
      auto [it, inserted] = identity.emplace(tr.id, nearest);
      if (!inserted && it->second != nearest) ++swaps;
    }
  }
  o.expect(confirmed.size() == 2,
           "expected exactly 2 confirmed tracks, got " + std::to_string(confirmed.size()));
  o.expect(swaps == 0, std::to_string(swaps) + " identity swaps");

  Tracker clean(cfg);
  double residual = 1.0;
  for (int t = 0; t <= 20; ++t) {
    Point truth{0.2 + 0.005 * t, 0.4 + 0.002 * t};
    auto c = clean.step(t, {truth});
    if (t == 20 && !c.empty()) residual = distance(c[0].position(), truth);
  }
  o.expect(residual < 1e-6, "Kalman residual " + fmt(residual) + " after 20 noiseless frames");
  return o;
}

// --- criterion 6: end-to-end synthetic recognition --------------------------

Outcome end_to_end_synthetic() {
  Outcome o;
  auto dataset = make_synthetic_dataset(10, 40, 20260808);
  std::vector<int> ids(21);
  std::iota(ids.begin(), ids.end(), 1);
  FoldSplit split = split_folds(ids, 42);
  FeatureConfig fc;
  fc.kinds = {FeatureKind::XY};
  SvcConfig svc;

  EvalReport r = run_protocol(dataset, EvalProtocol::whole_sequence(13), fc, svc, split, 2);
  o.expect(r.macro_accuracy >= 0.95, "macro accuracy " + fmt(r.macro_accuracy) + " < 0.95");

  EvalReport shuffled = run_protocol(permute_labels(dataset, 99), EvalProtocol::whole_sequence(13),
                                     fc, svc, split, 2);
  o.expect(shuffled.macro_accuracy >= 0.02 && shuffled.macro_accuracy <= 0.30,
           "shuffled-label control " + fmt(shuffled.macro_accuracy) + " outside [0.02, 0.30]");
  return o;
}

// --- criterion 7: corpus reproduction (requires DUET_SBU_ROOT) --------------

Outcome sbu_reproduction() {
  const char* root = std::getenv("DUET_SBU_ROOT");
  if (!root || !fs::is_directory(root)) return Outcome::skip();

  Outcome o;
  Dataset ds = load_sbu_dataset(root);
  if (ds.sequences.empty()) {
    o.failures.push_back("no sequences under " + std::string(root));
    return o;
  }
  std::vector<int> ids(21);
  std::iota(ids.begin(), ids.end(), 1);
  FoldSplit split = split_folds(ids, 1);
  FeatureConfig fc;
  SvcConfig svc;

  auto rows = sweep(ds.sequences, default_sweep_combos(), EvalProtocol::per_frame(9),
                    EvalProtocol::whole_sequence(13), fc, svc, split, 2);
  const SweepRow& xy = rows[0];
  const SweepRow& ja_row = rows[3];
  o.expect(xy.whole_macro >= 0.80,
           "XY whole-sequence macro " + fmt(xy.whole_macro) + " < 0.80");
  o.expect(xy.per_frame_macro >= 0.72,
           "XY per-frame macro " + fmt(xy.per_frame_macro) + " < 0.72");
  o.expect(ja_row.per_frame_macro < xy.per_frame_macro, "JA >= XY on the per-frame protocol");
  o.expect(ja_row.whole_macro < xy.whole_macro, "JA >= XY on the whole-sequence protocol");
  return o;
}

// --- criterion 8: byte-identical reports under a fixed seed -----------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome determinism() {
  Outcome o;
  fs::path work = fs::temp_directory_path() / "duet_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  std::string cli = DUET_CLI_PATH;
  auto sh = [](const std::string& cmd) { return WEXITSTATUS(std::system(cmd.c_str())); };

  fs::path ds = work / "ds";
  o.expect(sh(cli + " synth --out " + ds.string() +
              " --per-class 2 --length 12 --seed 9 > /dev/null") == 0,
           "synth failed");

  for (int round = 0; round < 2; ++round) {
    fs::path out = work / ("eval" + std::to_string(round));
    o.expect(sh(cli + " evaluate --dataset " + ds.string() + " --features XY,AD --anchors 7" +
                " --seed 33 --jobs 2 --out " + out.string() + " > /dev/null") == 0,
             "evaluate failed");
    fs::path sout = work / ("sweep" + std::to_string(round));
    o.expect(sh(cli + " sweep --dataset " + ds.string() + " --combos 'XY;DRJ' --window 5" +
                " --anchors 7 --seed 33 --jobs 2 --out " + sout.string() + " > /dev/null") == 0,
             "sweep failed");
  }
  for (const char* f : {"report.txt", "report.csv", "confusion.csv"}) {
    std::string a = slurp(work / "eval0" / f);
    o.expect(!a.empty() && a == slurp(work / "eval1" / f),
             std::string(f) + " differs between identical runs");
  }
  std::string s = slurp(work / "sweep0" / "sweep.csv");
  o.expect(!s.empty() && s == slurp(work / "sweep1" / "sweep.csv"),
           "sweep.csv differs between identical runs");
  fs::remove_all(work);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_seconds;  // 0 = no budget
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "Hungarian assignment matches the brute-force oracle (1000 matrices)", 10,
       hungarian_oracle},
      {2, "SMO reproduces the analytic two-point solution", 0, smo_analytic},
      {3, "SMO matches the projected-gradient reference (50 problems)", 60, smo_oracle},
      {4, "feature invariant property suites (1000 cases each)", 0, feature_invariants},
      {5, "two-target tracking with dropout; noiseless Kalman residual", 0, tracking_scenario},
      {6, "end-to-end synthetic recognition with shuffled-label control", 120,
       end_to_end_synthetic},
      {7, "corpus reproduction (set DUET_SBU_ROOT to enable)", 900, sbu_reproduction},
      {8, "byte-identical evaluate/sweep reports under a fixed seed", 0, determinism},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (!o.skipped && o.failures.empty() && c.budget_seconds > 0 && secs > c.budget_seconds)
      o.failures.push_back("runtime " + fmt(secs) + " s exceeds " + fmt(c.budget_seconds) + " s");

    char line[160];
    if (o.skipped) {
      std::snprintf(line, sizeof(line), "SKIP  criterion %d: %s", c.id, c.name);
      std::cout << line << '\n';
      continue;
    }
    std::snprintf(line, sizeof(line), "%s  criterion %d: %s (%.2f s)",
                  o.failures.empty() ? "PASS" : "FAIL", c.id, c.name, secs);
    std::cout << line << '\n';
    for (const std::string& f : o.failures) std::cout << "      - " << f << '\n';
    failures += !o.failures.empty();
  }
  return failures;
}
