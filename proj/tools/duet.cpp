// duet: two-person interaction recognition from 2D pose sequences.
//
// Subcommands: ingest, synth, track, train, evaluate, sweep.
// Exit codes: 0 success, 1 runtime failure, 2 config/validation failure.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "duet/duet.hpp"

namespace fs = std::filesystem;
using namespace duet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

// Per-component seeds derived from the single run seed.
constexpr std::uint64_t kSeedStreamFolds = 1;
constexpr std::uint64_t kSeedStreamSynth = 2;

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    writer(out);
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

struct RunOptions {
  std::string dataset;
  std::string out = "duet-out";
  std::string protocol = "whole-sequence";
  int window = 9;
  int anchors = 13;
  int stride = 1;
  std::string features = "XY";
  double c = 8.0;
  double gamma = 0.0625;
  double tol = 1e-3;
  long max_passes = 1000000;
  std::uint64_t seed = 0;
  int jobs = 1;
};

void add_run_options(CLI::App* cmd, RunOptions& o, bool need_dataset) {
  auto* ds = cmd->add_option("--dataset", o.dataset, "dataset root directory");
  if (need_dataset) ds->required();
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--protocol", o.protocol, "evaluation protocol")
      ->check(CLI::IsMember({"per-frame", "whole-sequence"}));
  cmd->add_option("--window", o.window, "frames per window (per-frame protocol)");
  cmd->add_option("--anchors", o.anchors, "anchor count (whole-sequence protocol)");
  cmd->add_option("--stride", o.stride, "window stride in frames");
  cmd->add_option("--features", o.features, "comma-separated kinds: XY,DRJ,DOJ,JA,AD,VEL");
  cmd->add_option("--c", o.c, "soft-margin parameter C");
  cmd->add_option("--gamma", o.gamma, "RBF kernel gamma");
  cmd->add_option("--tol", o.tol, "SMO KKT tolerance");
  cmd->add_option("--max-passes", o.max_passes, "SMO iteration bound");
  cmd->add_option("--seed", o.seed, "run seed; all component seeds derive from it");
  cmd->add_option("--jobs", o.jobs, "parallel workers for folds and sweep rows");
}

/// Returns a message naming the offending field, or empty when valid.
/// Runs before any computation.
std::string validate_run_options(const RunOptions& o, bool need_dataset,
                                 std::vector<FeatureKind>* kinds_out) {
  if (!(o.gamma > 0)) return "gamma: must be > 0";
  if (!(o.c > 0)) return "c: must be > 0";
  if (!(o.tol > 0)) return "tol: must be > 0";
  if (o.max_passes < 1) return "max-passes: must be >= 1";
  if (o.window < 1) return "window: must be >= 1";
  if (o.anchors < 2) return "anchors: must be >= 2";
  if (o.stride < 1) return "stride: must be >= 1";
  if (o.jobs < 1) return "jobs: must be >= 1";
  if (need_dataset && !fs::is_directory(o.dataset))
    return "dataset: not a directory: " + o.dataset;

  std::vector<FeatureKind> kinds;
  std::stringstream ss(o.features);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    auto k = feature_kind_from_name(tok);
    if (!k) return "features: unknown kind '" + tok + "'";
    kinds.push_back(*k);
  }
  if (kinds.empty()) return "features: must name at least one kind";
  if (kinds_out) *kinds_out = std::move(kinds);
  return "";
}

FeatureConfig make_feature_config(const RunOptions& o, const std::vector<FeatureKind>& kinds) {
  FeatureConfig fc;
  fc.kinds = kinds;
  fc.window_size = o.window;
  fc.anchors = o.anchors;
  fc.stride = o.stride;
  return fc;
}

SvcConfig make_svc_config(const RunOptions& o) {
  SvcConfig svc;
  svc.c = o.c;
  svc.kernel.gamma = o.gamma;
  svc.tol = o.tol;
  svc.max_passes = o.max_passes;
  svc.seed = o.seed;
  return svc;
}

EvalProtocol make_protocol(const RunOptions& o) {
  return o.protocol == "per-frame" ? EvalProtocol::per_frame(o.window)
                                   : EvalProtocol::whole_sequence(o.anchors);
}

Dataset load_or_fail(const std::string& root) {
  Dataset ds = load_sbu_dataset(root);
  for (const std::string& w : ds.warnings) std::cerr << "warning: " << w << '\n';
  return ds;
}

int run_ingest(const RunOptions& o) {
  Dataset ds = load_or_fail(o.dataset);
  if (ds.sequences.empty()) {
    if (ds.warnings.empty()) {
      std::cerr << "error: no sequences found under " << o.dataset << '\n';
      return kExitConfig;
    }
    std::cerr << "error: every sequence failed to load\n";
    return kExitRuntime;
  }
  write_atomic(fs::path(o.out) / "manifest.csv", [&](std::ostream& out) {
    out << "video_id,set_id,label,frames\n";
    for (const DatasetEntry& e : ds.entries)
      out << e.video_id << ',' << e.set_id << ',' << label_name(e.label) << ',' << e.frame_count
          << '\n';
  });
  if (!ds.warnings.empty())
    write_atomic(fs::path(o.out) / "warnings.txt", [&](std::ostream& out) {
      for (const std::string& w : ds.warnings) out << w << '\n';
    });
  std::cout << "manifest: " << ds.entries.size() << " sequences, " << ds.warnings.size()
            << " warnings -> " << (fs::path(o.out) / "manifest.csv").string() << '\n';
  return kExitOk;
}

int run_synth(const RunOptions& o, int per_class, int length) {
  if (per_class < 1) {
    std::cerr << "error: per-class: must be >= 1\n";
    return kExitConfig;
  }
  if (length < 2) {
    std::cerr << "error: length: must be >= 2\n";
    return kExitConfig;
  }
  auto dataset =
      make_synthetic_dataset(per_class, length, detail::derive_seed(o.seed, kSeedStreamSynth));
  int idx = 0;
  for (const InteractionSequence& seq : dataset) {
    char video[16];
    std::snprintf(video, sizeof(video), "v%04d", idx++);
    fs::path dir = fs::path(o.out) / ("s" + std::to_string(seq.set_id)) /
                   std::string(label_name(seq.label)) / video;
    write_atomic(dir / "skeleton.txt", [&](std::ostream& out) { serialize_sbu_skeleton(seq, out); });
  }
  std::cout << "wrote " << dataset.size() << " sequences under " << o.out << '\n';
  return kExitOk;
}

int run_track(const RunOptions& o, const std::string& detections_path, const TrackerConfig& tcfg,
              double min_score) {
  std::ifstream in(detections_path);
  if (!in) {
    std::cerr << "error: detections: cannot open " << detections_path << '\n';
    return kExitConfig;
  }
  DetectionFile file = parse_detections(in);
  TrackingRun run = track_detection_file(file, tcfg, min_score);
  if (!run.persons) {
    std::cerr << "error: not enough persons: fewer than 2 tracks were ever confirmed\n";
    return kExitRuntime;
  }
  write_atomic(fs::path(o.out) / "tracks.json",
               [&](std::ostream& out) { write_tracks_json(run, out); });
  std::cout << "tracked " << run.frames.size() << " frames; person1=track " << run.persons->first
            << ", person2=track " << run.persons->second << " -> "
            << (fs::path(o.out) / "tracks.json").string() << '\n';
  return kExitOk;
}

/// Builds one protocol's samples for every sequence; used by train.
std::vector<WindowSample> collect_samples(const std::vector<InteractionSequence>& dataset,
                                          const EvalProtocol& protocol, const FeatureConfig& fc,
                                          std::vector<std::string>& skipped) {
  std::vector<WindowSample> samples;
  for (const InteractionSequence& seq : dataset) {
    if (protocol.kind == EvalProtocol::Kind::PerFrame) {
      auto w = per_frame_windows(seq, fc);
      if (w.empty())
        skipped.push_back(seq.video_id + ": shorter than window");
      else
        samples.insert(samples.end(), w.begin(), w.end());
    } else {
      if (seq.frames.size() < 2)
        skipped.push_back(seq.video_id + ": fewer than 2 frames");
      else
        samples.push_back(whole_sequence_sample(seq, fc));
    }
  }
  return samples;
}

int run_train(const RunOptions& o, const std::vector<FeatureKind>& kinds,
              bool export_samples) {
  Dataset ds = load_or_fail(o.dataset);
  if (ds.sequences.empty()) {
    std::cerr << "error: no sequences found under " << o.dataset << '\n';
    return kExitConfig;
  }
  EvalProtocol protocol = make_protocol(o);
  FeatureConfig fc = make_feature_config(o, kinds);
  if (protocol.kind == EvalProtocol::Kind::PerFrame)
    fc.window_size = protocol.window;
  else
    fc.anchors = protocol.anchors;

  std::vector<std::string> skipped;
  auto samples = collect_samples(ds.sequences, protocol, fc, skipped);
  for (const std::string& s : skipped) std::cerr << "skipped: " << s << '\n';
  if (samples.empty()) {
    std::cerr << "error: no samples could be extracted\n";
    return kExitRuntime;
  }
  if (export_samples) {
    int frames_per_sample =
        protocol.kind == EvalProtocol::Kind::PerFrame ? fc.window_size : fc.anchors;
    write_atomic(fs::path(o.out) / "samples.csv", [&](std::ostream& out) {
      write_samples_csv(out, samples, fc, frames_per_sample);
    });
  }
  std::vector<std::vector<double>> x;
  std::vector<InteractionLabel> y;
  for (WindowSample& s : samples) {
    x.push_back(std::move(s.values));
    y.push_back(s.label);
  }
  MulticlassModel model = train_multiclass(x, y, make_svc_config(o));
  for (const std::string& w : model.warnings) std::cerr << "warning: " << w << '\n';
  write_atomic(fs::path(o.out) / "model.txt", [&](std::ostream& out) { save_model(model, out); });
  std::cout << "trained on " << x.size() << " samples (" << model.classes.size() << " classes, "
            << model.binaries.size() << " binary models) -> "
            << (fs::path(o.out) / "model.txt").string() << '\n';
  return kExitOk;
}

std::vector<int> dataset_set_ids() {
  std::vector<int> ids(21);
  for (int i = 0; i < 21; ++i) ids[i] = i + 1;
  return ids;
}

int run_evaluate(const RunOptions& o, const std::vector<FeatureKind>& kinds) {
  Dataset ds = load_or_fail(o.dataset);
  if (ds.sequences.empty()) {
    std::cerr << "error: no sequences found under " << o.dataset << '\n';
    return kExitConfig;
  }
  FoldSplit split = split_folds(dataset_set_ids(), detail::derive_seed(o.seed, kSeedStreamFolds));
  EvalReport report = run_protocol(ds.sequences, make_protocol(o), make_feature_config(o, kinds),
                                   make_svc_config(o), split, o.jobs);
  report.seed = o.seed;

  write_atomic(fs::path(o.out) / "report.txt",
               [&](std::ostream& out) { write_report_text(report, out); });
  write_atomic(fs::path(o.out) / "report.csv",
               [&](std::ostream& out) { write_report_csv(report, out); });
  write_atomic(fs::path(o.out) / "confusion.csv",
               [&](std::ostream& out) { write_confusion_csv(report.confusion, out); });

  std::cout << "macro accuracy:   " << report.macro_accuracy << '\n';
  std::cout << "overall accuracy: " << report.overall_accuracy << '\n';
  for (const std::string& s : report.skipped) std::cout << "skipped: " << s << '\n';
  std::cout << "reports -> " << o.out << '\n';
  return kExitOk;
}

int run_sweep(const RunOptions& o, const std::vector<FeatureKind>& kinds,
              const std::string& combos_arg) {
  (void)kinds;
  Dataset ds = load_or_fail(o.dataset);
  if (ds.sequences.empty()) {
    std::cerr << "error: no sequences found under " << o.dataset << '\n';
    return kExitConfig;
  }
  std::vector<std::vector<FeatureKind>> combos;
  if (combos_arg.empty()) {
    combos = default_sweep_combos();
  } else {
    std::stringstream ss(combos_arg);
    std::string group;
    while (std::getline(ss, group, ';')) {
      std::vector<FeatureKind> combo;
      std::stringstream gs(group);
      std::string tok;
      while (std::getline(gs, tok, ',')) {
        auto k = feature_kind_from_name(tok);
        if (!k) {
          std::cerr << "error: combos: unknown kind '" << tok << "'\n";
          return kExitConfig;
        }
        combo.push_back(*k);
      }
      if (!combo.empty()) combos.push_back(std::move(combo));
    }
    if (combos.empty()) {
      std::cerr << "error: combos: no combinations given\n";
      return kExitConfig;
    }
  }

  FoldSplit split = split_folds(dataset_set_ids(), detail::derive_seed(o.seed, kSeedStreamFolds));
  auto rows = sweep(ds.sequences, combos, EvalProtocol::per_frame(o.window),
                    EvalProtocol::whole_sequence(o.anchors), make_feature_config(o, {FeatureKind::XY}),
                    make_svc_config(o), split, o.jobs);

  write_atomic(fs::path(o.out) / "sweep.csv", [&](std::ostream& out) { write_sweep_csv(rows, out); });
  std::ostringstream table;
  write_sweep_csv(rows, table);
  std::cout << table.str();
  std::cout << "sweep -> " << (fs::path(o.out) / "sweep.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-person interaction recognition from 2D pose sequences"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file; command-line flags override it");

  RunOptions opt;

  auto* ingest = app.add_subcommand("ingest", "scan a dataset tree and write a manifest");
  {
    RunOptions& o = opt;
    ingest->add_option("--dataset", o.dataset, "dataset root directory")->required();
    ingest->add_option("--out", o.out, "output directory");
  }

  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset in the dataset layout");
  int per_class = 10;
  int length = 40;
  synth->add_option("--out", opt.out, "output directory");
  synth->add_option("--per-class", per_class, "sequences per class");
  synth->add_option("--length", length, "frames per sequence");
  synth->add_option("--seed", opt.seed, "run seed");

  auto* track = app.add_subcommand("track", "track persons through a detections file");
  std::string detections_path;
  TrackerConfig tracker_cfg;
  double min_score = 0.0;
  track->add_option("--detections", detections_path, "detections JSON file")->required();
  track->add_option("--out", opt.out, "output directory");
  track->add_option("--gate", tracker_cfg.gate, "association gate (normalized distance)");
  track->add_option("--confirm-hits", tracker_cfg.confirm_hits, "hits to confirm a track");
  track->add_option("--max-misses", tracker_cfg.max_misses, "misses before a track is dropped");
  track->add_option("--process-noise-pos", tracker_cfg.process_noise_pos, "position process noise");
  track->add_option("--process-noise-vel", tracker_cfg.process_noise_vel, "velocity process noise");
  track->add_option("--measurement-noise", tracker_cfg.measurement_noise, "measurement noise");
  track->add_option("--min-score", min_score, "drop detections scoring below this");

  auto* train = app.add_subcommand("train", "train a model on a whole dataset and persist it");
  bool export_samples = false;
  add_run_options(train, opt, true);
  train->add_flag("--export-samples", export_samples,
                  "also write the extracted feature vectors as samples.csv");

  auto* evaluate = app.add_subcommand("evaluate", "set-level 5-fold cross-validation");
  add_run_options(evaluate, opt, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "feature-combination sweep over both protocols");
  std::string combos_arg;
  add_run_options(sweep_cmd, opt, true);
  sweep_cmd->add_option("--combos", combos_arg,
                        "semicolon-separated feature combos, e.g. 'XY;XY,DRJ' (default: the 12 "
                        "standard rows)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*ingest) {
      if (!fs::is_directory(opt.dataset)) {
        std::cerr << "error: dataset: not a directory: " << opt.dataset << '\n';
        return kExitConfig;
      }
      return run_ingest(opt);
    }
    if (*synth) return run_synth(opt, per_class, length);
    if (*track) {
      try {
        tracker_cfg.validate();
      } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
      }
      if (min_score < 0 || min_score > 1) {
        std::cerr << "error: min-score: must lie in [0,1]\n";
        return kExitConfig;
      }
      return run_track(opt, detections_path, tracker_cfg, min_score);
    }

    std::vector<FeatureKind> kinds;
    bool need_dataset = true;
    std::string err = validate_run_options(opt, need_dataset, &kinds);
    if (!err.empty()) {
      std::cerr << "error: " << err << '\n';
      return kExitConfig;
    }
    if (*train) return run_train(opt, kinds, export_samples);
    if (*evaluate) return run_evaluate(opt, kinds);
    if (*sweep_cmd) return run_sweep(opt, kinds, combos_arg);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
