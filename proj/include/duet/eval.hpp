#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <functional>
#include <mutex>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "duet/detail/rng.hpp"
#include "duet/features.hpp"
#include "duet/pose.hpp"
#include "duet/svm.hpp"

namespace duet {

/// Partition of the 21 corpus sets into 5 cross-validation folds
/// (sizes 5,4,4,4,4). A video is tested exactly once, and every video of a
/// set lands in the same fold.
struct FoldSplit {
  std::array<std::vector<int>, 5> folds;
  std::uint64_t seed = 0;
};

inline FoldSplit split_folds(std::vector<int> set_ids, std::uint64_t seed) {
  std::vector<int> sorted = set_ids;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.size() != 21)
    throw std::invalid_argument("split_folds: expected 21 set ids, got " +
                                std::to_string(sorted.size()));
  for (int i = 0; i < 21; ++i)
    if (sorted[i] != i + 1)
      throw std::invalid_argument("split_folds: set ids must be exactly 1..21 without duplicates");

  detail::Rng rng(seed);
  rng.shuffle(set_ids);
  FoldSplit split;
  split.seed = seed;
  const int sizes[5] = {5, 4, 4, 4, 4};
  std::size_t pos = 0;
  for (int f = 0; f < 5; ++f)
    for (int k = 0; k < sizes[f]; ++k) split.folds[f].push_back(set_ids[pos++]);
  return split;
}

struct EvalProtocol {
  enum class Kind { PerFrame, WholeSequence };
  Kind kind = Kind::WholeSequence;
  int window = 9;    // W, used by the per-frame protocol
  int anchors = 13;  // A, used by the whole-sequence protocol

  static EvalProtocol per_frame(int w) { return {Kind::PerFrame, w, 13}; }
  static EvalProtocol whole_sequence(int a) { return {Kind::WholeSequence, 9, a}; }

  std::string name() const {
    return kind == Kind::PerFrame ? "per-frame" : "whole-sequence";
  }

  void validate() const {
    if (window < 1) throw std::invalid_argument("EvalProtocol: window must be >= 1");
    if (anchors < 2) throw std::invalid_argument("EvalProtocol: anchors must be >= 2");
  }
};

struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kNumClasses>, kNumClasses> counts{};  // [truth][pred]

  void add(InteractionLabel truth, InteractionLabel pred) {
    counts[static_cast<int>(truth)][static_cast<int>(pred)] += 1;
  }
  void merge(const ConfusionMatrix& other) {
    for (int t = 0; t < kNumClasses; ++t)
      for (int p = 0; p < kNumClasses; ++p) counts[t][p] += other.counts[t][p];
  }
  std::uint64_t row_sum(int truth) const {
    std::uint64_t s = 0;
    for (std::uint64_t v : counts[truth]) s += v;
    return s;
  }
  std::uint64_t total() const {
    std::uint64_t s = 0;
    for (int t = 0; t < kNumClasses; ++t) s += row_sum(t);
    return s;
  }
  std::uint64_t trace() const {
    std::uint64_t s = 0;
    for (int t = 0; t < kNumClasses; ++t) s += counts[t][t];
    return s;
  }
};

inline ConfusionMatrix confusion(const std::vector<InteractionLabel>& truths,
                                 const std::vector<InteractionLabel>& predictions) {
  if (truths.size() != predictions.size())
    throw std::invalid_argument("confusion: truth/prediction lengths differ");
  ConfusionMatrix m;
  for (std::size_t i = 0; i < truths.size(); ++i) m.add(truths[i], predictions[i]);
  return m;
}

struct FoldReport {
  int fold_index = 0;
  std::vector<int> test_sets;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
  ConfusionMatrix confusion;
};

struct EvalReport {
  std::array<double, kNumClasses> per_class_accuracy{};
  double macro_accuracy = 0.0;    // headline: mean of the per-class accuracies
  double overall_accuracy = 0.0;  // trace / total
  ConfusionMatrix confusion;
  std::vector<FoldReport> folds;
  std::vector<std::string> skipped;  // videos that produced no samples, with reasons

  // config echo
  std::string protocol;
  std::string features;
  int window = 0, anchors = 0, stride = 1;
  double c = 0, gamma = 0, tol = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t next = 0;
  std::mutex mu;
  for (std::size_t t = 0; t < std::min<std::size_t>(jobs, count); ++t)
    pool.emplace_back([&]() {
      while (true) {
        std::size_t i;
        {
          std::lock_guard<std::mutex> lock(mu);
          if (next >= count) return;
          i = next++;
        }
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

inline std::string kinds_to_string(const std::vector<FeatureKind>& kinds) {
  std::string s;
  for (FeatureKind k : kinds) {
    if (!s.empty()) s += "+";
    s += std::string(feature_kind_name(k));
  }
  return s;
}

}  // namespace detail

/// Runs one protocol under set-level cross-validation: per fold, train a
/// one-vs-one model on the other folds' samples and classify the held-out
/// samples. The per-frame protocol scores each window independently; the
/// whole-sequence protocol scores one sample per video. Counts aggregate
/// over folds before accuracies are computed.
inline EvalReport run_protocol(const std::vector<InteractionSequence>& dataset,
                               const EvalProtocol& protocol, const FeatureConfig& feature_config,
                               const SvcConfig& svc_config, const FoldSplit& split, int jobs = 1) {
  if (dataset.empty()) throw std::invalid_argument("run_protocol: dataset is empty");
  protocol.validate();
  feature_config.validate();
  svc_config.validate();

  FeatureConfig fc = feature_config;
  if (protocol.kind == EvalProtocol::Kind::PerFrame)
    fc.window_size = protocol.window;
  else
    fc.anchors = protocol.anchors;

  EvalReport report;
  report.protocol = protocol.name();
  report.features = detail::kinds_to_string(fc.canonical_kinds());
  report.window = fc.window_size;
  report.anchors = fc.anchors;
  report.stride = fc.stride;
  report.c = svc_config.c;
  report.gamma = svc_config.kernel.gamma;
  report.tol = svc_config.tol;
  report.seed = split.seed;

  struct VideoSamples {
    int set_id;
    std::vector<WindowSample> samples;
  };
  std::vector<VideoSamples> videos;
  videos.reserve(dataset.size());
  for (const InteractionSequence& seq : dataset) {
    VideoSamples v;
    v.set_id = seq.set_id;
    if (protocol.kind == EvalProtocol::Kind::PerFrame) {
      v.samples = per_frame_windows(seq, fc);
      if (v.samples.empty())
        report.skipped.push_back(seq.video_id + ": shorter than window (" +
                                 std::to_string(seq.frames.size()) + " < " +
                                 std::to_string(fc.window_size) + ")");
    } else {
      if (seq.frames.size() < 2)
        report.skipped.push_back(seq.video_id + ": fewer than 2 frames");
      else
        v.samples.push_back(whole_sequence_sample(seq, fc));
    }
    videos.push_back(std::move(v));
  }

  report.folds.resize(split.folds.size());
  std::vector<std::string> fold_errors(split.folds.size());
  detail::parallel_for(split.folds.size(), jobs, [&](std::size_t f) {
    const std::vector<int>& test_sets = split.folds[f];
    auto in_fold = [&](int set_id) {
      return std::find(test_sets.begin(), test_sets.end(), set_id) != test_sets.end();
    };

    std::vector<std::vector<double>> train_x;
    std::vector<InteractionLabel> train_y;
    std::vector<const WindowSample*> test;
    for (const VideoSamples& v : videos) {
      for (const WindowSample& s : v.samples) {
        if (in_fold(v.set_id)) {
          test.push_back(&s);
        } else {
          train_x.push_back(s.values);
          train_y.push_back(s.label);
        }
      }
    }
    FoldReport& fr = report.folds[f];
    fr.fold_index = static_cast<int>(f);
    fr.test_sets = test_sets;
    fr.train_samples = train_x.size();
    fr.test_samples = test.size();
    if (test.empty()) {
      fold_errors[f] = "run_protocol: fold " + std::to_string(f) + " has no test samples";
      return;
    }
    if (train_x.empty()) {
      fold_errors[f] = "run_protocol: fold " + std::to_string(f) + " has no training samples";
      return;
    }
    MulticlassModel model = train_multiclass(train_x, train_y, svc_config);
    for (const WindowSample* s : test) fr.confusion.add(s->label, predict(model, s->values));
  });
  for (const std::string& e : fold_errors)
    if (!e.empty()) throw std::runtime_error(e);

  for (const FoldReport& fr : report.folds) report.confusion.merge(fr.confusion);
  for (int t = 0; t < kNumClasses; ++t) {
    std::uint64_t row = report.confusion.row_sum(t);
    report.per_class_accuracy[t] =
        row ? static_cast<double>(report.confusion.counts[t][t]) / static_cast<double>(row) : 0.0;
  }
  report.macro_accuracy = std::accumulate(report.per_class_accuracy.begin(),
                                          report.per_class_accuracy.end(), 0.0) /
                          kNumClasses;
  std::uint64_t total = report.confusion.total();
  report.overall_accuracy =
      total ? static_cast<double>(report.confusion.trace()) / static_cast<double>(total) : 0.0;
  return report;
}

/// The feature-combination rows evaluated by the sweep, in table order.
inline std::vector<std::vector<FeatureKind>> default_sweep_combos() {
  using K = FeatureKind;
  return {
      {K::XY},
      {K::DRJ},
      {K::DOJ},
      {K::JA},
      {K::AD},
      {K::VEL},
      {K::XY, K::DRJ},
      {K::XY, K::DRJ, K::DOJ},
      {K::XY, K::AD},
      {K::XY, K::DRJ, K::DOJ, K::AD},
      {K::XY, K::DRJ, K::DOJ, K::VEL},
      {K::XY, K::DRJ, K::DOJ, K::JA, K::AD, K::VEL},
  };
}

struct SweepRow {
  std::vector<FeatureKind> kinds;
  double per_frame_macro = 0.0;
  double per_frame_overall = 0.0;
  double whole_macro = 0.0;
  double whole_overall = 0.0;
};

/// Runs both protocols for every feature combination. Rows come back in
/// the combos' order regardless of execution interleaving.
inline std::vector<SweepRow> sweep(const std::vector<InteractionSequence>& dataset,
                                   const std::vector<std::vector<FeatureKind>>& combos,
                                   const EvalProtocol& per_frame_protocol,
                                   const EvalProtocol& whole_protocol,
                                   const FeatureConfig& feature_config,
                                   const SvcConfig& svc_config, const FoldSplit& split,
                                   int jobs = 1) {
  if (combos.empty()) throw std::invalid_argument("sweep: combos must be non-empty");
  std::vector<SweepRow> rows(combos.size());
  detail::parallel_for(combos.size(), jobs, [&](std::size_t i) {
    FeatureConfig fc = feature_config;
    fc.kinds = combos[i];
    SweepRow& row = rows[i];
    row.kinds = fc.canonical_kinds();
    EvalReport pf = run_protocol(dataset, per_frame_protocol, fc, svc_config, split, 1);
    row.per_frame_macro = pf.macro_accuracy;
    row.per_frame_overall = pf.overall_accuracy;
    EvalReport ws = run_protocol(dataset, whole_protocol, fc, svc_config, split, 1);
    row.whole_macro = ws.macro_accuracy;
    row.whole_overall = ws.overall_accuracy;
  });
  return rows;
}

/// Control-experiment helper: returns the dataset with its labels
/// uniformly permuted (class counts preserved, label-feature association
/// destroyed).
inline std::vector<InteractionSequence> permute_labels(std::vector<InteractionSequence> dataset,
                                                       std::uint64_t seed) {
  std::vector<InteractionLabel> labels;
  labels.reserve(dataset.size());
  for (const auto& s : dataset) labels.push_back(s.label);
  detail::Rng rng(seed);
  rng.shuffle(labels);
  for (std::size_t i = 0; i < dataset.size(); ++i) dataset[i].label = labels[i];
  return dataset;
}

// ---------------------------------------------------------------------------
// Report writers. Output depends only on the report contents, so identical
// runs produce byte-identical files.

namespace detail {

inline std::string fixed6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace detail

inline void write_confusion_csv(const ConfusionMatrix& m, std::ostream& out) {
  out << "truth\\prediction";
  for (int p = 0; p < kNumClasses; ++p) out << ',' << label_name(static_cast<InteractionLabel>(p));
  out << '\n';
  for (int t = 0; t < kNumClasses; ++t) {
    out << label_name(static_cast<InteractionLabel>(t));
    for (int p = 0; p < kNumClasses; ++p) out << ',' << m.counts[t][p];
    out << '\n';
  }
}

inline void write_report_csv(const EvalReport& r, std::ostream& out) {
  out << "metric,value\n";
  out << "protocol," << r.protocol << '\n';
  out << "features," << r.features << '\n';
  out << "window," << r.window << '\n';
  out << "anchors," << r.anchors << '\n';
  out << "stride," << r.stride << '\n';
  out << "c," << detail::format_double(r.c) << '\n';
  out << "gamma," << detail::format_double(r.gamma) << '\n';
  out << "seed," << r.seed << '\n';
  out << "macro_accuracy," << detail::fixed6(r.macro_accuracy) << '\n';
  out << "overall_accuracy," << detail::fixed6(r.overall_accuracy) << '\n';
  for (int c = 0; c < kNumClasses; ++c)
    out << "accuracy_" << label_name(static_cast<InteractionLabel>(c)) << ','
        << detail::fixed6(r.per_class_accuracy[c]) << '\n';
  for (const FoldReport& f : r.folds) {
    out << "fold" << f.fold_index << "_accuracy,"
        << detail::fixed6(f.confusion.total()
                              ? static_cast<double>(f.confusion.trace()) / f.confusion.total()
                              : 0.0)
        << '\n';
  }
  out << "skipped," << r.skipped.size() << '\n';
}

inline void write_report_text(const EvalReport& r, std::ostream& out) {
  out << "protocol: " << r.protocol << "  features: " << r.features << '\n';
  out << "window: " << r.window << "  anchors: " << r.anchors << "  stride: " << r.stride << '\n';
  out << "c: " << detail::format_double(r.c) << "  gamma: " << detail::format_double(r.gamma)
      << "  seed: " << r.seed << '\n';
  out << '\n';
  out << "macro accuracy:   " << detail::fixed6(r.macro_accuracy) << '\n';
  out << "overall accuracy: " << detail::fixed6(r.overall_accuracy) << '\n';
  out << '\n';
  out << "per-class accuracy (test samples):\n";
  for (int c = 0; c < kNumClasses; ++c)
    out << "  " << label_name(static_cast<InteractionLabel>(c)) << ": "
        << detail::fixed6(r.per_class_accuracy[c]) << " (" << r.confusion.row_sum(c) << ")\n";
  out << '\n';
  out << "folds:\n";
  for (const FoldReport& f : r.folds) {
    out << "  fold " << f.fold_index << ": sets";
    for (int s : f.test_sets) out << ' ' << s;
    out << ", train " << f.train_samples << ", test " << f.test_samples << ", accuracy "
        << detail::fixed6(f.confusion.total()
                              ? static_cast<double>(f.confusion.trace()) / f.confusion.total()
                              : 0.0)
        << '\n';
  }
  out << '\n';
  out << "confusion (rows = truth):\n";
  for (int t = 0; t < kNumClasses; ++t) {
    out << "  " << label_name(static_cast<InteractionLabel>(t)) << ':';
    for (int p = 0; p < kNumClasses; ++p) out << ' ' << r.confusion.counts[t][p];
    out << '\n';
  }
  if (!r.skipped.empty()) {
    out << '\n' << "skipped sequences:\n";
    for (const std::string& s : r.skipped) out << "  " << s << '\n';
  }
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "features,per_frame_macro,per_frame_overall,whole_sequence_macro,whole_sequence_overall\n";
  for (const SweepRow& r : rows)
    out << detail::kinds_to_string(r.kinds) << ',' << detail::fixed6(r.per_frame_macro) << ','
        << detail::fixed6(r.per_frame_overall) << ',' << detail::fixed6(r.whole_macro) << ','
        << detail::fixed6(r.whole_overall) << '\n';
}

}  // namespace duet
