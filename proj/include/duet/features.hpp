#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "duet/detail/text.hpp"
#include "duet/pose.hpp"

namespace duet {

/// The six joint-feature families. Multi-kind vectors concatenate blocks in
/// this enum order.
enum class FeatureKind : int { XY = 0, DRJ, DOJ, JA, AD, VEL };

inline constexpr int kNumFeatureKinds = 6;
inline constexpr std::array<std::string_view, kNumFeatureKinds> kFeatureKindNames = {
    "XY", "DRJ", "DOJ", "JA", "AD", "VEL"};

inline std::string_view feature_kind_name(FeatureKind k) {
  return kFeatureKindNames[static_cast<int>(k)];
}

inline std::optional<FeatureKind> feature_kind_from_name(std::string_view name) {
  std::string up;
  for (char c : name) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (int i = 0; i < kNumFeatureKinds; ++i)
    if (up == kFeatureKindNames[i]) return static_cast<FeatureKind>(i);
  return std::nullopt;
}

/// Per-frame output width of each kind.
inline constexpr int per_frame_dim(FeatureKind k) {
  switch (k) {
    case FeatureKind::XY: return 48;
    case FeatureKind::DRJ: return 12;
    case FeatureKind::DOJ: return 24;
    case FeatureKind::JA: return 22;
    case FeatureKind::AD: return 24;
    case FeatureKind::VEL: return 48;
  }
  return 0;
}

/// Kinematic chain over the 12 joints: 11 connected pairs used by the
/// joint-angle feature.
inline const std::array<std::pair<JointId, JointId>, 11>& skeleton_edges() {
  static const std::array<std::pair<JointId, JointId>, 11> edges = {{
      {JointId::Head, JointId::Neck},
      {JointId::Neck, JointId::RShoulder},
      {JointId::RShoulder, JointId::RElbow},
      {JointId::RElbow, JointId::RWrist},
      {JointId::Neck, JointId::LShoulder},
      {JointId::LShoulder, JointId::LElbow},
      {JointId::LElbow, JointId::LWrist},
      {JointId::Neck, JointId::RHip},
      {JointId::RHip, JointId::RKnee},
      {JointId::Neck, JointId::LHip},
      {JointId::LHip, JointId::LKnee},
  }};
  return edges;
}

struct FeatureConfig {
  std::vector<FeatureKind> kinds = {FeatureKind::XY};
  int window_size = 9;  // per-frame protocol window W
  int anchors = 13;     // whole-sequence anchor count A
  int stride = 1;

  /// Kinds in enum order with duplicates removed; assembly order.
  std::vector<FeatureKind> canonical_kinds() const {
    std::vector<FeatureKind> k = kinds;
    std::sort(k.begin(), k.end());
    k.erase(std::unique(k.begin(), k.end()), k.end());
    return k;
  }

  int dims_per_frame() const {
    int d = 0;
    for (FeatureKind k : canonical_kinds()) d += per_frame_dim(k);
    return d;
  }

  void validate() const {
    if (kinds.empty()) throw std::invalid_argument("FeatureConfig: kinds must be non-empty");
    if (window_size < 1) throw std::invalid_argument("FeatureConfig: window_size must be >= 1");
    if (anchors < 2) throw std::invalid_argument("FeatureConfig: anchors must be >= 2");
    if (stride < 1) throw std::invalid_argument("FeatureConfig: stride must be >= 1");
  }
};

/// Raw joint positions: person1 x0,y0..x11,y11 then person2 likewise.
inline std::vector<double> xy_features(const PoseFrame& frame) {
  std::vector<double> out;
  out.reserve(48);
  for (const PersonPose* p : {&frame.person1, &frame.person2})
    for (const Point& pt : p->joints) {
      out.push_back(pt.x);
      out.push_back(pt.y);
    }
  return out;
}

/// Distance between the same joint of the two persons, per joint.
inline std::vector<double> drj(const PoseFrame& frame) {
  std::vector<double> out;
  out.reserve(12);
  for (int j = 0; j < kNumJoints; ++j)
    out.push_back(distance(frame.person1.joints[j], frame.person2.joints[j]));
  return out;
}

/// Distance from one person's head to every joint of the other person;
/// person1's head against person2 first, then person2's head against
/// person1.
inline std::vector<double> doj(const PoseFrame& frame) {
  std::vector<double> out;
  out.reserve(24);
  for (int j = 0; j < kNumJoints; ++j)
    out.push_back(distance(frame.person1[JointId::Head], frame.person2.joints[j]));
  for (int j = 0; j < kNumJoints; ++j)
    out.push_back(distance(frame.person2[JointId::Head], frame.person1.joints[j]));
  return out;
}

/// Orientation of each skeleton edge, per person: full-quadrant arctangent
/// of y and x joint differences, in (-pi, pi]. Coincident joints yield 0.
inline std::vector<double> ja(const PoseFrame& frame) {
  std::vector<double> out;
  out.reserve(22);
  for (const PersonPose* p : {&frame.person1, &frame.person2})
    for (auto [j1, j2] : skeleton_edges()) {
      double dx = (*p)[j1].x - (*p)[j2].x;
      double dy = (*p)[j1].y - (*p)[j2].y;
      out.push_back(dx == 0.0 && dy == 0.0 ? 0.0 : std::atan2(dy, dx));
    }
  return out;
}

/// Per-axis absolute differences between the persons, |dx| then |dy|
/// interleaved in joint order.
inline std::vector<double> ad(const PoseFrame& frame) {
  std::vector<double> out;
  out.reserve(24);
  for (int j = 0; j < kNumJoints; ++j) {
    out.push_back(std::abs(frame.person1.joints[j].x - frame.person2.joints[j].x));
    out.push_back(std::abs(frame.person1.joints[j].y - frame.person2.joints[j].y));
  }
  return out;
}

namespace detail {

/// Joint displacements from `from` to `to`; xy layout. No index checks.
inline std::vector<double> vel_unchecked(const PoseFrame& from, const PoseFrame& to) {
  std::vector<double> out;
  out.reserve(48);
  for (int person = 0; person < 2; ++person) {
    const PersonPose& a = person == 0 ? from.person1 : from.person2;
    const PersonPose& b = person == 0 ? to.person1 : to.person2;
    for (int j = 0; j < kNumJoints; ++j) {
      out.push_back(b.joints[j].x - a.joints[j].x);
      out.push_back(b.joints[j].y - a.joints[j].y);
    }
  }
  return out;
}

}  // namespace detail

/// Joint velocities between two frames (later minus earlier, one frame pair
/// = one displacement); layout matches xy_features.
inline std::vector<double> vel(const PoseFrame& frame_t1, const PoseFrame& frame_t2) {
  if (frame_t1.frame_index >= frame_t2.frame_index)
    throw std::invalid_argument("vel: frame_t1 must be earlier than frame_t2");
  return detail::vel_unchecked(frame_t1, frame_t2);
}

/// One assembled sample: a fixed-length feature vector plus its label and
/// source span.
struct WindowSample {
  std::vector<double> values;
  InteractionLabel label = InteractionLabel::Approaching;
  std::string video_id;
  int first_frame = 0;
  int last_frame = 0;
};

namespace detail {

/// Appends the selected per-frame blocks for `frame`. `prev` is the
/// previous frame of the sample (null at the first position: the velocity
/// block is zero-padded there so all samples share one dimensionality).
inline void append_frame_features(std::vector<double>& out, const PoseFrame& frame,
                                  const PoseFrame* prev,
                                  const std::vector<FeatureKind>& kinds) {
  for (FeatureKind k : kinds) {
    std::vector<double> block;
    switch (k) {
      case FeatureKind::XY: block = xy_features(frame); break;
      case FeatureKind::DRJ: block = drj(frame); break;
      case FeatureKind::DOJ: block = doj(frame); break;
      case FeatureKind::JA: block = ja(frame); break;
      case FeatureKind::AD: block = ad(frame); break;
      case FeatureKind::VEL:
        block = prev ? detail::vel_unchecked(*prev, frame)
                     : std::vector<double>(per_frame_dim(FeatureKind::VEL), 0.0);
        break;
    }
    out.insert(out.end(), block.begin(), block.end());
  }
}

}  // namespace detail

/// Sliding windows of `window_size` consecutive frames at the configured
/// stride, one sample per window. Sequences shorter than the window yield
/// no samples; callers report such skips in their run summaries.
inline std::vector<WindowSample> per_frame_windows(const InteractionSequence& seq,
                                                   const FeatureConfig& config) {
  config.validate();
  const auto kinds = config.canonical_kinds();
  const int t = static_cast<int>(seq.frames.size());
  const int w = config.window_size;
  std::vector<WindowSample> out;
  if (t < w) return out;
  for (int start = 0; start + w <= t; start += config.stride) {
    WindowSample s;
    s.label = seq.label;
    s.video_id = seq.video_id;
    s.first_frame = seq.frames[start].frame_index;
    s.last_frame = seq.frames[start + w - 1].frame_index;
    s.values.reserve(static_cast<std::size_t>(w) * config.dims_per_frame());
    for (int k = 0; k < w; ++k)
      detail::append_frame_features(s.values, seq.frames[start + k],
                                    k > 0 ? &seq.frames[start + k - 1] : nullptr, kinds);
    out.push_back(std::move(s));
  }
  return out;
}

/// Positions of `a` equally spaced anchor frames in a sequence of length
/// `t`: round(k*(t-1)/(a-1)), rounding half away from zero. Always starts
/// at 0 and ends at t-1; indices repeat when t < a.
inline std::vector<int> anchor_frames(int t, int a) {
  if (t < 2) throw std::invalid_argument("anchor_frames: sequence length must be >= 2");
  if (a < 2) throw std::invalid_argument("anchor_frames: anchor count must be >= 2");
  std::vector<int> out(a);
  for (int k = 0; k < a; ++k)
    out[k] = static_cast<int>(std::round(static_cast<double>(k) * (t - 1) / (a - 1)));
  return out;
}

/// Summarizes a whole variable-length sequence as one fixed-length sample
/// over anchor frames. The velocity block is zero at the first anchor and
/// measured between consecutive anchors after that (zero again when short
/// sequences repeat an anchor).
inline WindowSample whole_sequence_sample(const InteractionSequence& seq,
                                          const FeatureConfig& config) {
  config.validate();
  if (seq.frames.size() < 2)
    throw std::invalid_argument("whole_sequence_sample: need at least 2 frames");
  const auto kinds = config.canonical_kinds();
  const auto anchors = anchor_frames(static_cast<int>(seq.frames.size()), config.anchors);

  WindowSample s;
  s.label = seq.label;
  s.video_id = seq.video_id;
  s.first_frame = seq.frames.front().frame_index;
  s.last_frame = seq.frames.back().frame_index;
  s.values.reserve(anchors.size() * static_cast<std::size_t>(config.dims_per_frame()));
  for (std::size_t k = 0; k < anchors.size(); ++k)
    detail::append_frame_features(s.values, seq.frames[anchors[k]],
                                  k > 0 ? &seq.frames[anchors[k - 1]] : nullptr, kinds);
  return s;
}

/// Column names for one frame offset, mirroring the assembly layout.
inline std::vector<std::string> feature_slot_names(const std::vector<FeatureKind>& kinds,
                                                   int frame_offset) {
  std::vector<std::string> names;
  const std::string f = "f" + std::to_string(frame_offset) + ".";
  for (FeatureKind k : kinds) {
    switch (k) {
      case FeatureKind::XY:
      case FeatureKind::VEL: {
        std::string tag = k == FeatureKind::XY ? "xy." : "vel.";
        for (int person = 1; person <= 2; ++person)
          for (int j = 0; j < kNumJoints; ++j)
            for (const char* axis : {"x", "y"})
              names.push_back(f + tag + "p" + std::to_string(person) + "." +
                              std::string(kJointNames[j]) + "." + axis);
        break;
      }
      case FeatureKind::DRJ:
        for (int j = 0; j < kNumJoints; ++j)
          names.push_back(f + "drj." + std::string(kJointNames[j]));
        break;
      case FeatureKind::DOJ:
        for (int person = 1; person <= 2; ++person)
          for (int j = 0; j < kNumJoints; ++j)
            names.push_back(f + "doj.p" + std::to_string(person) + "_head." +
                            std::string(kJointNames[j]));
        break;
      case FeatureKind::JA:
        for (int person = 1; person <= 2; ++person)
          for (auto [j1, j2] : skeleton_edges())
            names.push_back(f + "ja.p" + std::to_string(person) + "." +
                            std::string(joint_name(j1)) + "_" + std::string(joint_name(j2)));
        break;
      case FeatureKind::AD:
        for (int j = 0; j < kNumJoints; ++j)
          for (const char* axis : {"x", "y"})
            names.push_back(f + "ad." + std::string(kJointNames[j]) + "." + axis);
        break;
    }
  }
  return names;
}

/// CSV export: header row naming every feature slot, one row per sample,
/// label in the final column.
inline void write_samples_csv(std::ostream& out, const std::vector<WindowSample>& samples,
                              const FeatureConfig& config, int frames_per_sample) {
  const auto kinds = config.canonical_kinds();
  bool first = true;
  for (int k = 0; k < frames_per_sample; ++k)
    for (const std::string& n : feature_slot_names(kinds, k)) {
      if (!first) out << ',';
      out << n;
      first = false;
    }
  out << ",label\n";
  for (const WindowSample& s : samples) {
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (i) out << ',';
      out << detail::format_double(s.values[i]);
    }
    out << ',' << label_name(s.label) << '\n';
  }
}

}  // namespace duet
