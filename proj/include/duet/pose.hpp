#pragma once

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "duet/error.hpp"

namespace duet {

/// The 12-joint body model: a 14-joint estimator skeleton minus the two
/// ankles. Ordinals are fixed; feature layouts and file formats depend on
/// this order.
enum class JointId : int {
  Head = 0,
  Neck,
  RShoulder,
  RElbow,
  RWrist,
  LShoulder,
  LElbow,
  LWrist,
  RHip,
  RKnee,
  LHip,
  LKnee,
};

inline constexpr int kNumJoints = 12;

inline constexpr std::array<std::string_view, kNumJoints> kJointNames = {
    "head",      "neck",   "r_shoulder", "r_elbow", "r_wrist", "l_shoulder",
    "l_elbow",   "l_wrist", "r_hip",     "r_knee",  "l_hip",   "l_knee",
};

inline std::string_view joint_name(JointId j) {
  return kJointNames[static_cast<int>(j)];
}

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Point a, Point b) { return a.x == b.x && a.y == b.y; }
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// One person's joints at one frame, in normalized image coordinates
/// ([0,1] on both axes), indexed by JointId ordinal.
struct PersonPose {
  std::array<Point, kNumJoints> joints{};

  Point& operator[](JointId j) { return joints[static_cast<int>(j)]; }
  const Point& operator[](JointId j) const { return joints[static_cast<int>(j)]; }

  friend bool operator==(const PersonPose&, const PersonPose&) = default;
};

/// Two persons at one frame. The corpus guarantees exactly two persons per
/// scene, so the pair is fixed rather than a list.
struct PoseFrame {
  int frame_index = 0;
  PersonPose person1;
  PersonPose person2;

  friend bool operator==(const PoseFrame&, const PoseFrame&) = default;
};

/// The eight interaction classes, in fixed ordinal order.
enum class InteractionLabel : int {
  Approaching = 0,
  Departing,
  Punching,
  Kicking,
  Hugging,
  Pushing,
  ShakingHands,
  ExchangingObject,
};

inline constexpr int kNumClasses = 8;

inline constexpr std::array<std::string_view, kNumClasses> kLabelNames = {
    "approaching", "departing", "punching",      "kicking",
    "hugging",     "pushing",   "shaking_hands", "exchanging_object",
};

inline std::string_view label_name(InteractionLabel l) {
  return kLabelNames[static_cast<int>(l)];
}

inline std::array<InteractionLabel, kNumClasses> all_labels() {
  std::array<InteractionLabel, kNumClasses> out{};
  for (int i = 0; i < kNumClasses; ++i) out[i] = static_cast<InteractionLabel>(i);
  return out;
}

/// Maps a class directory name to a label. Accepts the canonical snake_case
/// names (case-insensitive, '-' and ' ' treated as '_'), a few common
/// variants, and bare numerals "1".."8" / "01".."08" in label-ordinal order.
inline std::optional<InteractionLabel> label_from_class_dir(std::string_view dir) {
  std::string key;
  key.reserve(dir.size());
  for (char c : dir) {
    if (c == '-' || c == ' ') c = '_';
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  for (int i = 0; i < kNumClasses; ++i) {
    if (key == kLabelNames[i]) return static_cast<InteractionLabel>(i);
  }
  if (key == "shakinghands" || key == "shaking") return InteractionLabel::ShakingHands;
  if (key == "exchangingobject" || key == "exchanging" || key == "exchange")
    return InteractionLabel::ExchangingObject;
  if (!key.empty() && key.size() <= 2 &&
      key.find_first_not_of("0123456789") == std::string::npos) {
    int n = std::stoi(key);
    if (n >= 1 && n <= kNumClasses) return static_cast<InteractionLabel>(n - 1);
  }
  return std::nullopt;
}

/// One labeled video: an ordered run of two-person pose frames.
struct InteractionSequence {
  int set_id = 0;                 // 1..21 in the 21-set corpus layout
  std::string video_id;
  InteractionLabel label = InteractionLabel::Approaching;
  std::vector<PoseFrame> frames;

  friend bool operator==(const InteractionSequence&, const InteractionSequence&) = default;
};

/// A person detection in pixel units, as produced by an upstream detector
/// and consumed here from files.
struct Detection {
  int frame_index = 0;
  double x_min = 0, y_min = 0, x_max = 0, y_max = 0;  // pixels
  double score = 0;                                   // [0,1]

  Point center() const { return {(x_min + x_max) / 2.0, (y_min + y_max) / 2.0}; }

  void validate() const {
    if (!(x_min < x_max) || !(y_min < y_max))
      throw std::invalid_argument("Detection: bbox must satisfy x_min < x_max and y_min < y_max");
    if (!(score >= 0.0 && score <= 1.0))
      throw std::invalid_argument("Detection: score must lie in [0,1]");
  }
};

/// Divides pixel coordinates by the frame dimensions, yielding fractions in
/// [0,1]. Out-of-frame inputs clamp to the border; when `clamped` is given
/// it is set so callers can surface a warning.
inline Point normalize_joint(double x_px, double y_px, double width, double height,
                             bool* clamped = nullptr) {
  if (!(width > 0.0) || !(height > 0.0))
    throw std::invalid_argument("normalize_joint: frame dimensions must be positive");
  if (!std::isfinite(x_px) || !std::isfinite(y_px))
    throw std::invalid_argument("normalize_joint: coordinates must be finite");
  Point p{x_px / width, y_px / height};
  bool out = p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0;
  if (clamped) *clamped = out;
  if (out) {
    p.x = std::min(1.0, std::max(0.0, p.x));
    p.y = std::min(1.0, std::max(0.0, p.y));
  }
  return p;
}

}  // namespace duet
