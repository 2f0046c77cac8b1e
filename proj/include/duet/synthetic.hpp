#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "duet/detail/rng.hpp"
#include "duet/pose.hpp"

namespace duet {

namespace detail {

/// Upright stick figure centered at (cx, cy). `facing` is +1 when the
/// partner stands to the right, -1 when to the left; the right-side limbs
/// are placed on the partner side so both persons interact with the same
/// named joints.
inline PersonPose stick_figure(double cx, double cy, double facing) {
  const double f = facing;
  PersonPose p;
  p[JointId::Head] = {cx, cy - 0.17};
  p[JointId::Neck] = {cx, cy - 0.11};
  p[JointId::RShoulder] = {cx + 0.045 * f, cy - 0.10};
  p[JointId::RElbow] = {cx + 0.055 * f, cy - 0.02};
  p[JointId::RWrist] = {cx + 0.060 * f, cy + 0.05};
  p[JointId::LShoulder] = {cx - 0.045 * f, cy - 0.10};
  p[JointId::LElbow] = {cx - 0.055 * f, cy - 0.02};
  p[JointId::LWrist] = {cx - 0.060 * f, cy + 0.05};
  p[JointId::RHip] = {cx + 0.030 * f, cy + 0.10};
  p[JointId::RKnee] = {cx + 0.030 * f, cy + 0.22};
  p[JointId::LHip] = {cx - 0.030 * f, cy + 0.10};
  p[JointId::LKnee] = {cx - 0.030 * f, cy + 0.22};
  return p;
}

inline Point lerp(Point a, Point b, double t) { return a + (b - a) * t; }

/// Linear ramp from 0 to 1 over [t0, t1], clamped outside.
inline double ramp(double t, double t0, double t1) {
  if (t <= t0) return 0.0;
  if (t >= t1) return 1.0;
  return (t - t0) / (t1 - t0);
}

/// Rise over [up0, up1], hold at 1, fall over [down0, down1]. Sustained
/// motions register on most anchor frames, brief ones on almost none.
inline double plateau(double t, double up0, double up1, double down0, double down1) {
  return ramp(t, up0, up1) * (1.0 - ramp(t, down0, down1));
}

}  // namespace detail

/// Deterministic two-person sequence following a class-specific motion
/// template, plus Gaussian jitter (sigma 0.005) on every coordinate.
/// Intended as a dataset-free fixture: the eight templates are mutually
/// distinguishable from raw joint positions alone.
inline InteractionSequence generate_synthetic(InteractionLabel cls, int length,
                                              std::uint64_t seed) {
  if (length < 2) throw std::invalid_argument("generate_synthetic: length must be >= 2");

  detail::Rng rng(detail::derive_seed(seed, static_cast<std::uint64_t>(cls)));
  const double scene_cx = rng.uniform(0.49, 0.51);
  const double cy1 = rng.uniform(0.48, 0.50);
  const double cy2 = cy1 + rng.uniform(-0.005, 0.005);
  const double far_gap = rng.uniform(0.52, 0.56);
  const double near_gap = rng.uniform(0.15, 0.18);
  const double wobble = rng.uniform(-0.01, 0.01);
  const double jitter = 0.005;

  // each contact interaction happens at its own characteristic distance
  double mid_gap = 0.26;
  switch (cls) {
    case InteractionLabel::Pushing: mid_gap = 0.18 + wobble; break;
    case InteractionLabel::Punching: mid_gap = 0.22 + wobble; break;
    case InteractionLabel::ShakingHands: mid_gap = 0.26 + wobble; break;
    case InteractionLabel::ExchangingObject: mid_gap = 0.31 + wobble; break;
    case InteractionLabel::Kicking: mid_gap = 0.35 + wobble; break;
    default: break;
  }

  InteractionSequence seq;
  seq.set_id = 1;
  seq.video_id = std::string("synth/") + std::string(label_name(cls));
  seq.label = cls;
  seq.frames.reserve(length);

  for (int i = 0; i < length; ++i) {
    const double t = length > 1 ? static_cast<double>(i) / (length - 1) : 0.0;

    double gap = mid_gap;
    switch (cls) {
      case InteractionLabel::Approaching: gap = far_gap + (near_gap - far_gap) * t; break;
      case InteractionLabel::Departing: gap = near_gap + (far_gap - near_gap) * t; break;
      case InteractionLabel::Hugging:
        gap = 0.32 + (0.11 - 0.32) * detail::ramp(t, 0.0, 0.4);
        break;
      default: break;
    }

    double cx1 = scene_cx - gap / 2.0;
    double cx2 = scene_cx + gap / 2.0;
    if (cls == InteractionLabel::Pushing) cx2 += 0.15 * detail::ramp(t, 0.35, 0.70);

    PersonPose p1 = detail::stick_figure(cx1, cy1, +1.0);
    PersonPose p2 = detail::stick_figure(cx2, cy2, -1.0);

    switch (cls) {
      case InteractionLabel::Punching: {
        // one fist out to the other's head, held through most of the clip
        double p = detail::plateau(t, 0.10, 0.30, 0.80, 0.95);
        p1[JointId::RWrist] = detail::lerp(p1[JointId::RWrist], p2[JointId::Head], p);
        p1[JointId::RElbow] =
            detail::lerp(p1[JointId::RElbow],
                         detail::lerp(p1[JointId::RShoulder], p2[JointId::Head], 0.5), p);
        break;
      }
      case InteractionLabel::Kicking: {
        double p = detail::plateau(t, 0.15, 0.40, 0.75, 0.95);
        Point target = {p2[JointId::RHip].x - 0.02, p2[JointId::RHip].y - 0.03};
        p1[JointId::RKnee] = detail::lerp(p1[JointId::RKnee], target, p);
        p1[JointId::RHip] =
            detail::lerp(p1[JointId::RHip],
                         {p1[JointId::RHip].x + 0.05, p1[JointId::RHip].y - 0.03}, p);
        break;
      }
      case InteractionLabel::Hugging: {
        double p = detail::ramp(t, 0.25, 0.55);
        p1[JointId::RWrist] = detail::lerp(p1[JointId::RWrist], p2[JointId::Neck], p);
        p1[JointId::LWrist] = detail::lerp(p1[JointId::LWrist], p2[JointId::Neck], 0.9 * p);
        p2[JointId::RWrist] = detail::lerp(p2[JointId::RWrist], p1[JointId::Neck], p);
        p2[JointId::LWrist] = detail::lerp(p2[JointId::LWrist], p1[JointId::Neck], 0.9 * p);
        break;
      }
      case InteractionLabel::Pushing: {
        // both palms planted on the other's shoulders while they give way
        double p = detail::plateau(t, 0.10, 0.30, 0.85, 1.00);
        p1[JointId::RWrist] = detail::lerp(p1[JointId::RWrist], p2[JointId::RShoulder], p);
        p1[JointId::LWrist] = detail::lerp(p1[JointId::LWrist], p2[JointId::LShoulder], p);
        break;
      }
      case InteractionLabel::ShakingHands: {
        // simultaneous grip at chest height, pumping slightly
        double reach = detail::plateau(t, 0.05, 0.25, 0.85, 1.00);
        Point grip = {(cx1 + cx2) / 2.0, (cy1 + cy2) / 2.0 - 0.05};
        grip.y += 0.015 * std::sin(6.0 * 3.14159265358979323846 * t);
        p1[JointId::RWrist] = detail::lerp(p1[JointId::RWrist], grip, reach);
        p2[JointId::RWrist] = detail::lerp(p2[JointId::RWrist], grip, reach);
        break;
      }
      case InteractionLabel::ExchangingObject: {
        // handoff at waist height, one wrist after the other; the receiver
        // carries the object off raised
        double r1 = detail::plateau(t, 0.05, 0.25, 0.50, 0.70);
        double r2 = detail::plateau(t, 0.35, 0.55, 0.80, 0.98);
        double carry = detail::ramp(t, 0.80, 0.98);
        Point handoff = {(cx1 + cx2) / 2.0, (cy1 + cy2) / 2.0 + 0.08};
        p1[JointId::RWrist] = detail::lerp(p1[JointId::RWrist], handoff, r1);
        Point receiver_rest = p2[JointId::RWrist];
        p2[JointId::RWrist] = detail::lerp(receiver_rest, handoff, r2);
        p2[JointId::RWrist] = detail::lerp(p2[JointId::RWrist],
                                           {receiver_rest.x, cy2 - 0.04}, carry);
        break;
      }
      default: break;  // approaching/departing move whole bodies only
    }

    PoseFrame frame;
    frame.frame_index = i;
    frame.person1 = p1;
    frame.person2 = p2;
    for (PersonPose* pose : {&frame.person1, &frame.person2}) {
      for (auto& pt : pose->joints) {
        pt.x = std::clamp(pt.x + jitter * rng.gaussian(), 0.0, 1.0);
        pt.y = std::clamp(pt.y + jitter * rng.gaussian(), 0.0, 1.0);
      }
    }
    seq.frames.push_back(frame);
  }
  return seq;
}

/// Builds `per_class` sequences for each of the eight classes, cycling
/// set ids 1..21 so set-level cross-validation folds stay populated.
inline std::vector<InteractionSequence> make_synthetic_dataset(int per_class, int length,
                                                               std::uint64_t seed) {
  std::vector<InteractionSequence> out;
  out.reserve(static_cast<std::size_t>(per_class) * kNumClasses);
  int idx = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    for (int k = 0; k < per_class; ++k, ++idx) {
      auto cls = static_cast<InteractionLabel>(c);
      InteractionSequence seq =
          generate_synthetic(cls, length, detail::derive_seed(seed, static_cast<std::uint64_t>(idx)));
      seq.set_id = idx % 21 + 1;
      seq.video_id = "synth/" + std::string(label_name(cls)) + "_" + std::to_string(k);
      out.push_back(std::move(seq));
    }
  }
  return out;
}

}  // namespace duet
