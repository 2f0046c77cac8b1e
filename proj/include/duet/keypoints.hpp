#pragma once

#include <array>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "duet/pose.hpp"

namespace duet {

/// One detected person in a keypoint document: 12 normalized joints with
/// per-joint confidences and an optional pixel bbox.
struct KeypointPerson {
  std::array<Point, kNumJoints> keypoints{};
  std::array<double, kNumJoints> confidence{};
  std::optional<std::array<double, 4>> bbox;

  double mean_confidence() const {
    double s = 0;
    for (double c : confidence) s += c;
    return s / kNumJoints;
  }
};

struct KeypointFrame {
  int index = 0;
  double width = 0;
  double height = 0;
  std::vector<KeypointPerson> people;
};

struct KeypointDoc {
  std::vector<KeypointFrame> frames;
  std::vector<std::string> warnings;  // border clamps, dropped persons
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& obj, const char* name,
                                           const std::string& path) {
  if (!obj.is_object() || !obj.contains(name))
    throw ParseError("keypoint document: missing field " + path + (path.empty() ? "" : ".") + name);
  return obj.at(name);
}

inline double require_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError("keypoint document: " + path + " is not a number");
  return v.get<double>();
}

}  // namespace detail

/// Parses the keypoint document format: `{"frames":[{"index","width",
/// "height","people":[{"keypoints":[[x,y,conf]*12],"bbox":[...]?}]}]}`.
/// Keypoints are in pixels and come out normalized. Persons whose mean
/// confidence falls below `min_confidence` are dropped.
inline KeypointDoc parse_keypoints(std::istream& in, double min_confidence = 0.1) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("keypoint document: invalid JSON: ") + e.what());
  }

  KeypointDoc out;
  const auto& frames = detail::require_field(doc, "frames", "");
  if (!frames.is_array()) throw ParseError("keypoint document: frames is not a list");

  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const std::string fpath = "frames[" + std::to_string(fi) + "]";
    const auto& jframe = frames[fi];
    KeypointFrame frame;
    frame.index = static_cast<int>(
        detail::require_number(detail::require_field(jframe, "index", fpath), fpath + ".index"));
    frame.width =
        detail::require_number(detail::require_field(jframe, "width", fpath), fpath + ".width");
    frame.height =
        detail::require_number(detail::require_field(jframe, "height", fpath), fpath + ".height");
    if (frame.width <= 0 || frame.height <= 0)
      throw ParseError("keypoint document: " + fpath + " has non-positive dimensions");

    const auto& people = detail::require_field(jframe, "people", fpath);
    if (!people.is_array()) throw ParseError("keypoint document: " + fpath + ".people is not a list");
    for (std::size_t pi = 0; pi < people.size(); ++pi) {
      const std::string ppath = fpath + ".people[" + std::to_string(pi) + "]";
      const auto& jperson = people[pi];
      const auto& kps = detail::require_field(jperson, "keypoints", ppath);
      if (!kps.is_array() || kps.size() != kNumJoints)
        throw ParseError("keypoint document: " + ppath + ".keypoints must have " +
                         std::to_string(kNumJoints) + " entries");
      KeypointPerson person;
      for (int j = 0; j < kNumJoints; ++j) {
        const std::string jpath = ppath + ".keypoints[" + std::to_string(j) + "]";
        const auto& kp = kps[j];
        if (!kp.is_array() || kp.size() != 3)
          throw ParseError("keypoint document: " + jpath + " must be [x, y, confidence]");
        double x = detail::require_number(kp[0], jpath + "[0]");
        double y = detail::require_number(kp[1], jpath + "[1]");
        person.confidence[j] = detail::require_number(kp[2], jpath + "[2]");
        bool clamped = false;
        person.keypoints[j] = normalize_joint(x, y, frame.width, frame.height, &clamped);
        if (clamped)
          out.warnings.push_back(jpath + ": keypoint outside frame, clamped to border");
      }
      if (jperson.contains("bbox")) {
        const auto& bb = jperson.at("bbox");
        if (!bb.is_array() || bb.size() != 4)
          throw ParseError("keypoint document: " + ppath + ".bbox must have 4 entries");
        std::array<double, 4> box{};
        for (int k = 0; k < 4; ++k)
          box[k] = detail::require_number(bb[k], ppath + ".bbox[" + std::to_string(k) + "]");
        person.bbox = box;
      }
      if (person.mean_confidence() < min_confidence) {
        out.warnings.push_back(ppath + ": dropped, mean confidence below threshold");
        continue;
      }
      frame.people.push_back(std::move(person));
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace duet
