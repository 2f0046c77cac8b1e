#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "duet/detail/text.hpp"
#include "duet/pose.hpp"

namespace duet {

// 15-joint order used by the skeleton text files.
inline constexpr int kSbuJointCount = 15;
inline constexpr std::array<std::string_view, kSbuJointCount> kSbuJointNames = {
    "head",   "neck",    "torso",  "l_shoulder", "l_elbow", "l_hand", "r_shoulder", "r_elbow",
    "r_hand", "l_hip",   "l_knee", "l_foot",     "r_hip",   "r_knee", "r_foot",
};

/// File-joint -> model-joint mapping. Torso and both feet have no
/// counterpart in the 12-joint model and map to -1.
inline constexpr std::array<int, kSbuJointCount> kSbuToModelJoint = {
    static_cast<int>(JointId::Head),       // head
    static_cast<int>(JointId::Neck),       // neck
    -1,                                    // torso
    static_cast<int>(JointId::LShoulder),  // l_shoulder
    static_cast<int>(JointId::LElbow),     // l_elbow
    static_cast<int>(JointId::LWrist),     // l_hand
    static_cast<int>(JointId::RShoulder),  // r_shoulder
    static_cast<int>(JointId::RElbow),     // r_elbow
    static_cast<int>(JointId::RWrist),     // r_hand
    static_cast<int>(JointId::LHip),       // l_hip
    static_cast<int>(JointId::LKnee),      // l_knee
    -1,                                    // l_foot
    static_cast<int>(JointId::RHip),       // r_hip
    static_cast<int>(JointId::RKnee),      // r_knee
    -1,                                    // r_foot
};

inline constexpr int kSbuFieldsPerLine = 1 + 2 * kSbuJointCount * 3;  // 91

/// Parses the skeleton text format: one line per frame,
/// `frame#, p1j1x, p1j1y, p1j1z, ..., p2j15z` (91 comma-separated fields).
/// z values are discarded. Coordinates are passed through when the file is
/// already in normalized units (max coordinate <= 1.05) and otherwise
/// divided by the file's max extent; either way the result is clamped to
/// [0,1]. Frames are ordered by frame index.
///
/// Returns a sequence with frames populated; set_id, video_id and label are
/// left for the caller to fill from the directory layout.
inline InteractionSequence parse_sbu_skeleton(std::istream& in) {
  struct RawFrame {
    long index;
    std::array<Point, 2 * kSbuJointCount> pts;  // person-major, file joint order
  };
  std::vector<RawFrame> raw;

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view sv(line);
    if (!sv.empty() && sv.back() == '\r') sv.remove_suffix(1);
    if (sv.find_first_not_of(" \t,") == std::string_view::npos) continue;  // blank line

    std::vector<std::string_view> tok;
    tok.reserve(kSbuFieldsPerLine);
    std::size_t start = 0;
    while (true) {
      std::size_t comma = sv.find(',', start);
      tok.push_back(sv.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (static_cast<int>(tok.size()) != kSbuFieldsPerLine)
      throw ParseError("skeleton line " + std::to_string(line_no) + ": expected " +
                       std::to_string(kSbuFieldsPerLine) + " comma-separated values, got " +
                       std::to_string(tok.size()));

    RawFrame f{};
    if (!detail::parse_int(tok[0], f.index) || f.index < 0)
      throw ParseError("skeleton line " + std::to_string(line_no) +
                       ": invalid frame index '" + std::string(tok[0]) + "'");
    for (int j = 0; j < 2 * kSbuJointCount; ++j) {
      double x, y, z;
      if (!detail::parse_double(tok[1 + 3 * j], x) || !detail::parse_double(tok[2 + 3 * j], y) ||
          !detail::parse_double(tok[3 + 3 * j], z))
        throw ParseError("skeleton line " + std::to_string(line_no) +
                         ": non-numeric coordinate near field " + std::to_string(2 + 3 * j));
      f.pts[j] = {x, y};
    }
    raw.push_back(f);
  }
  if (raw.empty()) throw ParseError("skeleton stream: no frames");

  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawFrame& a, const RawFrame& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < raw.size(); ++i)
    if (raw[i].index == raw[i - 1].index)
      throw ParseError("skeleton stream: duplicate frame index " + std::to_string(raw[i].index));

  double max_extent = 0.0;
  for (const auto& f : raw)
    for (const auto& p : f.pts) max_extent = std::max({max_extent, std::abs(p.x), std::abs(p.y)});
  const double scale = max_extent > 1.05 ? max_extent : 1.0;

  InteractionSequence seq;
  seq.frames.reserve(raw.size());
  for (const auto& f : raw) {
    PoseFrame frame;
    frame.frame_index = static_cast<int>(f.index);
    for (int person = 0; person < 2; ++person) {
      PersonPose& pose = person == 0 ? frame.person1 : frame.person2;
      for (int j = 0; j < kSbuJointCount; ++j) {
        int model = kSbuToModelJoint[j];
        if (model < 0) continue;
        Point p = f.pts[person * kSbuJointCount + j];
        p.x = std::min(1.0, std::max(0.0, p.x / scale));
        p.y = std::min(1.0, std::max(0.0, p.y / scale));
        pose.joints[model] = p;
      }
    }
    seq.frames.push_back(frame);
  }
  return seq;
}

/// Writes a sequence back out in the 91-field skeleton format. Joints with
/// no counterpart in the 12-joint model (torso, feet) and all z values are
/// written as 0. Decimal text is exact, so reparsing reproduces the
/// sequence's frames bit for bit.
inline void serialize_sbu_skeleton(const InteractionSequence& seq, std::ostream& out) {
  for (const auto& frame : seq.frames) {
    out << frame.frame_index;
    for (int person = 0; person < 2; ++person) {
      const PersonPose& pose = person == 0 ? frame.person1 : frame.person2;
      for (int j = 0; j < kSbuJointCount; ++j) {
        int model = kSbuToModelJoint[j];
        Point p = model >= 0 ? pose.joints[model] : Point{0.0, 0.0};
        out << ',' << detail::format_double(p.x) << ',' << detail::format_double(p.y) << ",0";
      }
    }
    out << '\n';
  }
}

/// One row of a dataset manifest.
struct DatasetEntry {
  std::string video_id;
  int set_id = 0;
  InteractionLabel label = InteractionLabel::Approaching;
  int frame_count = 0;
  std::string path;
};

struct Dataset {
  std::vector<InteractionSequence> sequences;
  std::vector<DatasetEntry> entries;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::optional<int> parse_set_dir(const std::string& name) {
  if (name.size() < 2 || (name[0] != 's' && name[0] != 'S')) return std::nullopt;
  std::string digits = name.substr(1);
  if (digits.find_first_not_of("0123456789") != std::string::npos) return std::nullopt;
  return std::stoi(digits);
}

inline std::vector<std::filesystem::path> sorted_subdirs(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_directory()) out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Walks `<root>/s<set>/<class_dir>/<video>/skeleton.txt` and loads every
/// readable sequence. Unreadable or malformed files become warnings, not
/// errors. Traversal order is sorted, so the result is deterministic.
inline Dataset load_sbu_dataset(const std::filesystem::path& root) {
  Dataset ds;
  if (!std::filesystem::is_directory(root)) {
    ds.warnings.push_back("dataset root is not a directory: " + root.string());
    return ds;
  }
  for (const auto& set_dir : detail::sorted_subdirs(root)) {
    auto set_id = detail::parse_set_dir(set_dir.filename().string());
    if (!set_id) continue;
    for (const auto& class_dir : detail::sorted_subdirs(set_dir)) {
      auto label = label_from_class_dir(class_dir.filename().string());
      if (!label) {
        ds.warnings.push_back("unrecognized class directory: " + class_dir.string());
        continue;
      }
      for (const auto& video_dir : detail::sorted_subdirs(class_dir)) {
        auto file = video_dir / "skeleton.txt";
        if (!std::filesystem::is_regular_file(file)) {
          ds.warnings.push_back("missing skeleton.txt in " + video_dir.string());
          continue;
        }
        std::ifstream in(file);
        if (!in) {
          ds.warnings.push_back("unreadable file: " + file.string());
          continue;
        }
        std::string video_id = set_dir.filename().string() + "/" +
                               class_dir.filename().string() + "/" +
                               video_dir.filename().string();
        try {
          InteractionSequence seq = parse_sbu_skeleton(in);
          seq.set_id = *set_id;
          seq.video_id = video_id;
          seq.label = *label;
          ds.entries.push_back({video_id, *set_id, *label,
                                static_cast<int>(seq.frames.size()), file.string()});
          ds.sequences.push_back(std::move(seq));
        } catch (const ParseError& e) {
          ds.warnings.push_back(file.string() + ": " + e.what());
        }
      }
    }
  }
  return ds;
}

}  // namespace duet
