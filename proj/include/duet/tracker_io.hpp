#pragma once

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "duet/tracker.hpp"

namespace duet {

/// Parsed detections file: pixel bboxes per frame plus the frame
/// dimensions used to normalize them.
struct DetectionFile {
  double width = 0;
  double height = 0;
  struct Frame {
    int index = 0;
    std::vector<Detection> detections;
  };
  std::vector<Frame> frames;
};

/// Format: `{"width":W,"height":H,"frames":[{"index":i,
/// "detections":[[x_min,y_min,x_max,y_max,score],...]},...]}`.
inline DetectionFile parse_detections(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("detections file: invalid JSON: ") + e.what());
  }
  DetectionFile out;
  if (!doc.is_object() || !doc.contains("width") || !doc.contains("height") ||
      !doc.contains("frames"))
    throw ParseError("detections file: need width, height and frames fields");
  out.width = doc.at("width").get<double>();
  out.height = doc.at("height").get<double>();
  if (out.width <= 0 || out.height <= 0)
    throw ParseError("detections file: dimensions must be positive");
  const auto& frames = doc.at("frames");
  if (!frames.is_array()) throw ParseError("detections file: frames is not a list");
  for (std::size_t fi = 0; fi < frames.size(); ++fi) {
    const auto& jf = frames[fi];
    const std::string path = "frames[" + std::to_string(fi) + "]";
    if (!jf.is_object() || !jf.contains("index") || !jf.contains("detections"))
      throw ParseError("detections file: " + path + " needs index and detections");
    DetectionFile::Frame frame;
    frame.index = jf.at("index").get<int>();
    const auto& dets = jf.at("detections");
    if (!dets.is_array()) throw ParseError("detections file: " + path + ".detections is not a list");
    for (std::size_t di = 0; di < dets.size(); ++di) {
      const auto& jd = dets[di];
      if (!jd.is_array() || jd.size() != 5)
        throw ParseError("detections file: " + path + ".detections[" + std::to_string(di) +
                         "] must be [x_min,y_min,x_max,y_max,score]");
      Detection d;
      d.frame_index = frame.index;
      d.x_min = jd[0].get<double>();
      d.y_min = jd[1].get<double>();
      d.x_max = jd[2].get<double>();
      d.y_max = jd[3].get<double>();
      d.score = jd[4].get<double>();
      try {
        d.validate();
      } catch (const std::invalid_argument& e) {
        throw ParseError("detections file: " + path + ".detections[" + std::to_string(di) +
                         "]: " + e.what());
      }
      frame.detections.push_back(d);
    }
    out.frames.push_back(std::move(frame));
  }
  std::stable_sort(out.frames.begin(), out.frames.end(),
                   [](const auto& a, const auto& b) { return a.index < b.index; });
  for (std::size_t i = 1; i < out.frames.size(); ++i)
    if (out.frames[i].index == out.frames[i - 1].index)
      throw ParseError("detections file: duplicate frame index " +
                       std::to_string(out.frames[i].index));
  return out;
}

struct TrackSnapshot {
  int id = 0;
  double cx = 0, cy = 0;  // normalized
  TrackStatus status = TrackStatus::Confirmed;
};

struct TrackingRun {
  struct Frame {
    int index = 0;
    std::vector<TrackSnapshot> tracks;  // confirmed tracks only
  };
  std::vector<Frame> frames;
  std::optional<std::pair<int, int>> persons;  // (person1, person2) track ids
};

inline std::string_view track_status_name(TrackStatus s) {
  switch (s) {
    case TrackStatus::Tentative: return "tentative";
    case TrackStatus::Confirmed: return "confirmed";
    case TrackStatus::Deleted: return "deleted";
  }
  return "unknown";
}

/// Drives a tracker over a whole detections file. Detections below
/// `min_score` are ignored; the person1/person2 assignment comes from the
/// final frame's confirmed tracks when at least two survive.
inline TrackingRun track_detection_file(const DetectionFile& file, const TrackerConfig& cfg,
                                        double min_score = 0.0) {
  Tracker tracker(cfg);
  TrackingRun run;
  std::vector<Track> confirmed;
  for (const auto& frame : file.frames) {
    std::vector<Point> centroids;
    for (const Detection& d : frame.detections) {
      if (d.score < min_score) continue;
      Point c = d.center();
      centroids.push_back({c.x / file.width, c.y / file.height});
    }
    confirmed = tracker.step(frame.index, centroids);
    TrackingRun::Frame out;
    out.index = frame.index;
    for (const Track& t : confirmed)
      out.tracks.push_back({t.id, t.state.mean[0], t.state.mean[1], t.status});
    run.frames.push_back(std::move(out));
  }
  if (confirmed.size() >= 2) run.persons = person_identities(confirmed);
  return run;
}

inline void write_tracks_json(const TrackingRun& run, std::ostream& out) {
  nlohmann::json doc;
  doc["frames"] = nlohmann::json::array();
  for (const auto& frame : run.frames) {
    nlohmann::json jf;
    jf["index"] = frame.index;
    jf["tracks"] = nlohmann::json::array();
    for (const TrackSnapshot& t : frame.tracks) {
      nlohmann::json jt;
      jt["id"] = t.id;
      jt["cx"] = t.cx;
      jt["cy"] = t.cy;
      jt["status"] = std::string(track_status_name(t.status));
      jf["tracks"].push_back(std::move(jt));
    }
    doc["frames"].push_back(std::move(jf));
  }
  if (run.persons) {
    doc["person1"] = run.persons->first;
    doc["person2"] = run.persons->second;
  }
  out << doc.dump(2) << '\n';
}

}  // namespace duet
