#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "duet/hungarian.hpp"
#include "duet/pose.hpp"

namespace duet {

using Mat4 = std::array<std::array<double, 4>, 4>;

namespace detail {

inline Mat4 mat4_zero() { return {}; }

inline Mat4 mat4_mul(const Mat4& a, const Mat4& b) {
  Mat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) {
      double aik = a[i][k];
      if (aik == 0.0) continue;
      for (int j = 0; j < 4; ++j) r[i][j] += aik * b[k][j];
    }
  return r;
}

inline Mat4 mat4_transpose(const Mat4& a) {
  Mat4 r{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) r[i][j] = a[j][i];
  return r;
}

inline void mat4_symmetrize(Mat4& a) {
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      double v = 0.5 * (a[i][j] + a[j][i]);
      a[i][j] = v;
      a[j][i] = v;
    }
}

}  // namespace detail

/// Constant-velocity state for one tracked person: (cx, cy, vx, vy) in
/// normalized units and units per frame.
struct KalmanState {
  std::array<double, 4> mean{};
  Mat4 covariance{};
};

struct TrackerConfig {
  double process_noise_pos = 1e-4;
  double process_noise_vel = 1e-4;
  double measurement_noise = 1e-4;
  double gate = 0.2;   // max track-detection distance for a match
  int confirm_hits = 3;
  int max_misses = 10;

  void validate() const {
    if (!(process_noise_pos > 0)) throw std::invalid_argument("TrackerConfig: process_noise_pos must be > 0");
    if (!(process_noise_vel > 0)) throw std::invalid_argument("TrackerConfig: process_noise_vel must be > 0");
    if (!(measurement_noise > 0)) throw std::invalid_argument("TrackerConfig: measurement_noise must be > 0");
    if (!(gate > 0)) throw std::invalid_argument("TrackerConfig: gate must be > 0");
    if (confirm_hits < 1) throw std::invalid_argument("TrackerConfig: confirm_hits must be >= 1");
    if (max_misses < 1) throw std::invalid_argument("TrackerConfig: max_misses must be >= 1");
  }
};

/// One predict step of the constant-velocity model (dt = 1 frame).
inline KalmanState kf_predict(const KalmanState& s, const TrackerConfig& cfg) {
  // F = [I2 I2; 0 I2]
  KalmanState out;
  out.mean = {s.mean[0] + s.mean[2], s.mean[1] + s.mean[3], s.mean[2], s.mean[3]};

  Mat4 f{};
  for (int i = 0; i < 4; ++i) f[i][i] = 1.0;
  f[0][2] = 1.0;
  f[1][3] = 1.0;
  out.covariance = detail::mat4_mul(detail::mat4_mul(f, s.covariance), detail::mat4_transpose(f));
  out.covariance[0][0] += cfg.process_noise_pos;
  out.covariance[1][1] += cfg.process_noise_pos;
  out.covariance[2][2] += cfg.process_noise_vel;
  out.covariance[3][3] += cfg.process_noise_vel;
  detail::mat4_symmetrize(out.covariance);
  return out;
}

/// Measurement update with an observed centroid. H selects (cx, cy);
/// posterior covariance is (I - K H) P.
inline KalmanState kf_update(const KalmanState& s, Point measurement, const TrackerConfig& cfg) {
  if (!std::isfinite(measurement.x) || !std::isfinite(measurement.y))
    throw std::invalid_argument("kf_update: measurement must be finite");

  const Mat4& p = s.covariance;
  // S = H P Ht + R (2x2)
  double s00 = p[0][0] + cfg.measurement_noise;
  double s01 = p[0][1];
  double s10 = p[1][0];
  double s11 = p[1][1] + cfg.measurement_noise;
  double det = s00 * s11 - s01 * s10;
  double i00 = s11 / det, i01 = -s01 / det, i10 = -s10 / det, i11 = s00 / det;

  // K = P Ht S^-1 (4x2); P Ht is the first two columns of P.
  std::array<std::array<double, 2>, 4> k{};
  for (int i = 0; i < 4; ++i) {
    k[i][0] = p[i][0] * i00 + p[i][1] * i10;
    k[i][1] = p[i][0] * i01 + p[i][1] * i11;
  }

  double innov_x = measurement.x - s.mean[0];
  double innov_y = measurement.y - s.mean[1];

  KalmanState out;
  for (int i = 0; i < 4; ++i) out.mean[i] = s.mean[i] + k[i][0] * innov_x + k[i][1] * innov_y;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      out.covariance[i][j] = p[i][j] - (k[i][0] * p[0][j] + k[i][1] * p[1][j]);
  detail::mat4_symmetrize(out.covariance);
  return out;
}

enum class TrackStatus { Tentative, Confirmed, Deleted };

struct Track {
  int id = 0;
  KalmanState state;
  int hits = 0;     // consecutive matched frames
  int misses = 0;   // consecutive missed frames
  TrackStatus status = TrackStatus::Tentative;
  double birth_x = 0.0;  // normalized x at creation, used for person ordering

  Point position() const { return {state.mean[0], state.mean[1]}; }
};

struct Association {
  std::vector<std::pair<int, int>> matches;  // (track index, detection index)
  std::vector<int> unmatched_tracks;
  std::vector<int> unmatched_detections;
};

/// Globally optimal track-detection assignment on centroid distance, with
/// pairs beyond the gate removed afterwards and reported unmatched.
inline Association associate(const std::vector<Track>& tracks,
                             const std::vector<Point>& detections, const TrackerConfig& cfg) {
  Association out;
  std::vector<std::vector<double>> cost(tracks.size(), std::vector<double>(detections.size()));
  for (std::size_t t = 0; t < tracks.size(); ++t)
    for (std::size_t d = 0; d < detections.size(); ++d)
      cost[t][d] = distance(tracks[t].position(), detections[d]);

  std::vector<char> track_used(tracks.size(), 0), det_used(detections.size(), 0);
  for (auto [t, d] : hungarian(cost)) {
    if (cost[t][d] > cfg.gate) continue;
    out.matches.emplace_back(t, d);
    track_used[t] = 1;
    det_used[d] = 1;
  }
  for (std::size_t t = 0; t < tracks.size(); ++t)
    if (!track_used[t]) out.unmatched_tracks.push_back(static_cast<int>(t));
  for (std::size_t d = 0; d < detections.size(); ++d)
    if (!det_used[d]) out.unmatched_detections.push_back(static_cast<int>(d));
  return out;
}

/// Sequential multi-target tracker: per-track constant-velocity Kalman
/// filters, Hungarian association, hit/miss lifecycle. Feed one frame of
/// detection centroids (normalized units) per step call, in frame order.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  /// Advances one frame and returns the confirmed tracks.
  std::vector<Track> step(int frame_index, const std::vector<Point>& detections) {
    if (last_frame_ && frame_index <= *last_frame_)
      throw std::invalid_argument("Tracker::step: frame index must increase across calls");
    last_frame_ = frame_index;

    for (Track& t : tracks_) t.state = kf_predict(t.state, cfg_);

    Association assoc = associate(tracks_, detections, cfg_);
    for (auto [ti, di] : assoc.matches) {
      Track& t = tracks_[ti];
      t.state = kf_update(t.state, detections[di], cfg_);
      t.hits += 1;
      t.misses = 0;
      if (t.status == TrackStatus::Tentative && t.hits >= cfg_.confirm_hits)
        t.status = TrackStatus::Confirmed;
    }
    for (int ti : assoc.unmatched_tracks) {
      Track& t = tracks_[ti];
      t.misses += 1;
      t.hits = 0;
      if (t.misses >= cfg_.max_misses) t.status = TrackStatus::Deleted;
    }
    for (int di : assoc.unmatched_detections) {
      Track t;
      t.id = next_id_++;
      t.state.mean = {detections[di].x, detections[di].y, 0.0, 0.0};
      t.state.covariance = detail::mat4_zero();
      t.state.covariance[0][0] = cfg_.measurement_noise;
      t.state.covariance[1][1] = cfg_.measurement_noise;
      t.state.covariance[2][2] = 1e-2;  // uninformative velocity prior
      t.state.covariance[3][3] = 1e-2;
      t.hits = 1;
      t.birth_x = detections[di].x;
      t.status = cfg_.confirm_hits <= 1 ? TrackStatus::Confirmed : TrackStatus::Tentative;
      tracks_.push_back(t);
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::Deleted; });

    std::vector<Track> confirmed;
    for (const Track& t : tracks_)
      if (t.status == TrackStatus::Confirmed) confirmed.push_back(t);
    return confirmed;
  }

  const std::vector<Track>& tracks() const { return tracks_; }
  const TrackerConfig& config() const { return cfg_; }

 private:
  TrackerConfig cfg_;
  std::vector<Track> tracks_;
  int next_id_ = 1;
  std::optional<int> last_frame_;
};

/// Picks the two most reliable confirmed tracks and orders them so person1
/// is the one born leftmost (ties by smaller id). The ordering depends only
/// on birth position, so it is stable for the lifetime of both tracks.
inline std::pair<int, int> person_identities(const std::vector<Track>& confirmed_tracks) {
  std::vector<const Track*> c;
  for (const Track& t : confirmed_tracks)
    if (t.status == TrackStatus::Confirmed) c.push_back(&t);
  if (c.size() < 2)
    throw NotEnoughPersonsError("person_identities: need at least 2 confirmed tracks, have " +
                                std::to_string(c.size()));
  std::sort(c.begin(), c.end(), [](const Track* a, const Track* b) {
    if (a->hits != b->hits) return a->hits > b->hits;
    return a->id < b->id;
  });
  const Track* a = c[0];
  const Track* b = c[1];
  if (a->birth_x > b->birth_x || (a->birth_x == b->birth_x && a->id > b->id)) std::swap(a, b);
  return {a->id, b->id};
}

}  // namespace duet
