#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "ecr/geometry.hpp"

namespace ecr {

// Halpe26 keypoint indices (AlphaPose convention).
namespace kp {
inline constexpr int kNose = 0;
inline constexpr int kLEye = 1;
inline constexpr int kREye = 2;
inline constexpr int kLEar = 3;
inline constexpr int kREar = 4;
inline constexpr int kLShoulder = 5;
inline constexpr int kRShoulder = 6;
inline constexpr int kLElbow = 7;
inline constexpr int kRElbow = 8;
inline constexpr int kLWrist = 9;
inline constexpr int kRWrist = 10;
inline constexpr int kLHip = 11;
inline constexpr int kRHip = 12;
inline constexpr int kLKnee = 13;
inline constexpr int kRKnee = 14;
inline constexpr int kLAnkle = 15;
inline constexpr int kRAnkle = 16;
inline constexpr int kHead = 17;
inline constexpr int kNeck = 18;
inline constexpr int kHipCenter = 19;
inline constexpr int kLBigToe = 20;
inline constexpr int kRBigToe = 21;
inline constexpr int kLSmallToe = 22;
inline constexpr int kRSmallToe = 23;
inline constexpr int kLHeel = 24;
inline constexpr int kRHeel = 25;

inline constexpr int kCount = 26;

// The six ankle/heel/toe points used for the foot position estimate (big toes
// stand in for "toe"; small toes are redundant with them for this purpose).
inline constexpr std::array<int, 6> kFootSet = {kLAnkle, kRAnkle, kLBigToe,
                                                kRBigToe, kLHeel, kRHeel};
}  // namespace kp

struct Keypoint {
  double x = 0.0;
  double y = 0.0;
  double confidence = 0.0;

  Vec2 point() const { return {x, y}; }
};

// True iff the keypoint is trustworthy at the given confidence threshold.
bool validate_keypoint(const Keypoint& k, double threshold);

struct Detection {
  std::int64_t frame_index = 0;
  Box bbox;
  std::array<Keypoint, kp::kCount> keypoints{};
  std::optional<std::int64_t> track_hint;
};

struct Frame {
  std::int64_t frame_index = 0;
  std::vector<Detection> detections;
};

struct FrameSequence {
  std::vector<Frame> frames;  // frame_index strictly increasing
  double fps = 30.0;

  bool empty() const { return frames.empty(); }
  std::int64_t first_frame() const { return frames.empty() ? 0 : frames.front().frame_index; }
  std::int64_t last_frame() const { return frames.empty() ? -1 : frames.back().frame_index; }
};

}  // namespace ecr
