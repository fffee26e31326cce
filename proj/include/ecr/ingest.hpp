#pragma once

#include <iosfwd>
#include <string>

#include "ecr/keypoints.hpp"

namespace ecr {

// Parses a UTF-8 line-delimited JSON detection stream. One object per
// detection: {"frame": n, "bbox": [x1,y1,x2,y2], "keypoints": [[x,y,c] * 26],
// "track_hint": n?}. Frame indices must be nondecreasing across lines; blank
// lines are ignored. Detections keep their within-frame input order.
FrameSequence parse_frames(std::istream& in, double fps = 30.0);

FrameSequence parse_frames_file(const std::string& path, double fps = 30.0);

// Inverse of parse_frames: emits one JSON object per line, round-trip exact.
void serialize_frames(const FrameSequence& seq, std::ostream& out);

}  // namespace ecr
