#include "ecr/ingest.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "ecr/errors.hpp"

namespace ecr {

using nlohmann::json;

bool validate_keypoint(const Keypoint& k, double threshold) {
  return std::isfinite(k.x) && std::isfinite(k.y) && std::isfinite(k.confidence) &&
         k.confidence >= threshold;
}

static Detection parse_detection_line(const json& rec, std::size_t line_no) {
  Detection det;
  if (!rec.is_object() || !rec.contains("frame") || !rec.contains("bbox") ||
      !rec.contains("keypoints")) {
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line_no) + ": missing frame/bbox/keypoints");
  }
  det.frame_index = rec.at("frame").get<std::int64_t>();
  if (det.frame_index < 0) {
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line_no) + ": negative frame index");
  }
  const json& bb = rec.at("bbox");
  if (!bb.is_array() || bb.size() != 4) {
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line_no) + ": bbox must be 4 numbers");
  }
  det.bbox = Box{bb[0].get<double>(), bb[1].get<double>(), bb[2].get<double>(),
                 bb[3].get<double>()};
  if (!det.bbox.valid()) {
    throw Error(ErrorCode::MalformedRecord,
                "line " + std::to_string(line_no) + ": bbox not x1<x2, y1<y2");
  }
  const json& kps = rec.at("keypoints");
  if (!kps.is_array() || kps.size() != kp::kCount) {
    throw Error(ErrorCode::WrongKeypointCount,
                "line " + std::to_string(line_no) + ": expected 26 keypoints, got " +
                    std::to_string(kps.is_array() ? kps.size() : 0));
  }
  for (int i = 0; i < kp::kCount; ++i) {
    const json& k = kps[i];
    if (!k.is_array() || k.size() != 3) {
      throw Error(ErrorCode::MalformedRecord,
                  "line " + std::to_string(line_no) + ": keypoint " + std::to_string(i) +
                      " must be [x,y,conf]");
    }
    det.keypoints[i] = Keypoint{k[0].get<double>(), k[1].get<double>(), k[2].get<double>()};
    double c = det.keypoints[i].confidence;
    if (std::isfinite(c) && (c < 0.0 || c > 1.0)) {
      throw Error(ErrorCode::MalformedRecord,
                  "line " + std::to_string(line_no) + ": confidence outside [0,1]");
    }
  }
  if (rec.contains("track_hint") && !rec.at("track_hint").is_null()) {
    det.track_hint = rec.at("track_hint").get<std::int64_t>();
  }
  return det;
}

FrameSequence parse_frames(std::istream& in, double fps) {
  if (!(fps > 0.0)) throw Error(ErrorCode::BadConfig, "fps must be > 0");
  FrameSequence seq;
  seq.fps = fps;

  std::string line;
  std::size_t line_no = 0;
  std::int64_t last_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::MalformedRecord,
                  "line " + std::to_string(line_no) + ": " + e.what());
    }
    Detection det = parse_detection_line(rec, line_no);
    if (det.frame_index < last_index) {
      throw Error(ErrorCode::NonMonotonicFrameIndex,
                  "line " + std::to_string(line_no) + ": frame " +
                      std::to_string(det.frame_index) + " after " + std::to_string(last_index));
    }
    if (seq.frames.empty() || seq.frames.back().frame_index != det.frame_index) {
      seq.frames.push_back(Frame{det.frame_index, {}});
    }
    last_index = det.frame_index;
    seq.frames.back().detections.push_back(std::move(det));
  }
  return seq;
}

FrameSequence parse_frames_file(const std::string& path, double fps) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  return parse_frames(in, fps);
}

void serialize_frames(const FrameSequence& seq, std::ostream& out) {
  for (const Frame& frame : seq.frames) {
    for (const Detection& det : frame.detections) {
      json rec;
      rec["frame"] = det.frame_index;
      rec["bbox"] = {det.bbox.x1, det.bbox.y1, det.bbox.x2, det.bbox.y2};
      json kps = json::array();
      for (const Keypoint& k : det.keypoints) {
        kps.push_back({k.x, k.y, k.confidence});
      }
      rec["keypoints"] = std::move(kps);
      if (det.track_hint) rec["track_hint"] = *det.track_hint;
      out << rec.dump() << '\n';
    }
  }
}

}  // namespace ecr
