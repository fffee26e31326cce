#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "ecr/tracking.hpp"

using namespace ecr;

namespace {

Detection make_detection(std::int64_t frame, const Box& box) {
  Detection det;
  det.frame_index = frame;
  det.bbox = box;
  for (int i = 0; i < kp::kCount; ++i) {
    det.keypoints[i] = Keypoint{box.center().x, box.center().y, 0.9};
  }
  return det;
}

Box box_at(double cx, double cy, double w = 40, double h = 80) {
  return Box{cx - w / 2, cy - h / 2, cx + w / 2, cy + h / 2};
}

FrameSequence sequence_from(const std::vector<std::vector<Detection>>& frames, double fps = 30) {
  FrameSequence seq;
  seq.fps = fps;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (frames[f].empty()) continue;
    Frame frame;
    frame.frame_index = std::int64_t(f);
    frame.detections = frames[f];
    seq.frames.push_back(std::move(frame));
  }
  return seq;
}

}  // namespace

TEST_CASE("predict holds a stationary box") {
  TrackState state;
  state.filter = BoxKalmanFilter(box_to_measurement(box_at(100, 100)));
  Box predicted = predict(state);
  CHECK(predicted.center().x == doctest::Approx(100.0));
  CHECK(predicted.center().y == doctest::Approx(100.0));
  CHECK(state.time_since_update == 1);
  CHECK(state.age == 1);
}

TEST_CASE("predict propagates center velocity") {
  TrackState state;
  state.filter = BoxKalmanFilter(box_to_measurement(box_at(100, 100)));
  // Feed two updates to establish velocity (2, 0), then check one step.
  Track track;
  track.state = state;
  track.observations[0] = make_detection(0, box_at(100, 100));
  track.post_update_filter = track.state.filter;
  TrackerParams params;
  for (int f = 1; f <= 25; ++f) {
    predict(track.state);
    update(track, make_detection(f, box_at(100 + 2.0 * f, 100)), f, params);
  }
  Box predicted = predict(track.state);
  CHECK(predicted.center().x == doctest::Approx(152.0).epsilon(1e-3));
  CHECK(predicted.center().y == doctest::Approx(100.0).epsilon(1e-3));
}

TEST_CASE("3-step prediction displaces by 3x the velocity") {
  Track track;
  track.state.filter = BoxKalmanFilter(box_to_measurement(box_at(0, 0)));
  track.observations[0] = make_detection(0, box_at(0, 0));
  track.post_update_filter = track.state.filter;
  TrackerParams params;
  for (int f = 1; f <= 30; ++f) {
    predict(track.state);
    update(track, make_detection(f, box_at(1.0 * f, 1.0 * f)), f, params);
  }
  Box p1 = predict(track.state);
  Box p2 = predict(track.state);
  Box p3 = predict(track.state);
  (void)p1;
  (void)p2;
  CHECK(p3.center().x == doctest::Approx(33.0).epsilon(1e-3));
  CHECK(p3.center().y == doctest::Approx(33.0).epsilon(1e-3));
}

TEST_CASE("associate matches identical boxes and rejects zero overlap") {
  TrackerParams params;
  std::vector<TrackPrediction> preds(1);
  preds[0].track_index = 0;
  preds[0].predicted_box = box_at(100, 100);

  SUBCASE("perfect overlap") {
    std::vector<Detection> dets = {make_detection(0, box_at(100, 100))};
    AssociationResult res = associate(preds, dets, params);
    REQUIRE(res.matches.size() == 1);
    CHECK(res.matches[0] == std::pair<int, int>{0, 0});
  }
  SUBCASE("zero overlap leaves both unmatched") {
    std::vector<Detection> dets = {make_detection(0, box_at(500, 500))};
    AssociationResult res = associate(preds, dets, params);
    CHECK(res.matches.empty());
    CHECK(res.unmatched_tracks == std::vector<int>{0});
    CHECK(res.unmatched_detections == std::vector<int>{0});
  }
}

TEST_CASE("associate uses direction consistency to resolve a crossing") {
  TrackerParams params;
  // Two tracks crossing at the same midpoint with opposite directions. The
  // predicted boxes are both at the meeting point; direction breaks the tie.
  std::vector<TrackPrediction> preds(2);
  preds[0].track_index = 0;
  preds[0].predicted_box = box_at(100, 100);
  preds[0].direction_estimate = Vec2{1, 0};
  preds[0].last_observation_center = Vec2{96, 100};
  preds[1].track_index = 1;
  preds[1].predicted_box = box_at(102, 100);
  preds[1].direction_estimate = Vec2{-1, 0};
  preds[1].last_observation_center = Vec2{106, 100};

  // True continuations: track 0 keeps moving right, track 1 keeps moving left.
  std::vector<Detection> dets = {make_detection(0, box_at(110, 100)),
                                 make_detection(0, box_at(92, 100))};
  AssociationResult res = associate(preds, dets, params);
  REQUIRE(res.matches.size() == 2);
  for (auto [ti, di] : res.matches) {
    if (ti == 0) CHECK(di == 0);
    if (ti == 1) CHECK(di == 1);
  }
}

TEST_CASE("update with measurement equal to prediction keeps the mean") {
  Track track;
  track.state.filter = BoxKalmanFilter(box_to_measurement(box_at(100, 100)));
  track.observations[0] = make_detection(0, box_at(100, 100));
  track.post_update_filter = track.state.filter;
  TrackerParams params;
  predict(track.state);
  Eigen::Vector4d before = track.state.filter.measurement_view();
  update(track, make_detection(1, measurement_to_box(before)), 1, params);
  Eigen::Vector4d after = track.state.filter.measurement_view();
  CHECK((after - before).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("update resets time_since_update after a miss") {
  Track track;
  track.state.filter = BoxKalmanFilter(box_to_measurement(box_at(100, 100)));
  track.observations[0] = make_detection(0, box_at(100, 100));
  track.post_update_filter = track.state.filter;
  TrackerParams params;
  predict(track.state);  // miss
  predict(track.state);
  CHECK(track.state.time_since_update == 2);
  update(track, make_detection(2, box_at(100, 100)), 2, params);
  CHECK(track.state.time_since_update == 0);
  CHECK(track.state.hit_streak == 1);
}

TEST_CASE("velocity estimate converges on a noiseless linear path") {
  Track track;
  track.state.filter = BoxKalmanFilter(box_to_measurement(box_at(0, 0)));
  track.observations[0] = make_detection(0, box_at(0, 0));
  track.post_update_filter = track.state.filter;
  TrackerParams params;
  for (int f = 1; f <= 20; ++f) {
    predict(track.state);
    update(track, make_detection(f, box_at(3.0 * f, -1.0 * f)), f, params);
  }
  const auto& x = track.state.filter.state();
  CHECK(std::abs(x(4) - 3.0) < 1e-3);
  CHECK(std::abs(x(5) + 1.0) < 1e-3);
}

TEST_CASE("reupdate with a 0-frame gap equals a plain update") {
  TrackerParams params;
  auto build = [&] {
    Track t;
    t.state.filter = BoxKalmanFilter(box_to_measurement(box_at(50, 50)));
    t.observations[0] = make_detection(0, box_at(50, 50));
    t.last_observation_frame = 0;
    t.last_observation_box = box_at(50, 50);
    t.post_update_filter = t.state.filter;
    return t;
  };
  Track plain = build();
  Track replayed = build();
  Detection det = make_detection(1, box_at(53, 50));

  predict(plain.state);
  update(plain, det, 1, params);
  predict(replayed.state);
  reupdate_after_gap(replayed, det, 1, params);

  CHECK((plain.state.filter.state() - replayed.state.filter.state()).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK((plain.state.filter.covariance() - replayed.state.filter.covariance())
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("reupdate after a constant-velocity occlusion matches the uninterrupted run") {
  TrackerParams params;
  auto box_for = [](int f) { return box_at(10.0 + 4.0 * f, 200.0 - 1.5 * f); };

  // Uninterrupted run over frames 0..20.
  Track full;
  full.state.filter = BoxKalmanFilter(box_to_measurement(box_for(0)));
  full.observations[0] = make_detection(0, box_for(0));
  full.last_observation_frame = 0;
  full.last_observation_box = box_for(0);
  full.post_update_filter = full.state.filter;
  for (int f = 1; f <= 20; ++f) {
    predict(full.state);
    update(full, make_detection(f, box_for(f)), f, params);
  }

  // Same run with frames 15..19 occluded and a re-update at frame 20.
  Track gappy;
  gappy.state.filter = BoxKalmanFilter(box_to_measurement(box_for(0)));
  gappy.observations[0] = make_detection(0, box_for(0));
  gappy.last_observation_frame = 0;
  gappy.last_observation_box = box_for(0);
  gappy.post_update_filter = gappy.state.filter;
  for (int f = 1; f <= 14; ++f) {
    predict(gappy.state);
    update(gappy, make_detection(f, box_for(f)), f, params);
  }
  for (int f = 15; f <= 20; ++f) predict(gappy.state);
  reupdate_after_gap(gappy, make_detection(20, box_for(20)), 20, params);

  CHECK((full.state.filter.state() - gappy.state.filter.state()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("reupdate beats pure prediction through a turn") {
  TrackerParams params;
  // Straight until frame 14, then the object turns. True position at 20:
  auto pos = [](int f) {
    if (f <= 14) return Vec2{10.0 + 4.0 * f, 100.0};
    return Vec2{10.0 + 4.0 * 14 + 2.0 * (f - 14), 100.0 + 3.0 * (f - 14)};
  };
  auto build = [&] {
    Track t;
    t.state.filter = BoxKalmanFilter(box_to_measurement(box_at(pos(0).x, pos(0).y)));
    t.observations[0] = make_detection(0, box_at(pos(0).x, pos(0).y));
    t.last_observation_frame = 0;
    t.last_observation_box = box_at(pos(0).x, pos(0).y);
    t.post_update_filter = t.state.filter;
    for (int f = 1; f <= 14; ++f) {
      predict(t.state);
      update(t, make_detection(f, box_at(pos(f).x, pos(f).y)), f, params);
    }
    for (int f = 15; f <= 20; ++f) predict(t.state);
    return t;
  };

  Track with_replay = build();
  Track without_replay = build();
  Detection redetection = make_detection(20, box_at(pos(20).x, pos(20).y));

  reupdate_after_gap(with_replay, redetection, 20, params);
  update(without_replay, redetection, 20, params);

  // One more blind step: the replayed velocity should track the turn better.
  predict(with_replay.state);
  predict(without_replay.state);
  Vec2 truth = pos(21);
  double err_replay = (measurement_to_box(with_replay.state.filter.measurement_view()).center() -
                       truth)
                          .norm();
  double err_plain =
      (measurement_to_box(without_replay.state.filter.measurement_view()).center() - truth)
          .norm();
  CHECK(err_replay < err_plain);
}

TEST_CASE("run_tracker keeps one track over a smooth single-object stream") {
  std::vector<std::vector<Detection>> frames(10);
  for (int f = 0; f < 10; ++f) {
    frames[f].push_back(make_detection(f, box_at(100 + 3.0 * f, 200)));
  }
  std::vector<Track> tracks = run_tracker(sequence_from(frames));
  REQUIRE(tracks.size() == 1);
  CHECK(tracks[0].observations.size() == 10);
  CHECK(tracks[0].id == 1);

  // Oracle equivalence: matched boxes equal inputs exactly.
  for (int f = 0; f < 10; ++f) {
    const Box& b = tracks[0].observations.at(f).bbox;
    CHECK(b.x1 == box_at(100 + 3.0 * f, 200).x1);
    CHECK(b.y2 == box_at(100 + 3.0 * f, 200).y2);
  }
}

TEST_CASE("run_tracker separates two parallel movers") {
  std::vector<std::vector<Detection>> frames(40);
  for (int f = 0; f < 40; ++f) {
    frames[f].push_back(make_detection(f, box_at(100 + 4.0 * f, 100)));
    frames[f].push_back(make_detection(f, box_at(100 + 4.0 * f, 400)));
  }
  std::vector<Track> tracks = run_tracker(sequence_from(frames));
  REQUIRE(tracks.size() == 2);
  // No identity switches: each track's observations stay in one lane.
  for (const Track& t : tracks) {
    double lane = t.observations.begin()->second.bbox.center().y;
    for (const auto& [f, det] : t.observations) {
      CHECK(det.bbox.center().y == doctest::Approx(lane));
    }
  }
}

TEST_CASE("run_tracker ids are unique and never reused") {
  // Two bursts of detections separated by a long gap; the second burst is far
  // away, so the first track dies and a new id is allocated.
  std::vector<std::vector<Detection>> frames(80);
  for (int f = 0; f < 10; ++f) frames[f].push_back(make_detection(f, box_at(100, 100)));
  for (int f = 70; f < 80; ++f) frames[f].push_back(make_detection(f, box_at(900, 900)));
  std::vector<Track> tracks = run_tracker(sequence_from(frames));
  REQUIRE(tracks.size() == 2);
  CHECK(tracks[0].id != tracks[1].id);
}

TEST_CASE("track_hint seeds a confirmed track with the requested id") {
  std::vector<std::vector<Detection>> frames(3);
  for (int f = 0; f < 3; ++f) {
    Detection det = make_detection(f, box_at(100, 100));
    det.track_hint = 42;
    frames[f].push_back(det);
  }
  std::vector<Track> tracks = run_tracker(sequence_from(frames));
  REQUIRE(tracks.size() == 1);
  CHECK(tracks[0].id == 42);
  CHECK(tracks[0].observations.size() == 3);
}

TEST_CASE("run_tracker output is deterministic") {
  std::vector<std::vector<Detection>> frames(30);
  for (int f = 0; f < 30; ++f) {
    frames[f].push_back(make_detection(f, box_at(100 + 2.0 * f, 100 + f)));
    frames[f].push_back(make_detection(f, box_at(400 - 3.0 * f, 300)));
    if (f % 2 == 0) frames[f].push_back(make_detection(f, box_at(250, 50 + 4.0 * f)));
  }
  FrameSequence seq = sequence_from(frames);

  std::ostringstream a, b;
  dump_tracks(run_tracker(seq), a);
  dump_tracks(run_tracker(seq), b);
  CHECK(a.str() == b.str());
  CHECK(!a.str().empty());
}

TEST_CASE("detections are assigned to at most one track per frame") {
  std::vector<std::vector<Detection>> frames(20);
  for (int f = 0; f < 20; ++f) {
    frames[f].push_back(make_detection(f, box_at(100, 100)));
    frames[f].push_back(make_detection(f, box_at(130, 100)));  // heavy overlap neighbor
  }
  std::vector<Track> tracks = run_tracker(sequence_from(frames));
  REQUIRE(tracks.size() == 2);
  for (int f = 0; f < 20; ++f) {
    int claims = 0;
    for (const Track& t : tracks) claims += t.observations.count(f);
    CHECK(claims == 2);
    CHECK(tracks[0].observations.at(f).bbox.center().x !=
          tracks[1].observations.at(f).bbox.center().x);
  }
}
