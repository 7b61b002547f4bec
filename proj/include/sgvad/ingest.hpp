#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sgvad/geometry.hpp"

namespace sgvad {

inline constexpr int kDefaultTrajectoryLength = 30;
inline constexpr int kPoseKeypoints = 17;

/// One detection in one frame, as produced by the upstream detector/tracker.
struct RawObject {
    std::int64_t track_id = 0;
    int class_id = 0;
    BBox bbox;
    std::optional<std::vector<Vec2>> pose;  // 17 keypoints when present

    friend bool operator==(const RawObject&, const RawObject&) = default;
};

struct FrameRecord {
    std::string video_id;
    std::int64_t frame_id = 0;
    std::vector<RawObject> objects;

    friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct GroundTruthAnnotation {
    std::int64_t track_id = 0;
    std::int64_t frame_id = 0;
    BBox bbox;
    std::string object_type;

    friend bool operator==(const GroundTruthAnnotation&, const GroundTruthAnnotation&) = default;
};

struct AnnotationFile {
    std::int64_t total_frame = 0;
    std::vector<GroundTruthAnnotation> annotations;

    std::map<std::int64_t, std::vector<GroundTruthAnnotation>> by_track() const;
    std::map<std::int64_t, std::vector<GroundTruthAnnotation>> by_frame() const;

    friend bool operator==(const AnnotationFile&, const AnnotationFile&) = default;
};

using ClassMap = std::map<int, std::string>;

/// Parses a line-delimited track stream. Records must appear in strictly
/// increasing frame order; malformed lines raise with their line number.
std::vector<FrameRecord> parse_track_stream(std::istream& in);
void write_track_stream(std::ostream& out, std::span<const FrameRecord> records);

AnnotationFile parse_annotations(std::istream& in);
void write_annotations(std::ostream& out, const AnnotationFile& file);

ClassMap parse_class_map(std::istream& in);
void write_class_map(std::ostream& out, const ClassMap& map);

/// Bbox centers of `track_id` for `length` frames starting at `start_frame`.
/// If the track ends early (or has a frame gap, which counts as the end),
/// the last observed center is repeated so the result always has `length`
/// points. The track must be present at `start_frame`.
std::vector<Vec2> extract_trajectory(std::span<const FrameRecord> records,
                                     std::int64_t track_id,
                                     std::int64_t start_frame,
                                     int length = kDefaultTrajectoryLength);

/// Frame-indexed view of one stream for repeated trajectory lookups.
class TrackIndex {
public:
    explicit TrackIndex(std::span<const FrameRecord> records);

    std::optional<Vec2> center_at(std::int64_t track_id, std::int64_t frame_id) const;
    std::vector<Vec2> trajectory(std::int64_t track_id, std::int64_t start_frame, int length) const;

private:
    std::map<std::int64_t, std::map<std::int64_t, Vec2>> centers_by_track_;
};

}  // namespace sgvad
