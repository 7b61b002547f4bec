#include "sgvad/ingest.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sgvad {

using nlohmann::json;

namespace {

BBox bbox_from_json(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.size() != 4) {
        throw std::runtime_error(where + ": bbox must be an array of 4 numbers");
    }
    BBox box{arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>(), arr[3].get<double>()};
    if (!box.well_formed()) {
        std::ostringstream msg;
        msg << where << ": bbox [" << box.x1 << "," << box.y1 << "," << box.x2 << "," << box.y2
            << "] requires x2 > x1 and y2 > y1";
        throw std::runtime_error(msg.str());
    }
    return box;
}

json bbox_to_json(const BBox& box) { return json::array({box.x1, box.y1, box.x2, box.y2}); }

RawObject object_from_json(const json& j, const std::string& where) {
    RawObject obj;
    for (const char* field : {"track_id", "class_id", "bbox"}) {
        if (!j.contains(field)) throw std::runtime_error(where + ": missing field " + field);
    }
    obj.track_id = j.at("track_id").get<std::int64_t>();
    obj.class_id = j.at("class_id").get<int>();
    if (obj.track_id < 0) throw std::runtime_error(where + ": track_id must be non-negative");
    if (obj.class_id < 0) throw std::runtime_error(where + ": class_id must be non-negative");
    obj.bbox = bbox_from_json(j.at("bbox"), where);
    if (j.contains("pose") && !j.at("pose").is_null()) {
        const json& pose = j.at("pose");
        if (!pose.is_array() || pose.size() != kPoseKeypoints) {
            throw std::runtime_error(where + ": pose must hold exactly 17 keypoints");
        }
        std::vector<Vec2> points;
        points.reserve(kPoseKeypoints);
        for (const json& kp : pose) {
            if (!kp.is_array() || kp.size() != 2) {
                throw std::runtime_error(where + ": pose keypoint must be an [x, y] pair");
            }
            points.push_back({kp[0].get<double>(), kp[1].get<double>()});
        }
        obj.pose = std::move(points);
    }
    return obj;
}

}  // namespace

std::vector<FrameRecord> parse_track_stream(std::istream& in) {
    std::vector<FrameRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(where + ": malformed record: " + e.what());
        }
        FrameRecord record;
        for (const char* field : {"video_id", "frame_id", "objects"}) {
            if (!j.contains(field)) throw std::runtime_error(where + ": missing field " + field);
        }
        record.video_id = j.at("video_id").get<std::string>();
        record.frame_id = j.at("frame_id").get<std::int64_t>();
        if (record.frame_id < 0) throw std::runtime_error(where + ": frame_id must be non-negative");
        if (!records.empty() && record.frame_id <= records.back().frame_id) {
            throw std::runtime_error(where + ": frame_id " + std::to_string(record.frame_id) +
                                     " does not increase over previous " +
                                     std::to_string(records.back().frame_id));
        }
        const json& objects = j.at("objects");
        if (!objects.is_array()) throw std::runtime_error(where + ": objects must be an array");
        for (const json& obj : objects) {
            record.objects.push_back(object_from_json(obj, where));
            for (std::size_t i = 0; i + 1 < record.objects.size(); ++i) {
                if (record.objects[i].track_id == record.objects.back().track_id) {
                    throw std::runtime_error(where + ": duplicate track_id " +
                                             std::to_string(record.objects.back().track_id));
                }
            }
        }
        records.push_back(std::move(record));
    }
    return records;
}

void write_track_stream(std::ostream& out, std::span<const FrameRecord> records) {
    for (const FrameRecord& record : records) {
        json objects = json::array();
        for (const RawObject& obj : record.objects) {
            json o{{"track_id", obj.track_id}, {"class_id", obj.class_id}, {"bbox", bbox_to_json(obj.bbox)}};
            if (obj.pose) {
                json pose = json::array();
                for (const Vec2& kp : *obj.pose) pose.push_back(json::array({kp.x, kp.y}));
                o["pose"] = std::move(pose);
            }
            objects.push_back(std::move(o));
        }
        json j{{"video_id", record.video_id}, {"frame_id", record.frame_id}, {"objects", std::move(objects)}};
        out << j.dump() << '\n';
    }
}

AnnotationFile parse_annotations(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("annotation file: malformed document: ") + e.what());
    }
    for (const char* field : {"total_frame", "annotations"}) {
        if (!j.contains(field)) {
            throw std::runtime_error(std::string("annotation file: missing field ") + field);
        }
    }
    AnnotationFile file;
    file.total_frame = j.at("total_frame").get<std::int64_t>();
    std::size_t index = 0;
    for (const json& entry : j.at("annotations")) {
        const std::string where = "annotation " + std::to_string(index++);
        for (const char* field : {"track_id", "frame_id", "bbox", "object_type"}) {
            if (!entry.contains(field)) throw std::runtime_error(where + ": missing field " + field);
        }
        GroundTruthAnnotation a;
        a.track_id = entry.at("track_id").get<std::int64_t>();
        a.frame_id = entry.at("frame_id").get<std::int64_t>();
        a.bbox = bbox_from_json(entry.at("bbox"), where);
        a.object_type = entry.at("object_type").get<std::string>();
        file.annotations.push_back(std::move(a));
    }
    return file;
}

void write_annotations(std::ostream& out, const AnnotationFile& file) {
    json annotations = json::array();
    for (const GroundTruthAnnotation& a : file.annotations) {
        annotations.push_back(json{{"track_id", a.track_id},
                                   {"frame_id", a.frame_id},
                                   {"bbox", bbox_to_json(a.bbox)},
                                   {"object_type", a.object_type}});
    }
    json j{{"total_frame", file.total_frame}, {"annotations", std::move(annotations)}};
    out << j.dump(2) << '\n';
}

std::map<std::int64_t, std::vector<GroundTruthAnnotation>> AnnotationFile::by_track() const {
    std::map<std::int64_t, std::vector<GroundTruthAnnotation>> grouped;
    for (const GroundTruthAnnotation& a : annotations) grouped[a.track_id].push_back(a);
    return grouped;
}

std::map<std::int64_t, std::vector<GroundTruthAnnotation>> AnnotationFile::by_frame() const {
    std::map<std::int64_t, std::vector<GroundTruthAnnotation>> grouped;
    for (const GroundTruthAnnotation& a : annotations) grouped[a.frame_id].push_back(a);
    return grouped;
}

ClassMap parse_class_map(std::istream& in) {
    ClassMap map;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        int id = 0;
        std::string name;
        if (!(ss >> id) || !(ss >> std::ws, std::getline(ss, name)) || name.empty()) {
            throw std::runtime_error("class map line " + std::to_string(line_no) +
                                     ": expected '<id> <name>'");
        }
        map[id] = name;
    }
    return map;
}

void write_class_map(std::ostream& out, const ClassMap& map) {
    for (const auto& [id, name] : map) out << id << ' ' << name << '\n';
}

std::vector<Vec2> extract_trajectory(std::span<const FrameRecord> records, std::int64_t track_id,
                                     std::int64_t start_frame, int length) {
    return TrackIndex(records).trajectory(track_id, start_frame, length);
}

TrackIndex::TrackIndex(std::span<const FrameRecord> records) {
    for (const FrameRecord& record : records) {
        for (const RawObject& obj : record.objects) {
            centers_by_track_[obj.track_id][record.frame_id] = obj.bbox.center();
        }
    }
}

std::optional<Vec2> TrackIndex::center_at(std::int64_t track_id, std::int64_t frame_id) const {
    auto track = centers_by_track_.find(track_id);
    if (track == centers_by_track_.end()) return std::nullopt;
    auto frame = track->second.find(frame_id);
    if (frame == track->second.end()) return std::nullopt;
    return frame->second;
}

std::vector<Vec2> TrackIndex::trajectory(std::int64_t track_id, std::int64_t start_frame,
                                         int length) const {
    if (length < 1) throw std::invalid_argument("trajectory length must be positive");
    auto first = center_at(track_id, start_frame);
    if (!first) {
        throw std::invalid_argument("track " + std::to_string(track_id) + " absent at frame " +
                                    std::to_string(start_frame));
    }
    std::vector<Vec2> points;
    points.reserve(static_cast<std::size_t>(length));
    points.push_back(*first);
    Vec2 last = *first;
    bool ended = false;
    for (int t = 1; t < length; ++t) {
        if (!ended) {
            auto center = center_at(track_id, start_frame + t);
            if (center) {
                last = *center;
            } else {
                ended = true;  // frame gaps count as the end of the track
            }
        }
        points.push_back(last);
    }
    return points;
}

}  // namespace sgvad
