#include "maskrec/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "maskrec/errors.hpp"

namespace maskrec {

std::vector<const ManifestEntry*> MediaManifest::split_entries(const std::string& split) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries)
    if (e.split == split) out.push_back(&e);
  return out;
}

const ManifestEntry* MediaManifest::find(const std::string& video_id) const {
  for (const auto& e : entries)
    if (e.video_id == video_id) return &e;
  return nullptr;
}

void validate_face_record(const FaceRecord& face) {
  if (face.image.height != kFaceSize || face.image.width != kFaceSize)
    throw ValidationError("FaceRecord image must be 224x224");
  for (float v : face.image.data)
    if (!(v >= 0.f && v <= 1.f)) throw ValidationError("FaceRecord pixel outside [0,1]");
  for (const Point& p : face.landmarks) {
    if (!(p.x >= 0.f && p.x < 224.f && p.y >= 0.f && p.y < 224.f))
      throw ValidationError("FaceRecord landmark outside [0,224)");
  }
  if (face.frame_index < 0) throw ValidationError("FaceRecord frame_index must be >= 0");
}

namespace {

const std::set<std::string>& valid_splits() {
  static const std::set<std::string> s = {"train", "val", "test"};
  return s;
}

ManifestEntry entry_from_json(const nlohmann::json& j, int line_no) {
  auto ctx = [&](const std::string& msg) {
    return "manifest line " + std::to_string(line_no) + ": " + msg;
  };
  ManifestEntry e;
  try {
    e.video_id = j.at("video_id").get<std::string>();
    e.frames_dir = j.at("frames_dir").get<std::string>();
    const std::string label = j.at("label").get<std::string>();
    if (label == "real") {
      e.label = Label::kReal;
    } else if (label == "fake") {
      e.label = Label::kFake;
    } else {
      throw ParseError(ctx("label must be \"real\" or \"fake\""));
    }
    e.manipulation_type = j.at("manipulation_type").get<std::string>();
    e.split = j.at("split").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(ctx(ex.what()));
  }
  if (!valid_splits().count(e.split)) throw ValidationError(ctx("unknown split: " + e.split));
  const bool is_none = e.manipulation_type == "none";
  if ((e.label == Label::kReal) != is_none)
    throw ValidationError(ctx("label " + std::string(label_name(e.label)) +
                              " inconsistent with manipulation_type \"" + e.manipulation_type +
                              "\""));
  return e;
}

}  // namespace

MediaManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  MediaManifest m;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& ex) {
      throw ParseError("manifest line " + std::to_string(line_no) + ": " + ex.what());
    }
    ManifestEntry e = entry_from_json(j, line_no);
    if (!seen.insert(e.video_id).second)
      throw ValidationError("manifest line " + std::to_string(line_no) +
                            ": duplicate video_id \"" + e.video_id + "\"");
    if (!std::filesystem::is_directory(e.frames_dir))
      throw ValidationError("manifest line " + std::to_string(line_no) + ": frames_dir \"" +
                            e.frames_dir.string() + "\" does not exist");
    m.entries.push_back(std::move(e));
  }
  return m;
}

void save_manifest(const MediaManifest& manifest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for write: " + path.string());
  for (const auto& e : manifest.entries) {
    nlohmann::ordered_json j;
    j["video_id"] = e.video_id;
    j["frames_dir"] = e.frames_dir.string();
    j["label"] = label_name(e.label);
    j["manipulation_type"] = e.manipulation_type;
    j["split"] = e.split;
    out << j.dump() << "\n";
  }
  if (!out) throw IoError("short write: " + path.string());
}

namespace {

struct LandmarkFile {
  // frame_index -> 68 source-space points
  std::vector<std::pair<int, Landmarks>> frames;
};

LandmarkFile parse_landmark_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open landmark file: " + path.string());
  LandmarkFile lf;
  std::string line;
  int line_no = 0;
  std::optional<int> frame_index;
  Landmarks current{};
  int row = 0;
  auto flush = [&]() {
    if (!frame_index) return;
    if (row != kNumLandmarks)
      throw ParseError("landmark file " + path.string() + ": frame " +
                       std::to_string(*frame_index) + " has " + std::to_string(row) +
                       " rows, expected 68");
    lf.frames.emplace_back(*frame_index, current);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string head;
    is >> head;
    if (head == "frame") {
      flush();
      int idx = -1;
      if (!(is >> idx) || idx < 0)
        throw ParseError("landmark file " + path.string() + " line " + std::to_string(line_no) +
                         ": bad frame header");
      frame_index = idx;
      row = 0;
    } else {
      if (!frame_index)
        throw ParseError("landmark file " + path.string() + " line " + std::to_string(line_no) +
                         ": coordinates before any frame header");
      if (row >= kNumLandmarks)
        throw ParseError("landmark file " + path.string() + ": frame " +
                         std::to_string(*frame_index) + " has more than 68 rows");
      float x = 0.f, y = 0.f;
      std::istringstream pair_is(line);
      if (!(pair_is >> x >> y))
        throw ParseError("landmark file " + path.string() + " line " + std::to_string(line_no) +
                         ": expected \"x y\"");
      current[static_cast<std::size_t>(row)] = Point{x, y};
      ++row;
    }
  }
  flush();
  return lf;
}

}  // namespace

FaceLoadResult load_face_records(const MediaManifest& manifest, const std::string& video_id,
                                 const std::filesystem::path& landmark_source) {
  const ManifestEntry* entry = manifest.find(video_id);
  if (!entry) throw ArgumentError("unknown video_id: " + video_id);

  std::vector<std::filesystem::path> frame_files;
  for (const auto& de : std::filesystem::directory_iterator(entry->frames_dir))
    if (de.is_regular_file() && de.path().extension() == ".ppm")
      frame_files.push_back(de.path());
  std::sort(frame_files.begin(), frame_files.end());
  if (frame_files.empty())
    throw IoError("no frames in " + entry->frames_dir.string());

  LandmarkFile lf = parse_landmark_file(landmark_source);

  FaceLoadResult result;
  for (std::size_t i = 0; i < frame_files.size(); ++i) {
    const int frame_index = static_cast<int>(i);
    const Landmarks* src_lm = nullptr;
    for (const auto& [idx, lm] : lf.frames)
      if (idx == frame_index) src_lm = &lm;
    if (!src_lm)
      throw ParseError("landmark file " + landmark_source.string() + ": missing frame " +
                       std::to_string(frame_index));

    Image src = load_ppm(frame_files[i]);
    const int src_w = src.width;
    const int src_h = src.height;
    FaceRecord face;
    face.video_id = video_id;
    face.frame_index = frame_index;
    face.image = (src_h == kFaceSize && src_w == kFaceSize)
                     ? std::move(src)
                     : resize_bilinear(src, kFaceSize, kFaceSize);

    const float sx = static_cast<float>(kFaceSize) / static_cast<float>(src_w);
    const float sy = static_cast<float>(kFaceSize) / static_cast<float>(src_h);
    for (int k = 0; k < kNumLandmarks; ++k) {
      Point p = (*src_lm)[static_cast<std::size_t>(k)];
      p.x *= sx;
      p.y *= sy;
      const float max_coord = std::nextafter(224.f, 0.f);
      if (p.x < 0.f || p.x > max_coord || p.y < 0.f || p.y > max_coord) {
        p.x = std::clamp(p.x, 0.f, max_coord);
        p.y = std::clamp(p.y, 0.f, max_coord);
        ++result.n_clamped_landmarks;
      }
      face.landmarks[static_cast<std::size_t>(k)] = p;
    }
    validate_face_record(face);
    result.records.push_back(std::move(face));
  }
  return result;
}

PostOp post_op_from_name(const std::string& name) {
  if (name == "resizing") return PostOp::kResizing;
  if (name == "enhancement") return PostOp::kEnhancement;
  if (name == "brightness") return PostOp::kBrightness;
  if (name == "contrast") return PostOp::kContrast;
  throw ArgumentError("unknown post-processing op: " + name);
}

const char* post_op_name(PostOp op) {
  switch (op) {
    case PostOp::kResizing: return "resizing";
    case PostOp::kEnhancement: return "enhancement";
    case PostOp::kBrightness: return "brightness";
    case PostOp::kContrast: return "contrast";
  }
  return "?";
}

FaceRecord apply_postprocessing(const FaceRecord& face, PostOp op, double magnitude) {
  FaceRecord out = face;
  switch (op) {
    case PostOp::kResizing: {
      if (magnitude < 0.25 || magnitude > 1.0)
        throw ArgumentError("resizing factor must be in [0.25, 1]");
      const int inter = std::max(1, static_cast<int>(std::lround(kFaceSize * magnitude)));
      Image small = resize_bilinear(face.image, inter, inter);
      out.image = resize_bilinear(small, kFaceSize, kFaceSize);
      break;
    }
    case PostOp::kEnhancement: {
      if (magnitude < 0.0 || magnitude > 1.0)
        throw ArgumentError("unsharp amount must be in [0, 1]");
      Image blur = box_blur3(face.image);
      out.image = face.image;
      for (std::size_t i = 0; i < out.image.data.size(); ++i)
        out.image.data[i] += static_cast<float>(magnitude) * (face.image.data[i] - blur.data[i]);
      break;
    }
    case PostOp::kBrightness: {
      if (magnitude < -0.3 || magnitude > 0.3)
        throw ArgumentError("brightness shift must be in [-0.3, 0.3]");
      out.image = face.image;
      for (float& v : out.image.data) v += static_cast<float>(magnitude);
      break;
    }
    case PostOp::kContrast: {
      if (magnitude < 0.5 || magnitude > 1.5)
        throw ArgumentError("contrast gain must be in [0.5, 1.5]");
      out.image = face.image;
      for (float& v : out.image.data)
        v = 0.5f + static_cast<float>(magnitude) * (v - 0.5f);
      break;
    }
  }
  clamp01(out.image);
  return out;
}

}  // namespace maskrec
