#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "maskrec/image.hpp"

namespace maskrec {

enum class Label { kReal, kFake };

inline const char* label_name(Label l) { return l == Label::kReal ? "real" : "fake"; }

struct ManifestEntry {
  std::string video_id;
  std::filesystem::path frames_dir;
  Label label = Label::kReal;
  std::string manipulation_type = "none";  // "none" iff real
  std::string split = "train";             // train | val | test
};

struct MediaManifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> split_entries(const std::string& split) const;
  const ManifestEntry* find(const std::string& video_id) const;
};

// One aligned 224x224 face with its landmarks.
struct FaceRecord {
  std::string video_id;
  int frame_index = 0;
  Image image;  // 224x224x3 in [0,1]
  Landmarks landmarks{};
};

inline constexpr int kFaceSize = 224;

// Throws ValidationError when a FaceRecord invariant is broken.
void validate_face_record(const FaceRecord& face);

// Line-delimited JSON manifest. Parse errors carry the 1-based line number;
// duplicate ids and label/manipulation mismatches are validation errors.
// Every referenced frames_dir must exist.
MediaManifest load_manifest(const std::filesystem::path& path);

// Canonical serialization (fixed key order); save(load(f)) normalizes f.
void save_manifest(const MediaManifest& manifest, const std::filesystem::path& path);

struct FaceLoadResult {
  std::vector<FaceRecord> records;
  int n_clamped_landmarks = 0;  // warning counter, not an error
};

// Loads every frame of one video: frames resized to 224x224, landmarks
// rescaled from source-frame coordinates and clamped into [0, 224).
// The landmark file holds "frame <index>" headers followed by 68 "x y" rows.
FaceLoadResult load_face_records(const MediaManifest& manifest, const std::string& video_id,
                                 const std::filesystem::path& landmark_source);

// ---------------------------------------------------------------------------
// Synthetic toy faces

// Three horizontal bands (rows [0,75), [75,150), [150,224)) rendered with
// per-band style parameters. A face is consistent when all three styles
// agree; inconsistent faces have exactly one deviating band.
struct ToySpec {
  std::uint64_t seed = 0;
  std::array<double, 3> part_styles{0.5, 0.5, 0.5};
  bool consistent = true;
  double noise_level = 0.02;
};

inline constexpr int kToyBandTop = 75;
inline constexpr int kToyBandBottom = 150;

// The fixed landmark template every toy face uses.
const Landmarks& toy_landmarks();

// Pure function of the spec; label is real iff spec.consistent.
std::pair<FaceRecord, Label> generate_toy_face(const ToySpec& spec);

// ---------------------------------------------------------------------------
// Post-processing perturbations

enum class PostOp { kResizing, kEnhancement, kBrightness, kContrast };

PostOp post_op_from_name(const std::string& name);
const char* post_op_name(PostOp op);

// Documented magnitude ranges: resizing factor [0.25, 1], unsharp amount
// [0, 1], brightness shift [-0.3, 0.3], contrast gain [0.5, 1.5].
// Landmarks pass through unchanged.
FaceRecord apply_postprocessing(const FaceRecord& face, PostOp op, double magnitude);

// ---------------------------------------------------------------------------
// Toy corpus on disk (frames as PPM + landmark files + manifest)

struct ToyCorpusSpec {
  std::uint64_t seed = 7;
  int n_videos = 128;           // split evenly real/fake
  int frames_per_video = 4;
  double noise_level = 0.02;
  int n_styles = 3;             // distinct fake manipulation styles (1..3)
  double train_fraction = 0.7;  // remainder split evenly val/test
};

// Fake manipulation style names, one per deviating band.
const std::vector<std::string>& toy_manipulation_styles();

// Writes frames_dir trees, per-video landmark files and manifest.jsonl under
// root; byte-identical for equal specs. Returns the manifest.
MediaManifest write_toy_corpus(const ToyCorpusSpec& spec, const std::filesystem::path& root);

// In-memory variant used by tests and the acceptance suite.
struct ToyVideo {
  ManifestEntry entry;
  std::vector<FaceRecord> frames;
};
std::vector<ToyVideo> make_toy_videos(const ToyCorpusSpec& spec);

}  // namespace maskrec
