#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "maskrec/image.hpp"
#include "maskrec/rng.hpp"

namespace maskrec {

// 224 px face divided into a 14x14 grid of 16 px patches.
struct PatchGrid {
  int image_size = 224;
  int patch_size = 16;
  int rows = 14;
  int cols = 14;
  int n_patches = 196;
};

// Three horizontal facial bands expressed as patch-row splits:
// band 1 = rows [0, r1), band 2 = [r1, r2), band 3 = [r2, rows).
struct FacialPartition {
  int r1 = 5;
  int r2 = 9;
};

struct RoiBox {
  std::string name;
  float x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // closed rectangle, pixel space
  std::vector<int> landmark_group;       // defining landmark indices
  std::vector<Point> landmark_points;    // the group's points on the source face
};

struct RoiSet {
  std::vector<RoiBox> boxes;  // exactly 11, canonical names in fixed order
};

// Output of the part-masking algorithm for one face.
struct MaskPlan {
  int selected_part = 1;  // 1, 2, or 3
  std::set<int> signed_blocks;
  std::set<int> masked_blocks;
  double mask_ratio = 0.75;
};

enum class SignMode {
  kUnion,          // landmark containment OR box intersection (default)
  kLandmarksOnly,  // literal containment rule, for ablation
};

// Landmark-index configuration. Defaults follow the standard 68-point
// layout (0-based): jaw 0-16, brows 17-26, nose 27-35, eyes 36-47,
// mouth 48-67.
struct FacegeomConfig {
  std::vector<int> eye_indices = {36, 37, 38, 39, 40, 41, 42, 43, 44, 45, 46, 47};
  int nose_base_index = 33;
  float roi_margin = 8.f;
  SignMode sign_mode = SignMode::kUnion;
};

// Band boundaries from landmarks: r1 from the lowest eye landmark,
// r2 from the nose-base landmark. Clamping guarantees all bands non-empty.
FacialPartition compute_partition(const Landmarks& lm, const FacegeomConfig& cfg = {});

// Eleven landmark-group bounding boxes expanded by the margin and clipped
// to the image.
RoiSet compute_rois(const Landmarks& lm, const FacegeomConfig& cfg = {});

// Blocks of the given band (part in {1,2,3}) that hold a group landmark or
// intersect an ROI box. Patch cells are half-open; ROI boxes closed, so a
// box whose edge sits on a patch boundary touches both neighbours.
std::set<int> sign_blocks(const PatchGrid& grid, const FacialPartition& part_rows,
                          const RoiSet& rois, int part, SignMode mode = SignMode::kUnion);

// Masked-block count: round-half-to-even of |signed| * ratio, floor 1.
int masked_block_count(int n_signed, double mask_ratio);

// Masking plan for a forced part choice. Throws ArgumentError if the band's
// signed set is empty.
MaskPlan sample_mask_for_part(const PatchGrid& grid, const FacialPartition& part_rows,
                              const RoiSet& rois, int part, double mask_ratio, Rng& rng,
                              SignMode mode = SignMode::kUnion);

// Full plan draw: part uniform over {1,2,3}; an empty band causes a redraw
// among the untried parts, so the call fails only when all three bands have
// empty signed sets.
MaskPlan sample_mask(const PatchGrid& grid, const FacialPartition& part_rows, const RoiSet& rois,
                     double mask_ratio, Rng& rng, SignMode mode = SignMode::kUnion);

// Patch-row band of a block index, as 1/2/3.
int block_band(const PatchGrid& grid, const FacialPartition& part_rows, int block);

std::string mask_plan_to_json(const MaskPlan& plan);
MaskPlan mask_plan_from_json(const std::string& text);

}  // namespace maskrec
