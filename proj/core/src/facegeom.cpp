#include "maskrec/facegeom.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "maskrec/errors.hpp"

namespace maskrec {

namespace {

// Canonical ROI landmark groups (0-based indices into the 68-point layout).
// Order fixed; names are part of the external contract.
const std::vector<std::pair<std::string, std::vector<int>>>& roi_groups() {
  static const std::vector<std::pair<std::string, std::vector<int>>> groups = {
      {"eyebrow_left", {17, 18, 19, 20, 21}},
      {"eyebrow_right", {22, 23, 24, 25, 26}},
      {"lower_eyelid_left", {36, 39, 40, 41}},
      {"lower_eyelid_right", {42, 45, 46, 47}},
      {"nose_root", {27, 28}},
      {"cheek_left", {1, 2, 3, 31}},
      {"cheek_right", {13, 14, 15, 35}},
      {"mouth_corner_left", {48}},
      {"mouth_corner_right", {54}},
      {"chin_side", {4, 5, 6, 7}},
      {"chin", {8, 9, 10, 11, 12}},
  };
  return groups;
}

int band_of_row(const FacialPartition& p, int row) {
  if (row < p.r1) return 1;
  if (row < p.r2) return 2;
  return 3;
}

// Closed ROI rectangle vs half-open patch cell [bx0,bx1) x [by0,by1).
// A box edge lying exactly on a patch boundary touches the cell on both
// sides of it: the low edge of the next cell (>=) and the interior of the
// previous one (<).
bool box_hits_cell(const RoiBox& roi, float bx0, float bx1, float by0, float by1) {
  return roi.x0 < bx1 && roi.x1 >= bx0 && roi.y0 < by1 && roi.y1 >= by0;
}

}  // namespace

FacialPartition compute_partition(const Landmarks& lm, const FacegeomConfig& cfg) {
  float y_eyes = 0.f;
  for (int idx : cfg.eye_indices) y_eyes = std::max(y_eyes, lm[static_cast<std::size_t>(idx)].y);
  const float y_nose = lm[static_cast<std::size_t>(cfg.nose_base_index)].y;

  FacialPartition p;
  p.r1 = std::clamp(static_cast<int>(std::ceil(y_eyes / 16.f)), 1, 12);
  p.r2 = std::clamp(static_cast<int>(std::ceil(y_nose / 16.f)), p.r1 + 1, 13);
  return p;
}

RoiSet compute_rois(const Landmarks& lm, const FacegeomConfig& cfg) {
  RoiSet rois;
  const float lim = 224.f;
  for (const auto& [name, group] : roi_groups()) {
    RoiBox box;
    box.name = name;
    box.landmark_group = group;
    float x0 = lim, y0 = lim, x1 = 0.f, y1 = 0.f;
    for (int idx : group) {
      const Point& pt = lm[static_cast<std::size_t>(idx)];
      box.landmark_points.push_back(pt);
      x0 = std::min(x0, pt.x);
      y0 = std::min(y0, pt.y);
      x1 = std::max(x1, pt.x);
      y1 = std::max(y1, pt.y);
    }
    box.x0 = std::clamp(x0 - cfg.roi_margin, 0.f, lim - 1.f);
    box.y0 = std::clamp(y0 - cfg.roi_margin, 0.f, lim - 1.f);
    box.x1 = std::clamp(x1 + cfg.roi_margin, 0.f, lim - 1.f);
    box.y1 = std::clamp(y1 + cfg.roi_margin, 0.f, lim - 1.f);
    rois.boxes.push_back(std::move(box));
  }
  return rois;
}

int block_band(const PatchGrid& grid, const FacialPartition& part_rows, int block) {
  return band_of_row(part_rows, block / grid.cols);
}

std::set<int> sign_blocks(const PatchGrid& grid, const FacialPartition& part_rows,
                          const RoiSet& rois, int part, SignMode mode) {
  if (part < 1 || part > 3) throw ArgumentError("sign_blocks: part must be 1, 2 or 3");
  std::set<int> out;
  const float ps = static_cast<float>(grid.patch_size);

  // Landmark containment (the literal rule). A landmark exactly on a patch
  // boundary belongs to the higher-index cell (floor division).
  for (const RoiBox& roi : rois.boxes) {
    for (const Point& pt : roi.landmark_points) {
      const int c = std::clamp(static_cast<int>(std::floor(pt.x / ps)), 0, grid.cols - 1);
      const int r = std::clamp(static_cast<int>(std::floor(pt.y / ps)), 0, grid.rows - 1);
      if (band_of_row(part_rows, r) == part) out.insert(r * grid.cols + c);
    }
  }
  if (mode == SignMode::kLandmarksOnly) return out;

  for (int r = 0; r < grid.rows; ++r) {
    if (band_of_row(part_rows, r) != part) continue;
    const float by0 = r * ps, by1 = by0 + ps;
    for (int c = 0; c < grid.cols; ++c) {
      const float bx0 = c * ps, bx1 = bx0 + ps;
      for (const RoiBox& roi : rois.boxes) {
        if (box_hits_cell(roi, bx0, bx1, by0, by1)) {
          out.insert(r * grid.cols + c);
          break;
        }
      }
    }
  }
  return out;
}

int masked_block_count(int n_signed, double mask_ratio) {
  if (n_signed <= 0) return 0;
  const double exact = n_signed * mask_ratio;
  // round-half-to-even
  const double fl = std::floor(exact);
  const double frac = exact - fl;
  int n;
  if (frac > 0.5) {
    n = static_cast<int>(fl) + 1;
  } else if (frac < 0.5) {
    n = static_cast<int>(fl);
  } else {
    n = static_cast<int>(fl);
    if (n % 2 != 0) ++n;
  }
  n = std::min(n, n_signed);
  return std::max(n, 1);
}

MaskPlan sample_mask_for_part(const PatchGrid& grid, const FacialPartition& part_rows,
                              const RoiSet& rois, int part, double mask_ratio, Rng& rng,
                              SignMode mode) {
  if (mask_ratio <= 0.0 || mask_ratio > 1.0)
    throw ArgumentError("sample_mask: mask_ratio must be in (0, 1]");
  MaskPlan plan;
  plan.selected_part = part;
  plan.mask_ratio = mask_ratio;
  plan.signed_blocks = sign_blocks(grid, part_rows, rois, part, mode);
  if (plan.signed_blocks.empty())
    throw ArgumentError("sample_mask_for_part: band " + std::to_string(part) +
                        " has no signed blocks");

  std::vector<int> pool(plan.signed_blocks.begin(), plan.signed_blocks.end());
  const int k = masked_block_count(static_cast<int>(pool.size()), mask_ratio);
  // Partial Fisher-Yates: first k entries are a uniform subset.
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, static_cast<int>(pool.size()) - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  plan.masked_blocks.insert(pool.begin(), pool.begin() + k);
  return plan;
}

MaskPlan sample_mask(const PatchGrid& grid, const FacialPartition& part_rows, const RoiSet& rois,
                     double mask_ratio, Rng& rng, SignMode mode) {
  if (mask_ratio <= 0.0 || mask_ratio > 1.0)
    throw ArgumentError("sample_mask: mask_ratio must be in (0, 1]");
  std::vector<int> candidates = {1, 2, 3};
  // Up to 3 attempts; each redraw excludes parts already found empty, so the
  // call errors exactly when every band is empty.
  while (!candidates.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::size_t at = pick(rng);
    const int part = candidates[at];
    if (!sign_blocks(grid, part_rows, rois, part, mode).empty())
      return sample_mask_for_part(grid, part_rows, rois, part, mask_ratio, rng, mode);
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(at));
  }
  throw ArgumentError("sample_mask: no maskable region (all bands have empty signed sets)");
}

std::string mask_plan_to_json(const MaskPlan& plan) {
  nlohmann::json j;
  j["selected_part"] = plan.selected_part;
  j["mask_ratio"] = plan.mask_ratio;
  j["signed_blocks"] = std::vector<int>(plan.signed_blocks.begin(), plan.signed_blocks.end());
  j["masked_blocks"] = std::vector<int>(plan.masked_blocks.begin(), plan.masked_blocks.end());
  return j.dump();
}

MaskPlan mask_plan_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  MaskPlan plan;
  plan.selected_part = j.at("selected_part").get<int>();
  plan.mask_ratio = j.at("mask_ratio").get<double>();
  for (int b : j.at("signed_blocks")) plan.signed_blocks.insert(b);
  for (int b : j.at("masked_blocks")) plan.masked_blocks.insert(b);
  return plan;
}

}  // namespace maskrec
