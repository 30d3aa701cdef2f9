#include <algorithm>
#include <cmath>
#include <fstream>

#include "maskrec/corpus.hpp"
#include "maskrec/errors.hpp"
#include "maskrec/rng.hpp"

namespace maskrec {

namespace {

// Fixed 68-point template shared by every toy face. The lowest eye point
// sits at y = 80 and the nose base at y = 144, so the default partition is
// patch rows 5 and 9.
Landmarks build_toy_landmarks() {
  Landmarks lm{};
  auto set = [&](int i, float x, float y) { lm[static_cast<std::size_t>(i)] = Point{x, y}; };
  // jaw 0-16
  const float jaw[17][2] = {{40, 84},   {42, 108},  {46, 131},  {52, 152},  {62, 170},
                            {74, 186},  {88, 198},  {100, 207}, {112, 210}, {124, 207},
                            {136, 198}, {150, 186}, {162, 170}, {172, 152}, {178, 131},
                            {182, 108}, {184, 84}};
  for (int i = 0; i < 17; ++i) set(i, jaw[i][0], jaw[i][1]);
  // brows 17-26
  const float brow_l[5][2] = {{52, 52}, {62, 48}, {72, 46}, {82, 48}, {92, 52}};
  for (int i = 0; i < 5; ++i) {
    set(17 + i, brow_l[i][0], brow_l[i][1]);
    set(22 + i, 224.f - brow_l[4 - i][0], brow_l[4 - i][1]);
  }
  // nose bridge 27-30 and base 31-35
  for (int i = 0; i < 4; ++i) set(27 + i, 112, 84 + 16.f * i);
  const float base[5][2] = {{96, 142}, {104, 143}, {112, 144}, {120, 143}, {128, 142}};
  for (int i = 0; i < 5; ++i) set(31 + i, base[i][0], base[i][1]);
  // eyes 36-47 (hexagons)
  const float eye_l[6][2] = {{58, 73}, {69, 66}, {83, 66}, {94, 73}, {83, 80}, {69, 80}};
  for (int i = 0; i < 6; ++i) set(36 + i, eye_l[i][0], eye_l[i][1]);
  const float eye_r[6][2] = {{130, 73}, {141, 66}, {155, 66}, {166, 73}, {155, 80}, {141, 80}};
  for (int i = 0; i < 6; ++i) set(42 + i, eye_r[i][0], eye_r[i][1]);
  // mouth 48-67
  const float outer[12][2] = {{76, 172},  {86, 164},  {98, 160},  {112, 158},
                              {126, 160}, {138, 164}, {148, 172}, {138, 180},
                              {126, 184}, {112, 186}, {98, 184},  {86, 180}};
  for (int i = 0; i < 12; ++i) set(48 + i, outer[i][0], outer[i][1]);
  const float inner[8][2] = {{88, 172},  {100, 168}, {112, 166}, {124, 168},
                             {136, 172}, {124, 176}, {112, 178}, {100, 176}};
  for (int i = 0; i < 8; ++i) set(60 + i, inner[i][0], inner[i][1]);
  return lm;
}

struct Rect {
  int x, y, w, h;
};

// Per-band feature rectangles. Each band's total feature area is exactly
// 5/16 of its pixel area (5250, 5250, 5180 px), which makes equal-style
// band means identical; widths are even so the checkerboard texture has an
// exact zero mean. Rectangles are disjoint and lie in ROI-signable patches.
const std::vector<Rect>& band_rects(int band) {
  static const std::vector<Rect> b0 = {
      {36, 34, 68, 22}, {120, 34, 68, 22}, {46, 56, 56, 18},
      {122, 56, 56, 18}, {104, 58, 16, 15}, {110, 32, 2, 1},
  };
  static const std::vector<Rect> b1 = {
      {102, 80, 20, 60}, {44, 100, 46, 44}, {134, 100, 46, 44}, {96, 82, 2, 1},
  };
  static const std::vector<Rect> b2 = {
      {70, 152, 84, 32}, {58, 188, 44, 24},  {106, 188, 44, 24},
      {84, 216, 56, 6},  {102, 184, 20, 2},  {110, 186, 2, 2},
  };
  switch (band) {
    case 0: return b0;
    case 1: return b1;
    default: return b2;
  }
}

// Style -> feature colour. Channel slopes are what the band-mean tests key
// off; keep palette(s) +- texture amplitude inside [0,1].
void palette(double s, float rgb[3]) {
  rgb[0] = static_cast<float>(0.25 + 0.70 * s);
  rgb[1] = static_cast<float>(0.80 - 0.55 * s);
  rgb[2] = static_cast<float>(0.40 + 0.20 * std::sin(2.0 * 3.14159265358979323846 * s));
}

int render_band(int y) {
  if (y < kToyBandTop) return 0;
  if (y < kToyBandBottom) return 1;
  return 2;
}

void validate_toy_spec(const ToySpec& spec) {
  const auto& s = spec.part_styles;
  const bool all_equal = s[0] == s[1] && s[1] == s[2];
  if (spec.consistent && !all_equal)
    throw ValidationError("consistent ToySpec requires equal part styles");
  if (!spec.consistent) {
    const bool one_off = (s[0] == s[1] && s[2] != s[0]) || (s[0] == s[2] && s[1] != s[0]) ||
                         (s[1] == s[2] && s[0] != s[1]);
    if (!one_off)
      throw ValidationError("inconsistent ToySpec requires exactly one deviating part style");
  }
  if (spec.noise_level < 0) throw ValidationError("noise_level must be >= 0");
}

}  // namespace

const Landmarks& toy_landmarks() {
  static const Landmarks lm = build_toy_landmarks();
  return lm;
}

std::pair<FaceRecord, Label> generate_toy_face(const ToySpec& spec) {
  validate_toy_spec(spec);

  FaceRecord face;
  face.video_id = "toy";
  face.frame_index = 0;
  face.image = Image(kFaceSize, kFaceSize);
  face.landmarks = toy_landmarks();

  const float bg[3] = {0.52f, 0.50f, 0.48f};
  for (int y = 0; y < kFaceSize; ++y)
    for (int x = 0; x < kFaceSize; ++x)
      for (int c = 0; c < 3; ++c) face.image.at(y, x, c) = bg[c];

  for (int band = 0; band < 3; ++band) {
    const double s = spec.part_styles[static_cast<std::size_t>(band)];
    float col[3];
    palette(s, col);
    const float amp = static_cast<float>(0.02 + 0.03 * s);
    for (const Rect& r : band_rects(band)) {
      for (int y = r.y; y < r.y + r.h; ++y) {
        for (int x = r.x; x < r.x + r.w; ++x) {
          const float tex = ((x + y) % 2 == 0) ? amp : -amp;
          for (int c = 0; c < 3; ++c) face.image.at(y, x, c) = col[c] + tex;
        }
      }
    }
  }

  if (spec.noise_level > 0) {
    Rng rng = make_rng(derive_seed(spec.seed, "toy-noise"));
    std::uniform_real_distribution<float> jitter(-static_cast<float>(spec.noise_level),
                                                 static_cast<float>(spec.noise_level));
    for (float& v : face.image.data) v += jitter(rng);
  }
  clamp01(face.image);

  return {std::move(face), spec.consistent ? Label::kReal : Label::kFake};
}

const std::vector<std::string>& toy_manipulation_styles() {
  static const std::vector<std::string> styles = {"swap_eyes", "swap_nose", "swap_lips"};
  return styles;
}

namespace {

struct ToyVideoPlan {
  std::string video_id;
  Label label = Label::kReal;
  std::string manipulation = "none";
  std::string split;
  std::array<double, 3> styles{};
  bool consistent = true;
  std::uint64_t noise_base = 0;
};

std::vector<ToyVideoPlan> plan_toy_videos(const ToyCorpusSpec& spec) {
  if (spec.n_videos < 4) throw ArgumentError("toy corpus needs at least 4 videos");
  if (spec.n_styles < 1 || spec.n_styles > 3)
    throw ArgumentError("n_styles must be in [1, 3]");
  if (spec.frames_per_video < 1) throw ArgumentError("frames_per_video must be >= 1");

  Rng rng = make_rng(derive_seed(spec.seed, "toy-corpus"));
  std::uniform_real_distribution<double> base_style(0.08, 0.92);
  std::uniform_real_distribution<double> offset(0.35, 0.60);

  const int n_real = spec.n_videos / 2;
  const int n_fake = spec.n_videos - n_real;

  std::vector<ToyVideoPlan> plans;
  for (int i = 0; i < n_real; ++i) {
    ToyVideoPlan p;
    p.video_id = "toy_r_" + std::to_string(i);
    p.label = Label::kReal;
    const double s = base_style(rng);
    p.styles = {s, s, s};
    p.consistent = true;
    p.noise_base = derive_seed(spec.seed, "noise", p.video_id);
    plans.push_back(std::move(p));
  }
  for (int i = 0; i < n_fake; ++i) {
    ToyVideoPlan p;
    const int band = i % spec.n_styles;
    p.video_id = "toy_f_" + std::to_string(i);
    p.label = Label::kFake;
    p.manipulation = toy_manipulation_styles()[static_cast<std::size_t>(band)];
    const double s = base_style(rng);
    double d = offset(rng);
    double swapped = s <= 0.5 ? s + d : s - d;
    swapped = std::clamp(swapped, 0.02, 0.98);
    p.styles = {s, s, s};
    p.styles[static_cast<std::size_t>(band)] = swapped;
    p.consistent = false;
    p.noise_base = derive_seed(spec.seed, "noise", p.video_id);
    plans.push_back(std::move(p));
  }

  // Stratified splits: per (label, manipulation) group, train_fraction goes
  // to train and the remainder alternates val/test.
  auto assign_splits = [&](auto match) {
    std::vector<ToyVideoPlan*> group;
    for (auto& p : plans)
      if (match(p)) group.push_back(&p);
    const int n_train = static_cast<int>(std::lround(group.size() * spec.train_fraction));
    int tail = 0;
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (static_cast<int>(i) < n_train)
        group[i]->split = "train";
      else
        group[i]->split = (tail++ % 2 == 0) ? "test" : "val";
    }
  };
  assign_splits([](const ToyVideoPlan& p) { return p.label == Label::kReal; });
  for (int b = 0; b < spec.n_styles; ++b) {
    const std::string style = toy_manipulation_styles()[static_cast<std::size_t>(b)];
    assign_splits([&](const ToyVideoPlan& p) { return p.manipulation == style; });
  }
  return plans;
}

FaceRecord render_toy_frame(const ToyVideoPlan& plan, const ToyCorpusSpec& spec, int frame) {
  ToySpec fs;
  fs.seed = derive_seed(plan.noise_base, frame);
  fs.part_styles = plan.styles;
  fs.consistent = plan.consistent;
  fs.noise_level = spec.noise_level;
  auto [face, label] = generate_toy_face(fs);
  (void)label;
  face.video_id = plan.video_id;
  face.frame_index = frame;
  return face;
}

}  // namespace

std::vector<ToyVideo> make_toy_videos(const ToyCorpusSpec& spec) {
  std::vector<ToyVideo> out;
  for (const ToyVideoPlan& plan : plan_toy_videos(spec)) {
    ToyVideo v;
    v.entry.video_id = plan.video_id;
    v.entry.label = plan.label;
    v.entry.manipulation_type = plan.manipulation;
    v.entry.split = plan.split;
    for (int f = 0; f < spec.frames_per_video; ++f)
      v.frames.push_back(render_toy_frame(plan, spec, f));
    out.push_back(std::move(v));
  }
  return out;
}

MediaManifest write_toy_corpus(const ToyCorpusSpec& spec, const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  fs::create_directories(root / "frames");
  fs::create_directories(root / "landmarks");

  MediaManifest manifest;
  for (const ToyVideoPlan& plan : plan_toy_videos(spec)) {
    const fs::path dir = root / "frames" / plan.video_id;
    fs::create_directories(dir);

    std::ofstream lm_out(root / "landmarks" / (plan.video_id + ".txt"));
    if (!lm_out) throw IoError("cannot write landmarks for " + plan.video_id);
    for (int f = 0; f < spec.frames_per_video; ++f) {
      FaceRecord face = render_toy_frame(plan, spec, f);
      char name[32];
      std::snprintf(name, sizeof(name), "frame_%04d.ppm", f);
      save_ppm(face.image, dir / name);
      lm_out << "frame " << f << "\n";
      for (const Point& p : face.landmarks) lm_out << p.x << " " << p.y << "\n";
    }

    ManifestEntry e;
    e.video_id = plan.video_id;
    e.frames_dir = dir;
    e.label = plan.label;
    e.manipulation_type = plan.manipulation;
    e.split = plan.split;
    manifest.entries.push_back(std::move(e));
  }
  save_manifest(manifest, root / "manifest.jsonl");
  return manifest;
}

}  // namespace maskrec
