#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace maskrec {

enum class Stage { kPretrain, kBranchA, kBranchB };

const char* stage_name(Stage s);
Stage stage_from_name(const std::string& name);

// Named float32 parameter blobs plus provenance. Saving then loading
// reproduces the arrays bit for bit.
struct Checkpoint {
  std::string model_id;
  Stage stage = Stage::kPretrain;
  std::string config_digest;
  std::vector<std::pair<std::string, std::vector<float>>> parameters;
  std::string rng_state;

  const std::vector<float>* find(const std::string& name) const;
};

// FNV-1a over a canonical config string; used as the compatibility digest.
std::string digest_string(const std::string& canonical);

// Atomic write (temp file + rename). Arrays are stored little-endian.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

// Throws CheckpointError on truncation or, when expected_digest is given,
// on a digest mismatch.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_digest = std::nullopt);

// Stage/digest guard used by consumers of a checkpoint.
void require_checkpoint(const Checkpoint& ckpt, Stage stage, const std::string& digest);

}  // namespace maskrec
