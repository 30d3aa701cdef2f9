#include "maskrec/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <fstream>

#include "maskrec/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian");

namespace maskrec {

const char* stage_name(Stage s) {
  switch (s) {
    case Stage::kPretrain: return "pretrain";
    case Stage::kBranchA: return "branch_a";
    case Stage::kBranchB: return "branch_b";
  }
  return "?";
}

Stage stage_from_name(const std::string& name) {
  if (name == "pretrain") return Stage::kPretrain;
  if (name == "branch_a") return Stage::kBranchA;
  if (name == "branch_b") return Stage::kBranchB;
  throw CheckpointError("unknown stage: " + name);
}

const std::vector<float>* Checkpoint::find(const std::string& name) const {
  for (const auto& [n, v] : parameters)
    if (n == name) return &v;
  return nullptr;
}

std::string digest_string(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

constexpr const char* kMagic = "MASKREC-CKPT 1";

void write_blob(std::ostream& out, const std::string& tag, const char* data, std::size_t bytes) {
  out << tag << " " << bytes << "\n";
  out.write(data, static_cast<std::streamsize>(bytes));
  out << "\n";
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out << kMagic << "\n";
    out << "model_id " << ckpt.model_id << "\n";
    out << "stage " << stage_name(ckpt.stage) << "\n";
    out << "config_digest " << ckpt.config_digest << "\n";
    write_blob(out, "rng_state", ckpt.rng_state.data(), ckpt.rng_state.size());
    out << "arrays " << ckpt.parameters.size() << "\n";
    for (const auto& [name, values] : ckpt.parameters) {
      write_blob(out, name, reinterpret_cast<const char*>(values.data()),
                 values.size() * sizeof(float));
    }
    out << "END\n";
    if (!out) throw IoError("short write: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string read_line(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) throw CheckpointError("truncated checkpoint: " + path.string());
  return line;
}

std::pair<std::string, std::string> split_kv(const std::string& line,
                                             const std::filesystem::path& path) {
  const auto sp = line.find(' ');
  if (sp == std::string::npos)
    throw CheckpointError("corrupt checkpoint header: " + path.string());
  return {line.substr(0, sp), line.substr(sp + 1)};
}

std::string read_blob(std::istream& in, std::size_t bytes, const std::filesystem::path& path) {
  std::string data(bytes, '\0');
  in.read(data.data(), static_cast<std::streamsize>(bytes));
  if (in.gcount() != static_cast<std::streamsize>(bytes))
    throw CheckpointError("truncated checkpoint: " + path.string());
  if (in.get() != '\n') throw CheckpointError("corrupt checkpoint blob: " + path.string());
  return data;
}

}  // namespace

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<std::string>& expected_digest) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());

  if (read_line(in, path) != kMagic)
    throw CheckpointError("bad checkpoint magic: " + path.string());

  Checkpoint ckpt;
  auto [k1, model_id] = split_kv(read_line(in, path), path);
  if (k1 != "model_id") throw CheckpointError("corrupt checkpoint: " + path.string());
  ckpt.model_id = model_id;
  auto [k2, stage] = split_kv(read_line(in, path), path);
  if (k2 != "stage") throw CheckpointError("corrupt checkpoint: " + path.string());
  ckpt.stage = stage_from_name(stage);
  auto [k3, digest] = split_kv(read_line(in, path), path);
  if (k3 != "config_digest") throw CheckpointError("corrupt checkpoint: " + path.string());
  ckpt.config_digest = digest;

  auto [k4, rng_bytes] = split_kv(read_line(in, path), path);
  if (k4 != "rng_state") throw CheckpointError("corrupt checkpoint: " + path.string());
  ckpt.rng_state = read_blob(in, std::stoull(rng_bytes), path);

  auto [k5, count_str] = split_kv(read_line(in, path), path);
  if (k5 != "arrays") throw CheckpointError("corrupt checkpoint: " + path.string());
  const std::size_t n_arrays = std::stoull(count_str);

  for (std::size_t i = 0; i < n_arrays; ++i) {
    auto [name, bytes_str] = split_kv(read_line(in, path), path);
    const std::size_t bytes = std::stoull(bytes_str);
    if (bytes % sizeof(float) != 0)
      throw CheckpointError("corrupt array size in checkpoint: " + path.string());
    const std::string raw = read_blob(in, bytes, path);
    std::vector<float> values(bytes / sizeof(float));
    std::memcpy(values.data(), raw.data(), bytes);
    ckpt.parameters.emplace_back(name, std::move(values));
  }
  if (read_line(in, path) != "END")
    throw CheckpointError("truncated checkpoint: " + path.string());

  if (expected_digest && *expected_digest != ckpt.config_digest)
    throw CheckpointError("checkpoint digest mismatch: expected " + *expected_digest + ", found " +
                          ckpt.config_digest + " in " + path.string());
  return ckpt;
}

void require_checkpoint(const Checkpoint& ckpt, Stage stage, const std::string& digest) {
  if (ckpt.stage != stage)
    throw CheckpointError(std::string("checkpoint stage mismatch: expected ") +
                          stage_name(stage) + ", found " + stage_name(ckpt.stage));
  if (!digest.empty() && ckpt.config_digest != digest)
    throw CheckpointError("checkpoint digest mismatch: expected " + digest + ", found " +
                          ckpt.config_digest);
}

}  // namespace maskrec
