#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dymacl/errors.hpp"
#include "dymacl/tensor.hpp"

namespace dymacl {

// Versioned binary container: string metadata plus named float64 tensors.
// Used for network checkpoints and replay-buffer dumps. Byte layout is
// documented in docs/formats.md; all integers and floats are little-endian.
struct Container {
  static constexpr std::uint32_t kVersion = 1;

  std::map<std::string, std::string> metadata;
  std::vector<std::pair<std::string, Tensor>> tensors;

  void save(const std::filesystem::path& path) const;  // IoError on failure
  // Throws CheckpointError on bad magic, version, corruption or truncation;
  // never returns a partially loaded container.
  static Container load(const std::filesystem::path& path);

  const Tensor& tensor(const std::string& name) const;
  std::string meta(const std::string& key) const;  // CheckpointError if absent
  bool has_meta(const std::string& key) const { return metadata.count(key) > 0; }
};

// FNV-1a over a file's bytes; used to record checkpoint lineage in reports.
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace dymacl
