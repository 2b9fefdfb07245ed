#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include "nuemt/policy.hpp"

namespace nuemt {

// Trained policy plus everything needed to run it: architecture, flat
// parameters and the observation normalizer. Serialized as JSON, see
// docs/formats.md.
struct Checkpoint {
  static constexpr int kVersion = 1;

  std::string env_id;
  std::size_t horizon = 0;
  PolicySpec policy;
  ParamVector params;
  RunningNormalizer normalizer;
};

std::string checkpoint_to_json(const Checkpoint& checkpoint);
// Throws ConfigError on malformed input or a version mismatch.
Checkpoint checkpoint_from_json(std::string_view text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace nuemt
