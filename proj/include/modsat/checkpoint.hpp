#pragma once

#include "modsat/td3.hpp"

#include "json.hpp"

#include <filesystem>
#include <stdexcept>

namespace modsat {

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Binary file: magic, version, length-prefixed JSON metadata, then the six
/// networks (actor, actor target, critic 1/2, critic targets) as raw
/// little-endian doubles with their layer shapes.
struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  nlohmann::json meta = nlohmann::json::object();
  Td3Networks nets;
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace modsat
