#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bessrl/policy.hpp"

namespace bessrl {

// Versioned binary checkpoint: named tensors with shape headers and 64-bit
// little-endian values.
//
//   magic "BESSCKPT" | u32 version (=1) | u32 entry count
//   per entry: u32 name length | name bytes | u32 ndim | ndim x u64 dims
//              | product(dims) x f64 values
//
// All integers and doubles little-endian.
inline constexpr char kCheckpointMagic[8] = {'B', 'E', 'S', 'S', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void save_tensors(const std::string& path, const NamedTensors& entries);
NamedTensors load_tensors(const std::string& path);  // throws DataError

// Network checkpoints store the ten parameter tensors plus "sigma" as a
// one-element tensor, in the fixed tensors() order.
void save_checkpoint(const std::string& path, const NetworkParams& params);
NetworkParams load_checkpoint(const std::string& path);  // throws DataError

}  // namespace bessrl
