#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "styleobf/tensor.hpp"

namespace styleobf {

/// Versioned binary container shared by model and adversary checkpoints.
/// Layout: 8 magic bytes "SOBFBIN\0", u32 format version, length-prefixed
/// UTF-8 JSON config, u64 tensor count, then per tensor: length-prefixed
/// name, u64 rows, u64 cols, rows*cols little-endian doubles in
/// column-major order. Round-trips are bitwise.
struct TensorBundle {
    std::string config_json;  // serialized nlohmann::json object
    std::map<std::string, Mat> tensors;
};

inline constexpr std::uint32_t kBundleVersion = 1;

void save_bundle(const std::string& path, const TensorBundle& bundle);
TensorBundle load_bundle(const std::string& path);

}  // namespace styleobf
