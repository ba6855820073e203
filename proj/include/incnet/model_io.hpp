#pragma once

#include <string>

#include "incnet/model.hpp"

namespace incnet {

// Model file: "INCN" magic, u32 format version, a length-prefixed manifest
// (topology, class maps, seeds, sharing, branch specs/provenance), then
// length-prefixed little-endian float64 tensor payloads, with a trailing
// CRC-32 over everything before it. Round trips are bit-exact.
inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const IncrementalModel& model, const std::string& path);
IncrementalModel load_model(const std::string& path);

}  // namespace incnet
