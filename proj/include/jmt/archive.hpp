#pragma once

// "JMT1" model archive.
//
// Layout (little-endian): magic "JMT1", u32 version, u64 length + UTF-8
// config block of "key=value\n" lines, u64 tensor count, then per tensor:
// u64 length + name, u32 rank, rank x u64 dims, 64-bit floats row-major.

#include <cstdint>
#include <string>
#include <string_view>

#include "jmt/model.hpp"

namespace jmt {

constexpr std::uint32_t kArchiveVersion = 1;

std::string serialize_model(const JointModel& model);
JointModel deserialize_model(std::string_view bytes, const std::string& source = "<memory>");

void save_model(const JointModel& model, const std::string& path);
JointModel load_model(const std::string& path);

}  // namespace jmt
