#pragma once

#include <filesystem>
#include <iosfwd>

#include "anw/numeric/tensor.hpp"

namespace anw {

/// ANWT tensor record:
///   "ANWT" | version u32 | rank u32 | shape u64 x rank | float32 x numel
/// All integers and floats little-endian.
inline constexpr std::uint32_t kTensorFormatVersion = 1;

void write_tensor(std::ostream& os, const Tensor& t);
Tensor read_tensor(std::istream& is);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

}  // namespace anw
