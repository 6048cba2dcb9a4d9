#pragma once

// ERTT click-stream files. All integers little-endian.
//
//   offset  size  field
//   0       4     magic "ERTT"
//   4       2     format version (u16) = 1
//   6       8     t_rep   (u64, ns)
//   14      8     t_pulse (u64, ns)
//   22      8     t_coll  (u64, ns)
//   30      8     record count (u64)
//   38      16*n  records: shot index (u64), time within shot (u64, ns)
//
// Times are rounded to whole nanoseconds on write. The shot count is not
// stored; on read it becomes last shot index + 1 unless supplied.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ersim/clickstream.hpp"

namespace ersim {

inline constexpr std::uint16_t kErttVersion = 1;
inline constexpr std::size_t kErttHeaderSize = 38;
inline constexpr std::size_t kErttRecordSize = 16;

std::vector<std::uint8_t> encode_clickstream(const ClickStream& stream);
ClickStream decode_clickstream(std::span<const std::uint8_t> bytes,
                               std::optional<std::uint64_t> n_shots = std::nullopt);

void write_clickstream(const ClickStream& stream, const std::string& path);
ClickStream read_clickstream(const std::string& path,
                             std::optional<std::uint64_t> n_shots = std::nullopt);

/// Rounds every time to the nanosecond grid used by the file format.
ClickStream quantize_to_ns(const ClickStream& stream);

/// FNV-1a 64 over raw bytes.
std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);

}  // namespace ersim
