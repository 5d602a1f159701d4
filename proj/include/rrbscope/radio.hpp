#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrbscope/common.hpp"

namespace rrb {

enum class ResourceType { GBR, NonGBR };

/// One of the 26 QoS classes a bearer can be mapped to. The scheduler only
/// looks at resource_type and priority_level; the remaining attributes are
/// carried for completeness and validated.
struct QosClass {
  int qci_id = 9;
  ResourceType resource_type = ResourceType::NonGBR;
  int priority_level = 9;             // lower value = higher priority
  double packet_delay_budget_ms = 300.0;
  double packet_error_rate = 1e-6;    // probability in [0,1]
  bytes_t max_data_burst = 1;
};

void validate(const QosClass& qos);

/// Plaintext per-device identifier assigned in the Random Access Response.
struct UeIdentity {
  std::uint16_t crnti = 0;

  friend bool operator==(const UeIdentity&, const UeIdentity&) = default;
};

/// DCI type 0 carries uplink grants, type 1 downlink grants.
enum class Direction { Uplink, Downlink };

inline const char* to_string(Direction d) {
  return d == Direction::Uplink ? "UL" : "DL";
}

/// Cell-wide constants. The modulation/coding is frozen: one RB always
/// carries tbs_per_rb bytes per subframe, so grant size over time is linear
/// in allocated RBs.
struct CellConfig {
  std::uint32_t total_rbs = 100;
  std::uint32_t rbg_size = 4;
  bytes_t tbs_per_rb = 100;
  double subframe_ms = 1.0;

  std::uint32_t rbg_count() const { return total_rbs / rbg_size; }
};

void validate(const CellConfig& cell);

/// Allocation bitmap over resource block groups. Bit i set means RBG i is
/// granted; each group is rbg_size resource blocks.
struct RbgBitmap {
  std::vector<bool> bits;
  std::uint32_t rbg_size = 4;

  friend bool operator==(const RbgBitmap&, const RbgBitmap&) = default;
};

/// Number of resource blocks a bitmap allocates: set bits times group size.
std::uint32_t rb_count(const RbgBitmap& bitmap);

/// Throws config_error when the bitmap does not match the cell geometry.
void validate_bitmap(const RbgBitmap& bitmap, const CellConfig& cell);

/// Bytes carried by a grant with this bitmap under the given cell config.
bytes_t grant_bytes(const RbgBitmap& bitmap, const CellConfig& cell);

/// Builds a bitmap with RBGs [first, first + count) set.
RbgBitmap make_contiguous_bitmap(const CellConfig& cell, std::uint32_t first,
                                 std::uint32_t count);

/// Lowercase hex encoding, RBG 0 in the least significant bit. Width is
/// always ceil(bits/4) digits so logs line up.
std::string bitmap_to_hex(const RbgBitmap& bitmap);

/// Inverse of bitmap_to_hex. n_rbgs = 0 infers the width from the string
/// (a multiple of 4 bits).
RbgBitmap bitmap_from_hex(const std::string& hex, std::uint32_t rbg_size,
                          std::uint32_t n_rbgs = 0);

/// One unencrypted scheduling grant as observed on the PDCCH.
struct DciGrant {
  std::uint64_t subframe_index = 0;
  UeIdentity rnti;
  Direction direction = Direction::Downlink;
  RbgBitmap bitmap;
  bytes_t tbs_bytes = 0;

  friend bool operator==(const DciGrant&, const DciGrant&) = default;
};

}  // namespace rrb
