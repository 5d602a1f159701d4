#include "rrbscope/radio.hpp"

#include <algorithm>

namespace rrb {

void validate(const QosClass& qos) {
  if (qos.qci_id < 1 || qos.qci_id > 26)
    throw config_error("qci_id must be in [1,26], got " +
                       std::to_string(qos.qci_id));
  if (qos.packet_error_rate < 0.0 || qos.packet_error_rate > 1.0)
    throw config_error("packet_error_rate must be in [0,1]");
  if (qos.max_data_burst == 0)
    throw config_error("max_data_burst must be > 0");
}

void validate(const CellConfig& cell) {
  if (cell.total_rbs == 0 || cell.rbg_size == 0 || cell.tbs_per_rb == 0 ||
      cell.subframe_ms <= 0.0)
    throw config_error("cell config fields must all be positive");
  if (cell.total_rbs % cell.rbg_size != 0)
    throw config_error("total_rbs (" + std::to_string(cell.total_rbs) +
                       ") must be divisible by rbg_size (" +
                       std::to_string(cell.rbg_size) + ")");
}

std::uint32_t rb_count(const RbgBitmap& bitmap) {
  const auto set = static_cast<std::uint32_t>(
      std::count(bitmap.bits.begin(), bitmap.bits.end(), true));
  return set * bitmap.rbg_size;
}

void validate_bitmap(const RbgBitmap& bitmap, const CellConfig& cell) {
  if (bitmap.rbg_size != cell.rbg_size)
    throw config_error("bitmap rbg_size does not match cell");
  if (bitmap.bits.size() * bitmap.rbg_size != cell.total_rbs)
    throw config_error("bitmap width " + std::to_string(bitmap.bits.size()) +
                       " does not cover cell of " +
                       std::to_string(cell.total_rbs) + " RBs");
}

bytes_t grant_bytes(const RbgBitmap& bitmap, const CellConfig& cell) {
  validate_bitmap(bitmap, cell);
  return static_cast<bytes_t>(rb_count(bitmap)) * cell.tbs_per_rb;
}

RbgBitmap make_contiguous_bitmap(const CellConfig& cell, std::uint32_t first,
                                 std::uint32_t count) {
  if (first + count > cell.rbg_count())
    throw config_error("contiguous allocation exceeds cell RBGs");
  RbgBitmap bitmap;
  bitmap.rbg_size = cell.rbg_size;
  bitmap.bits.assign(cell.rbg_count(), false);
  for (std::uint32_t i = 0; i < count; ++i) bitmap.bits[first + i] = true;
  return bitmap;
}

std::string bitmap_to_hex(const RbgBitmap& bitmap) {
  const std::size_t digits = (bitmap.bits.size() + 3) / 4;
  std::string out(digits, '0');
  static const char kHex[] = "0123456789abcdef";
  for (std::size_t i = 0; i < bitmap.bits.size(); ++i) {
    if (!bitmap.bits[i]) continue;
    const std::size_t nibble = i / 4;          // nibble 0 = lowest bits
    const std::size_t pos = digits - 1 - nibble;  // written MSB-first
    out[pos] = kHex[(out[pos] <= '9' ? out[pos] - '0' : out[pos] - 'a' + 10) |
                    (1 << (i % 4))];
  }
  return out;
}

RbgBitmap bitmap_from_hex(const std::string& hex, std::uint32_t rbg_size,
                          std::uint32_t n_rbgs) {
  const std::uint32_t width =
      n_rbgs != 0 ? n_rbgs : static_cast<std::uint32_t>(hex.size() * 4);
  if (hex.size() * 4 < width)
    throw data_error("hex bitmap too short for " + std::to_string(width) +
                     " RBGs");
  RbgBitmap bitmap;
  bitmap.rbg_size = rbg_size;
  bitmap.bits.assign(width, false);
  for (std::size_t d = 0; d < hex.size(); ++d) {
    const char c = hex[hex.size() - 1 - d];
    int v;
    if (c >= '0' && c <= '9') v = c - '0';
    else if (c >= 'a' && c <= 'f') v = c - 'a' + 10;
    else if (c >= 'A' && c <= 'F') v = c - 'A' + 10;
    else throw data_error(std::string("invalid hex digit '") + c + "'");
    for (int b = 0; b < 4; ++b) {
      const std::size_t idx = d * 4 + b;
      if (idx < width)
        bitmap.bits[idx] = (v >> b) & 1;
      else if ((v >> b) & 1)
        throw data_error("hex bitmap has bits beyond " +
                         std::to_string(width) + " RBGs");
    }
  }
  return bitmap;
}

}  // namespace rrb
