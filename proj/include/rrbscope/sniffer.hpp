#pragma once

#include <cstdint>
#include <vector>

#include "rrbscope/pipeline.hpp"
#include "rrbscope/radio.hpp"
#include "rrbscope/sim.hpp"

namespace rrb {

/// A victim's radio footprint as reconstructed from plaintext grants alone.
struct VictimTrace {
  UeIdentity crnti;
  ThroughputSeries ul;
  ThroughputSeries dl;
  std::uint64_t bin_subframes = 1;
  bool partial_tail = false;  // last bin covers fewer subframes than the rest
};

/// Every C-RNTI handed out in plaintext RAR messages, in order of first
/// appearance. Throws data_error when a grant references an RNTI that never
/// appeared in a RAR event.
std::vector<UeIdentity> identify_victims(const DciLog& log);

/// Sums the victim's grant sizes into bins of bin_subframes subframes, per
/// direction. Bin k covers subframes [k*bin, (k+1)*bin). The series length
/// covers the full log duration; empty bins stay zero.
VictimTrace reconstruct_throughput(const DciLog& log, UeIdentity victim,
                                   std::uint64_t bin_subframes,
                                   double subframe_ms = 1.0);

}  // namespace rrb
