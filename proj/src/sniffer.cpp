#include "rrbscope/sniffer.hpp"

#include <algorithm>
#include <set>

namespace rrb {

std::vector<UeIdentity> identify_victims(const DciLog& log) {
  std::vector<UeIdentity> victims;
  std::set<std::uint16_t> seen;
  for (const RarEvent& rar : log.rar_events)
    if (seen.insert(rar.crnti).second) victims.push_back({rar.crnti});
  for (const DciGrant& grant : log.grants)
    if (!seen.count(grant.rnti.crnti))
      throw data_error("grant references C-RNTI " +
                       std::to_string(grant.rnti.crnti) +
                       " with no RAR event");
  return victims;
}

VictimTrace reconstruct_throughput(const DciLog& log, UeIdentity victim,
                                   std::uint64_t bin_subframes,
                                   double subframe_ms) {
  if (bin_subframes == 0)
    throw data_error("bin_subframes must be >= 1");
  const bool known = std::any_of(
      log.rar_events.begin(), log.rar_events.end(),
      [&](const RarEvent& r) { return r.crnti == victim.crnti; });
  if (!known)
    throw data_error("C-RNTI " + std::to_string(victim.crnti) +
                     " not present in log");

  std::uint64_t duration = log.duration_subframes;
  for (const DciGrant& g : log.grants)
    duration = std::max(duration, g.subframe_index + 1);
  const std::uint64_t n_bins =
      (duration + bin_subframes - 1) / bin_subframes;

  VictimTrace trace;
  trace.crnti = victim;
  trace.bin_subframes = bin_subframes;
  trace.partial_tail = duration % bin_subframes != 0;
  for (ThroughputSeries* s : {&trace.ul, &trace.dl}) {
    s->bin_width_ms = static_cast<double>(bin_subframes) * subframe_ms;
    s->unit = SeriesUnit::RawBytes;
    s->values.assign(n_bins, 0.0);
  }
  for (const DciGrant& g : log.grants) {
    if (g.rnti.crnti != victim.crnti) continue;
    const std::uint64_t bin = g.subframe_index / bin_subframes;
    ThroughputSeries& s =
        g.direction == Direction::Uplink ? trace.ul : trace.dl;
    s.values[bin] += static_cast<double>(g.tbs_bytes);
  }
  return trace;
}

}  // namespace rrb
