#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rrbscope/common.hpp"
#include "rrbscope/radio.hpp"
#include "rrbscope/rng.hpp"

namespace rrb {

/// Coarse throughput-over-time shapes the traffic generator can produce:
/// periodic oscillation (streaming), a single hump peaking mid-trace
/// (media platforms), a flat rate (calls), and a large initial download
/// that decays with sparse interaction spikes (browsing).
enum class TrafficShape { Sinusoidal, Convex, Linear, BurstyDecay };

const char* to_string(TrafficShape shape);
TrafficShape traffic_shape_from_string(const std::string& name);

struct DirectionParams {
  double base_rate = 0.0;   // bytes per subframe
  double amplitude = 0.0;   // bytes
  std::uint32_t period = 2; // subframes
  double noise_std = 0.0;   // bytes
};

/// Parametric traffic generator for one application/activity class.
struct AppProfile {
  std::string class_label;
  TrafficShape shape = TrafficShape::Linear;
  DirectionParams ul;
  DirectionParams dl;
  QosClass qos;

  const DirectionParams& params(Direction d) const {
    return d == Direction::Uplink ? ul : dl;
  }
};

void validate(const AppProfile& profile);

struct MacQueue {
  QosClass qos;
  bytes_t buffered_bytes = 0;
};

/// One simulated device running exactly one service, with a MAC queue per
/// direction for that service's QoS class.
struct SimUe {
  UeIdentity identity;
  AppProfile profile;
  std::array<MacQueue, 2> queues;  // [Uplink, Downlink]

  MacQueue& queue(Direction d) {
    return queues[d == Direction::Uplink ? 0 : 1];
  }
  const MacQueue& queue(Direction d) const {
    return queues[d == Direction::Uplink ? 0 : 1];
  }
};

struct SimConfig {
  CellConfig cell;
  std::vector<SimUe> ues;
  std::uint64_t duration_subframes = 0;
  std::uint64_t seed = 0;
};

void validate(const SimConfig& config);

struct RarEvent {
  std::uint64_t subframe = 0;
  std::uint16_t crnti = 0;

  friend bool operator==(const RarEvent&, const RarEvent&) = default;
};

/// Everything a passive eavesdropper can capture: plaintext C-RNTI
/// assignments and the time-ordered grant stream.
struct DciLog {
  std::vector<RarEvent> rar_events;
  std::vector<DciGrant> grants;
  std::uint64_t duration_subframes = 0;
};

struct DirectionTruth {
  std::vector<bytes_t> granted;   // per subframe, includes GBR padding
  std::vector<bytes_t> arrivals;  // application-layer bytes per subframe
  bytes_t arrivals_total = 0;
  bytes_t drained_total = 0;
  bytes_t final_buffer = 0;
};

struct UeTruth {
  std::uint16_t crnti = 0;
  std::string class_label;
  DirectionTruth ul;
  DirectionTruth dl;

  const DirectionTruth& truth(Direction d) const {
    return d == Direction::Uplink ? ul : dl;
  }
};

/// Scheduler-side record of every run, the oracle the sniffer is checked
/// against.
struct GroundTruth {
  std::vector<UeTruth> ues;
};

/// Application bytes arriving at the MAC queue in one subframe. Noise draws
/// come from the caller's stream; the deterministic part depends only on the
/// profile and subframe index.
bytes_t generate_arrivals(const AppProfile& profile, Direction direction,
                          std::uint64_t subframe, SplitMix64& rng);

/// Idealized buffer status report: exact queued bytes.
bytes_t buffer_status(const MacQueue& queue);

/// RBGs a GBR bearer is persistently granted each subframe: peak demand
/// (base + amplitude) rounded up to whole RBGs. Zero for non-GBR.
std::uint32_t persistent_rbgs(const AppProfile& profile, Direction direction,
                              const CellConfig& cell);

/// Allocates one subframe: GBR queues get their persistent RBGs first in
/// ascending priority order, then non-GBR queues are served from the
/// remaining pool proportionally to their buffer status. Drains queues.
std::vector<DciGrant> schedule_subframe(const CellConfig& cell,
                                        std::vector<SimUe>& ues,
                                        std::uint64_t subframe);

/// Runs the full per-subframe loop: arrivals, scheduling, logging.
/// Deterministic: identical config (including seed) gives identical output.
std::pair<DciLog, GroundTruth> run_simulation(const SimConfig& config);

}  // namespace rrb
