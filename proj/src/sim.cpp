#include "rrbscope/sim.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace rrb {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double deterministic_rate(const AppProfile& profile, Direction direction,
                          std::uint64_t subframe) {
  const DirectionParams& p = profile.params(direction);
  const double t = static_cast<double>(subframe);
  switch (profile.shape) {
    case TrafficShape::Linear:
      return p.base_rate;
    case TrafficShape::Sinusoidal:
      return p.base_rate +
             p.amplitude * std::sin(kTwoPi * t / static_cast<double>(p.period));
    case TrafficShape::Convex: {
      // Single hump peaking half way through one period.
      const double u = 2.0 * t / static_cast<double>(p.period);
      return p.base_rate + p.amplitude * u * std::exp(1.0 - u);
    }
    case TrafficShape::BurstyDecay: {
      // Initial page load decaying geometrically, then a smaller click
      // burst at every period boundary.
      const double half_life =
          std::max(1.0, static_cast<double>(p.period) / 4.0);
      double rate = p.base_rate + p.amplitude * std::exp2(-t / half_life);
      if (subframe >= p.period) {
        const std::uint64_t since_click = subframe % p.period;
        const double click_half_life =
            std::max(1.0, static_cast<double>(p.period) / 16.0);
        rate += 0.25 * p.amplitude *
                std::exp2(-static_cast<double>(since_click) / click_half_life);
      }
      return rate;
    }
  }
  return p.base_rate;
}

std::uint32_t rbgs_for_bytes(double demand_bytes, const CellConfig& cell) {
  if (demand_bytes <= 0.0) return 0;
  const auto rbs = static_cast<std::uint64_t>(
      std::ceil(demand_bytes / static_cast<double>(cell.tbs_per_rb)));
  return static_cast<std::uint32_t>((rbs + cell.rbg_size - 1) /
                                    cell.rbg_size);
}

struct QueueRef {
  std::size_t ue_index;
  Direction direction;
  int priority;
};

}  // namespace

const char* to_string(TrafficShape shape) {
  switch (shape) {
    case TrafficShape::Sinusoidal: return "sinusoidal";
    case TrafficShape::Convex: return "convex";
    case TrafficShape::Linear: return "linear";
    case TrafficShape::BurstyDecay: return "bursty_decay";
  }
  return "linear";
}

TrafficShape traffic_shape_from_string(const std::string& name) {
  if (name == "sinusoidal") return TrafficShape::Sinusoidal;
  if (name == "convex") return TrafficShape::Convex;
  if (name == "linear") return TrafficShape::Linear;
  if (name == "bursty_decay") return TrafficShape::BurstyDecay;
  throw config_error("unknown traffic shape '" + name + "'");
}

void validate(const AppProfile& profile) {
  validate(profile.qos);
  if (profile.class_label.empty())
    throw config_error("profile class_label is empty");
  for (Direction d : {Direction::Uplink, Direction::Downlink}) {
    const DirectionParams& p = profile.params(d);
    if (p.base_rate < 0.0)
      throw config_error(profile.class_label + ": base_rate must be >= 0");
    if (p.amplitude < 0.0)
      throw config_error(profile.class_label + ": amplitude must be >= 0");
    if (p.noise_std < 0.0)
      throw config_error(profile.class_label + ": noise_std must be >= 0");
    if (profile.shape == TrafficShape::Sinusoidal && p.period < 2)
      throw config_error(profile.class_label +
                         ": sinusoidal period must be >= 2");
    if (p.period == 0)
      throw config_error(profile.class_label + ": period must be >= 1");
  }
}

void validate(const SimConfig& config) {
  validate(config.cell);
  if (config.duration_subframes == 0)
    throw config_error("duration_subframes must be >= 1");
  if (config.ues.empty()) throw config_error("simulation needs at least 1 UE");
  std::set<std::uint16_t> seen;
  std::uint64_t gbr_rbs = 0;
  for (const SimUe& ue : config.ues) {
    validate(ue.profile);
    if (!seen.insert(ue.identity.crnti).second)
      throw config_error("duplicate C-RNTI " +
                         std::to_string(ue.identity.crnti));
    if (ue.profile.qos.resource_type == ResourceType::GBR) {
      for (Direction d : {Direction::Uplink, Direction::Downlink})
        gbr_rbs += static_cast<std::uint64_t>(
                       persistent_rbgs(ue.profile, d, config.cell)) *
                   config.cell.rbg_size;
    }
  }
  if (gbr_rbs > config.cell.total_rbs)
    throw config_error("persistent GBR demand of " + std::to_string(gbr_rbs) +
                       " RBs exceeds cell capacity of " +
                       std::to_string(config.cell.total_rbs));
}

bytes_t generate_arrivals(const AppProfile& profile, Direction direction,
                          std::uint64_t subframe, SplitMix64& rng) {
  const DirectionParams& p = profile.params(direction);
  const double noise = p.noise_std * rng.next_normal();
  const double rate = deterministic_rate(profile, direction, subframe) + noise;
  if (rate <= 0.0) return 0;
  return static_cast<bytes_t>(std::llround(rate));
}

bytes_t buffer_status(const MacQueue& queue) { return queue.buffered_bytes; }

std::uint32_t persistent_rbgs(const AppProfile& profile, Direction direction,
                              const CellConfig& cell) {
  if (profile.qos.resource_type != ResourceType::GBR) return 0;
  const DirectionParams& p = profile.params(direction);
  return rbgs_for_bytes(p.base_rate + p.amplitude, cell);
}

std::vector<DciGrant> schedule_subframe(const CellConfig& cell,
                                        std::vector<SimUe>& ues,
                                        std::uint64_t subframe) {
  std::vector<QueueRef> gbr;
  std::vector<QueueRef> non_gbr;
  for (std::size_t i = 0; i < ues.size(); ++i) {
    for (Direction d : {Direction::Uplink, Direction::Downlink}) {
      const QosClass& qos = ues[i].profile.qos;
      QueueRef ref{i, d, qos.priority_level};
      if (qos.resource_type == ResourceType::GBR)
        gbr.push_back(ref);
      else
        non_gbr.push_back(ref);
    }
  }
  std::stable_sort(gbr.begin(), gbr.end(), [](const auto& a, const auto& b) {
    return a.priority < b.priority;
  });
  std::stable_sort(non_gbr.begin(), non_gbr.end(),
                   [](const auto& a, const auto& b) {
                     return a.priority < b.priority;
                   });

  // Equal-priority non-GBR queues take turns: the start of each tied run
  // rotates with the subframe index so nobody starves when capacity is short.
  std::vector<QueueRef> rotated;
  rotated.reserve(non_gbr.size());
  std::size_t run_begin = 0;
  while (run_begin < non_gbr.size()) {
    std::size_t run_end = run_begin;
    while (run_end < non_gbr.size() &&
           non_gbr[run_end].priority == non_gbr[run_begin].priority)
      ++run_end;
    const std::size_t len = run_end - run_begin;
    const std::size_t shift = static_cast<std::size_t>(subframe % len);
    for (std::size_t k = 0; k < len; ++k)
      rotated.push_back(non_gbr[run_begin + (k + shift) % len]);
    run_begin = run_end;
  }

  std::vector<DciGrant> grants;
  std::uint32_t next_rbg = 0;
  const std::uint32_t total_rbgs = cell.rbg_count();

  auto emit = [&](const QueueRef& ref, std::uint32_t rbgs) {
    SimUe& ue = ues[ref.ue_index];
    DciGrant grant;
    grant.subframe_index = subframe;
    grant.rnti = ue.identity;
    grant.direction = ref.direction;
    grant.bitmap = make_contiguous_bitmap(cell, next_rbg, rbgs);
    grant.tbs_bytes = grant_bytes(grant.bitmap, cell);
    next_rbg += rbgs;
    MacQueue& queue = ue.queue(ref.direction);
    const bytes_t drained = std::min(queue.buffered_bytes, grant.tbs_bytes);
    queue.buffered_bytes -= drained;
    grants.push_back(std::move(grant));
  };

  for (const QueueRef& ref : gbr) {
    const std::uint32_t rbgs =
        persistent_rbgs(ues[ref.ue_index].profile, ref.direction, cell);
    if (rbgs == 0) continue;
    if (next_rbg + rbgs > total_rbgs)
      throw config_error("persistent GBR demand exceeds cell capacity");
    emit(ref, rbgs);
  }

  for (const QueueRef& ref : rotated) {
    const bytes_t buffered =
        buffer_status(ues[ref.ue_index].queue(ref.direction));
    if (buffered == 0) continue;
    const std::uint32_t remaining = total_rbgs - next_rbg;
    if (remaining == 0) break;
    const std::uint32_t wanted =
        rbgs_for_bytes(static_cast<double>(buffered), cell);
    const std::uint32_t rbgs = std::min(wanted, remaining);
    emit(ref, rbgs);
  }

  std::sort(grants.begin(), grants.end(),
            [](const DciGrant& a, const DciGrant& b) {
              if (a.rnti.crnti != b.rnti.crnti)
                return a.rnti.crnti < b.rnti.crnti;
              return a.direction < b.direction;
            });
  return grants;
}

std::pair<DciLog, GroundTruth> run_simulation(const SimConfig& config) {
  validate(config);
  const std::uint64_t duration = config.duration_subframes;

  std::vector<SimUe> ues = config.ues;
  for (SimUe& ue : ues) {
    ue.queue(Direction::Uplink).qos = ue.profile.qos;
    ue.queue(Direction::Downlink).qos = ue.profile.qos;
    ue.queue(Direction::Uplink).buffered_bytes = 0;
    ue.queue(Direction::Downlink).buffered_bytes = 0;
  }

  // One independent noise stream per UE and direction, derived from the
  // top-level seed; parallel runs of the same config reproduce bit-exactly.
  std::vector<std::array<SplitMix64, 2>> streams;
  streams.reserve(ues.size());
  for (std::size_t i = 0; i < ues.size(); ++i)
    streams.push_back({SplitMix64(substream_seed(config.seed, i, 0)),
                       SplitMix64(substream_seed(config.seed, i, 1))});

  DciLog log;
  log.duration_subframes = duration;
  GroundTruth truth;
  truth.ues.resize(ues.size());
  for (std::size_t i = 0; i < ues.size(); ++i) {
    truth.ues[i].crnti = ues[i].identity.crnti;
    truth.ues[i].class_label = ues[i].profile.class_label;
    for (DirectionTruth* dt : {&truth.ues[i].ul, &truth.ues[i].dl}) {
      dt->granted.assign(duration, 0);
      dt->arrivals.assign(duration, 0);
    }
    log.rar_events.push_back({0, ues[i].identity.crnti});
  }

  for (std::uint64_t sf = 0; sf < duration; ++sf) {
    for (std::size_t i = 0; i < ues.size(); ++i) {
      for (Direction d : {Direction::Uplink, Direction::Downlink}) {
        const int di = d == Direction::Uplink ? 0 : 1;
        const bytes_t arrived =
            generate_arrivals(ues[i].profile, d, sf, streams[i][di]);
        ues[i].queue(d).buffered_bytes += arrived;
        DirectionTruth& dt = di == 0 ? truth.ues[i].ul : truth.ues[i].dl;
        dt.arrivals[sf] = arrived;
        dt.arrivals_total += arrived;
      }
    }

    std::vector<bytes_t> before(ues.size() * 2);
    for (std::size_t i = 0; i < ues.size(); ++i) {
      before[i * 2] = ues[i].queue(Direction::Uplink).buffered_bytes;
      before[i * 2 + 1] = ues[i].queue(Direction::Downlink).buffered_bytes;
    }

    std::vector<DciGrant> grants = schedule_subframe(config.cell, ues, sf);
    for (const DciGrant& grant : grants) {
      for (std::size_t i = 0; i < ues.size(); ++i) {
        if (ues[i].identity.crnti != grant.rnti.crnti) continue;
        const int di = grant.direction == Direction::Uplink ? 0 : 1;
        DirectionTruth& dt = di == 0 ? truth.ues[i].ul : truth.ues[i].dl;
        dt.granted[sf] += grant.tbs_bytes;
        dt.drained_total +=
            std::min(before[i * 2 + di], grant.tbs_bytes);
        break;
      }
    }
    log.grants.insert(log.grants.end(),
                      std::make_move_iterator(grants.begin()),
                      std::make_move_iterator(grants.end()));
  }

  for (std::size_t i = 0; i < ues.size(); ++i) {
    truth.ues[i].ul.final_buffer =
        ues[i].queue(Direction::Uplink).buffered_bytes;
    truth.ues[i].dl.final_buffer =
        ues[i].queue(Direction::Downlink).buffered_bytes;
  }
  return {std::move(log), std::move(truth)};
}

}  // namespace rrb
