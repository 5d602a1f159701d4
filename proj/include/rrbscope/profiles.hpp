#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rrbscope/sim.hpp"

namespace rrb {

/// The 22 application/activity classes the study covers: 4 shopping sites,
/// 8 conferencing activities (4 apps, voice and video, caller side),
/// 6 YouTube variants (live/on-demand in SD/HD/FHD) and 4 media platforms.
///
/// Rates are synthetic stand-ins chosen to respect the known qualitative
/// orderings (Amazon heaviest shop, Apple TV+ heaviest platform, FHD > HD >
/// SD, on-demand above live, Zoom loudest voice UL, Telegram loudest video),
/// not measurements. trace_subframes anchors the single-hump profiles so
/// their peak lands mid-trace.
std::vector<AppProfile> profile_catalog(std::uint64_t trace_subframes);

/// Looks a profile up by class label. Throws config_error if unknown.
AppProfile profile_by_label(const std::string& label,
                            std::uint64_t trace_subframes);

}  // namespace rrb
