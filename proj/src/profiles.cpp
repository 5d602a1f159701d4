#include "rrbscope/profiles.hpp"

namespace rrb {

namespace {

QosClass qos_voice() {
  return {1, ResourceType::GBR, 2, 100.0, 1e-2, 2000};
}
QosClass qos_video_call() {
  return {2, ResourceType::GBR, 4, 150.0, 1e-3, 4000};
}
QosClass qos_vod() {
  return {6, ResourceType::NonGBR, 6, 300.0, 1e-6, 8000};
}
QosClass qos_live() {
  return {7, ResourceType::NonGBR, 7, 100.0, 1e-3, 8000};
}
QosClass qos_web() {
  return {8, ResourceType::NonGBR, 8, 300.0, 1e-6, 8000};
}
QosClass qos_ott() {
  return {9, ResourceType::NonGBR, 9, 300.0, 1e-6, 8000};
}

AppProfile shop(const std::string& label, double dl_amp, double dl_base,
                double ul_base, double ul_amp, double ul_noise,
                std::uint32_t period) {
  AppProfile p;
  p.class_label = label;
  p.shape = TrafficShape::BurstyDecay;
  p.qos = qos_web();
  p.dl = {dl_base, dl_amp, period, dl_amp * 0.025};
  p.ul = {ul_base, ul_amp, period, ul_noise};
  return p;
}

AppProfile youtube(const std::string& label, bool live, double dl_base) {
  AppProfile p;
  p.class_label = label;
  p.shape = TrafficShape::Sinusoidal;
  p.qos = live ? qos_live() : qos_vod();
  // Live streams hold a steadier rate; on-demand buffers in deeper swings.
  const double swing = live ? 0.15 : 0.45;
  const std::uint32_t period = live ? 2500 : 5000;
  p.dl = {dl_base, dl_base * swing, period, dl_base * 0.05};
  p.ul = {60.0 + dl_base * 0.008, 20.0 + dl_base * 0.004, period,
          8.0 + dl_base * 0.002};
  return p;
}

AppProfile ott(const std::string& label, double dl_amp, double ul_base,
               std::uint64_t trace_subframes) {
  AppProfile p;
  p.class_label = label;
  p.shape = TrafficShape::Convex;
  p.qos = qos_ott();
  const auto period = static_cast<std::uint32_t>(trace_subframes);
  p.dl = {400.0, dl_amp, period, dl_amp * 0.035};
  p.ul = {ul_base, ul_base * 0.3, period, ul_base * 0.12};
  return p;
}

AppProfile call(const std::string& label, bool video, double ul_base,
                double dl_base) {
  AppProfile p;
  p.class_label = label;
  p.shape = TrafficShape::Linear;
  p.qos = video ? qos_video_call() : qos_voice();
  // Caller side: UL above DL. Video runs steadier than voice.
  const double noise_frac = video ? 0.05 : 0.10;
  p.ul = {ul_base, 0.0, 2000, ul_base * noise_frac};
  p.dl = {dl_base, 0.0, 2000, dl_base * noise_frac};
  return p;
}

}  // namespace

std::vector<AppProfile> profile_catalog(std::uint64_t trace_subframes) {
  std::vector<AppProfile> catalog;
  catalog.reserve(22);

  // Shopping: Amazon > Etsy > eBay > Target by download volume; Target's
  // UL is the lightest but also the noisiest of the four.
  catalog.push_back(shop("shop_amazon", 6000, 300, 80, 800, 40, 4000));
  catalog.push_back(shop("shop_etsy", 4000, 240, 58, 560, 24, 3600));
  catalog.push_back(shop("shop_ebay", 3750, 220, 62, 620, 30, 3300));
  catalog.push_back(shop("shop_target", 3450, 180, 50, 480, 40, 3000));

  catalog.push_back(youtube("yt_live_sd", true, 1200));
  catalog.push_back(youtube("yt_live_hd", true, 2400));
  catalog.push_back(youtube("yt_live_fhd", true, 3600));
  catalog.push_back(youtube("yt_vod_sd", false, 1500));
  catalog.push_back(youtube("yt_vod_hd", false, 3000));
  catalog.push_back(youtube("yt_vod_fhd", false, 4500));

  catalog.push_back(ott("ott_appletv", 5200, 100, trace_subframes));
  catalog.push_back(ott("ott_netflix", 4200, 90, trace_subframes));
  catalog.push_back(ott("ott_prime", 3600, 80, trace_subframes));
  catalog.push_back(ott("ott_disney", 3000, 70, trace_subframes));

  // Voice UL ordering: Zoom > Messenger > Telegram > WhatsApp.
  catalog.push_back(call("conf_whatsapp_voice", false, 400, 160));
  catalog.push_back(call("conf_telegram_voice", false, 800, 320));
  catalog.push_back(call("conf_messenger_voice", false, 1200, 480));
  catalog.push_back(call("conf_zoom_voice", false, 1600, 640));

  // Video ordering: Telegram > Zoom > Messenger > WhatsApp.
  catalog.push_back(call("conf_whatsapp_video", true, 2000, 1500));
  catalog.push_back(call("conf_messenger_video", true, 2400, 1800));
  catalog.push_back(call("conf_zoom_video", true, 2800, 2100));
  catalog.push_back(call("conf_telegram_video", true, 3200, 2400));

  return catalog;
}

AppProfile profile_by_label(const std::string& label,
                            std::uint64_t trace_subframes) {
  for (AppProfile& p : profile_catalog(trace_subframes))
    if (p.class_label == label) return p;
  throw config_error("unknown profile '" + label + "'");
}

}  // namespace rrb
