#include "glove/link.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace glove::wire {

void LinkProfile::validate() const {
  if (!(loss_prob >= 0.0 && loss_prob <= 1.0))
    throw std::invalid_argument("link " + name + ": loss_prob must be in [0,1]");
  if (!(latency_ms_mean >= 0.0) || !(latency_ms_jitter >= 0.0))
    throw std::invalid_argument("link " + name + ": latency must be non-negative");
}

LinkProfile usb_profile() { return {"usb", 1.0, 0.0, 0.0, false}; }

LinkProfile bluetooth_profile() { return {"bluetooth", 30.0, 10.0, 0.01, false}; }

LinkProfile profile_by_name(std::string_view name) {
  if (name == "usb") return usb_profile();
  if (name == "bluetooth") return bluetooth_profile();
  throw std::invalid_argument("unknown link profile '" + std::string(name) + "'");
}

Link::Link(LinkProfile profile) : profile_(std::move(profile)) { profile_.validate(); }

std::vector<Delivery> Link::transmit(std::vector<std::uint8_t> bytes, double now_ms, Rng& rng) {
  ++sent_;
  if (rng.bernoulli(profile_.loss_prob)) {
    ++dropped_;
    return {};
  }
  const double jitter = profile_.latency_ms_jitter > 0.0
                            ? rng.uniform(-profile_.latency_ms_jitter, profile_.latency_ms_jitter)
                            : 0.0;
  double at = std::max(now_ms, now_ms + profile_.latency_ms_mean + jitter);
  if (!profile_.reorder && last_scheduled_) at = std::max(at, *last_scheduled_);
  last_scheduled_ = at;
  std::vector<Delivery> out;
  out.push_back({at, std::move(bytes)});
  return out;
}

void Channel::send(std::vector<std::uint8_t> bytes, double now_ms, Rng& rng) {
  for (auto& d : link_.transmit(std::move(bytes), now_ms, rng)) queue_.emplace(d.deliver_at_ms, std::move(d.bytes));
}

std::vector<std::vector<std::uint8_t>> Channel::poll(double now_ms) {
  std::vector<std::vector<std::uint8_t>> out;
  const auto end = queue_.upper_bound(now_ms);
  for (auto it = queue_.begin(); it != end; ++it) out.push_back(std::move(it->second));
  queue_.erase(queue_.begin(), end);
  return out;
}

}  // namespace glove::wire
