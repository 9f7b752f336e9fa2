#pragma once

#include "glove/rng.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace glove::wire {

/// Statistical model of one physical link direction.
struct LinkProfile {
  std::string name = "usb";
  double latency_ms_mean = 1.0;
  double latency_ms_jitter = 0.0;  // uniform +/- around the mean
  double loss_prob = 0.0;
  bool reorder = false;

  void validate() const;
};

LinkProfile usb_profile();
LinkProfile bluetooth_profile();
/// "usb" or "bluetooth"; throws std::invalid_argument otherwise.
LinkProfile profile_by_name(std::string_view name);

struct Delivery {
  double deliver_at_ms = 0.0;
  std::vector<std::uint8_t> bytes;
};

/// One direction of an emulated link. Holds the last scheduled delivery time
/// so that, without reordering, deliveries leave in send order.
class Link {
 public:
  explicit Link(LinkProfile profile);

  /// Drops with probability loss_prob; otherwise schedules one delivery at
  /// now + mean +/- jitter (never before now).
  std::vector<Delivery> transmit(std::vector<std::uint8_t> bytes, double now_ms, Rng& rng);

  const LinkProfile& profile() const { return profile_; }
  std::uint64_t sent() const { return sent_; }
  std::uint64_t dropped() const { return dropped_; }

 private:
  LinkProfile profile_;
  std::optional<double> last_scheduled_;
  std::uint64_t sent_ = 0;
  std::uint64_t dropped_ = 0;
};

/// A Link plus its in-flight queue.
class Channel {
 public:
  explicit Channel(LinkProfile profile) : link_(std::move(profile)) {}

  void send(std::vector<std::uint8_t> bytes, double now_ms, Rng& rng);

  /// Removes and returns everything due at or before now_ms, in delivery
  /// order (ties keep send order).
  std::vector<std::vector<std::uint8_t>> poll(double now_ms);

  std::size_t in_flight() const { return queue_.size(); }
  const Link& link() const { return link_; }

 private:
  Link link_;
  std::multimap<double, std::vector<std::uint8_t>> queue_;
};

}  // namespace glove::wire
