#include "dbench/v2v.hpp"

#include <stdexcept>

namespace dbench {

void validate(const V2VConfig& c) {
  if (!(c.max_range > 0)) throw std::invalid_argument("v2v range must be positive");
  if (c.latency < 0) throw std::invalid_argument("v2v latency must be non-negative");
  if (!(c.drop_probability >= 0 && c.drop_probability < 1))
    throw std::invalid_argument("v2v drop probability must lie in [0, 1)");
  if (c.max_payload < 64) throw std::invalid_argument("v2v payload cap must be at least 64 bytes");
}

const char* to_string(SendStatus s) {
  switch (s) {
    case SendStatus::accepted: return "accepted";
    case SendStatus::payload_overflow: return "payload_overflow";
    case SendStatus::unknown_sender: return "unknown_sender";
    case SendStatus::missing_recipient: return "missing_recipient";
  }
  return "accepted";
}

const char* to_string(DeliveryStatus s) {
  switch (s) {
    case DeliveryStatus::delivered: return "delivered";
    case DeliveryStatus::out_of_range: return "out_of_range";
    case DeliveryStatus::dropped: return "dropped";
    case DeliveryStatus::unknown_recipient: return "unknown_recipient";
  }
  return "delivered";
}

V2VBus::V2VBus(V2VConfig config, std::uint64_t seed) : config_(config), rng_(seed) {
  validate(config_);
}

SendStatus V2VBus::send(V2VMessage msg, const std::map<std::string, Vec2>& known_actors) {
  if (!known_actors.count(msg.sender)) return SendStatus::unknown_sender;
  if (msg.payload.size() > config_.max_payload) return SendStatus::payload_overflow;
  if (config_.mode == ChannelMode::unicast && !msg.recipient) return SendStatus::missing_recipient;
  msg.delivery_step = msg.send_step + config_.latency;
  queue_.push_back(std::move(msg));
  return SendStatus::accepted;
}

std::map<std::string, std::vector<V2VMessage>> V2VBus::deliver(
    const std::map<std::string, Vec2>& positions, std::int64_t step) {
  std::map<std::string, std::vector<V2VMessage>> inbox;
  std::vector<V2VMessage> keep;
  const double range2 = config_.max_range * config_.max_range;

  auto consider = [&](const V2VMessage& m, const std::string& receiver, const Vec2* from) {
    DeliveryRecord rec{step, m.sender, receiver, DeliveryStatus::delivered, m.payload.size()};
    const auto it = positions.find(receiver);
    if (it == positions.end()) {
      rec.status = DeliveryStatus::unknown_recipient;
    } else if (!from || (it->second - *from).squaredNorm() > range2) {
      rec.status = DeliveryStatus::out_of_range;
    } else if (rng_.uniform() < config_.drop_probability) {
      rec.status = DeliveryStatus::dropped;
    } else {
      inbox[receiver].push_back(m);
    }
    log_.push_back(std::move(rec));
  };

  for (auto& m : queue_) {
    if (m.delivery_step > step) {
      keep.push_back(std::move(m));
      continue;
    }
    const auto s = positions.find(m.sender);
    const Vec2* from = s == positions.end() ? nullptr : &s->second;
    if (m.recipient) {
      consider(m, *m.recipient, from);
    } else {
      for (const auto& [id, pos] : positions)
        if (id != m.sender) consider(m, id, from);
    }
  }
  queue_ = std::move(keep);
  return inbox;
}

std::vector<DeliveryRecord> V2VBus::take_log() {
  std::vector<DeliveryRecord> out;
  out.swap(log_);
  return out;
}

}  // namespace dbench
