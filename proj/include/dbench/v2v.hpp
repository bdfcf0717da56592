#pragma once

#include "dbench/geometry.hpp"
#include "dbench/random.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dbench {

enum class ChannelMode { broadcast, unicast };

struct V2VConfig {
  double max_range = 300.0;
  std::int64_t latency = 1;  // steps
  double drop_probability = 0.0;
  std::size_t max_payload = 1024;
  ChannelMode mode = ChannelMode::broadcast;
};

/// Throws std::invalid_argument on out-of-range settings.
void validate(const V2VConfig& config);

struct V2VMessage {
  std::string sender;
  std::optional<std::string> recipient;
  std::int64_t send_step = 0;
  std::string payload;  // opaque bytes
  std::int64_t delivery_step = 0;
};

enum class SendStatus { accepted, payload_overflow, unknown_sender, missing_recipient };

const char* to_string(SendStatus s);

enum class DeliveryStatus { delivered, out_of_range, dropped, unknown_recipient };

const char* to_string(DeliveryStatus s);

/// One candidate delivery considered by the bus.
struct DeliveryRecord {
  std::int64_t step = 0;
  std::string sender;
  std::string receiver;
  DeliveryStatus status = DeliveryStatus::delivered;
  std::size_t bytes = 0;
};

/// Message queue with range, latency and loss. Candidates are visited in
/// receiver-id order and each draws exactly one uniform from the bus RNG, so
/// the outcome depends only on the seed and the message stream.
class V2VBus {
 public:
  explicit V2VBus(V2VConfig config = {}, std::uint64_t seed = 0);

  const V2VConfig& config() const { return config_; }

  /// `known_actors` decides whether the sender exists. The send step is taken
  /// from the message; the delivery step is assigned here.
  SendStatus send(V2VMessage msg, const std::map<std::string, Vec2>& known_actors);

  /// Delivers messages due at `step`, using positions at delivery time.
  /// Returns inboxes keyed by receiver id. Records go to the delivery log.
  std::map<std::string, std::vector<V2VMessage>> deliver(
      const std::map<std::string, Vec2>& positions, std::int64_t step);

  const std::vector<DeliveryRecord>& log() const { return log_; }
  /// Removes and returns the log accumulated since the last call.
  std::vector<DeliveryRecord> take_log();
  std::size_t pending() const { return queue_.size(); }

 private:
  V2VConfig config_;
  Rng rng_;
  std::vector<V2VMessage> queue_;
  std::vector<DeliveryRecord> log_;
};

}  // namespace dbench
