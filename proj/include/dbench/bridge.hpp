#pragma once

#include "dbench/policies.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <string>
#include <sys/types.h>

namespace dbench {

inline constexpr const char* kBridgeProtocol = "dpb/1";

/// Frame kinds on the wire. Every frame is one JSON object per line with the
/// fields kind, step, actor and payload.
nlohmann::json bridge_frame(const std::string& kind, std::int64_t step, const std::string& actor,
                            nlohmann::json payload);

/// Policy served by an external process over line-delimited JSON on its
/// standard streams. The command runs under /bin/sh. Every failure (spawn,
/// handshake, timeout, malformed or error frame, early exit) raises BridgeError.
class BridgePolicy : public Policy {
 public:
  explicit BridgePolicy(const std::string& command,
                        std::chrono::milliseconds timeout = std::chrono::seconds(10));
  ~BridgePolicy() override;
  BridgePolicy(const BridgePolicy&) = delete;
  BridgePolicy& operator=(const BridgePolicy&) = delete;

  std::string name() const override { return "bridge"; }
  void reset(const Scenario& scenario) override;
  Action act(const Observation& obs) override;

  ActionSpace action_space() const { return space_; }

 private:
  void send(const nlohmann::json& frame);
  nlohmann::json receive(const std::string& expected_kind);
  void shutdown();

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::chrono::milliseconds timeout_;
  ActionSpace space_ = ActionSpace::relative_target_pose;
};

}  // namespace dbench
