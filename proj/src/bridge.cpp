#include "dbench/bridge.hpp"

#include "dbench/errors.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

namespace dbench {

using nlohmann::json;

json bridge_frame(const std::string& kind, std::int64_t step, const std::string& actor,
                  json payload) {
  return {{"kind", kind}, {"step", step}, {"actor", actor}, {"payload", std::move(payload)}};
}

BridgePolicy::BridgePolicy(const std::string& command, std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (command.empty()) throw BridgeError("empty bridge command");
  std::signal(SIGPIPE, SIG_IGN);
  int in[2], out[2];
  if (pipe(in) != 0) throw BridgeError(std::string("pipe: ") + std::strerror(errno));
  if (pipe(out) != 0) {
    close(in[0]);
    close(in[1]);
    throw BridgeError(std::string("pipe: ") + std::strerror(errno));
  }
  pid_ = fork();
  if (pid_ < 0) throw BridgeError(std::string("fork: ") + std::strerror(errno));
  if (pid_ == 0) {
    setpgid(0, 0);
    dup2(in[0], STDIN_FILENO);
    dup2(out[1], STDOUT_FILENO);
    close(in[0]);
    close(in[1]);
    close(out[0]);
    close(out[1]);
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid_, pid_);
  close(in[0]);
  close(out[1]);
  to_child_ = in[1];
  from_child_ = out[0];
  fcntl(to_child_, F_SETFD, FD_CLOEXEC);
  fcntl(from_child_, F_SETFD, FD_CLOEXEC);

  try {
    send(bridge_frame("handshake", 0, "", {{"protocol", kBridgeProtocol}}));
    const json reply = receive("handshake");
    const auto& payload = reply.at("payload");
    const std::string version = payload.value("protocol", "");
    if (version != kBridgeProtocol) {
      const std::string msg = "bridge protocol mismatch: expected '" +
                              std::string(kBridgeProtocol) + "', got '" + version + "'";
      try {
        send(bridge_frame("error", 0, "", {{"message", msg}}));
      } catch (const BridgeError&) {
      }
      throw BridgeError(msg);
    }
    space_ = action_space_from_string(payload.value("action_space", "relative_target_pose"));
  } catch (const BridgeError&) {
    shutdown();
    throw;
  } catch (const std::exception& e) {
    shutdown();
    throw BridgeError(std::string("bridge handshake: ") + e.what());
  }
}

BridgePolicy::~BridgePolicy() {
  if (to_child_ >= 0) {
    try {
      send(bridge_frame("shutdown", 0, "", json::object()));
    } catch (const BridgeError&) {
    }
  }
  shutdown();
}

void BridgePolicy::shutdown() {
  if (to_child_ >= 0) close(to_child_);
  if (from_child_ >= 0) close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    bool exited = false;
    for (int i = 0; i < 100 && !exited; ++i) {
      exited = waitpid(pid_, &status, WNOHANG) == pid_;
      if (!exited) std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    kill(-pid_, SIGKILL);
    if (!exited) waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void BridgePolicy::send(const json& frame) {
  if (to_child_ < 0) throw BridgeError("bridge is closed");
  const std::string line = frame.dump() + "\n";
  std::size_t done = 0;
  while (done < line.size()) {
    const ssize_t n = write(to_child_, line.data() + done, line.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("bridge write failed: ") + std::strerror(errno));
    }
    done += std::size_t(n);
  }
}

json BridgePolicy::receive(const std::string& expected_kind) {
  if (from_child_ < 0) throw BridgeError("bridge is closed");
  const auto deadline = std::chrono::steady_clock::now() + timeout_;
  std::size_t nl;
  while ((nl = buffer_.find('\n')) == std::string::npos) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0)
      throw BridgeError("bridge timed out waiting for a '" + expected_kind + "' frame");
    pollfd pfd{from_child_, POLLIN, 0};
    const int r = poll(&pfd, 1, int(left.count()));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("bridge poll failed: ") + std::strerror(errno));
    }
    if (r == 0) continue;
    char chunk[4096];
    const ssize_t n = read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw BridgeError(std::string("bridge read failed: ") + std::strerror(errno));
    }
    if (n == 0) throw BridgeError("bridge process closed its output");
    buffer_.append(chunk, std::size_t(n));
  }
  const std::string line = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  json frame;
  try {
    frame = json::parse(line);
  } catch (const json::exception& e) {
    throw BridgeError(std::string("malformed bridge frame: ") + e.what());
  }
  if (!frame.is_object() || !frame.contains("kind") || !frame["kind"].is_string())
    throw BridgeError("bridge frame without a kind");
  const std::string kind = frame["kind"];
  if (kind == "error") {
    const auto& p = frame.value("payload", json::object());
    throw BridgeError("bridge reported an error: " +
                      (p.is_object() ? p.value("message", p.dump()) : p.dump()));
  }
  if (kind != expected_kind)
    throw BridgeError("expected a '" + expected_kind + "' frame, got '" + kind + "'");
  if (!frame.contains("payload")) frame["payload"] = json::object();
  return frame;
}

void BridgePolicy::reset(const Scenario& scenario) {
  Policy::reset(scenario);
  send(bridge_frame("reset", 0, "", {{"scenario", scenario.id}, {"seed", scenario.seed}}));
  receive("reset");
}

Action BridgePolicy::act(const Observation& obs) {
  send(bridge_frame("observation", obs.step, obs.ego_id, to_json(obs)));
  const json reply = receive("action");
  if (reply.value("step", std::int64_t(-1)) != obs.step || reply.value("actor", "") != obs.ego_id)
    throw BridgeError("action frame does not answer step " + std::to_string(obs.step) +
                      " of '" + obs.ego_id + "'");
  Action a;
  try {
    a = action_from_json(reply.at("payload"));
  } catch (const std::exception& e) {
    throw BridgeError(std::string("bad action payload: ") + e.what());
  }
  if (action_space_of(a) != space_)
    throw BridgeError(std::string("action space '") + to_string(action_space_of(a)) +
                      "' differs from the declared '" + to_string(space_) + "'");
  return a;
}

}  // namespace dbench
