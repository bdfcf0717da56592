#include "dbench/v2v.hpp"
#include "dbench/world.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

namespace dbench {
namespace {

V2VMessage msg(const std::string& from, std::size_t bytes, std::int64_t step = 0,
               std::optional<std::string> to = std::nullopt) {
  return {from, std::move(to), step, std::string(bytes, 'x'), 0};
}

const std::map<std::string, Vec2> two_cars = {{"a", Vec2(0, 0)}, {"b", Vec2(10, 0)}};

TEST(V2V, PayloadCap) {
  V2VConfig cfg;
  cfg.max_payload = 1024;
  V2VBus bus(cfg);
  EXPECT_EQ(bus.send(msg("a", 100), two_cars), SendStatus::accepted);
  EXPECT_EQ(bus.send(msg("a", 1024), two_cars), SendStatus::accepted);
  EXPECT_EQ(bus.send(msg("a", 1025), two_cars), SendStatus::payload_overflow);
  EXPECT_EQ(bus.send(msg("ghost", 1), two_cars), SendStatus::unknown_sender);
}

TEST(V2V, UnicastToMissingActorDroppedAtDelivery) {
  V2VConfig cfg;
  cfg.mode = ChannelMode::unicast;
  V2VBus bus(cfg);
  EXPECT_EQ(bus.send(msg("a", 10, 0), two_cars), SendStatus::missing_recipient);
  EXPECT_EQ(bus.send(msg("a", 10, 0, "nobody"), two_cars), SendStatus::accepted);
  const auto inbox = bus.deliver(two_cars, 1);
  EXPECT_TRUE(inbox.empty());
  ASSERT_EQ(bus.log().size(), 1u);
  EXPECT_EQ(bus.log()[0].receiver, "nobody");
  EXPECT_EQ(bus.log()[0].status, DeliveryStatus::unknown_recipient);
}

TEST(V2V, ZeroLatencyDeliversSameStep) {
  V2VConfig cfg;
  cfg.latency = 0;
  cfg.max_range = 50;
  V2VBus bus(cfg);
  bus.send(msg("a", 10, 5), two_cars);
  const auto inbox = bus.deliver(two_cars, 5);
  ASSERT_EQ(inbox.count("b"), 1u);
  EXPECT_EQ(inbox.at("b").size(), 1u);
  EXPECT_EQ(inbox.at("b")[0].delivery_step, 5);
}

TEST(V2V, OutOfRangeNotDelivered) {
  V2VConfig cfg;
  cfg.latency = 0;
  cfg.max_range = 50;
  V2VBus bus(cfg);
  const std::map<std::string, Vec2> apart = {{"a", Vec2(0, 0)}, {"b", Vec2(60, 0)}};
  bus.send(msg("a", 10), apart);
  EXPECT_TRUE(bus.deliver(apart, 0).empty());
  EXPECT_EQ(bus.log().at(0).status, DeliveryStatus::out_of_range);
}

TEST(V2V, DropRateIsBinomial) {
  V2VConfig cfg;
  cfg.latency = 0;
  cfg.drop_probability = 0.5;
  V2VBus bus(cfg, 1234);
  int delivered = 0;
  for (int k = 0; k < 10000; ++k) {
    bus.send(msg("a", 8, k), two_cars);
    const auto in = bus.deliver(two_cars, k);
    if (in.count("b")) delivered += int(in.at("b").size());
  }
  // Four standard deviations of Binomial(10000, 0.5) is 0.02.
  EXPECT_NEAR(delivered / 10000.0, 0.5, 0.02);
}

TEST(V2V, ExactlyOnceAtSendPlusLatency) {
  for (std::int64_t latency : {0, 1, 3, 7}) {
    V2VConfig cfg;
    cfg.latency = latency;
    V2VBus bus(cfg, 9);
    std::map<std::int64_t, int> arrivals;
    for (std::int64_t k = 0; k < 50; ++k) {
      if (k < 20) bus.send(msg("a", 4, k), two_cars);
      for (const auto& m : bus.deliver(two_cars, k)["b"]) {
        EXPECT_EQ(k, m.send_step + latency);
        ++arrivals[m.send_step];
      }
    }
    EXPECT_EQ(arrivals.size(), 20u);
    for (const auto& [s, n] : arrivals) EXPECT_EQ(n, 1) << "sent at " << s;
  }
}

TEST(V2V, UsesPositionsAtDeliveryTime) {
  V2VConfig cfg;
  cfg.latency = 3;
  cfg.max_range = 50;
  V2VBus bus(cfg);
  bus.send(msg("a", 4, 0), two_cars);
  const std::map<std::string, Vec2> moved = {{"a", Vec2(0, 0)}, {"b", Vec2(80, 0)}};
  EXPECT_TRUE(bus.deliver(moved, 3).empty());
  bus.send(msg("a", 4, 10), moved);
  EXPECT_EQ(bus.deliver(two_cars, 13).count("b"), 1u);
}

TEST(V2V, SameSeedSameOutcome) {
  auto run = [] {
    V2VConfig cfg;
    cfg.drop_probability = 0.3;
    V2VBus bus(cfg, 77);
    const std::map<std::string, Vec2> many = {
        {"a", Vec2(0, 0)}, {"b", Vec2(5, 0)}, {"c", Vec2(0, 9)}, {"d", Vec2(400, 0)}};
    std::vector<int> statuses;
    for (std::int64_t k = 0; k < 200; ++k) {
      bus.send(msg(k % 2 ? "a" : "c", 4, k), many);
      bus.deliver(many, k);
      for (const auto& r : bus.take_log()) statuses.push_back(int(r.status));
    }
    return statuses;
  };
  EXPECT_EQ(run(), run());
}

TEST(V2V, WorldLogsTraffic) {
  Scenario sc;
  sc.id = "v2v";
  sc.network = test::single_lane(500.0, 10.0, 10.0);
  for (const auto& [id, x] : {std::pair{"a", 10.0}, std::pair{"b", 30.0}}) {
    MissionSpec m;
    m.id = id;
    m.start = {Vec2(x, 0), 0};
    m.route.lanes = {"road"};
    m.route.goal = Vec2(450, 0);
    sc.missions.push_back(m);
  }
  World w(sc);
  EXPECT_EQ(w.send("a", "hi"), SendStatus::accepted);
  const std::map<ActorId, Action> zero = {{"a", RelativeTargetPose{}}, {"b", RelativeTargetPose{}}};
  w.step(zero);
  const auto events = w.step(zero);
  int v2v = 0;
  for (const auto& e : events)
    if (e.kind == EventKind::v2v) {
      ++v2v;
      EXPECT_EQ(e.payload.at("status"), "delivered");
      EXPECT_EQ(e.other, std::optional<ActorId>("b"));
    }
  EXPECT_EQ(v2v, 1);
  const auto obs = w.observe("b");
  ASSERT_EQ(obs.inbox.size(), 1u);
  EXPECT_EQ(obs.inbox[0].payload, "hi");
}

}  // namespace
}  // namespace dbench
