#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "wbc/hmi_state_machine.hpp"

using namespace wbc;
using namespace wbc::hmi;

namespace {

std::vector<InterfaceState> all_states() {
  std::vector<InterfaceState> out;
  for (int a = 0; a < 2; ++a)
    for (int level = 0; level < 3; ++level)
      for (int g = 0; g < 2; ++g)
        for (int mode = 0; mode < 2; ++mode)
          out.push_back({a == 1, level, g == 1, static_cast<PriorityMode>(mode)});
  return out;
}

}  // namespace

TEST_SUITE("hmi_state_machine") {

TEST_CASE("button map") {
  InterfaceState s;
  s.admittance_level = 2;
  CHECK(on_button_press(s, 2).admittance_level == 0);
  CHECK(on_button_press(InterfaceState{}, 1).admittance_active);
  CHECK(on_button_press(InterfaceState{}, 3).gripper_closed);
  CHECK(on_button_press(InterfaceState{}, 4).priority_mode == PriorityMode::locomotion);
  CHECK_THROWS_AS(on_button_press(s, 0), ContractViolation);
  CHECK_THROWS_AS(on_button_press(s, 5), ContractViolation);
}

TEST_CASE("button 2 cycles with period three") {
  for (const auto& s : all_states()) {
    CHECK(on_button_press(on_button_press(on_button_press(s, 2), 2), 2) == s);
    CHECK(!(on_button_press(s, 2) == s));
  }
}

TEST_CASE("buttons 1, 3 and 4 are involutions touching only their field") {
  for (const auto& s : all_states()) {
    for (int b : {1, 3, 4}) {
      const InterfaceState once = on_button_press(s, b);
      CHECK(on_button_press(once, b) == s);
      CHECK(once.admittance_level == s.admittance_level);
      CHECK((b == 1) == (once.admittance_active != s.admittance_active));
      CHECK((b == 3) == (once.gripper_closed != s.gripper_closed));
      CHECK((b == 4) == (once.priority_mode != s.priority_mode));
    }
  }
}

TEST_CASE("codec: zero state and exhaustive round trip") {
  const ButtonMessage zero = encode(InterfaceState{});
  CHECK(zero.values == std::array<std::uint8_t, 4>{0, 0, 0, 0});
  const auto states = all_states();
  CHECK(states.size() == 24);
  std::set<std::array<std::uint8_t, 4>> distinct;
  for (const auto& s : states) {
    CHECK(decode(encode(s)) == s);
    distinct.insert(encode(s).values);
    CHECK(decode_frame(encode_frame(encode(s, 1.5)), 1.5) == encode(s, 1.5));
  }
  CHECK(distinct.size() == 24);
}

TEST_CASE("decode rejects malformed messages") {
  const std::vector<int> bad_level{0, 3, 0, 0};
  CHECK_THROWS_AS(decode(std::span<const int>(bad_level)), ContractViolation);
  const std::vector<int> short_msg{0, 1, 0};
  CHECK_THROWS_AS(decode(std::span<const int>(short_msg)), ContractViolation);
  const std::vector<int> negative{-1, 0, 0, 0};
  CHECK_THROWS_AS(decode(std::span<const int>(negative)), ContractViolation);
}

TEST_CASE("wire frame layout") {
  const InterfaceState s{true, 2, false, PriorityMode::locomotion};
  const Frame f = encode_frame(encode(s));
  CHECK(f == Frame{0xB7, 1, 2, 0, 1, static_cast<std::uint8_t>(1 ^ 2 ^ 0 ^ 1)});

  Frame corrupt = f;
  corrupt[5] ^= 0x01;
  CHECK_THROWS_WITH_AS(decode_frame(corrupt, 0.0), doctest::Contains("checksum"), ContractViolation);
  corrupt = f;
  corrupt[0] = 0xB6;
  CHECK_THROWS_WITH_AS(decode_frame(corrupt, 0.0), doctest::Contains("magic"), ContractViolation);
  const std::array<std::uint8_t, 5> truncated{0xB7, 1, 2, 0, 1};
  CHECK_THROWS_AS(decode_frame(truncated, 0.0), ContractViolation);
  // Valid checksum but level 3.
  const Frame out_of_range{0xB7, 0, 3, 0, 0, 3};
  CHECK_THROWS_AS(decode_frame(out_of_range, 0.0), ContractViolation);
}

TEST_CASE("loop stamps presses at the next tick") {
  const auto msgs = poll_loop({{0.0012, 1}});
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0].stamp == doctest::Approx(0.005));
  CHECK(decode(msgs[0]).admittance_active);

  CHECK(poll_loop({}).empty());
  CHECK(poll_loop({{0.010, 3}})[0].stamp == doctest::Approx(0.010));
  CHECK(poll_loop({{0.0, 3}})[0].stamp == 0.0);
}

TEST_CASE("presses sharing a tick are processed in order") {
  const auto msgs = poll_loop({{0.0011, 2}, {0.0013, 2}});
  REQUIRE(msgs.size() == 2);
  CHECK(msgs[0].stamp == msgs[1].stamp);
  CHECK(decode(msgs[0]).admittance_level == 1);
  CHECK(decode(msgs[1]).admittance_level == 2);
  CHECK((decode(msgs[1]).admittance_level - decode(msgs[0]).admittance_level + 3) % 3 == 1);
  CHECK((decode(msgs[1]).admittance_level - InterfaceState{}.admittance_level + 3) % 3 == 2);
}

TEST_CASE("latency never exceeds one loop period") {
  std::vector<PressEvent> events;
  for (int i = 0; i < 500; ++i) events.push_back({0.0007 * i + 0.00013 * (i % 7), 1 + i % 4});
  std::sort(events.begin(), events.end(),
            [](const PressEvent& a, const PressEvent& b) { return a.time < b.time; });
  const auto msgs = poll_loop(events);
  REQUIRE(msgs.size() == events.size());
  for (std::size_t i = 0; i < msgs.size(); ++i) {
    CHECK(msgs[i].stamp >= events[i].time - 1e-9);
    CHECK(msgs[i].stamp - events[i].time <= 1.0 / kLoopRate + 1e-12);
    const double ticks = msgs[i].stamp * kLoopRate;
    CHECK(std::abs(ticks - std::round(ticks)) < 1e-9);
  }
}

TEST_CASE("unsorted presses are rejected") {
  CHECK_THROWS_AS(poll_loop({{0.2, 1}, {0.1, 1}}), ContractViolation);
}

TEST_CASE("debounce collapses bounces of the same button") {
  const std::vector<PressEvent> raw{{0.100, 2}, {0.120, 2}, {0.130, 1}, {0.149, 2}, {0.151, 2}};
  const auto clean = debounce(raw);
  CHECK(clean == std::vector<PressEvent>{{0.100, 2}, {0.130, 1}, {0.151, 2}});
  CHECK(debounce(raw, 0.0).size() == raw.size());
}

TEST_CASE("press script parsing") {
  std::istringstream ok("# phase one\n0.5 1\n\n1.0 3  # grasp\n1.5 4\n");
  CHECK(parse_press_script(ok) == std::vector<PressEvent>{{0.5, 1}, {1.0, 3}, {1.5, 4}});

  std::istringstream bad_id("0.5 1\n0.7 9\n");
  CHECK_THROWS_WITH_AS(parse_press_script(bad_id), doctest::Contains("line 2"), ContractViolation);
  std::istringstream garbage("0.5 1\n0.6 1\nfoo bar\n");
  CHECK_THROWS_WITH_AS(parse_press_script(garbage), doctest::Contains("line 3"), ContractViolation);
  std::istringstream unsorted("0.5 1\n0.4 2\n");
  CHECK_THROWS_AS(parse_press_script(unsorted), ContractViolation);
}

TEST_CASE("bounded queue is FIFO and refuses when full") {
  BoundedQueue<int> q(2);
  CHECK(q.push(1));
  CHECK(q.push(2));
  CHECK_FALSE(q.push(3));
  CHECK(q.pop() == 1);
  CHECK(q.push(4));
  CHECK(q.pop() == 2);
  CHECK(q.pop() == 4);
  CHECK_FALSE(q.pop().has_value());
}

}  // TEST_SUITE
