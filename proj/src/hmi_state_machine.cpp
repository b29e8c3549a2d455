#include "wbc/hmi_state_machine.hpp"

#include <cmath>
#include <map>
#include <sstream>
#include <string>

namespace wbc::hmi {

InterfaceState on_button_press(const InterfaceState& state, int button_id) {
  InterfaceState next = state;
  switch (button_id) {
    case 1:
      next.admittance_active = !state.admittance_active;
      break;
    case 2:
      next.admittance_level = (state.admittance_level + 1) % 3;
      break;
    case 3:
      next.gripper_closed = !state.gripper_closed;
      break;
    case 4:
      next.priority_mode = state.priority_mode == PriorityMode::manipulation
                               ? PriorityMode::locomotion
                               : PriorityMode::manipulation;
      break;
    default:
      throw ContractViolation("button id must be 1..4, got " + std::to_string(button_id));
  }
  return next;
}

ButtonMessage encode(const InterfaceState& state, double stamp) {
  if (state.admittance_level < 0 || state.admittance_level > 2) {
    throw ContractViolation("admittance level must be 0, 1 or 2");
  }
  ButtonMessage msg;
  msg.values = {static_cast<std::uint8_t>(state.admittance_active),
                static_cast<std::uint8_t>(state.admittance_level),
                static_cast<std::uint8_t>(state.gripper_closed),
                static_cast<std::uint8_t>(state.priority_mode)};
  msg.stamp = stamp;
  return msg;
}

InterfaceState decode(std::span<const int> values) {
  if (values.size() != 4) {
    throw ContractViolation("button message must have 4 elements, got " +
                            std::to_string(values.size()));
  }
  const int limits[4] = {1, 2, 1, 1};
  for (std::size_t i = 0; i < 4; ++i) {
    if (values[i] < 0 || values[i] > limits[i]) {
      throw ContractViolation("button message element " + std::to_string(i) + " out of range: " +
                              std::to_string(values[i]));
    }
  }
  InterfaceState state;
  state.admittance_active = values[0] == 1;
  state.admittance_level = values[1];
  state.gripper_closed = values[2] == 1;
  state.priority_mode = values[3] == 1 ? PriorityMode::locomotion : PriorityMode::manipulation;
  return state;
}

InterfaceState decode(const ButtonMessage& msg) {
  const std::array<int, 4> values = {msg.values[0], msg.values[1], msg.values[2], msg.values[3]};
  return decode(std::span<const int>(values));
}

Frame encode_frame(const ButtonMessage& msg) {
  decode(msg);  // range check
  Frame frame{};
  frame[0] = kFrameMagic;
  std::uint8_t checksum = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    frame[1 + i] = msg.values[i];
    checksum ^= msg.values[i];
  }
  frame[5] = checksum;
  return frame;
}

ButtonMessage decode_frame(std::span<const std::uint8_t> bytes, double stamp) {
  if (bytes.size() != kFrameSize) {
    throw ContractViolation("frame must be " + std::to_string(kFrameSize) + " bytes, got " +
                            std::to_string(bytes.size()));
  }
  if (bytes[0] != kFrameMagic) {
    throw ContractViolation("frame has bad magic byte");
  }
  ButtonMessage msg;
  std::uint8_t checksum = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    msg.values[i] = bytes[1 + i];
    checksum ^= bytes[1 + i];
  }
  if (checksum != bytes[5]) {
    throw ContractViolation("frame checksum mismatch");
  }
  decode(msg);
  msg.stamp = stamp;
  return msg;
}

std::vector<PressEvent> debounce(const std::vector<PressEvent>& events, double window) {
  std::vector<PressEvent> out;
  std::map<int, double> last_accepted;
  for (const auto& e : events) {
    auto it = last_accepted.find(e.button);
    if (it != last_accepted.end() && e.time - it->second < window) {
      continue;
    }
    last_accepted[e.button] = e.time;
    out.push_back(e);
  }
  return out;
}

long long tick_index(double time, double loop_rate) {
  // A press landing within 1e-9 of a tick is serviced by that tick.
  return static_cast<long long>(std::ceil(time * loop_rate - 1e-9));
}

std::vector<ButtonMessage> poll_loop(const std::vector<PressEvent>& events, double loop_rate,
                                     const InterfaceState& initial) {
  if (!(loop_rate > 0.0)) {
    throw ContractViolation("loop rate must be positive");
  }
  std::vector<ButtonMessage> out;
  out.reserve(events.size());
  InterfaceState state = initial;
  double previous = -INFINITY;
  for (const auto& e : events) {
    if (e.time < previous) {
      throw ContractViolation("press events must be time-sorted");
    }
    previous = e.time;
    state = on_button_press(state, e.button);
    const long long tick = std::max(0LL, tick_index(e.time, loop_rate));
    out.push_back(encode(state, static_cast<double>(tick) / loop_rate));
  }
  return out;
}

std::vector<PressEvent> parse_press_script(std::istream& in) {
  std::vector<PressEvent> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    PressEvent e;
    if (!(fields >> e.time)) {
      std::string rest;
      fields.clear();
      if (fields >> rest) {
        throw ContractViolation("press script line " + std::to_string(line_no) +
                                ": expected '<time_s> <button_id>'");
      }
      continue;
    }
    std::string trailing;
    if (!(fields >> e.button) || (fields >> trailing)) {
      throw ContractViolation("press script line " + std::to_string(line_no) +
                              ": expected '<time_s> <button_id>'");
    }
    if (e.button < 1 || e.button > 4) {
      throw ContractViolation("press script line " + std::to_string(line_no) +
                              ": button id must be 1..4");
    }
    if (!events.empty() && e.time < events.back().time) {
      throw ContractViolation("press script line " + std::to_string(line_no) +
                              ": times must be non-decreasing");
    }
    events.push_back(e);
  }
  return events;
}

}  // namespace wbc::hmi
