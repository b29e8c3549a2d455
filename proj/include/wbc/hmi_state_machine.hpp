#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <istream>
#include <optional>
#include <span>
#include <vector>

#include "wbc/common.hpp"

namespace wbc {

/// What the button board controls.
///
///   button 1  toggles the admittance interface
///   button 2  cycles the admittance level 0 → 1 → 2 → 0
///   button 3  opens/closes the gripper
///   button 4  toggles manipulation/locomotion priority
struct InterfaceState {
  bool admittance_active{false};
  int admittance_level{0};
  bool gripper_closed{false};
  PriorityMode priority_mode{PriorityMode::manipulation};

  bool operator==(const InterfaceState&) const = default;
};

/// Four-element status message published by the board.
struct ButtonMessage {
  std::array<std::uint8_t, 4> values{};
  double stamp{0.0};

  bool operator==(const ButtonMessage&) const = default;
};

struct PressEvent {
  double time{0.0};
  int button{0};

  bool operator==(const PressEvent&) const = default;
};

namespace hmi {

inline constexpr std::uint8_t kFrameMagic = 0xB7;
inline constexpr std::size_t kFrameSize = 6;
inline constexpr double kLoopRate = 200.0;
inline constexpr double kDebounceWindow = 0.05;

using Frame = std::array<std::uint8_t, kFrameSize>;

/// Throws ContractViolation for ids outside 1..4.
InterfaceState on_button_press(const InterfaceState& state, int button_id);

ButtonMessage encode(const InterfaceState& state, double stamp = 0.0);
/// Throws ContractViolation on wrong length or out-of-range elements.
InterfaceState decode(std::span<const int> values);
InterfaceState decode(const ButtonMessage& msg);

/// Wire frame: 0xB7, four payload bytes, XOR of the payload bytes.
Frame encode_frame(const ButtonMessage& msg);
/// Throws ContractViolation on bad size, magic, checksum or payload range.
/// The stamp is not carried on the wire; the receiver supplies it.
ButtonMessage decode_frame(std::span<const std::uint8_t> bytes, double stamp);

/// Drops presses of a button that follow an accepted press of the same
/// button by less than `window` seconds. Input must be time-sorted.
std::vector<PressEvent> debounce(const std::vector<PressEvent>& events,
                                 double window = kDebounceWindow);

/// Runs the board loop: every press yields one message carrying the state
/// after the press, stamped at the first loop tick at or after the press.
/// Presses sharing a tick are applied in input order.
std::vector<ButtonMessage> poll_loop(const std::vector<PressEvent>& events,
                                     double loop_rate = kLoopRate,
                                     const InterfaceState& initial = {});

/// Index of the loop tick that services a press at `time`.
long long tick_index(double time, double loop_rate);

/// Parses `<time_s> <button_id>` lines; blank lines and `#` comments are
/// skipped. Errors name the line number.
std::vector<PressEvent> parse_press_script(std::istream& in);

}  // namespace hmi

/// FIFO hand-off between the board and the controller tick. Bounded; a full
/// queue refuses the push rather than dropping old messages.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  bool push(T value) {
    if (items_.size() >= capacity_) {
      return false;
    }
    items_.push_back(std::move(value));
    return true;
  }

  std::optional<T> pop() {
    if (items_.empty()) {
      return std::nullopt;
    }
    T value = std::move(items_.front());
    items_.pop_front();
    return value;
  }

  const T* front() const { return items_.empty() ? nullptr : &items_.front(); }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

 private:
  std::size_t capacity_;
  std::deque<T> items_;
};

}  // namespace wbc
