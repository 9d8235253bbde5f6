#pragma once

#include <cstdint>

namespace aoipomdp {

/// Transmission decision taken by the sensor in one slot.
enum class Action : std::uint8_t {
    retransmit = 0,  // resend the pending packet unchanged
    fresh = 1,       // transmit the current local estimate
};

/// One-bit delivery feedback from the remote estimator.
enum class Ack : std::uint8_t {
    nack = 0,
    ack = 1,
};

/// Joint (channel state, age counter) state of the decision process.
/// `channel` is a 0-based index into the channel state set; `aoi` counts
/// slots since the pending packet was first transmitted, 0 meaning a fresh
/// packet must be sent next.
struct AugmentedState {
    int channel = 0;
    int aoi = 0;
};

inline bool is_fresh(Action a) { return a == Action::fresh; }
inline bool is_ack(Ack z) { return z == Ack::ack; }

}  // namespace aoipomdp
