#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "aoipomdp/channel.hpp"
#include "aoipomdp/lti_kalman.hpp"
#include "aoipomdp/types.hpp"

namespace aoipomdp {

/// How the terminal cost table is derived from the age-indexed covariance.
enum class TerminalMode {
    stage_trace,  // terminal cost equals the stage trace table
    zero,         // no terminal cost
};

/// Per-slot cost data for the decision process: the age-indexed estimation
/// cost Tr(P(aoi)) plus a per-(channel state, action) transmission energy.
/// Retransmissions must not be cheaper than fresh transmissions.
struct CostModel {
    std::vector<double> trace_table;           // size n_r + 1
    Eigen::MatrixXd energy;                    // n_states x 2, column = action
    std::vector<double> terminal_trace_table;  // size n_r + 1

    CostModel(std::vector<double> trace_table, Eigen::MatrixXd energy,
              std::vector<double> terminal_trace_table);

    double energy_of(int j, Action a) const {
        return energy(j, static_cast<int>(a));
    }
    int max_aoi() const { return static_cast<int>(trace_table.size()) - 1; }
};

/// Deterministic age update given the feedback of the previous slot:
/// reset on delivery, 1 after a failed fresh transmission, incremented on a
/// failed retransmission, and reset to 0 when the failed retransmission had
/// already reached the cap (the packet is discarded).
int aoi_next(int aoi, Ack z, Action action, int n_r);

/// Actions permitted at an age value: only a fresh transmission when nothing
/// is pending (aoi = 0), both otherwise. Fresh comes first, which is also the
/// solver's tie-break order.
std::span<const Action> feasible_actions(int aoi, int n_r);

/// P(z | channel state i, age, action): a fresh packet errs with q_i, a
/// retransmission at age aoi with q_i * lambda^aoi.
double observation_prob(const ChannelModel& model, int i, int aoi, Ack z,
                        Action action);

/// Joint transition kernel of the (channel, age) state under `action`,
/// marginalized over the feedback bit.
double transition_prob(const ChannelModel& model, const AugmentedState& from,
                       Action action, const AugmentedState& to);

/// Stage cost Tr(P(aoi)) + energy(j, action).
double stage_cost(const CostModel& cost, int j, int aoi, Action action);

/// Terminal cost; channel-independent, `j` accepted for signature uniformity.
double terminal_cost(const CostModel& cost, int j, int aoi);

/// Builds the cost model from the plant: steady-state sensor covariance,
/// age-indexed trace table, and the given energy table (n_states x 2,
/// column index = action value).
CostModel build_cost_model(const LtiModel& lti, const ChannelModel& channel,
                           const Eigen::MatrixXd& energy,
                           TerminalMode terminal = TerminalMode::stage_trace);

}  // namespace aoipomdp
