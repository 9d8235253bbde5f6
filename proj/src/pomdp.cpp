#include "aoipomdp/pomdp.hpp"

#include <stdexcept>
#include <string>

namespace aoipomdp {

namespace {

void check_aoi_range(int aoi, int n_r) {
    if (aoi < 0 || aoi > n_r)
        throw std::invalid_argument("aoi " + std::to_string(aoi) +
                                    " out of [0, " + std::to_string(n_r) + "]");
}

void check_feasible(int aoi, Action action, int n_r) {
    check_aoi_range(aoi, n_r);
    if (aoi == 0 && !is_fresh(action))
        throw std::invalid_argument(
            "retransmission is infeasible when nothing is pending (aoi = 0)");
}

}  // namespace

CostModel::CostModel(std::vector<double> trace_table_, Eigen::MatrixXd energy_,
                     std::vector<double> terminal_trace_table_)
    : trace_table(std::move(trace_table_)),
      energy(std::move(energy_)),
      terminal_trace_table(std::move(terminal_trace_table_)) {
    if (trace_table.size() < 2)
        throw std::invalid_argument("trace table needs entries for aoi 0..n_r");
    if (terminal_trace_table.size() != trace_table.size())
        throw std::invalid_argument(
            "terminal table must match the trace table shape");
    for (double t : trace_table)
        if (t < 0.0) throw std::invalid_argument("trace table must be >= 0");
    for (double t : terminal_trace_table)
        if (t < 0.0) throw std::invalid_argument("terminal table must be >= 0");
    if (energy.cols() != 2 || energy.rows() < 1)
        throw std::invalid_argument("energy table must be n_states x 2");
    for (Eigen::Index j = 0; j < energy.rows(); ++j) {
        if (energy(j, 0) < 0.0 || energy(j, 1) < 0.0)
            throw std::invalid_argument("energy must be >= 0");
        if (energy(j, static_cast<int>(Action::retransmit)) <
            energy(j, static_cast<int>(Action::fresh)))
            throw std::invalid_argument(
                "retransmission energy must be >= fresh energy");
    }
}

int aoi_next(int aoi, Ack z, Action action, int n_r) {
    check_feasible(aoi, action, n_r);
    if (is_ack(z)) return 0;
    if (is_fresh(action)) return 1;
    return aoi < n_r ? aoi + 1 : 0;  // discard at the retry cap
}

std::span<const Action> feasible_actions(int aoi, int n_r) {
    static constexpr Action kFreshOnly[] = {Action::fresh};
    static constexpr Action kBoth[] = {Action::fresh, Action::retransmit};
    check_aoi_range(aoi, n_r);
    if (aoi == 0) return {kFreshOnly, 1};
    return {kBoth, 2};
}

double observation_prob(const ChannelModel& model, int i, int aoi, Ack z,
                        Action action) {
    check_feasible(aoi, action, model.n_r);
    const double p_err = is_fresh(action) ? error_prob(model, 0, i)
                                          : error_prob(model, aoi, i);
    return is_ack(z) ? 1.0 - p_err : p_err;
}

double transition_prob(const ChannelModel& model, const AugmentedState& from,
                       Action action, const AugmentedState& to) {
    check_feasible(from.aoi, action, model.n_r);
    if (to.channel < 0 || to.channel >= model.n_states())
        throw std::invalid_argument("destination channel state out of range");
    check_aoi_range(to.aoi, model.n_r);
    double p = 0.0;
    for (Ack z : {Ack::nack, Ack::ack}) {
        if (aoi_next(from.aoi, z, action, model.n_r) != to.aoi) continue;
        p += observation_prob(model, from.channel, from.aoi, z, action);
    }
    return p * model.Tc(from.channel, to.channel);
}

double stage_cost(const CostModel& cost, int j, int aoi, Action action) {
    check_feasible(aoi, action, cost.max_aoi());
    if (j < 0 || j >= cost.energy.rows())
        throw std::invalid_argument("channel state out of range");
    return cost.trace_table[aoi] + cost.energy_of(j, action);
}

double terminal_cost(const CostModel& cost, int j, int aoi) {
    check_aoi_range(aoi, cost.max_aoi());
    if (j < 0 || j >= cost.energy.rows())
        throw std::invalid_argument("channel state out of range");
    return cost.terminal_trace_table[aoi];
}

CostModel build_cost_model(const LtiModel& lti, const ChannelModel& channel,
                           const Eigen::MatrixXd& energy,
                           TerminalMode terminal) {
    if (energy.rows() != channel.n_states() || energy.cols() != 2)
        throw std::invalid_argument("energy table must be n_states x 2");
    const Eigen::MatrixXd P_bar = steady_state_covariance(lti);
    const AoiCovTable table = aoi_cov_table(lti, P_bar, channel.n_r);
    std::vector<double> terminal_table =
        terminal == TerminalMode::stage_trace
            ? table.traces
            : std::vector<double>(table.traces.size(), 0.0);
    return CostModel(table.traces, energy, std::move(terminal_table));
}

}  // namespace aoipomdp
