#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "aoipomdp/belief.hpp"
#include "aoipomdp/channel.hpp"
#include "aoipomdp/lti_kalman.hpp"
#include "aoipomdp/parallel.hpp"
#include "aoipomdp/pomdp.hpp"
#include "aoipomdp/solver.hpp"

namespace aoipomdp {

/// Transmission decision rule consulted once per slot with the information
/// state (belief, aoi). Implementations must return a feasible action; the
/// harness additionally forces a fresh transmission at aoi = 0.
class TransmitPolicy {
public:
    virtual ~TransmitPolicy() = default;
    virtual Action decide(int k, const Belief& pi, int aoi) const = 0;
};

/// Decision rule backed by a solved policy table; stages beyond the solved
/// horizon reuse the last stage.
class SolvedPolicy : public TransmitPolicy {
public:
    SolvedPolicy(Policy policy, BeliefGrid grid)
        : policy_(std::move(policy)), grid_(std::move(grid)) {}

    Action decide(int k, const Belief& pi, int aoi) const override {
        const int stage = std::min(k, policy_.horizon - 1);
        return policy_action(policy_, grid_, stage, pi, aoi);
    }

private:
    Policy policy_;
    BeliefGrid grid_;
};

enum class BaselineKind {
    always_fresh,       // a new packet every slot
    retransmit_to_cap,  // retry the pending packet until the cap forces fresh
};

/// Named baseline decision rules for comparison runs.
std::unique_ptr<TransmitPolicy> baseline_policy(BaselineKind kind);
std::unique_ptr<TransmitPolicy> baseline_policy(const std::string& name);

/// One closed-loop experiment: plant, channel, costs, the decision rule and
/// the Monte Carlo parameters.
struct SimConfig {
    LtiModel lti;
    ChannelModel channel;
    CostModel cost;
    int horizon;                    // slots per episode
    int runs;                       // independent episodes
    std::uint64_t seed;             // master seed
    int burn_in = 50;               // slots excluded from the MSE average
    const TransmitPolicy* policy = nullptr;  // non-owning
    std::optional<Belief> initial_belief;    // default: stationary channel law
    std::optional<Eigen::VectorXd> x_hat0;   // default: zero
    std::optional<Eigen::MatrixXd> P0;       // default: Sigma0
};

/// Everything observable about one slot of a closed-loop episode.
struct TraceRecord {
    int k;
    Eigen::VectorXd x;              // true plant state
    Eigen::VectorXd x_hat_sensor;   // sensor posterior
    Eigen::VectorXd x_hat_remote;   // remote estimate
    Action action;
    Ack ack;
    int aoi;                        // age counter used for the decision
    Belief belief;                  // channel belief used for the decision
    int channel_true;               // channel state the feedback was drawn in
    double sq_err;                  // ||x - x_hat_remote||^2
    double stage_cost_incurred;     // model stage cost at the true channel state
};

/// Aggregates over a Monte Carlo batch.
struct Metrics {
    double mse_mean = 0.0;   // mean over runs of the per-run time-averaged MSE
    double mse_std = 0.0;    // sample standard deviation over runs (0 if runs=1)
    double mean_cost = 0.0;  // mean over runs of the total episode cost
    double ack_rate = 0.0;   // delivered fraction over all slots and runs
    std::vector<double> per_run_mse;
};

/// Seed of episode `run` under master seed `seed` (splitmix64 stream).
std::uint64_t episode_seed(std::uint64_t seed, int run);

/// Simulates one episode of `config.horizon` slots. Within the episode the
/// supplied rng only seeds three sub-streams (plant noise, channel
/// transitions, feedback draws), so the channel realization is identical
/// across policies given the same seed.
std::vector<TraceRecord> run_episode(const SimConfig& config, Rng& rng);

/// Runs `config.runs` independent episodes with per-run seeds derived from
/// the master seed and aggregates them in run order. Exec::parallel executes
/// episodes over OpenMP with results identical to the serial reference.
Metrics monte_carlo(const SimConfig& config, Exec exec = Exec::parallel);

/// One sweep row: the combining gain and the metrics of the re-solved policy.
struct SweepRow {
    double lambda;
    Metrics metrics;
};

/// Model + solver + simulation parameters of a sweep experiment (the policy
/// is re-solved per lambda, every row reuses the same master seed).
struct SweepSetup {
    LtiModel lti;
    ChannelModel channel;
    Eigen::MatrixXd energy;
    TerminalMode terminal = TerminalMode::stage_trace;
    int horizon;
    int resolution;
    int runs;
    std::uint64_t seed;
    int burn_in = 50;
    std::optional<Eigen::VectorXd> x_hat0;
    std::optional<Eigen::MatrixXd> P0;
};

std::vector<SweepRow> sweep_lambda(const SweepSetup& setup,
                                   const std::vector<double>& lambdas,
                                   Exec exec = Exec::parallel);

}  // namespace aoipomdp
