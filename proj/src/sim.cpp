#include "aoipomdp/sim.hpp"

#include <cmath>
#include <stdexcept>

namespace aoipomdp {

namespace {

class AlwaysFreshPolicy : public TransmitPolicy {
public:
    Action decide(int, const Belief&, int) const override {
        return Action::fresh;
    }
};

class RetransmitToCapPolicy : public TransmitPolicy {
public:
    Action decide(int, const Belief&, int aoi) const override {
        return aoi == 0 ? Action::fresh : Action::retransmit;
    }
};

}  // namespace

std::unique_ptr<TransmitPolicy> baseline_policy(BaselineKind kind) {
    switch (kind) {
        case BaselineKind::always_fresh:
            return std::make_unique<AlwaysFreshPolicy>();
        case BaselineKind::retransmit_to_cap:
            return std::make_unique<RetransmitToCapPolicy>();
    }
    throw std::invalid_argument("unknown baseline kind");
}

std::unique_ptr<TransmitPolicy> baseline_policy(const std::string& name) {
    if (name == "always-fresh") return baseline_policy(BaselineKind::always_fresh);
    if (name == "retransmit-to-cap")
        return baseline_policy(BaselineKind::retransmit_to_cap);
    throw std::invalid_argument("unknown baseline '" + name +
                                "' (expected always-fresh or retransmit-to-cap)");
}

std::uint64_t episode_seed(std::uint64_t seed, int run) {
    return splitmix64_at(seed, static_cast<std::uint64_t>(run));
}

namespace {

void validate(const SimConfig& config) {
    if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (config.runs < 1) throw std::invalid_argument("runs must be >= 1");
    if (config.burn_in < 0 || config.burn_in >= config.horizon)
        throw std::invalid_argument("burn_in must lie in [0, horizon)");
    if (!config.policy) throw std::invalid_argument("no decision rule given");
    if (config.cost.max_aoi() != config.channel.n_r)
        throw std::invalid_argument("cost table does not match n_r");
}

Eigen::VectorXd gaussian_vector(Rng& rng, const Eigen::MatrixXd& sqrt_cov) {
    Eigen::VectorXd z(sqrt_cov.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
    return sqrt_cov * z;
}

}  // namespace

std::vector<TraceRecord> run_episode(const SimConfig& config, Rng& rng) {
    validate(config);
    const LtiModel& lti = config.lti;
    const ChannelModel& channel = config.channel;
    const int n = lti.state_dim();

    // Independent sub-streams so the channel realization does not depend on
    // the policy under test (common random numbers across policies).
    Rng plant_rng(splitmix64_mix(rng.next_u64()));
    Rng channel_rng(splitmix64_mix(rng.next_u64()));
    Rng ack_rng(splitmix64_mix(rng.next_u64()));

    Belief belief = config.initial_belief
                        ? *config.initial_belief
                        : Belief(stationary_distribution(channel.Tc));
    if (belief.size() != channel.n_states())
        throw std::invalid_argument("initial belief dimension mismatch");

    // Slot 0 draws the channel state from the initial belief; later slots
    // step the chain, matching the prediction built into the belief update.
    int channel_state =
        channel_rng.categorical(belief.probs().data(), belief.size());

    PlantState plant{gaussian_vector(plant_rng, lti.sqrt_Sigma0), 0};
    KalmanState kf;
    kf.x_hat = config.x_hat0 ? *config.x_hat0 : Eigen::VectorXd::Zero(n);
    kf.P = config.P0 ? *config.P0 : lti.Sigma0;
    if (kf.x_hat.size() != n || kf.P.rows() != n || kf.P.cols() != n)
        throw std::invalid_argument("filter initialization dimension mismatch");

    Eigen::VectorXd x_hat_remote = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd pending = Eigen::VectorXd::Zero(n);
    int aoi = 0;

    std::vector<TraceRecord> trace;
    trace.reserve(config.horizon);
    for (int k = 0; k < config.horizon; ++k) {
        // (1) plant step and sensor filter
        Eigen::VectorXd y;
        if (k == 0) {
            y = lti.C * plant.x + gaussian_vector(plant_rng, lti.sqrt_R_v);
        } else {
            auto [next, meas] = simulate_step(lti, plant, plant_rng);
            plant = std::move(next);
            y = std::move(meas);
        }
        kf = kf_step(lti, kf, y);

        // (2) action from the information state; aoi = 0 forces fresh
        const Action action = aoi == 0 ? Action::fresh
                                       : config.policy->decide(k, belief, aoi);
        if (action == Action::fresh) pending = kf.x_hat;

        // (3) channel transition for this slot
        if (k > 0) channel_state = step_channel(channel, channel_state, channel_rng);

        // (4) delivery feedback
        const Ack ack = sample_ack(channel, channel_state, aoi, action, ack_rng);

        // (5) remote estimate: delivered packet content, else open loop
        if (is_ack(ack))
            x_hat_remote = pending;
        else
            x_hat_remote = lti.A * x_hat_remote;

        trace.push_back(TraceRecord{
            k, plant.x, kf.x_hat, x_hat_remote, action, ack, aoi, belief,
            channel_state, (plant.x - x_hat_remote).squaredNorm(),
            stage_cost(config.cost, channel_state, aoi, action)});

        // (6) information-state updates for the next slot
        belief = belief_update(channel, belief, aoi, ack, action);
        aoi = aoi_next(aoi, ack, action, channel.n_r);
    }
    return trace;
}

namespace {

struct EpisodeSummary {
    double mse;
    double total_cost;
    long acks;
};

EpisodeSummary summarize(const SimConfig& config,
                         const std::vector<TraceRecord>& trace) {
    EpisodeSummary s{0.0, 0.0, 0};
    for (const TraceRecord& rec : trace) {
        if (rec.k >= config.burn_in) s.mse += rec.sq_err;
        s.total_cost += rec.stage_cost_incurred;
        if (is_ack(rec.ack)) ++s.acks;
    }
    s.mse /= config.horizon - config.burn_in;
    const TraceRecord& last = trace.back();
    const int terminal_aoi =
        aoi_next(last.aoi, last.ack, last.action, config.channel.n_r);
    s.total_cost += config.cost.terminal_trace_table[terminal_aoi];
    return s;
}

EpisodeSummary run_one(const SimConfig& config, int run) {
    Rng rng(episode_seed(config.seed, run));
    return summarize(config, run_episode(config, rng));
}

}  // namespace

Metrics monte_carlo(const SimConfig& config, Exec exec) {
    validate(config);
    std::vector<EpisodeSummary> summaries(config.runs);
    if (exec == Exec::parallel) {
#pragma omp parallel for num_threads(worker_count()) schedule(dynamic)
        for (int r = 0; r < config.runs; ++r) summaries[r] = run_one(config, r);
    } else {
        for (int r = 0; r < config.runs; ++r) summaries[r] = run_one(config, r);
    }

    Metrics m;
    m.per_run_mse.reserve(config.runs);
    long acks = 0;
    for (const EpisodeSummary& s : summaries) {
        m.per_run_mse.push_back(s.mse);
        m.mse_mean += s.mse;
        m.mean_cost += s.total_cost;
        acks += s.acks;
    }
    m.mse_mean /= config.runs;
    m.mean_cost /= config.runs;
    m.ack_rate = static_cast<double>(acks) /
                 (static_cast<double>(config.runs) * config.horizon);
    if (config.runs > 1) {
        double ss = 0.0;
        for (double v : m.per_run_mse) ss += (v - m.mse_mean) * (v - m.mse_mean);
        m.mse_std = std::sqrt(ss / (config.runs - 1));
    }
    return m;
}

std::vector<SweepRow> sweep_lambda(const SweepSetup& setup,
                                   const std::vector<double>& lambdas,
                                   Exec exec) {
    if (lambdas.empty()) throw std::invalid_argument("no lambda values given");
    for (double l : lambdas)
        if (!(l > 0.0 && l <= 1.0))
            throw std::invalid_argument("lambda must lie in (0, 1]");

    // The trace tables do not depend on lambda; build the costs and the grid
    // once and re-solve the policy per row.
    const CostModel cost = build_cost_model(setup.lti, setup.channel,
                                            setup.energy, setup.terminal);
    const BeliefGrid grid =
        BeliefGrid::build(setup.channel.n_states(), setup.resolution);

    std::vector<SweepRow> rows;
    rows.reserve(lambdas.size());
    for (double lambda : lambdas) {
        ChannelModel channel(setup.channel.Tc, setup.channel.q, lambda,
                             setup.channel.n_r);
        auto [values, policy] = solve_finite_horizon(channel, cost, grid,
                                                     setup.horizon, exec);
        SolvedPolicy rule(std::move(policy), grid);
        SimConfig config{setup.lti,  channel,    cost,
                         setup.horizon, setup.runs, setup.seed,
                         setup.burn_in, &rule,     {}, {}, {}};
        config.x_hat0 = setup.x_hat0;
        config.P0 = setup.P0;
        rows.push_back({lambda, monte_carlo(config, exec)});
    }
    return rows;
}

}  // namespace aoipomdp
