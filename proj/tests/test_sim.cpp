#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "aoipomdp/report.hpp"
#include "aoipomdp/sim.hpp"

using namespace aoipomdp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

LtiModel section5_lti() {
    MatrixXd A(2, 2);
    A << 0.9974, 0.0539, -0.1078, 0.1591;
    MatrixXd C(1, 2);
    C << 1, 0;
    MatrixXd Rv(1, 1);
    Rv << 0.05;
    return LtiModel(A, C, 0.25 * MatrixXd::Identity(2, 2), Rv,
                    MatrixXd::Identity(2, 2));
}

ChannelModel gb_channel(double lambda = 0.5) {
    MatrixXd T(2, 2);
    T << 0.95, 0.05, 0.1, 0.9;
    VectorXd q(2);
    q << 0.2, 0.8;
    return ChannelModel(T, q, lambda, 3);
}

ChannelModel constant_q_channel(double q_value) {
    MatrixXd T(2, 2);
    T << 0.95, 0.05, 0.1, 0.9;
    VectorXd q(2);
    q << q_value, q_value;
    return ChannelModel(T, q, 0.5, 3);
}

MatrixXd default_energy() {
    MatrixXd e(2, 2);
    e.col(static_cast<int>(Action::fresh)).setConstant(1.0);
    e.col(static_cast<int>(Action::retransmit)).setConstant(1.5);
    return e;
}

SimConfig make_config(const LtiModel& lti, const ChannelModel& channel,
                      const CostModel& cost, const TransmitPolicy* policy,
                      int horizon, int runs, std::uint64_t seed,
                      int burn_in = 50) {
    return SimConfig{lti,  channel, cost,  horizon, runs,
                     seed, burn_in, policy, {},      {}, {}};
}

bool traces_equal(const std::vector<TraceRecord>& a,
                  const std::vector<TraceRecord>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].x != b[i].x || a[i].x_hat_sensor != b[i].x_hat_sensor ||
            a[i].x_hat_remote != b[i].x_hat_remote ||
            a[i].action != b[i].action || a[i].ack != b[i].ack ||
            a[i].aoi != b[i].aoi ||
            a[i].belief.probs() != b[i].belief.probs() ||
            a[i].channel_true != b[i].channel_true ||
            a[i].sq_err != b[i].sq_err ||
            a[i].stage_cost_incurred != b[i].stage_cost_incurred)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("perfect channel: every packet lands, remote mirrors the sensor") {
    LtiModel lti = section5_lti();
    ChannelModel channel = constant_q_channel(0.0);
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::always_fresh);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 200, 1, 77, 10);
    Rng rng(episode_seed(config.seed, 0));
    const auto trace = run_episode(config, rng);
    REQUIRE(trace.size() == 200);
    for (const TraceRecord& rec : trace) {
        CHECK(is_ack(rec.ack));
        CHECK(rec.aoi == 0);
        CHECK(rec.x_hat_remote == rec.x_hat_sensor);
    }
}

TEST_CASE("hopeless channel: no delivery, remote propagates open loop") {
    LtiModel lti = section5_lti();
    ChannelModel channel = constant_q_channel(1.0);
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::always_fresh);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 100, 1, 78, 10);
    Rng rng(episode_seed(config.seed, 0));
    const auto trace = run_episode(config, rng);
    VectorXd expected = VectorXd::Zero(2);
    for (const TraceRecord& rec : trace) {
        CHECK(!is_ack(rec.ack));
        expected = lti.A * expected;  // open-loop propagation of x_hat0 = 0
        CHECK((rec.x_hat_remote - expected).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("fixed seed gives a bit-identical trace") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::retransmit_to_cap);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 300, 1, 4242, 10);
    Rng r1(episode_seed(config.seed, 0));
    Rng r2(episode_seed(config.seed, 0));
    CHECK(traces_equal(run_episode(config, r1), run_episode(config, r2)));
}

TEST_CASE("trace invariants: age recursion and feedback bookkeeping") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::retransmit_to_cap);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 2000, 1, 5, 10);
    Rng rng(episode_seed(config.seed, 0));
    const auto trace = run_episode(config, rng);
    for (size_t i = 0; i + 1 < trace.size(); ++i) {
        const TraceRecord& cur = trace[i];
        const TraceRecord& next = trace[i + 1];
        CHECK(next.aoi ==
              aoi_next(cur.aoi, cur.ack, cur.action, channel.n_r));
        if (is_ack(cur.ack)) CHECK(next.aoi == 0);
        if (!is_ack(cur.ack) && is_fresh(cur.action)) CHECK(next.aoi == 1);
        if (cur.aoi == 0) CHECK(is_fresh(cur.action));
    }
}

TEST_CASE("belief replay from actions and feedback reproduces the trace") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::retransmit_to_cap);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 1500, 1, 6, 10);
    Rng rng(episode_seed(config.seed, 0));
    const auto trace = run_episode(config, rng);
    Belief replay = trace.front().belief;
    for (const TraceRecord& rec : trace) {
        CHECK((replay.probs() - rec.belief.probs()).cwiseAbs().maxCoeff() <=
              1e-10);
        replay = belief_update(channel, replay, rec.aoi, rec.ack, rec.action);
    }
}

TEST_CASE("recursive remote covariance matches the closed form on a trace") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::always_fresh);
    const int burn_in = 50;
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 1100, 1, 7, burn_in);
    Rng rng(episode_seed(config.seed, 0));
    const auto trace = run_episode(config, rng);

    const MatrixXd P_bar = steady_state_covariance(lti);
    // age since the last delivery, replayed from the feedback sequence
    size_t start = burn_in;
    while (start < trace.size() && !is_ack(trace[start].ack)) ++start;
    REQUIRE(start < trace.size());

    int max_age = 0, age = 0;
    for (size_t k = start + 1; k < trace.size(); ++k) {
        age = is_ack(trace[k].ack) ? 0 : age + 1;
        max_age = std::max(max_age, age);
    }
    const AoiCovTable table = aoi_cov_table(lti, P_bar, std::max(1, max_age));

    MatrixXd P_rec = P_bar;
    age = 0;
    double worst = 0.0;
    for (size_t k = start + 1; k < trace.size(); ++k) {
        P_rec = remote_cov_recursion(lti, P_rec, trace[k].ack, P_bar);
        age = is_ack(trace[k].ack) ? 0 : age + 1;
        worst = std::max(worst,
                         std::abs(P_rec.trace() - table.entries[age].trace()));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("monte_carlo: single run reduces to that run's time average") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::always_fresh);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 400, 1, 11, 25);
    const Metrics m = monte_carlo(config);
    REQUIRE(m.per_run_mse.size() == 1);
    CHECK(m.mse_mean == m.per_run_mse[0]);
    CHECK(m.mse_std == 0.0);

    Rng rng(episode_seed(config.seed, 0));
    const auto trace = run_episode(config, rng);
    double acc = 0.0;
    for (const TraceRecord& rec : trace)
        if (rec.k >= config.burn_in) acc += rec.sq_err;
    acc /= config.horizon - config.burn_in;
    CHECK(m.mse_mean == doctest::Approx(acc).epsilon(1e-15));
}

TEST_CASE("monte_carlo: perfect channel converges to the sensor floor") {
    LtiModel lti = section5_lti();
    ChannelModel channel = constant_q_channel(0.0);
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::always_fresh);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 10000, 4, 12, 50);
    const Metrics m = monte_carlo(config);
    const double floor = steady_state_covariance(lti).trace();
    CHECK(m.ack_rate == 1.0);
    CHECK(std::abs(m.mse_mean - floor) / floor < 0.10);
}

TEST_CASE("monte_carlo: repeated master seed gives identical metrics") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::retransmit_to_cap);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 500, 8, 13, 20);
    const Metrics a = monte_carlo(config);
    const Metrics b = monte_carlo(config);
    CHECK(a.mse_mean == b.mse_mean);
    CHECK(a.mse_std == b.mse_std);
    CHECK(a.mean_cost == b.mean_cost);
    CHECK(a.ack_rate == b.ack_rate);
    CHECK(a.per_run_mse == b.per_run_mse);
}

TEST_CASE("monte_carlo: serial and parallel execution agree bit for bit") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::always_fresh);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 400, 16, 14, 20);
    const Metrics serial = monte_carlo(config, Exec::serial);
    const Metrics parallel = monte_carlo(config, Exec::parallel);
    CHECK(serial.mse_mean == parallel.mse_mean);
    CHECK(serial.mse_std == parallel.mse_std);
    CHECK(serial.mean_cost == parallel.mean_cost);
    CHECK(serial.per_run_mse == parallel.per_run_mse);
}

TEST_CASE("static good channel: delivery rate matches 1 - q_G") {
    LtiModel lti = section5_lti();
    VectorXd q(2);
    q << 0.2, 0.8;
    ChannelModel channel(MatrixXd::Identity(2, 2), q, 0.5, 3);
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::always_fresh);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 1000, 100, 15, 10);
    config.initial_belief = Belief::vertex(2, 0);  // pinned to the good state
    const Metrics m = monte_carlo(config);
    const double p = 0.8;
    const double sigma = std::sqrt(p * (1 - p) / (1000.0 * 100.0));
    CHECK(std::abs(m.ack_rate - p) <= 3 * sigma);
}

TEST_CASE("baseline rules") {
    auto fresh = baseline_policy("always-fresh");
    auto retx = baseline_policy("retransmit-to-cap");
    const Belief pi = Belief::uniform(2);
    CHECK(fresh->decide(0, pi, 3) == Action::fresh);
    CHECK(retx->decide(0, pi, 0) == Action::fresh);
    CHECK(retx->decide(0, pi, 2) == Action::retransmit);
    CHECK_THROWS_AS(baseline_policy("nope"), std::invalid_argument);
}

TEST_CASE("sweep_lambda: ordered rows, unit decay equals a plain-repeat run") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    const std::vector<double> lambdas{0.5, 1.0, 0.25};
    SweepSetup setup{lti,  channel, default_energy(), TerminalMode::stage_trace,
                     120,  25,      6,                21,
                     20,   {},      {}};
    const auto rows = sweep_lambda(setup, lambdas);
    REQUIRE(rows.size() == 3);
    for (size_t i = 0; i < lambdas.size(); ++i)
        CHECK(rows[i].lambda == lambdas[i]);

    // dedicated run with the constant-error channel, same master seed
    ChannelModel arq(channel.Tc, channel.q, 1.0, channel.n_r);
    CostModel cost = build_cost_model(lti, arq, default_energy());
    const BeliefGrid grid = BeliefGrid::build(2, 25);
    auto [values, policy] = solve_finite_horizon(arq, cost, grid, 120);
    SolvedPolicy rule(std::move(policy), grid);
    SimConfig config = make_config(lti, arq, cost, &rule, 120, 6, 21, 20);
    const Metrics direct = monte_carlo(config);
    CHECK(rows[1].metrics.mse_mean == direct.mse_mean);
    CHECK(rows[1].metrics.mse_std == direct.mse_std);
    CHECK(rows[1].metrics.mean_cost == direct.mean_cost);
    CHECK(rows[1].metrics.per_run_mse == direct.per_run_mse);

    CHECK_THROWS_AS(sweep_lambda(setup, {}), std::invalid_argument);
    CHECK_THROWS_AS(sweep_lambda(setup, {0.0}), std::invalid_argument);
}

TEST_CASE("solved policy beyond its horizon reuses the last stage") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    const BeliefGrid grid = BeliefGrid::build(2, 10);
    auto [values, policy] = solve_finite_horizon(channel, cost, grid, 5);
    SolvedPolicy rule(std::move(policy), grid);
    const Belief pi = Belief::uniform(2);
    CHECK(rule.decide(400, pi, 2) == rule.decide(4, pi, 2));
}

TEST_CASE("trace and metrics files carry metadata and all rows") {
    LtiModel lti = section5_lti();
    ChannelModel channel = gb_channel();
    CostModel cost = build_cost_model(lti, channel, default_energy());
    auto policy = baseline_policy(BaselineKind::always_fresh);
    SimConfig config =
        make_config(lti, channel, cost, policy.get(), 50, 3, 23, 5);
    Rng rng(episode_seed(config.seed, 0));
    const auto trace = run_episode(config, rng);
    const Metrics m = monte_carlo(config);

    const auto dir = std::filesystem::temp_directory_path() / "aoipomdp_rep";
    std::filesystem::create_directories(dir);
    const std::string tpath = (dir / "trace.csv").string();
    const std::string mpath = (dir / "metrics.csv").string();
    ReportMeta meta{0x1234abcd5678ef00ULL, config.seed, {{"runs", "3"}}};
    write_trace_csv(tpath, trace, meta);
    write_metrics_csv(mpath, m, meta);

    std::ifstream ts(tpath);
    std::string line;
    int comments = 0, rows = 0;
    bool header_seen = false;
    while (std::getline(ts, line)) {
        if (line.rfind("#", 0) == 0) {
            ++comments;
            if (line.find("config_hash 1234abcd5678ef00") != std::string::npos)
                header_seen = true;
        } else if (line.rfind("k,", 0) == 0) {
            CHECK(line ==
                  "k,x0,x1,xs0,xs1,xr0,xr1,action,ack,aoi,belief0,belief1,"
                  "channel,sq_err,stage_cost");
        } else {
            ++rows;
        }
    }
    CHECK(header_seen);
    CHECK(comments >= 4);
    CHECK(rows == 50);

    std::ifstream ms(mpath);
    int metric_rows = 0;
    while (std::getline(ms, line))
        if (!line.empty() && line.find(',') != std::string::npos &&
            line.rfind("#", 0) != 0 && line.rfind("run,", 0) != 0)
            ++metric_rows;
    CHECK(metric_rows == 3);
}

TEST_CASE("sweep files: csv rows and a well-formed plot") {
    std::vector<SweepCurve> curves(2);
    curves[0].channel = "Tc1";
    curves[1].channel = "Tc2";
    for (int i = 0; i < 4; ++i) {
        Metrics m;
        m.mse_mean = 1.0 + 0.1 * i;
        m.mse_std = 0.05;
        curves[0].rows.push_back({0.25 * (i + 1), m});
        m.mse_mean += 0.4;
        curves[1].rows.push_back({0.25 * (i + 1), m});
    }
    const auto dir = std::filesystem::temp_directory_path() / "aoipomdp_rep";
    std::filesystem::create_directories(dir);
    const std::string cpath = (dir / "sweep.csv").string();
    const std::string spath = (dir / "sweep.svg").string();
    write_sweep_csv(cpath, curves, ReportMeta{1, 2, {}});
    write_sweep_svg(spath, curves);

    std::ifstream cs(cpath);
    std::string line;
    int rows = 0;
    while (std::getline(cs, line))
        if (!line.empty() && line[0] != '#' && line.rfind("channel,", 0) != 0)
            ++rows;
    CHECK(rows == 8);

    std::ifstream ss(spath);
    std::stringstream buffer;
    buffer << ss.rdbuf();
    const std::string svg = buffer.str();
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK(svg.find("Tc2") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);
}
