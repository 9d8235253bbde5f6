// Acceptance suite: runs every study-level criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion. Exits nonzero if
// any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aoipomdp/belief.hpp"
#include "aoipomdp/channel.hpp"
#include "aoipomdp/config.hpp"
#include "aoipomdp/lti_kalman.hpp"
#include "aoipomdp/pomdp.hpp"
#include "aoipomdp/sim.hpp"
#include "aoipomdp/solver.hpp"

using namespace aoipomdp;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass,
            const std::string& detail) {
    std::printf("[%s] criterion %d: %s: %s\n", pass ? "PASS" : "FAIL", id,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

LtiModel study_lti() {
    MatrixXd A(2, 2);
    A << 0.9974, 0.0539, -0.1078, 0.1591;
    MatrixXd C(1, 2);
    C << 1, 0;
    MatrixXd Rv(1, 1);
    Rv << 0.05;
    return LtiModel(A, C, 0.25 * MatrixXd::Identity(2, 2), Rv,
                    MatrixXd::Identity(2, 2));
}

MatrixXd tc1() {
    MatrixXd T(2, 2);
    T << 0.95, 0.05, 0.1, 0.9;
    return T;
}

MatrixXd tc2() {
    MatrixXd T(2, 2);
    T << 0.5, 0.5, 0.5, 0.5;
    return T;
}

VectorXd q_gb() {
    VectorXd q(2);
    q << 0.2, 0.8;
    return q;
}

MatrixXd default_energy() {
    MatrixXd e(2, 2);
    e.col(static_cast<int>(Action::fresh)).setConstant(1.0);
    e.col(static_cast<int>(Action::retransmit)).setConstant(1.5);
    return e;
}

Belief random_belief(Rng& rng, int n) {
    VectorXd p(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        p[i] = -std::log(1.0 - rng.uniform01());
        sum += p[i];
    }
    return Belief(p / sum);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

// ---------------------------------------------------------------------------

void criterion1_oracle_equivalence() {
    const auto t0 = std::chrono::steady_clock::now();
    ChannelModel channel(tc1(), q_gb(), 0.5, 3);
    CostModel cost = build_cost_model(study_lti(), channel, default_energy());

    Rng rng(2024);
    std::vector<Belief> beliefs;
    for (int i = 0; i < 20; ++i) beliefs.push_back(random_belief(rng, 2));

    const std::vector<int> horizons{1, 2, 3, 5};
    const std::vector<int> resolutions{25, 50, 100, 200};
    std::vector<double> max_gap(resolutions.size(), 0.0);
    double worst_rel_at_200 = 0.0;

    for (size_t ri = 0; ri < resolutions.size(); ++ri) {
        const BeliefGrid grid = BeliefGrid::build(2, resolutions[ri]);
        for (int N : horizons) {
            auto [table, policy] = solve_finite_horizon(channel, cost, grid, N);
            for (const Belief& pi : beliefs) {
                for (int aoi = 0; aoi <= 3; ++aoi) {
                    const double vg = value_at(table, grid, 0, pi, aoi);
                    const double vo = exact_enumerate(channel, cost, pi, aoi, N);
                    const double gap = std::abs(vg - vo);
                    max_gap[ri] = std::max(max_gap[ri], gap);
                    if (resolutions[ri] == 200)
                        worst_rel_at_200 = std::max(worst_rel_at_200, gap / vo);
                }
            }
        }
    }

    // gaps may sit at machine precision (the instance's optimal action is
    // belief-independent, so the value is linear); the monotone check
    // therefore carries a 1e-12 noise floor
    bool monotone = true;
    for (size_t ri = 1; ri < resolutions.size(); ++ri)
        if (max_gap[ri] > max_gap[ri - 1] + 1e-12) monotone = false;

    const double elapsed = seconds_since(t0);
    const bool pass =
        worst_rel_at_200 <= 0.005 && monotone && elapsed < 60.0;
    char detail[256];
    std::snprintf(detail, sizeof detail,
                  "max relative gap at resolution 200 = %.3g (<= 0.5%%), gaps "
                  "[%.2e %.2e %.2e %.2e] non-increasing: %s, %.1fs",
                  worst_rel_at_200, max_gap[0], max_gap[1], max_gap[2],
                  max_gap[3], monotone ? "yes" : "no", elapsed);
    report(1, "grid solver matches the enumeration oracle", pass, detail);
}

void criterion2_covariance_consistency() {
    LtiModel lti = study_lti();
    ChannelModel channel(tc1(), q_gb(), 0.5, 3);
    CostModel cost = build_cost_model(lti, channel, default_energy());

    const int burn_in = 50;
    const int horizon = burn_in + 1000;
    const BeliefGrid grid = BeliefGrid::build(2, 100);
    auto [table, policy] = solve_finite_horizon(channel, cost, grid, horizon);
    SolvedPolicy rule(std::move(policy), grid);
    SimConfig config{lti,  channel, cost,  horizon, 1,
                     1729, burn_in, &rule, {},      {}, {}};
    Rng rng(episode_seed(config.seed, 0));
    const auto trace = run_episode(config, rng);

    const MatrixXd P_bar = steady_state_covariance(lti);
    size_t start = burn_in;
    while (start < trace.size() && !is_ack(trace[start].ack)) ++start;

    int age = 0, max_age = 0;
    for (size_t k = start + 1; k < trace.size(); ++k) {
        age = is_ack(trace[k].ack) ? 0 : age + 1;
        max_age = std::max(max_age, age);
    }
    const AoiCovTable closed = aoi_cov_table(lti, P_bar, std::max(1, max_age));

    MatrixXd P_rec = P_bar;
    age = 0;
    double worst = 0.0;
    long steps = 0;
    for (size_t k = start + 1; k < trace.size(); ++k) {
        P_rec = remote_cov_recursion(lti, P_rec, trace[k].ack, P_bar);
        age = is_ack(trace[k].ack) ? 0 : age + 1;
        worst = std::max(worst,
                         std::abs(P_rec.trace() - closed.entries[age].trace()));
        ++steps;
    }
    const bool pass = steps >= 900 && worst <= 1e-9;
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "recursive vs closed-form covariance trace over %ld "
                  "post-burn-in slots: max |delta| = %.3g (<= 1e-9)",
                  steps, worst);
    report(2, "recursive and age-indexed remote covariances agree", pass,
           detail);
}

void criterion3_belief_machinery() {
    ChannelModel channel(tc1(), q_gb(), 0.5, 3);
    Rng rng(31337);
    double worst_simplex = 0.0, worst_ltp = 0.0;
    bool all_ok = true;
    for (int trial = 0; trial < 10000; ++trial) {
        const Belief pi = random_belief(rng, 2);
        const int aoi = static_cast<int>(rng.uniform01() * 4);
        const auto actions = feasible_actions(aoi, channel.n_r);
        const Action a =
            actions[static_cast<size_t>(rng.uniform01() * actions.size())];
        const auto lik = ack_likelihood(channel, pi, aoi, a);

        Eigen::RowVectorXd mixture = Eigen::RowVectorXd::Zero(2);
        for (Ack z : {Ack::nack, Ack::ack}) {
            const double pz = lik[static_cast<int>(z)];
            if (pz <= 1e-300) continue;
            const Belief post = belief_update(channel, pi, aoi, z, a);
            worst_simplex = std::max(
                worst_simplex, std::abs(post.probs().sum() - 1.0));
            if (post.probs().minCoeff() < 0.0) all_ok = false;
            mixture += pz * post.probs().transpose();
        }
        const Eigen::RowVectorXd predicted =
            pi.probs().transpose() * channel.Tc;
        worst_ltp = std::max(worst_ltp,
                             (mixture - predicted).cwiseAbs().maxCoeff());
    }

    VectorXd half(2);
    half << 0.5, 0.5;
    const Belief post =
        belief_update(channel, Belief(half), 0, Ack::nack, Action::fresh);
    const double hand_err =
        std::max(std::abs(post[0] - 0.27), std::abs(post[1] - 0.73));

    const bool pass = all_ok && worst_simplex <= 1e-12 && worst_ltp <= 1e-10 &&
                      hand_err <= 1e-12;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "1e4 updates: simplex drift %.2e (<= 1e-12), total-"
                  "probability residual %.2e (<= 1e-10), hand posterior off "
                  "by %.2e (<= 1e-12)",
                  worst_simplex, worst_ltp, hand_err);
    report(3, "belief recursion is exact on the simplex", pass, detail);
}

void criterion4_arq_degeneration() {
    ChannelModel arq(tc1(), q_gb(), 1.0, 3);
    bool constant = true;
    for (int j = 0; j < 2; ++j)
        for (int r = 0; r <= 3; ++r)
            if (error_prob(arq, r, j) != error_prob(arq, 0, j))
                constant = false;

    LtiModel lti = study_lti();
    SweepSetup setup{lti, ChannelModel(tc1(), q_gb(), 0.5, 3),
                     default_energy(), TerminalMode::stage_trace,
                     300, 50, 20, 1729, 50, {}, {}};
    const auto rows = sweep_lambda(setup, {1.0});

    CostModel cost = build_cost_model(lti, arq, default_energy());
    const BeliefGrid grid = BeliefGrid::build(2, 50);
    auto [table, policy] = solve_finite_horizon(arq, cost, grid, 300);
    SolvedPolicy rule(std::move(policy), grid);
    SimConfig config{lti,  arq, cost,  300, 20,
                     1729, 50,  &rule, {},  {}, {}};
    const Metrics direct = monte_carlo(config);

    const Metrics& swept = rows[0].metrics;
    const bool identical = swept.mse_mean == direct.mse_mean &&
                           swept.mse_std == direct.mse_std &&
                           swept.mean_cost == direct.mean_cost &&
                           swept.ack_rate == direct.ack_rate &&
                           swept.per_run_mse == direct.per_run_mse;
    const bool pass = constant && identical;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "unit decay keeps the error constant in r: %s; lambda=1 "
                  "sweep row equals the plain-repeat run bit for bit: %s",
                  constant ? "yes" : "no", identical ? "yes" : "no");
    report(4, "unit combining gain degenerates to plain repeats", pass,
           detail);
}

void criterion5_mse_sweep() {
    const auto t0 = std::chrono::steady_clock::now();
    LtiModel lti = study_lti();
    const std::vector<double> lambdas{0.25, 0.5, 0.75, 1.0};
    const int runs = 100;

    SweepSetup setup1{lti, ChannelModel(tc1(), q_gb(), 0.5, 3),
                      default_energy(), TerminalMode::stage_trace,
                      1000, 100, runs, 1729, 50, {}, {}};
    SweepSetup setup2 = setup1;
    setup2.channel = ChannelModel(tc2(), q_gb(), 0.5, 3);

    const auto rows1 = sweep_lambda(setup1, lambdas);
    const auto rows2 = sweep_lambda(setup2, lambdas);

    const auto pooled_se = [&](const Metrics& a, const Metrics& b) {
        return std::sqrt(a.mse_std * a.mse_std / runs +
                         b.mse_std * b.mse_std / runs);
    };

    bool worst_case_ordering = true;
    for (size_t i = 0; i < lambdas.size(); ++i) {
        const double slack = pooled_se(rows1[i].metrics, rows2[i].metrics);
        if (rows2[i].metrics.mse_mean <
            rows1[i].metrics.mse_mean - slack)
            worst_case_ordering = false;
    }

    bool monotone_in_lambda = true;
    for (size_t i = 0; i + 1 < lambdas.size(); ++i) {
        const double slack = pooled_se(rows1[i].metrics, rows1[i + 1].metrics);
        if (rows1[i + 1].metrics.mse_mean <
            rows1[i].metrics.mse_mean - slack)
            monotone_in_lambda = false;
    }

    const double elapsed = seconds_since(t0);
    const bool pass = worst_case_ordering && monotone_in_lambda &&
                      elapsed < 600.0;
    std::string means1, means2;
    for (size_t i = 0; i < lambdas.size(); ++i) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f ", rows1[i].metrics.mse_mean);
        means1 += buf;
        std::snprintf(buf, sizeof buf, "%.4f ", rows2[i].metrics.mse_mean);
        means2 += buf;
    }
    char detail[300];
    std::snprintf(detail, sizeof detail,
                  "mean MSE per lambda {0.25 0.5 0.75 1}: persistent chain "
                  "[%s], memoryless chain [%s]; worst-case ordering: %s; "
                  "non-decreasing in lambda: %s; %.0fs",
                  means1.c_str(), means2.c_str(),
                  worst_case_ordering ? "yes" : "no",
                  monotone_in_lambda ? "yes" : "no", elapsed);
    report(5, "memoryless chain dominates the MSE sweep", pass, detail);
}

void criterion6_transmission_counts() {
    LtiModel lti = study_lti();
    const int horizon = 1000;
    const BeliefGrid grid = BeliefGrid::build(2, 100);

    long fresh_counts[2] = {0, 0};
    std::vector<int> channel_paths[2];
    const double lambdas[2] = {0.5, 1.0};
    for (int i = 0; i < 2; ++i) {
        ChannelModel channel(tc1(), q_gb(), lambdas[i], 3);
        CostModel cost = build_cost_model(lti, channel, default_energy());
        auto [table, policy] = solve_finite_horizon(channel, cost, grid, horizon);
        SolvedPolicy rule(std::move(policy), grid);
        SimConfig config{lti,  channel, cost,  horizon, 1,
                         1729, 50,      &rule, {},      {}, {}};
        Rng rng(episode_seed(config.seed, 0));
        const auto trace = run_episode(config, rng);
        for (const TraceRecord& rec : trace) {
            if (is_fresh(rec.action)) ++fresh_counts[i];
            channel_paths[i].push_back(rec.channel_true);
        }
    }
    const bool same_realization = channel_paths[0] == channel_paths[1];
    const bool pass = same_realization && fresh_counts[0] <= fresh_counts[1];
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "fresh transmissions over the same channel realization: "
                  "combining %ld <= plain repeats %ld (same path: %s)",
                  fresh_counts[0], fresh_counts[1],
                  same_realization ? "yes" : "no");
    report(6, "combining issues no more fresh transmissions", pass, detail);
}

void criterion7_stationary_distributions() {
    const VectorXd p1 = stationary_distribution(tc1());
    const VectorXd p2 = stationary_distribution(tc2());
    const bool pass = std::abs(p1[0] - 0.667) <= 1e-3 &&
                      std::abs(p1[1] - 0.333) <= 1e-3 && p2[0] == 0.5 &&
                      p2[1] == 0.5;
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "persistent chain -> (%.4f, %.4f) within 1e-3 of "
                  "(0.667, 0.333); memoryless chain -> (%.1f, %.1f) exact",
                  p1[0], p1[1], p2[0], p2[1]);
    report(7, "invariant distributions match the study values", pass, detail);
}

void criterion8_concavity() {
    ChannelModel channel(tc1(), q_gb(), 0.5, 3);
    CostModel cost = build_cost_model(study_lti(), channel, default_energy());
    Rng rng(777);
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const Belief p1 = random_belief(rng, 2);
        const Belief p2 = random_belief(rng, 2);
        const double t = rng.uniform01();
        const Belief mix(t * p1.probs() + (1 - t) * p2.probs());
        for (int aoi = 0; aoi <= 3; ++aoi) {
            const double vm = exact_enumerate(channel, cost, mix, aoi, 4);
            const double v1 = exact_enumerate(channel, cost, p1, aoi, 4);
            const double v2 = exact_enumerate(channel, cost, p2, aoi, 4);
            worst = std::max(worst, t * v1 + (1 - t) * v2 - vm);
        }
    }
    const bool pass = worst <= 1e-9;
    char detail[120];
    std::snprintf(detail, sizeof detail,
                  "50 random segments at horizon 4: worst convexity "
                  "violation %.3g (<= 1e-9)",
                  worst);
    report(8, "exact value is concave in the belief", pass, detail);
}

std::string slurp(const fs::path& path) {
    std::ifstream is(path);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    const std::string cmd =
        std::string(AOI_POMDP_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion9_determinism() {
    const fs::path work = fs::temp_directory_path() / "aoipomdp_accept";
    fs::create_directories(work);
    const std::string cfg =
        std::string(AOI_POMDP_CONFIG_DIR) + "/paper-section-5.cfg";

    bool pass = true;
    std::string detail = "solve and simulate outputs byte-identical on rerun";
    const fs::path a = work / "a", b = work / "b";
    if (run_cli("solve --config " + cfg + " --out " + a.string()) != 0 ||
        run_cli("solve --config " + cfg + " --out " + b.string()) != 0) {
        pass = false;
        detail = "solve failed";
    } else if (slurp(a / "policy.txt") != slurp(b / "policy.txt") ||
               slurp(a / "values.txt") != slurp(b / "values.txt")) {
        pass = false;
        detail = "solve artifacts differ between identical runs";
    } else {
        const std::string sim_args = "simulate --config " + cfg +
                                     " --policy " +
                                     (a / "policy.txt").string() +
                                     " --runs 20 --out ";
        if (run_cli(sim_args + (work / "sa").string()) != 0 ||
            run_cli(sim_args + (work / "sb").string()) != 0) {
            pass = false;
            detail = "simulate failed";
        } else if (slurp(work / "sa" / "metrics.csv") !=
                       slurp(work / "sb" / "metrics.csv") ||
                   slurp(work / "sa" / "trace.csv") !=
                       slurp(work / "sb" / "trace.csv")) {
            pass = false;
            detail = "simulate outputs differ between identical runs";
        }
    }
    report(9, "command-line runs are byte-deterministic", pass, detail);
}

}  // namespace

int main() {
    criterion1_oracle_equivalence();
    criterion2_covariance_consistency();
    criterion3_belief_machinery();
    criterion4_arq_degeneration();
    criterion5_mse_sweep();
    criterion6_transmission_counts();
    criterion7_stationary_distributions();
    criterion8_concavity();
    criterion9_determinism();

    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}
