#include "aoipomdp/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace aoipomdp {

namespace {

void check_state(const ChannelModel& model, int s) {
    if (s < 0 || s >= model.n_states())
        throw std::invalid_argument("channel state index " + std::to_string(s) +
                                    " out of range");
}

// Every state reachable from every other along positive-probability edges.
bool is_irreducible(const Eigen::MatrixXd& Tc) {
    const int n = static_cast<int>(Tc.rows());
    for (int start = 0; start < n; ++start) {
        std::vector<bool> seen(n, false);
        std::vector<int> stack{start};
        seen[start] = true;
        while (!stack.empty()) {
            const int i = stack.back();
            stack.pop_back();
            for (int j = 0; j < n; ++j) {
                if (!seen[j] && Tc(i, j) > 0.0) {
                    seen[j] = true;
                    stack.push_back(j);
                }
            }
        }
        if (!std::all_of(seen.begin(), seen.end(), [](bool b) { return b; }))
            return false;
    }
    return true;
}

}  // namespace

ChannelModel::ChannelModel(Eigen::MatrixXd Tc_, Eigen::VectorXd q_,
                           double lambda_, int n_r_)
    : Tc(std::move(Tc_)), q(std::move(q_)), lambda(lambda_), n_r(n_r_) {
    const Eigen::Index n = Tc.rows();
    if (n < 2 || Tc.cols() != n)
        throw std::invalid_argument("Tc must be square with at least 2 states");
    if (q.size() != n)
        throw std::invalid_argument("q must have one entry per channel state");
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double t = Tc(i, j);
            if (t < 0.0 || t > 1.0)
                throw std::invalid_argument("Tc entries must lie in [0, 1]");
            row_sum += t;
        }
        if (std::abs(row_sum - 1.0) > 1e-12)
            throw std::invalid_argument("Tc row " + std::to_string(i) +
                                        " sums to " + std::to_string(row_sum));
    }
    for (Eigen::Index j = 0; j < n; ++j)
        if (q[j] < 0.0 || q[j] > 1.0)
            throw std::invalid_argument("q entries must lie in [0, 1]");
    if (!(lambda > 0.0 && lambda <= 1.0))
        throw std::invalid_argument("lambda must lie in (0, 1]");
    if (n_r < 1) throw std::invalid_argument("n_r must be >= 1");
}

int step_channel(const ChannelModel& model, int s, Rng& rng) {
    check_state(model, s);
    const Eigen::VectorXd row = model.Tc.row(s);
    return rng.categorical(row.data(), model.n_states());
}

double error_prob(const ChannelModel& model, int r, int j) {
    check_state(model, j);
    if (r < 0 || r > model.n_r)
        throw std::invalid_argument("retransmission count " +
                                    std::to_string(r) + " out of [0, n_r]");
    const double g = model.q[j] * std::pow(model.lambda, r);
    return std::clamp(g, 0.0, 1.0);
}

Ack sample_ack(const ChannelModel& model, int s, int aoi, Action action,
               Rng& rng) {
    check_state(model, s);
    if (aoi < 0 || aoi > model.n_r)
        throw std::invalid_argument("aoi out of [0, n_r]");
    if (!is_fresh(action) && aoi == 0)
        throw std::invalid_argument(
            "cannot retransmit with no pending packet (aoi = 0)");
    const double p_err = is_fresh(action) ? error_prob(model, 0, s)
                                          : error_prob(model, aoi, s);
    return rng.bernoulli(p_err) ? Ack::nack : Ack::ack;
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& Tc) {
    const Eigen::Index n = Tc.rows();
    if (n < 1 || Tc.cols() != n)
        throw std::invalid_argument("Tc must be square");
    if (!is_irreducible(Tc))
        throw std::runtime_error(
            "stationary distribution did not converge: chain is not "
            "irreducible");
    constexpr double kTol = 1e-12;
    constexpr long kMaxIter = 1000000;
    Eigen::RowVectorXd p = Eigen::RowVectorXd::Constant(n, 1.0 / n);
    for (long it = 0; it < kMaxIter; ++it) {
        Eigen::RowVectorXd next = p * Tc;
        next /= next.sum();
        if ((next - p).cwiseAbs().maxCoeff() <= kTol) return next.transpose();
        p = next;
    }
    throw std::runtime_error(
        "stationary distribution did not converge within iteration budget");
}

}  // namespace aoipomdp
