#include "aoipomdp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace aoipomdp {

namespace {

// Snap tolerance for fractional lattice coordinates, so beliefs that are
// grid points up to rounding hit the stored value exactly.
constexpr double kSnapTol = 1e-9;

void enumerate_compositions(int n_c, int remaining, std::vector<int>& prefix,
                            std::vector<std::vector<int>>& out) {
    if (static_cast<int>(prefix.size()) == n_c - 1) {
        prefix.push_back(remaining);
        out.push_back(prefix);
        prefix.pop_back();
        return;
    }
    for (int m = 0; m <= remaining; ++m) {
        prefix.push_back(m);
        enumerate_compositions(n_c, remaining - m, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

unsigned long long BeliefGrid::point_count(int n_c, int resolution) {
    // C(resolution + n_c - 1, n_c - 1) as a running binomial (exact at every
    // step); saturates once past the build limit.
    unsigned long long count = 1;
    for (int i = 1; i <= n_c - 1; ++i) {
        count = count * (resolution + i) / i;
        if (count > 500000000ULL) return count;
    }
    return count;
}

BeliefGrid BeliefGrid::build(int n_c, int resolution) {
    if (n_c < 2) throw std::invalid_argument("n_c must be >= 2");
    if (resolution < 1) throw std::invalid_argument("resolution must be >= 1");
    const unsigned long long count = point_count(n_c, resolution);
    if (count > 500000000ULL)
        throw std::invalid_argument("belief grid would contain about " +
                                    std::to_string(count) + " points");
    BeliefGrid grid;
    grid.n_c_ = n_c;
    grid.resolution_ = resolution;
    std::vector<int> prefix;
    enumerate_compositions(n_c, resolution, prefix, grid.lattice_);
    grid.points_.reserve(grid.lattice_.size());
    for (size_t i = 0; i < grid.lattice_.size(); ++i) {
        Eigen::VectorXd p(n_c);
        for (int j = 0; j < n_c; ++j)
            p[j] = static_cast<double>(grid.lattice_[i][j]) / resolution;
        grid.points_.emplace_back(std::move(p));
        grid.index_.emplace(grid.lattice_[i], static_cast<int>(i));
    }
    return grid;
}

int BeliefGrid::index_of(const std::vector<int>& composition) const {
    auto it = index_.find(composition);
    if (it == index_.end())
        throw std::invalid_argument("composition is not a grid point");
    return it->second;
}

std::vector<BarycentricPoint> BeliefGrid::interpolate(const Belief& pi) const {
    if (pi.size() != n_c_)
        throw std::invalid_argument("belief dimension mismatch");
    const int n = n_c_;
    const int d = n - 1;
    const double R = resolution_;

    // Cumulative coordinates x_i = R * sum_{j >= i} pi_j map the simplex
    // lattice onto monotone integer vectors R = x_0 >= x_1 >= ... >= x_n = 0,
    // where the Freudenthal subdivision applies directly.
    std::vector<double> x(n + 1);
    x[0] = R;
    x[n] = 0.0;
    double tail = 0.0;
    for (int i = n - 1; i >= 1; --i) {
        tail += pi[i];
        x[i] = std::clamp(R * tail, 0.0, R);
    }
    for (int i = 1; i <= d; ++i) x[i] = std::min(x[i], x[i - 1]);

    std::vector<int> base(d + 1);
    std::vector<double> frac(d + 1);
    for (int i = 1; i <= d; ++i) {
        double b = std::floor(x[i]);
        double f = x[i] - b;
        if (f < kSnapTol) {
            f = 0.0;
        } else if (f > 1.0 - kSnapTol) {
            b += 1.0;
            f = 0.0;
        }
        base[i] = static_cast<int>(b);
        frac[i] = f;
    }

    // Vertex order: add one unit per step, largest fractional part first
    // (ties by lower index, which keeps every vertex a monotone vector).
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 1);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return frac[a] > frac[b]; });

    std::vector<double> weight(d + 1);
    weight[0] = 1.0 - frac[order[0]];
    for (int t = 1; t < d; ++t) weight[t] = frac[order[t - 1]] - frac[order[t]];
    weight[d] = frac[order[d - 1]];

    std::vector<int> w(base);
    std::vector<BarycentricPoint> result;
    std::vector<int> comp(n);
    for (int t = 0; t <= d; ++t) {
        if (t > 0) w[order[t - 1]] += 1;
        if (weight[t] <= 0.0) continue;
        int prev = resolution_;
        for (int i = 1; i <= d; ++i) {
            comp[i - 1] = prev - w[i];
            prev = w[i];
        }
        comp[n - 1] = prev;
        for (int i = 0; i < n; ++i)
            if (comp[i] < 0) throw std::logic_error("interpolation left the simplex");
        result.push_back({index_of(comp), weight[t]});
    }
    return result;
}

double layer_value(const BeliefGrid& grid, std::span<const double> layer,
                   int n_aoi, const Belief& pi, int aoi) {
    double v = 0.0;
    for (const BarycentricPoint& bp : grid.interpolate(pi))
        v += bp.weight * layer[static_cast<size_t>(bp.index) * n_aoi + aoi];
    return v;
}

double value_at(const ValueTable& table, const BeliefGrid& grid, int k,
                const Belief& pi, int aoi) {
    if (k < 0 || k > table.horizon)
        throw std::invalid_argument("layer index out of range");
    if (aoi < 0 || aoi >= table.n_aoi)
        throw std::invalid_argument("aoi out of range");
    return layer_value(grid, table.layer(k), table.n_aoi, pi, aoi);
}

namespace {

struct CellResult {
    double value;
    Action action;
};

CellResult backup_cell(const ChannelModel& model, const CostModel& cost,
                       const BeliefGrid& grid, std::span<const double> v_next,
                       int n_aoi, int p, int aoi) {
    const Belief& pi = grid.point(p);
    double best = std::numeric_limits<double>::infinity();
    Action best_action = Action::fresh;
    for (Action a : feasible_actions(aoi, model.n_r)) {
        double value = cost.trace_table[aoi];
        for (int j = 0; j < model.n_states(); ++j)
            value += cost.energy_of(j, a) * pi[j];
        const std::array<double, 2> lik = ack_likelihood(model, pi, aoi, a);
        for (Ack z : {Ack::nack, Ack::ack}) {
            const double pz = lik[static_cast<int>(z)];
            if (pz <= 1e-300) continue;  // impossible branch contributes 0
            const Belief next = belief_update(model, pi, aoi, z, a);
            const int next_aoi = aoi_next(aoi, z, a, model.n_r);
            value += pz * layer_value(grid, v_next, n_aoi, next, next_aoi);
        }
        if (value < best) {  // fresh is evaluated first, so it wins ties
            best = value;
            best_action = a;
        }
    }
    return {best, best_action};
}

}  // namespace

void dp_backup(const ChannelModel& model, const CostModel& cost,
               const BeliefGrid& grid, std::span<const double> v_next,
               std::span<double> v_out, std::span<Action> a_out, Exec exec) {
    const int n_aoi = model.n_r + 1;
    const int cells = grid.size() * n_aoi;
    if (cost.max_aoi() != model.n_r)
        throw std::invalid_argument("cost table does not match n_r");
    if (v_next.size() != static_cast<size_t>(cells) ||
        v_out.size() != static_cast<size_t>(cells) ||
        a_out.size() != static_cast<size_t>(cells))
        throw std::invalid_argument("layer size mismatch");

    if (exec == Exec::parallel) {
#pragma omp parallel for num_threads(worker_count()) schedule(static)
        for (int c = 0; c < cells; ++c) {
            const CellResult r = backup_cell(model, cost, grid, v_next, n_aoi,
                                             c / n_aoi, c % n_aoi);
            v_out[c] = r.value;
            a_out[c] = r.action;
        }
    } else {
        for (int c = 0; c < cells; ++c) {
            const CellResult r = backup_cell(model, cost, grid, v_next, n_aoi,
                                             c / n_aoi, c % n_aoi);
            v_out[c] = r.value;
            a_out[c] = r.action;
        }
    }
}

std::pair<ValueTable, Policy> solve_finite_horizon(const ChannelModel& model,
                                                   const CostModel& cost,
                                                   const BeliefGrid& grid,
                                                   int horizon, Exec exec) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (grid.n_c() != model.n_states())
        throw std::invalid_argument("grid does not match the channel model");
    if (cost.max_aoi() != model.n_r)
        throw std::invalid_argument("cost table does not match n_r");
    const int n_aoi = model.n_r + 1;
    ValueTable table(horizon, grid.size(), n_aoi);
    Policy policy(horizon, grid.size(), n_aoi);

    // Terminal layer; the terminal cost is channel-independent, so the
    // belief expectation collapses to the table entry.
    std::span<double> last = table.layer(horizon);
    for (int p = 0; p < grid.size(); ++p)
        for (int aoi = 0; aoi < n_aoi; ++aoi)
            last[static_cast<size_t>(p) * n_aoi + aoi] =
                cost.terminal_trace_table[aoi];

    for (int k = horizon - 1; k >= 0; --k) {
        std::span<Action> acts{
            policy.actions.data() +
                static_cast<size_t>(k) * grid.size() * n_aoi,
            static_cast<size_t>(grid.size()) * n_aoi};
        dp_backup(model, cost, grid, table.layer(k + 1), table.layer(k), acts,
                  exec);
    }
    return {std::move(table), std::move(policy)};
}

namespace {

double enumerate_value(const ChannelModel& model, const CostModel& cost,
                       const Belief& pi, int aoi, int k, int horizon) {
    if (k == horizon) return cost.terminal_trace_table[aoi];
    double best = std::numeric_limits<double>::infinity();
    for (Action a : feasible_actions(aoi, model.n_r)) {
        double value = cost.trace_table[aoi];
        for (int j = 0; j < model.n_states(); ++j)
            value += cost.energy_of(j, a) * pi[j];
        const std::array<double, 2> lik = ack_likelihood(model, pi, aoi, a);
        for (Ack z : {Ack::nack, Ack::ack}) {
            const double pz = lik[static_cast<int>(z)];
            if (pz <= 1e-300) continue;
            const Belief next = belief_update(model, pi, aoi, z, a);
            value += pz * enumerate_value(model, cost, next,
                                          aoi_next(aoi, z, a, model.n_r),
                                          k + 1, horizon);
        }
        best = std::min(best, value);
    }
    return best;
}

}  // namespace

double exact_enumerate(const ChannelModel& model, const CostModel& cost,
                       const Belief& pi0, int aoi0, int horizon) {
    if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    if (horizon > 12)
        throw std::invalid_argument(
            "exact enumeration is limited to horizon <= 12 (4^N tree)");
    if (aoi0 < 0 || aoi0 > model.n_r)
        throw std::invalid_argument("aoi out of range");
    if (cost.max_aoi() != model.n_r)
        throw std::invalid_argument("cost table does not match n_r");
    return enumerate_value(model, cost, pi0, aoi0, 0, horizon);
}

Action policy_action(const Policy& policy, const BeliefGrid& grid, int k,
                     const Belief& pi, int aoi) {
    if (k < 0 || k >= policy.horizon)
        throw std::invalid_argument("stage index out of range");
    if (aoi < 0 || aoi >= policy.n_aoi)
        throw std::invalid_argument("aoi out of range");
    if (aoi == 0) return Action::fresh;
    double best = std::numeric_limits<double>::infinity();
    Action action = Action::fresh;
    for (int p = 0; p < grid.size(); ++p) {
        const double d2 = (pi.probs() - grid.point(p).probs()).squaredNorm();
        if (d2 < best) {
            best = d2;
            action = policy.at(k, p, aoi);
        } else if (d2 == best && policy.at(k, p, aoi) == Action::fresh) {
            action = Action::fresh;
        }
    }
    return action;
}

}  // namespace aoipomdp
