#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "aoipomdp/belief.hpp"
#include "aoipomdp/channel.hpp"
#include "aoipomdp/parallel.hpp"
#include "aoipomdp/pomdp.hpp"

namespace aoipomdp {

/// One grid point of a barycentric interpolation, with its weight.
struct BarycentricPoint {
    int index;
    double weight;
};

/// Regular lattice over the belief simplex: all points whose coordinates are
/// integer multiples of 1/resolution. Includes every simplex vertex. Points
/// are ordered lexicographically by their integer composition.
class BeliefGrid {
public:
    static BeliefGrid build(int n_c, int resolution);

    /// Number of lattice points of a (n_c, resolution) grid without building
    /// it; saturates at a large sentinel instead of overflowing.
    static unsigned long long point_count(int n_c, int resolution);

    int n_c() const { return n_c_; }
    int resolution() const { return resolution_; }
    int size() const { return static_cast<int>(points_.size()); }
    const std::vector<Belief>& points() const { return points_; }
    const Belief& point(int i) const { return points_[i]; }
    const std::vector<int>& composition(int i) const { return lattice_[i]; }

    /// Index of an integer composition (entries summing to the resolution).
    int index_of(const std::vector<int>& composition) const;

    /// Barycentric coordinates of `pi` in the containing lattice simplex
    /// (Freudenthal subdivision); at most n_c points with weights summing
    /// to 1. A belief lying on a grid point yields that point with weight 1.
    std::vector<BarycentricPoint> interpolate(const Belief& pi) const;

private:
    BeliefGrid() = default;

    int n_c_ = 0;
    int resolution_ = 0;
    std::vector<Belief> points_;
    std::vector<std::vector<int>> lattice_;
    std::map<std::vector<int>, int> index_;
};

/// Values of the backward recursion, indexed by (layer k in 0..horizon,
/// grid point, aoi). Layers are contiguous.
struct ValueTable {
    int horizon = 0;  // number of decision stages; the table has horizon+1 layers
    int num_points = 0;
    int n_aoi = 0;
    std::vector<double> values;

    ValueTable() = default;
    ValueTable(int horizon, int num_points, int n_aoi)
        : horizon(horizon),
          num_points(num_points),
          n_aoi(n_aoi),
          values(static_cast<size_t>(horizon + 1) * num_points * n_aoi, 0.0) {}

    double at(int k, int p, int aoi) const {
        return values[(static_cast<size_t>(k) * num_points + p) * n_aoi + aoi];
    }
    double& at(int k, int p, int aoi) {
        return values[(static_cast<size_t>(k) * num_points + p) * n_aoi + aoi];
    }
    std::span<const double> layer(int k) const {
        const size_t stride = static_cast<size_t>(num_points) * n_aoi;
        return {values.data() + k * stride, stride};
    }
    std::span<double> layer(int k) {
        const size_t stride = static_cast<size_t>(num_points) * n_aoi;
        return {values.data() + k * stride, stride};
    }
};

/// Greedy actions of the backward recursion, indexed by (stage k in
/// 0..horizon-1, grid point, aoi).
struct Policy {
    int horizon = 0;
    int num_points = 0;
    int n_aoi = 0;
    std::vector<Action> actions;

    Policy() = default;
    Policy(int horizon, int num_points, int n_aoi)
        : horizon(horizon),
          num_points(num_points),
          n_aoi(n_aoi),
          actions(static_cast<size_t>(horizon) * num_points * n_aoi,
                  Action::fresh) {}

    Action at(int k, int p, int aoi) const {
        return actions[(static_cast<size_t>(k) * num_points + p) * n_aoi + aoi];
    }
    Action& at(int k, int p, int aoi) {
        return actions[(static_cast<size_t>(k) * num_points + p) * n_aoi + aoi];
    }
};

/// Interpolated read of one value layer at an off-grid belief.
double layer_value(const BeliefGrid& grid, std::span<const double> layer,
                   int n_aoi, const Belief& pi, int aoi);

/// Interpolated read of table layer k at (pi, aoi).
double value_at(const ValueTable& table, const BeliefGrid& grid, int k,
                const Belief& pi, int aoi);

/// One backward-induction layer: for every (grid point, aoi) cell, the
/// minimizing action value over the feasible actions, reading the successor
/// layer `v_next` through barycentric interpolation. Ties prefer the fresh
/// transmission. Cells are independent; Exec::parallel maps them over OpenMP
/// with results identical to the serial reference.
void dp_backup(const ChannelModel& model, const CostModel& cost,
               const BeliefGrid& grid, std::span<const double> v_next,
               std::span<double> v_out, std::span<Action> a_out,
               Exec exec = Exec::parallel);

/// Full finite-horizon backward induction: terminal layer from the terminal
/// cost table, then `horizon` backups.
std::pair<ValueTable, Policy> solve_finite_horizon(const ChannelModel& model,
                                                   const CostModel& cost,
                                                   const BeliefGrid& grid,
                                                   int horizon,
                                                   Exec exec = Exec::parallel);

/// Exact optimal cost by full expansion of the action/observation tree with
/// exact belief updates (no grid, no interpolation). Reference oracle for
/// the grid solver; refuses horizons above 12.
double exact_enumerate(const ChannelModel& model, const CostModel& cost,
                       const Belief& pi0, int aoi0, int horizon);

/// Policy lookup at an arbitrary belief: the stored action of the nearest
/// grid point (Euclidean), ties toward the fresh transmission. Always
/// feasible: at aoi = 0 the result is fresh regardless of the belief.
Action policy_action(const Policy& policy, const BeliefGrid& grid, int k,
                     const Belief& pi, int aoi);

}  // namespace aoipomdp
