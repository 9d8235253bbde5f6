#pragma once

#include <Eigen/Dense>

#include "aoipomdp/rng.hpp"
#include "aoipomdp/types.hpp"

namespace aoipomdp {

/// Finite-state Markov packet-erasure channel with combining retransmissions.
/// A fresh packet sent in channel state j errs with probability q[j]; the
/// r-th retransmission errs with probability q[j] * lambda^r, so lambda = 1
/// degenerates to plain repeat requests with a constant per-attempt error.
/// States are 0-based indices into the rows of Tc.
struct ChannelModel {
    Eigen::MatrixXd Tc;  // row-stochastic transition matrix
    Eigen::VectorXd q;   // fresh-packet error probability per state
    double lambda;       // combining gain, in (0, 1]
    int n_r;             // retransmission cap, >= 1

    ChannelModel(Eigen::MatrixXd Tc, Eigen::VectorXd q, double lambda,
                 int n_r);

    int n_states() const { return static_cast<int>(Tc.rows()); }
};

/// Draws the next channel state from row `s` of the transition matrix.
int step_channel(const ChannelModel& model, int s, Rng& rng);

/// Packet error probability after r retransmissions in channel state j,
/// clamped to [0, 1]. r must lie in [0, n_r].
double error_prob(const ChannelModel& model, int r, int j);

/// Samples the delivery feedback for one transmission: a fresh packet errs
/// with probability q[s], a retransmission at age `aoi` with
/// q[s] * lambda^aoi. Retransmitting with nothing pending (aoi == 0) is an
/// argument error.
Ack sample_ack(const ChannelModel& model, int s, int aoi, Action action,
               Rng& rng);

/// Invariant distribution of a row-stochastic matrix via power iteration
/// (tolerance 1e-12 on successive iterates, at most 1e6 iterations).
/// Requires an irreducible chain; reducible or non-convergent inputs throw
/// std::runtime_error.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& Tc);

}  // namespace aoipomdp
