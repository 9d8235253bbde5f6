#pragma once

#include <Eigen/Dense>
#include <array>
#include <stdexcept>

#include "aoipomdp/channel.hpp"
#include "aoipomdp/types.hpp"

namespace aoipomdp {

/// The observed feedback had zero probability under the prior belief; the
/// Bayes update is undefined. Unreachable in simulation (sampled feedback
/// always has positive probability) but user-supplied traces can hit it.
class ZeroLikelihoodError : public std::runtime_error {
public:
    ZeroLikelihoodError()
        : std::runtime_error(
              "observed feedback has zero probability under the belief") {}
};

/// Probability vector over the channel states. Validated to the simplex
/// within 1e-12 at construction and renormalized, so per-step rounding
/// drift cannot accumulate.
class Belief {
public:
    explicit Belief(Eigen::VectorXd probs);

    static Belief uniform(int n);
    static Belief vertex(int n, int i);

    const Eigen::VectorXd& probs() const { return probs_; }
    double operator[](int i) const { return probs_[i]; }
    int size() const { return static_cast<int>(probs_.size()); }

    bool operator==(const Belief& other) const {
        return probs_ == other.probs_;
    }

private:
    Eigen::VectorXd probs_;
};

/// Bayes update of the channel belief from one slot's feedback: reweight by
/// the feedback likelihood, then push through the channel transition matrix.
/// Throws ZeroLikelihoodError when the feedback is impossible under `pi`.
Belief belief_update(const ChannelModel& model, const Belief& pi, int aoi,
                     Ack z, Action action);

/// Predictive feedback distribution under the belief: index 0 holds
/// P(nack), index 1 holds P(ack).
std::array<double, 2> ack_likelihood(const ChannelModel& model,
                                     const Belief& pi, int aoi, Action action);

}  // namespace aoipomdp
