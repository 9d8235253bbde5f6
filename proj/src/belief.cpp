#include "aoipomdp/belief.hpp"

#include <cmath>
#include <string>

#include "aoipomdp/pomdp.hpp"

namespace aoipomdp {

Belief::Belief(Eigen::VectorXd probs) : probs_(std::move(probs)) {
    if (probs_.size() < 1)
        throw std::invalid_argument("belief must have at least one entry");
    constexpr double kTol = 1e-12;
    double sum = 0.0;
    for (Eigen::Index i = 0; i < probs_.size(); ++i) {
        const double p = probs_[i];
        if (!std::isfinite(p) || p < -kTol || p > 1.0 + kTol)
            throw std::invalid_argument("belief entry " + std::to_string(p) +
                                        " outside [0, 1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kTol)
        throw std::invalid_argument("belief sums to " + std::to_string(sum));
    probs_ = probs_.cwiseMax(0.0).cwiseMin(1.0);
    probs_ /= probs_.sum();
}

Belief Belief::uniform(int n) {
    return Belief(Eigen::VectorXd::Constant(n, 1.0 / n));
}

Belief Belief::vertex(int n, int i) {
    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    p[i] = 1.0;
    return Belief(std::move(p));
}

Belief belief_update(const ChannelModel& model, const Belief& pi, int aoi,
                     Ack z, Action action) {
    const int n = model.n_states();
    if (pi.size() != n)
        throw std::invalid_argument("belief dimension mismatch");
    Eigen::VectorXd weighted(n);
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
        weighted[i] = observation_prob(model, i, aoi, z, action) * pi[i];
        norm += weighted[i];
    }
    if (norm <= 1e-300) throw ZeroLikelihoodError();
    Eigen::VectorXd posterior(n);
    for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += weighted[i] * model.Tc(i, j);
        posterior[j] = acc / norm;
    }
    return Belief(std::move(posterior));
}

std::array<double, 2> ack_likelihood(const ChannelModel& model,
                                     const Belief& pi, int aoi,
                                     Action action) {
    const int n = model.n_states();
    if (pi.size() != n)
        throw std::invalid_argument("belief dimension mismatch");
    double p_nack = 0.0;
    for (int i = 0; i < n; ++i)
        p_nack += observation_prob(model, i, aoi, Ack::nack, action) * pi[i];
    return {p_nack, 1.0 - p_nack};
}

}  // namespace aoipomdp
