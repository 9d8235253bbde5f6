#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "aoipomdp/channel.hpp"
#include "aoipomdp/lti_kalman.hpp"
#include "aoipomdp/pomdp.hpp"

namespace aoipomdp {

inline constexpr const char* kToolVersion = "aoi-pomdp 0.1.0";

/// Configuration file problem with position diagnostics.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line = 0,
                std::string key = {})
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) +
                                            (key.empty() ? "" : " (" + key + ")") +
                                            ": " + message
                                      : message),
          line_(line),
          key_(std::move(key)) {}

    int line() const { return line_; }
    const std::string& key() const { return key_; }

private:
    int line_;
    std::string key_;
};

/// Parsed experiment description. Sections and keys follow a strict schema:
/// unknown sections or keys are rejected, matrices are dimension-checked,
/// probabilities validated. See configs/paper-section-5.cfg for the format.
struct ExperimentConfig {
    // [system]
    Eigen::MatrixXd A, C, R_w, R_v, Sigma0;
    Eigen::VectorXd x_hat0;  // default: zeros
    Eigen::MatrixXd P0;      // default: Sigma0

    // [channel]
    Eigen::MatrixXd Tc;
    Eigen::VectorXd q;
    double lambda = 1.0;
    int n_r = 1;

    // [channels] named alternate transition matrices, file order preserved
    std::vector<std::pair<std::string, Eigen::MatrixXd>> channels;

    // [cost]
    Eigen::VectorXd energy_fresh;       // per channel state
    Eigen::VectorXd energy_retransmit;  // per channel state
    TerminalMode terminal = TerminalMode::stage_trace;

    // [solver]
    int horizon = 1;
    int resolution = 1;

    // [simulation]
    int runs = 1;
    std::uint64_t seed = 0;
    int burn_in = 50;

    // [output]
    std::string out_dir = "out";
    std::vector<std::string> formats = {"csv", "svg"};

    LtiModel make_lti() const;
    ChannelModel make_channel() const;
    /// Channel with the primary Tc replaced by a named alternate (or the
    /// primary itself for the reserved name "channel") and an optional
    /// lambda override.
    ChannelModel make_channel_named(const std::string& name,
                                    double lambda_override) const;
    Eigen::MatrixXd energy_table() const;  // n_states x 2, column = action

    /// Hash of the model-defining sections (system, channel, cost, solver)
    /// over a canonical rendering; simulation and output parameters do not
    /// participate, so reruns with different seeds reuse solved policies.
    std::uint64_t model_hash() const;
};

/// Loads and validates a configuration file. Throws ConfigError with the
/// offending line/key on any problem.
ExperimentConfig load_config(const std::string& path);

}  // namespace aoipomdp
