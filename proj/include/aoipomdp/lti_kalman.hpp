#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <utility>
#include <vector>

#include "aoipomdp/rng.hpp"
#include "aoipomdp/types.hpp"

namespace aoipomdp {

/// Riccati iteration failed to reach the requested tolerance. Carries the
/// last iterate and its fixed-point residual for diagnosis.
class RiccatiNonConvergence : public std::runtime_error {
public:
    RiccatiNonConvergence(Eigen::MatrixXd last, double residual, int iters);

    const Eigen::MatrixXd& last_iterate() const { return last_; }
    double residual() const { return residual_; }

private:
    Eigen::MatrixXd last_;
    double residual_;
};

/// Linear time-invariant plant with Gaussian process/measurement noise and
/// the initial-state covariance. Dimensions and (semi)definiteness are
/// validated at construction (symmetry within 1e-10, eigenvalues >= -1e-10);
/// R_v is expected positive definite for filtering, and a singular innovation
/// covariance is rejected at use inside kf_step.
struct LtiModel {
    Eigen::MatrixXd A;       // n x n state transition
    Eigen::MatrixXd C;       // m x n observation
    Eigen::MatrixXd R_w;     // n x n process-noise covariance
    Eigen::MatrixXd R_v;     // m x m measurement-noise covariance
    Eigen::MatrixXd Sigma0;  // n x n initial state covariance

    // PSD square roots used for sampling (eigendecomposition based, so a
    // singular or zero covariance is fine).
    Eigen::MatrixXd sqrt_R_w;
    Eigen::MatrixXd sqrt_R_v;
    Eigen::MatrixXd sqrt_Sigma0;

    LtiModel(Eigen::MatrixXd A, Eigen::MatrixXd C, Eigen::MatrixXd R_w,
             Eigen::MatrixXd R_v, Eigen::MatrixXd Sigma0);

    int state_dim() const { return static_cast<int>(A.rows()); }
    int meas_dim() const { return static_cast<int>(C.rows()); }
};

/// True plant state at a time index.
struct PlantState {
    Eigen::VectorXd x;
    long k = 0;
};

/// Sensor-side filter state: posterior estimate and covariance.
struct KalmanState {
    Eigen::VectorXd x_hat;
    Eigen::MatrixXd P;
};

/// Error covariance of the remote estimate as a function of the age counter:
/// entries[q] is the covariance after the last delivered estimate (at
/// steady-state covariance entries[0]) has been propagated q slots open loop.
/// traces[q] caches the matrix trace of entries[q].
struct AoiCovTable {
    std::vector<Eigen::MatrixXd> entries;
    std::vector<double> traces;
};

/// Advances the plant one slot: x' = A x + w, y' = C x' + v with fresh
/// Gaussian draws from `rng` (w first, then v, each filled in index order).
std::pair<PlantState, Eigen::VectorXd> simulate_step(const LtiModel& model,
                                                     const PlantState& state,
                                                     Rng& rng);

/// One predict-correct cycle of the sensor Kalman filter.
KalmanState kf_step(const LtiModel& model, const KalmanState& state,
                    const Eigen::VectorXd& y);

/// Fixed point of the posterior-covariance Riccati recursion, found by
/// forward iteration from Sigma0. `residual_history`, when given, receives
/// the sup-norm residual of every iteration in order.
/// Throws RiccatiNonConvergence if the residual is still above `tol` after
/// `max_iter` iterations.
Eigen::MatrixXd steady_state_covariance(const LtiModel& model,
                                        double tol = 1e-12,
                                        int max_iter = 10000,
                                        std::vector<double>* residual_history = nullptr);

/// Closed-form age-indexed covariance table:
///   entries[0] = P_bar
///   entries[q] = A^q P_bar (A^q)^T + sum_{j=0}^{q-1} A^j R_w (A^j)^T
AoiCovTable aoi_cov_table(const LtiModel& model, const Eigen::MatrixXd& P_bar,
                          int n_r);

/// One step of the remote-estimator covariance recursion: the sensor
/// posterior on delivery, open-loop propagation otherwise.
Eigen::MatrixXd remote_cov_recursion(const LtiModel& model,
                                     const Eigen::MatrixXd& P_prev, Ack ack,
                                     const Eigen::MatrixXd& P_sensor);

/// Validation helper shared by the model constructors: symmetric within
/// `sym_tol` and minimum eigenvalue >= `min_eig`. Throws std::invalid_argument
/// naming `what` on violation.
void require_symmetric_psd(const char* what, const Eigen::MatrixXd& M,
                           double sym_tol = 1e-10, double min_eig = -1e-10);

/// PSD square root via eigendecomposition with negative eigenvalues clamped
/// to zero; works for singular covariances.
Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M);

}  // namespace aoipomdp
