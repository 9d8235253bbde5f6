#include "aoipomdp/lti_kalman.hpp"

#include <Eigen/Eigenvalues>

#include <string>

namespace aoipomdp {

RiccatiNonConvergence::RiccatiNonConvergence(Eigen::MatrixXd last,
                                             double residual, int iters)
    : std::runtime_error("Riccati iteration did not converge after " +
                         std::to_string(iters) +
                         " iterations (residual " + std::to_string(residual) +
                         ")"),
      last_(std::move(last)),
      residual_(residual) {}

void require_symmetric_psd(const char* what, const Eigen::MatrixXd& M,
                           double sym_tol, double min_eig) {
    if (M.rows() != M.cols())
        throw std::invalid_argument(std::string(what) + " must be square");
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > sym_tol)
        throw std::invalid_argument(std::string(what) +
                                    " is not symmetric (max asymmetry " +
                                    std::to_string(asym) + ")");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M,
                                                      Eigen::EigenvaluesOnly);
    const double lam_min = es.eigenvalues().minCoeff();
    if (lam_min < min_eig)
        throw std::invalid_argument(std::string(what) +
                                    " has negative eigenvalue " +
                                    std::to_string(lam_min));
}

Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& M) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return es.eigenvectors() * lam.cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

namespace {

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& M) {
    return 0.5 * (M + M.transpose());
}

Eigen::VectorXd gaussian_vector(Rng& rng, const Eigen::MatrixXd& sqrt_cov) {
    Eigen::VectorXd z(sqrt_cov.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
    return sqrt_cov * z;
}

// Posterior-covariance Riccati step shared by steady_state_covariance.
// Deliberately a separate code path from kf_step so the fixed-point tests
// compare two independent routes.
Eigen::MatrixXd riccati_step(const LtiModel& m, const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd P_pred =
        symmetrize(m.A * P * m.A.transpose() + m.R_w);
    const Eigen::MatrixXd S = m.C * P_pred * m.C.transpose() + m.R_v;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("innovation covariance is singular");
    // K = P_pred C^T S^-1, computed as the solve S K^T = C P_pred.
    const Eigen::MatrixXd K = llt.solve(m.C * P_pred).transpose();
    return symmetrize(P_pred - K * m.C * P_pred);
}

}  // namespace

LtiModel::LtiModel(Eigen::MatrixXd A_, Eigen::MatrixXd C_,
                   Eigen::MatrixXd R_w_, Eigen::MatrixXd R_v_,
                   Eigen::MatrixXd Sigma0_)
    : A(std::move(A_)),
      C(std::move(C_)),
      R_w(std::move(R_w_)),
      R_v(std::move(R_v_)),
      Sigma0(std::move(Sigma0_)) {
    const Eigen::Index n = A.rows();
    const Eigen::Index m = C.rows();
    if (A.cols() != n) throw std::invalid_argument("A must be square");
    if (C.cols() != n)
        throw std::invalid_argument("C must have as many columns as A");
    if (R_w.rows() != n || R_w.cols() != n)
        throw std::invalid_argument("R_w must be n x n");
    if (R_v.rows() != m || R_v.cols() != m)
        throw std::invalid_argument("R_v must be m x m");
    if (Sigma0.rows() != n || Sigma0.cols() != n)
        throw std::invalid_argument("Sigma0 must be n x n");
    require_symmetric_psd("R_w", R_w);
    require_symmetric_psd("R_v", R_v);
    require_symmetric_psd("Sigma0", Sigma0);
    sqrt_R_w = psd_sqrt(R_w);
    sqrt_R_v = psd_sqrt(R_v);
    sqrt_Sigma0 = psd_sqrt(Sigma0);
}

std::pair<PlantState, Eigen::VectorXd> simulate_step(const LtiModel& model,
                                                     const PlantState& state,
                                                     Rng& rng) {
    if (state.x.size() != model.state_dim())
        throw std::invalid_argument("plant state dimension mismatch");
    PlantState next;
    next.x = model.A * state.x + gaussian_vector(rng, model.sqrt_R_w);
    next.k = state.k + 1;
    Eigen::VectorXd y = model.C * next.x + gaussian_vector(rng, model.sqrt_R_v);
    return {std::move(next), std::move(y)};
}

KalmanState kf_step(const LtiModel& model, const KalmanState& state,
                    const Eigen::VectorXd& y) {
    if (y.size() != model.meas_dim())
        throw std::invalid_argument("measurement dimension mismatch");
    const Eigen::VectorXd x_pred = model.A * state.x_hat;
    const Eigen::MatrixXd P_pred =
        symmetrize(model.A * state.P * model.A.transpose() + model.R_w);
    const Eigen::MatrixXd S =
        model.C * P_pred * model.C.transpose() + model.R_v;
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("innovation covariance is singular");
    const Eigen::MatrixXd K = llt.solve(model.C * P_pred).transpose();
    KalmanState out;
    out.x_hat = x_pred + K * (y - model.C * x_pred);
    out.P = symmetrize(P_pred - K * model.C * P_pred);
    return out;
}

Eigen::MatrixXd steady_state_covariance(const LtiModel& model, double tol,
                                        int max_iter,
                                        std::vector<double>* residual_history) {
    if (tol <= 0.0) throw std::invalid_argument("tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    Eigen::MatrixXd P = model.Sigma0;
    double residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::MatrixXd P_next = riccati_step(model, P);
        residual = (P_next - P).cwiseAbs().maxCoeff();
        if (residual_history) residual_history->push_back(residual);
        P = std::move(P_next);
        if (residual <= tol) return P;
    }
    throw RiccatiNonConvergence(P, residual, max_iter);
}

AoiCovTable aoi_cov_table(const LtiModel& model, const Eigen::MatrixXd& P_bar,
                          int n_r) {
    if (n_r < 1) throw std::invalid_argument("n_r must be >= 1");
    require_symmetric_psd("P_bar", P_bar);
    AoiCovTable table;
    table.entries.reserve(n_r + 1);
    table.traces.reserve(n_r + 1);
    table.entries.push_back(P_bar);
    table.traces.push_back(P_bar.trace());
    Eigen::MatrixXd A_pow =
        Eigen::MatrixXd::Identity(model.state_dim(), model.state_dim());
    Eigen::MatrixXd noise_sum =
        Eigen::MatrixXd::Zero(model.state_dim(), model.state_dim());
    for (int q = 1; q <= n_r; ++q) {
        noise_sum += A_pow * model.R_w * A_pow.transpose();  // A^{q-1} R_w ...
        A_pow = model.A * A_pow;                             // A^q
        const Eigen::MatrixXd raw = A_pow * P_bar * A_pow.transpose() + noise_sum;
        Eigen::MatrixXd entry = 0.5 * (raw + raw.transpose());
        table.traces.push_back(entry.trace());
        table.entries.push_back(std::move(entry));
    }
    return table;
}

Eigen::MatrixXd remote_cov_recursion(const LtiModel& model,
                                     const Eigen::MatrixXd& P_prev, Ack ack,
                                     const Eigen::MatrixXd& P_sensor) {
    if (is_ack(ack)) return P_sensor;
    return symmetrize(model.A * P_prev * model.A.transpose() + model.R_w);
}

}  // namespace aoipomdp
