#pragma once

#include <vector>

#include <Eigen/Dense>

namespace dish::oracle {

/// Linear-Gaussian state-space system
///   z1 ~ N(mean0, cov0)
///   z_{k+1} = A z_k + B (h_k + w_k),  w_k ~ N(0, I)   =>  Q = B B^T
///   s_k = C z_k + v_k,                v_k ~ N(0, R)
/// mirroring the latent model with linear drift and constant gain.
struct LinearGaussianLds {
  Eigen::MatrixXd A;    // d_z x d_z
  Eigen::MatrixXd B;    // d_z x d_h
  Eigen::MatrixXd C;    // D x d_z
  Eigen::MatrixXd Q;    // d_z x d_z, PSD
  Eigen::MatrixXd R;    // D x D, SPD
  Eigen::VectorXd mean0;
  Eigen::MatrixXd cov0;

  int dz() const { return static_cast<int>(A.rows()); }
  int dh() const { return static_cast<int>(B.cols()); }
  int dy() const { return static_cast<int>(C.rows()); }

  static LinearGaussianLds from_gain(const Eigen::MatrixXd& A,
                                     const Eigen::MatrixXd& B,
                                     const Eigen::MatrixXd& C,
                                     double obs_std,
                                     const Eigen::VectorXd& mean0,
                                     const Eigen::MatrixXd& cov0);

  void validate() const;
};

/// Observations stacked as K x D (row-major), commands as K x d_h; only the
/// first K-1 commands drive transitions.
double kalman_loglik(const LinearGaussianLds& lds,
                     const std::vector<double>& s, const std::vector<double>& h,
                     int K);

struct SmoothResult {
  std::vector<Eigen::VectorXd> mean;  // K posterior means over z
  std::vector<Eigen::MatrixXd> cov;   // K posterior covariances
};

SmoothResult kalman_smooth(const LinearGaussianLds& lds,
                           const std::vector<double>& s,
                           const std::vector<double>& h, int K);

/// Exact log p(s_{1:K} | h_{1:K}) through the dense joint Gaussian over all
/// observations. Second, independent route to the same quantity as
/// kalman_loglik; O((KD)^3), intended for small K.
double dense_joint_loglik(const LinearGaussianLds& lds,
                          const std::vector<double>& s,
                          const std::vector<double>& h, int K);

/// Finite-horizon LQG: minimizes
///   E[ sum_{k=1..H} (z_{k+1}-target)' P (z_{k+1}-target)
///      + control_cost_weight/2 |u_k|^2 ]
/// over feedback policies and returns the optimal first control at z1.
/// With control_cost_weight = 1 this matches the planner's implicit command
/// prior (the control-as-inference objective); 0 gives the unregularized
/// optimum. Throws if P is not PSD.
Eigen::VectorXd lqg_first_command(const LinearGaussianLds& lds,
                                  const Eigen::MatrixXd& P,
                                  const Eigen::VectorXd& target, int horizon,
                                  const Eigen::VectorXd& z1,
                                  double control_cost_weight = 1.0);

/// Posterior mean of the first disturbance w1 given exp(-state cost)
/// weighting with quadratic cost (z_k - target)' P (z_k - target) on
/// z_2..z_{H+1}; dense Gaussian conditioning. Independent cross-check of
/// the path-integral identity lqg_first_command (weight 1) == E[w1 | O].
Eigen::VectorXd posterior_first_disturbance(const LinearGaussianLds& lds,
                                            const Eigen::MatrixXd& P,
                                            const Eigen::VectorXd& target,
                                            int horizon,
                                            const Eigen::VectorXd& z1);

}  // namespace dish::oracle
