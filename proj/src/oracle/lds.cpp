#include "oracle/lds.hpp"

#include <cmath>
#include <stdexcept>

namespace dish::oracle {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double mvn_logpdf(const Eigen::VectorXd& x, const Eigen::VectorXd& mean,
                  const Eigen::MatrixXd& cov) {
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("mvn_logpdf: covariance not positive definite");
  const Eigen::VectorXd d = x - mean;
  const Eigen::VectorXd sol = llt.solve(d);
  double logdet = 0.0;
  for (int i = 0; i < cov.rows(); ++i)
    logdet += 2.0 * std::log(llt.matrixL()(i, i));
  return -0.5 * (d.dot(sol) + logdet + kLog2Pi * cov.rows());
}

Eigen::VectorXd row_vec(const std::vector<double>& flat, int k, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = flat[static_cast<std::size_t>(k) * dim + i];
  return v;
}

}  // namespace

LinearGaussianLds LinearGaussianLds::from_gain(const Eigen::MatrixXd& A,
                                               const Eigen::MatrixXd& B,
                                               const Eigen::MatrixXd& C,
                                               double obs_std,
                                               const Eigen::VectorXd& mean0,
                                               const Eigen::MatrixXd& cov0) {
  LinearGaussianLds lds;
  lds.A = A;
  lds.B = B;
  lds.C = C;
  lds.Q = B * B.transpose();
  lds.R = obs_std * obs_std *
          Eigen::MatrixXd::Identity(C.rows(), C.rows());
  lds.mean0 = mean0;
  lds.cov0 = cov0;
  lds.validate();
  return lds;
}

void LinearGaussianLds::validate() const {
  if (A.rows() != A.cols() || B.rows() != A.rows() || C.cols() != A.rows() ||
      Q.rows() != A.rows() || Q.cols() != A.rows() || R.rows() != C.rows() ||
      R.cols() != C.rows() || mean0.size() != A.rows() ||
      cov0.rows() != A.rows() || cov0.cols() != A.rows())
    throw std::invalid_argument("LinearGaussianLds: inconsistent dimensions");
}

double kalman_loglik(const LinearGaussianLds& lds,
                     const std::vector<double>& s, const std::vector<double>& h,
                     int K) {
  const int dz = lds.dz(), dh = lds.dh(), D = lds.dy();
  if (static_cast<int>(s.size()) != K * D ||
      static_cast<int>(h.size()) != K * dh)
    throw std::invalid_argument("kalman_loglik: data size mismatch");

  Eigen::VectorXd m = lds.mean0;
  Eigen::MatrixXd P = lds.cov0;
  double loglik = 0.0;
  for (int k = 0; k < K; ++k) {
    const Eigen::VectorXd y = row_vec(s, k, D);
    const Eigen::MatrixXd S = lds.C * P * lds.C.transpose() + lds.R;
    loglik += mvn_logpdf(y, lds.C * m, S);
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("kalman_loglik: singular innovation covariance");
    const Eigen::MatrixXd G = llt.solve(lds.C * P).transpose();  // P C' S^-1
    m = m + G * (y - lds.C * m);
    P = P - G * lds.C * P;
    if (k + 1 < K) {
      m = lds.A * m + lds.B * row_vec(h, k, dh);
      P = lds.A * P * lds.A.transpose() + lds.Q;
    }
  }
  return loglik;
}

SmoothResult kalman_smooth(const LinearGaussianLds& lds,
                           const std::vector<double>& s,
                           const std::vector<double>& h, int K) {
  const int dz = lds.dz(), dh = lds.dh(), D = lds.dy();
  if (static_cast<int>(s.size()) != K * D ||
      static_cast<int>(h.size()) != K * dh)
    throw std::invalid_argument("kalman_smooth: data size mismatch");

  std::vector<Eigen::VectorXd> m_filt(K), m_pred(K);
  std::vector<Eigen::MatrixXd> P_filt(K), P_pred(K);
  Eigen::VectorXd m = lds.mean0;
  Eigen::MatrixXd P = lds.cov0;
  for (int k = 0; k < K; ++k) {
    m_pred[k] = m;
    P_pred[k] = P;
    const Eigen::VectorXd y = row_vec(s, k, D);
    const Eigen::MatrixXd S = lds.C * P * lds.C.transpose() + lds.R;
    const Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("kalman_smooth: singular innovation covariance");
    const Eigen::MatrixXd G = llt.solve(lds.C * P).transpose();
    m = m + G * (y - lds.C * m);
    P = P - G * lds.C * P;
    m_filt[k] = m;
    P_filt[k] = P;
    if (k + 1 < K) {
      m = lds.A * m + lds.B * row_vec(h, k, dh);
      P = lds.A * P * lds.A.transpose() + lds.Q;
    }
  }

  SmoothResult out;
  out.mean.resize(K);
  out.cov.resize(K);
  out.mean[K - 1] = m_filt[K - 1];
  out.cov[K - 1] = P_filt[K - 1];
  for (int k = K - 2; k >= 0; --k) {
    const Eigen::MatrixXd Ppred =
        lds.A * P_filt[k] * lds.A.transpose() + lds.Q;
    const Eigen::VectorXd mpred =
        lds.A * m_filt[k] + lds.B * row_vec(h, k, dh);
    // J = P_filt A' Ppred^-1 via a solve on the symmetric Ppred.
    const Eigen::MatrixXd J =
        Ppred.ldlt().solve(lds.A * P_filt[k]).transpose();
    out.mean[k] = m_filt[k] + J * (out.mean[k + 1] - mpred);
    out.cov[k] =
        P_filt[k] + J * (out.cov[k + 1] - Ppred) * J.transpose();
  }
  return out;
}

double dense_joint_loglik(const LinearGaussianLds& lds,
                          const std::vector<double>& s,
                          const std::vector<double>& h, int K) {
  const int dz = lds.dz(), dh = lds.dh(), D = lds.dy();
  // Joint Gaussian over stacked latents via the linear recursion, then the
  // observation marginal.
  Eigen::VectorXd mu_z(K * dz);
  std::vector<Eigen::MatrixXd> zmean_chain(K);
  mu_z.segment(0, dz) = lds.mean0;
  Eigen::VectorXd m = lds.mean0;
  for (int k = 1; k < K; ++k) {
    m = lds.A * m + lds.B * row_vec(h, k - 1, dh);
    mu_z.segment(k * dz, dz) = m;
  }

  // Cov recursion over the stacked latent vector.
  Eigen::MatrixXd Sz = Eigen::MatrixXd::Zero(K * dz, K * dz);
  Sz.block(0, 0, dz, dz) = lds.cov0;
  for (int k = 1; k < K; ++k) {
    // cross blocks: cov(z_k, z_j) = A cov(z_{k-1}, z_j) for j < k
    for (int j = 0; j < k; ++j) {
      const Eigen::MatrixXd cross =
          lds.A * Sz.block((k - 1) * dz, j * dz, dz, dz);
      Sz.block(k * dz, j * dz, dz, dz) = cross;
      Sz.block(j * dz, k * dz, dz, dz) = cross.transpose();
    }
    Sz.block(k * dz, k * dz, dz, dz) =
        lds.A * Sz.block((k - 1) * dz, (k - 1) * dz, dz, dz) *
            lds.A.transpose() +
        lds.Q;
  }

  Eigen::MatrixXd Cbig = Eigen::MatrixXd::Zero(K * D, K * dz);
  for (int k = 0; k < K; ++k) Cbig.block(k * D, k * dz, D, dz) = lds.C;
  Eigen::MatrixXd Rbig = Eigen::MatrixXd::Zero(K * D, K * D);
  for (int k = 0; k < K; ++k) Rbig.block(k * D, k * D, D, D) = lds.R;

  Eigen::VectorXd y(K * D);
  for (int k = 0; k < K; ++k) y.segment(k * D, D) = row_vec(s, k, D);
  return mvn_logpdf(y, Cbig * mu_z, Cbig * Sz * Cbig.transpose() + Rbig);
}

Eigen::VectorXd lqg_first_command(const LinearGaussianLds& lds,
                                  const Eigen::MatrixXd& P,
                                  const Eigen::VectorXd& target, int horizon,
                                  const Eigen::VectorXd& z1,
                                  double control_cost_weight) {
  const int dz = lds.dz(), dh = lds.dh();
  if (horizon < 1) throw std::invalid_argument("lqg: horizon must be >= 1");
  if (P.rows() != dz || P.cols() != dz)
    throw std::invalid_argument("lqg: P dimension mismatch");
  {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(P);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw std::invalid_argument("lqg: P must be positive semidefinite");
  }

  // Quadratic value function V_k(z) = z' S z + s' z + const, built backward.
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(dz, dz);
  Eigen::VectorXd svec = Eigen::VectorXd::Zero(dz);
  Eigen::MatrixXd K1;
  Eigen::VectorXd k1;
  for (int k = horizon; k >= 1; --k) {
    const Eigen::MatrixXd M = P + S;
    const Eigen::VectorXd mvec = -2.0 * P * target + svec;
    const Eigen::MatrixXd H =
        2.0 * lds.B.transpose() * M * lds.B +
        control_cost_weight * Eigen::MatrixXd::Identity(dh, dh);
    const Eigen::MatrixXd Hinv = H.ldlt().solve(Eigen::MatrixXd::Identity(dh, dh));
    const Eigen::MatrixXd Kfb = Hinv * (2.0 * lds.B.transpose() * M * lds.A);
    const Eigen::VectorXd kff = Hinv * (lds.B.transpose() * mvec);
    if (k == 1) {
      K1 = Kfb;
      k1 = kff;
    }
    const Eigen::MatrixXd F = lds.A - lds.B * Kfb;
    const Eigen::VectorXd g = -lds.B * kff;
    const Eigen::MatrixXd Snew =
        F.transpose() * M * F +
        0.5 * control_cost_weight * Kfb.transpose() * Kfb;
    const Eigen::VectorXd snew =
        2.0 * F.transpose() * M * g + F.transpose() * mvec +
        control_cost_weight * Kfb.transpose() * kff;
    S = 0.5 * (Snew + Snew.transpose());
    svec = snew;
  }
  return -K1 * z1 - k1;
}

Eigen::VectorXd posterior_first_disturbance(const LinearGaussianLds& lds,
                                            const Eigen::MatrixXd& P,
                                            const Eigen::VectorXd& target,
                                            int horizon,
                                            const Eigen::VectorXd& z1) {
  const int dz = lds.dz(), dh = lds.dh();
  const int n = horizon * dh;
  // z_{k+1} = A z_k + B w_k (u = 0 nominal). Stack w; z_{k+1} is affine in w.
  // Minimize 1/2|w|^2 + sum_k (z_{k+1}-target)' P (z_{k+1}-target):
  // Gaussian posterior, so the minimizer is the posterior mean.
  std::vector<Eigen::MatrixXd> zw(horizon);  // d(z_{k+1})/d(w)
  std::vector<Eigen::VectorXd> z0(horizon);  // z_{k+1} at w = 0
  Eigen::VectorXd m = z1;
  Eigen::MatrixXd Jprev = Eigen::MatrixXd::Zero(dz, n);
  for (int k = 0; k < horizon; ++k) {
    Eigen::MatrixXd J = lds.A * Jprev;
    J.block(0, k * dh, dz, dh) += lds.B;
    m = lds.A * m;
    zw[k] = J;
    z0[k] = m;
    Jprev = J;
  }
  Eigen::MatrixXd Hm = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (int k = 0; k < horizon; ++k) {
    Hm += 2.0 * zw[k].transpose() * P * zw[k];
    b += -2.0 * zw[k].transpose() * P * (z0[k] - target);
  }
  const Eigen::VectorXd w = Hm.ldlt().solve(b);
  return w.segment(0, dh);
}

}  // namespace dish::oracle
