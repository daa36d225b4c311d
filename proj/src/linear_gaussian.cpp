// SPDX-License-Identifier: Apache-2.0
#include "led/linear_gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace led {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2*pi)

double logdet_of(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

Eigen::VectorXd std_normal_vec(Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

LinearGaussian LinearGaussian::random(Index dx, Index dz, Rng& rng) {
  LinearGaussian m;
  m.A.resize(dx, dz);
  for (Index i = 0; i < dx; ++i)
    for (Index j = 0; j < dz; ++j) m.A(i, j) = rng.normal() / std::sqrt(static_cast<double>(dz));
  m.b = std_normal_vec(dx, rng);
  m.noise_var = 0.3 + 0.7 * rng.uniform();
  return m;
}

double LinearGaussian::log_marginal(const Eigen::VectorXd& x) const {
  const Eigen::MatrixXd cov =
      A * A.transpose() + noise_var * Eigen::MatrixXd::Identity(dx(), dx());
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("log_marginal: covariance not SPD");
  const Eigen::VectorXd d = x - b;
  const double quad = d.dot(llt.solve(d));
  return -0.5 * (static_cast<double>(dx()) * kLog2Pi + logdet_of(llt) + quad);
}

void LinearGaussian::exact_posterior(const Eigen::VectorXd& x, Eigen::VectorXd& m,
                                     Eigen::MatrixXd& S) const {
  const Eigen::MatrixXd prec =
      Eigen::MatrixXd::Identity(dz(), dz()) + A.transpose() * A / noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt(prec);
  S = llt.solve(Eigen::MatrixXd::Identity(dz(), dz()));
  m = llt.solve(A.transpose() * (x - b) / noise_var);
}

double LinearGaussian::elbo(const Eigen::VectorXd& x, const Eigen::VectorXd& qm,
                            const Eigen::MatrixXd& qcov) const {
  const double v = noise_var;
  const Eigen::VectorXd r = x - A * qm - b;
  const double expected_ll = -0.5 * static_cast<double>(dx()) * (kLog2Pi + std::log(v)) -
                             (r.squaredNorm() + (A * qcov * A.transpose()).trace()) / (2.0 * v);
  const double expected_prior =
      -0.5 * static_cast<double>(dz()) * kLog2Pi - 0.5 * (qm.squaredNorm() + qcov.trace());
  Eigen::LLT<Eigen::MatrixXd> llt(qcov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("elbo: q covariance not SPD");
  const double entropy =
      0.5 * logdet_of(llt) + 0.5 * static_cast<double>(dz()) * (1.0 + kLog2Pi);
  return expected_ll + expected_prior + entropy;
}

double LinearGaussian::kl_posterior(const Eigen::VectorXd& x, const Eigen::VectorXd& qm,
                                    const Eigen::MatrixXd& qcov) const {
  Eigen::VectorXd m;
  Eigen::MatrixXd S;
  exact_posterior(x, m, S);
  Eigen::LLT<Eigen::MatrixXd> llt_s(S);
  Eigen::LLT<Eigen::MatrixXd> llt_q(qcov);
  const Eigen::MatrixXd sinv_q = llt_s.solve(qcov);
  const Eigen::VectorXd d = m - qm;
  return 0.5 * (sinv_q.trace() + d.dot(llt_s.solve(d)) - static_cast<double>(dz()) +
                logdet_of(llt_s) - logdet_of(llt_q));
}

double LinearGaussian::nll_importance(const Eigen::VectorXd& x, const Eigen::VectorXd& qm,
                                      const Eigen::MatrixXd& qcov, Index k, Rng& rng) const {
  if (k < 1) throw std::invalid_argument("nll_importance: k must be >= 1");
  Eigen::LLT<Eigen::MatrixXd> llt(qcov);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("nll_importance: q covariance not SPD");
  const Eigen::MatrixXd L = llt.matrixL();
  const double log_det_q = logdet_of(llt);
  const double v = noise_var;

  Eigen::ArrayXd log_w(k);
  for (Index i = 0; i < k; ++i) {
    const Eigen::VectorXd eps = std_normal_vec(dz(), rng);
    const Eigen::VectorXd z = qm + L * eps;
    const double log_lik = -0.5 * static_cast<double>(dx()) * (kLog2Pi + std::log(v)) -
                           (x - A * z - b).squaredNorm() / (2.0 * v);
    const double log_prior = -0.5 * (static_cast<double>(dz()) * kLog2Pi + z.squaredNorm());
    const double log_q =
        -0.5 * (static_cast<double>(dz()) * kLog2Pi + log_det_q + eps.squaredNorm());
    log_w[i] = log_lik + log_prior - log_q;
  }
  const double mx = log_w.maxCoeff();
  const double lse = mx + std::log((log_w - mx).exp().sum());
  return -(lse - std::log(static_cast<double>(k)));
}

Eigen::VectorXd LinearGaussian::sample_x(Rng& rng) const {
  const Eigen::VectorXd z = std_normal_vec(dz(), rng);
  return A * z + b + std::sqrt(noise_var) * std_normal_vec(dx(), rng);
}

ElboIdentity elbo_identity_check(const LinearGaussian& model, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& qm, const Eigen::MatrixXd& qcov) {
  ElboIdentity out;
  out.elbo = model.elbo(x, qm, qcov);
  out.log_px = model.log_marginal(x);
  out.kl_posterior = model.kl_posterior(x, qm, qcov);
  return out;
}

}  // namespace led
