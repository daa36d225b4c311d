// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include "led/rng.hpp"
#include "led/tensor.hpp"

namespace led {

/// Conjugate linear-Gaussian latent model used as an analytic oracle:
///   z ~ N(0, I_dz),   x | z ~ N(A z + b, noise_var * I_dx).
/// Marginal, exact posterior, ELBO under a Gaussian q, and the posterior KL
/// all have closed forms, which makes the Eq. 3 identity
///   ELBO(q) = log p(x) - KL(q || p(z|x))
/// checkable to float precision, and gives importance-sampling estimators an
/// exact ground truth.
struct LinearGaussian {
  Eigen::MatrixXd A;  // dx x dz
  Eigen::VectorXd b;  // dx
  double noise_var = 1.0;

  Index dx() const { return A.rows(); }
  Index dz() const { return A.cols(); }

  static LinearGaussian random(Index dx, Index dz, Rng& rng);

  /// log N(x; b, A A^T + noise_var I).
  double log_marginal(const Eigen::VectorXd& x) const;

  /// Exact posterior N(m, S): S = (I + A^T A / v)^-1, m = S A^T (x - b) / v.
  void exact_posterior(const Eigen::VectorXd& x, Eigen::VectorXd& m, Eigen::MatrixXd& S) const;

  /// Analytic E_q[log p(x|z) + log p(z) - log q(z)] for q = N(qm, qcov).
  double elbo(const Eigen::VectorXd& x, const Eigen::VectorXd& qm,
              const Eigen::MatrixXd& qcov) const;

  /// KL(q || p(z|x)), both Gaussians, closed form.
  double kl_posterior(const Eigen::VectorXd& x, const Eigen::VectorXd& qm,
                      const Eigen::MatrixXd& qcov) const;

  /// -log[(1/K) sum_k p(x|z_k) p(z_k) / q(z_k)], z_k ~ q = N(qm, qcov).
  double nll_importance(const Eigen::VectorXd& x, const Eigen::VectorXd& qm,
                        const Eigen::MatrixXd& qcov, Index k, Rng& rng) const;

  /// One draw from x's marginal (ancestral z then noise).
  Eigen::VectorXd sample_x(Rng& rng) const;
};

struct ElboIdentity {
  double elbo = 0.0;
  double log_px = 0.0;
  double kl_posterior = 0.0;
  double gap() const { return elbo - (log_px - kl_posterior); }
};

/// Evaluates both sides of Eq. 3 for the oracle under q = N(qm, qcov).
ElboIdentity elbo_identity_check(const LinearGaussian& model, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& qm, const Eigen::MatrixXd& qcov);

}  // namespace led
