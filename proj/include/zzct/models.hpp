#pragma once

#include <memory>
#include <vector>

#include "zzct/rng.hpp"
#include "zzct/state.hpp"

namespace zzct {

// Contract for a sampling target: unnormalized log-density (each model
// documents its additive constant), gradient, and an entrywise matrix M
// with |d_i d_j log q(x)| <= M_ij for all x.
class TargetModel {
 public:
  virtual ~TargetModel() = default;
  virtual Eigen::Index dim() const = 0;
  virtual double log_density(const Vec& x) const = 0;
  virtual Vec grad_log_density(const Vec& x) const = 0;
  virtual const Mat& hessian_bound() const = 0;

  virtual bool has_exact_moments() const { return false; }
  virtual Vec exact_mean() const;
  virtual Vec exact_second_moment() const;  // E[X_i^2] per coordinate

  virtual bool can_sample() const { return false; }
  virtual Vec sample(Rng&) const;
};

struct GaussianSpec {
  Vec mu;
  Mat sigma;  // symmetric positive definite
};

struct MixtureSpec {
  std::vector<Vec> means;  // equal weights
  double sigma2 = 1.0;     // shared isotropic variance
};

struct BoltzmannSpec {
  Mat W;  // symmetric coupling, zero diagonal, d_b x d_b
  Vec b;  // bias, length d_b
  Mat D;  // diagonal shift making W + D positive semidefinite
  Mat Q;  // d_b x d_r factor with Q Q^T = W + D
};

// log q(x) = -1/2 (x-mu)^T Sigma^-1 (x-mu) - 1/2 log det Sigma
// (the density up to the dimension constant (2*pi)^{d/2}).
class GaussianModel : public TargetModel {
 public:
  explicit GaussianModel(GaussianSpec spec);
  Eigen::Index dim() const override { return mu_.size(); }
  double log_density(const Vec& x) const override;
  Vec grad_log_density(const Vec& x) const override;
  const Mat& hessian_bound() const override { return M_; }
  bool has_exact_moments() const override { return true; }
  Vec exact_mean() const override { return mu_; }
  Vec exact_second_moment() const override;
  bool can_sample() const override { return true; }
  Vec sample(Rng& rng) const override;
  const Mat& precision() const { return prec_; }

 private:
  Vec mu_;
  Mat sigma_, prec_, chol_, M_;
  double log_det_ = 0.0;
};

// Equal-weight isotropic Gaussian mixture; log_density is the exact
// normalized log-density (constant included).
class MixtureModel : public TargetModel {
 public:
  explicit MixtureModel(MixtureSpec spec);
  Eigen::Index dim() const override { return d_; }
  double log_density(const Vec& x) const override;
  Vec grad_log_density(const Vec& x) const override;
  const Mat& hessian_bound() const override { return M_; }
  bool has_exact_moments() const override { return true; }
  Vec exact_mean() const override;
  Vec exact_second_moment() const override;
  bool can_sample() const override { return true; }
  Vec sample(Rng& rng) const override;

 private:
  std::vector<Vec> means_;
  double sigma2_;
  Eigen::Index d_;
  Mat M_;
  double log_norm_;  // -log K - (d/2) log(2 pi sigma2)
};

// Continuous relaxation of a binary Boltzmann machine:
// log q(x) = -1/2 x^T x + sum_k log cosh((Qx)_k + b_k), unnormalized.
// The lifted moments of the underlying spin distribution are computed by
// enumeration when d_b is small.
class BoltzmannModel : public TargetModel {
 public:
  explicit BoltzmannModel(BoltzmannSpec spec);
  Eigen::Index dim() const override { return Q_.cols(); }
  double log_density(const Vec& x) const override;
  Vec grad_log_density(const Vec& x) const override;
  const Mat& hessian_bound() const override { return M_; }
  bool has_exact_moments() const override { return have_moments_; }
  Vec exact_mean() const override;
  Vec exact_second_moment() const override;
  const BoltzmannSpec& spec() const { return spec_; }

 private:
  BoltzmannSpec spec_;
  Mat Q_, M_;
  Vec b_;
  bool have_moments_ = false;
  Vec ex_;
  Mat exx_;
};

// Diagonal shift D = (|lambda_min(W)| + jitter) I and symmetric square
// root Q of W + D.
BoltzmannSpec build_Q(const Mat& W, const Vec& b, double jitter);

struct BoltzmannMoments {
  Vec es;   // E[S]
  Mat ess;  // E[S S^T]
  Vec ex;   // E[X] = Q^T E[S]
  Mat exx;  // E[X X^T] = Q^T E[S S^T] Q + I
};

// Exact spin moments by enumeration over {-1,1}^d_b, lifted to the
// relaxation. Guarded to small d_b.
BoltzmannMoments boltzmann_exact_moments(const Mat& W, const Vec& b,
                                         const Mat& Q);

}  // namespace zzct
