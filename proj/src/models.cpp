#include "zzct/models.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace zzct {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

Vec TargetModel::exact_mean() const {
  throw std::logic_error("model has no exact moments");
}
Vec TargetModel::exact_second_moment() const {
  throw std::logic_error("model has no exact moments");
}
Vec TargetModel::sample(Rng&) const {
  throw std::logic_error("model cannot draw independent samples");
}

GaussianModel::GaussianModel(GaussianSpec spec)
    : mu_(std::move(spec.mu)), sigma_(std::move(spec.sigma)) {
  if (sigma_.rows() != sigma_.cols() || sigma_.rows() != mu_.size())
    throw std::invalid_argument("gaussian: dimension mismatch");
  if (!sigma_.isApprox(sigma_.transpose(), 1e-12))
    throw std::invalid_argument("gaussian: covariance not symmetric");
  Eigen::LLT<Mat> llt(sigma_);
  if (llt.info() != Eigen::Success)
    throw std::invalid_argument("gaussian: covariance not positive definite");
  chol_ = llt.matrixL();
  prec_ = llt.solve(Mat::Identity(mu_.size(), mu_.size()));
  log_det_ = 2.0 * chol_.diagonal().array().log().sum();
  M_ = prec_.cwiseAbs();
}

double GaussianModel::log_density(const Vec& x) const {
  // fully normalized; shared constants cancel in tempered log-ratios
  const Vec r = x - mu_;
  return -0.5 * r.dot(prec_ * r) - 0.5 * log_det_ -
         0.5 * static_cast<double>(mu_.size()) * kLog2Pi;
}

Vec GaussianModel::grad_log_density(const Vec& x) const {
  return -(prec_ * (x - mu_));
}

Vec GaussianModel::exact_second_moment() const {
  return sigma_.diagonal() + mu_.cwiseProduct(mu_);
}

Vec GaussianModel::sample(Rng& rng) const {
  Vec z(mu_.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.normal();
  return mu_ + chol_ * z;
}

MixtureModel::MixtureModel(MixtureSpec spec)
    : means_(std::move(spec.means)), sigma2_(spec.sigma2) {
  if (means_.empty()) throw std::invalid_argument("mixture: no components");
  if (!(sigma2_ > 0.0)) throw std::invalid_argument("mixture: sigma2 <= 0");
  d_ = means_[0].size();
  for (const Vec& m : means_)
    if (m.size() != d_) throw std::invalid_argument("mixture: ragged means");
  const double K = static_cast<double>(means_.size());
  log_norm_ = -std::log(K) - 0.5 * d_ * (kLog2Pi + std::log(sigma2_));

  // |Hessian| bound: H = -I/s2 + Cov_r(mu)/s2^2 under the softmax weights r;
  // Popoviciu gives Var(mu_i) <= range_i^2/4 and Cauchy-Schwarz extends it
  // to |Cov(mu_i, mu_j)| <= range_i range_j / 4.
  Vec range(d_);
  for (Eigen::Index i = 0; i < d_; ++i) {
    double lo = means_[0][i], hi = means_[0][i];
    for (const Vec& m : means_) {
      lo = std::min(lo, m[i]);
      hi = std::max(hi, m[i]);
    }
    range[i] = hi - lo;
  }
  M_.resize(d_, d_);
  for (Eigen::Index i = 0; i < d_; ++i)
    for (Eigen::Index j = 0; j < d_; ++j) {
      const double cov = 0.25 * range[i] * range[j] / (sigma2_ * sigma2_);
      M_(i, j) = (i == j) ? 1.0 / sigma2_ + cov : cov;
    }
}

double MixtureModel::log_density(const Vec& x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& m : means_)
    best = std::max(best, -(x - m).squaredNorm() / (2.0 * sigma2_));
  double acc = 0.0;
  for (const Vec& m : means_)
    acc += std::exp(-(x - m).squaredNorm() / (2.0 * sigma2_) - best);
  return best + std::log(acc) + log_norm_;
}

Vec MixtureModel::grad_log_density(const Vec& x) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const Vec& m : means_)
    best = std::max(best, -(x - m).squaredNorm() / (2.0 * sigma2_));
  double den = 0.0;
  Vec num = Vec::Zero(d_);
  for (const Vec& m : means_) {
    const double w = std::exp(-(x - m).squaredNorm() / (2.0 * sigma2_) - best);
    den += w;
    num += w * m;
  }
  return (num / den - x) / sigma2_;
}

Vec MixtureModel::exact_mean() const {
  Vec m = Vec::Zero(d_);
  for (const Vec& mu : means_) m += mu;
  return m / static_cast<double>(means_.size());
}

Vec MixtureModel::exact_second_moment() const {
  Vec m2 = Vec::Constant(d_, sigma2_);
  for (const Vec& mu : means_) m2 += mu.cwiseProduct(mu) / static_cast<double>(means_.size());
  return m2;
}

Vec MixtureModel::sample(Rng& rng) const {
  const Vec& mu = means_[static_cast<std::size_t>(rng.below(means_.size()))];
  Vec x(d_);
  const double sd = std::sqrt(sigma2_);
  for (Eigen::Index i = 0; i < d_; ++i) x[i] = mu[i] + sd * rng.normal();
  return x;
}

BoltzmannModel::BoltzmannModel(BoltzmannSpec spec)
    : spec_(std::move(spec)), Q_(spec_.Q), b_(spec_.b) {
  if (Q_.rows() != b_.size())
    throw std::invalid_argument("boltzmann: Q rows must match b");
  const Eigen::Index d = Q_.cols();
  // Hessian H = -I + sum_k sech^2(u_k) q_k q_k^T with sech^2 in [0,1]:
  // entrywise extremes are reached by switching each sech^2 to 0 or 1.
  Mat hplus = -Mat::Identity(d, d);
  Mat hminus = -Mat::Identity(d, d);
  for (Eigen::Index k = 0; k < Q_.rows(); ++k) {
    const Mat outer = Q_.row(k).transpose() * Q_.row(k);
    hplus += outer.cwiseMax(0.0);
    hminus += outer.cwiseMin(0.0);
  }
  M_ = hplus.cwiseAbs().cwiseMax(hminus.cwiseAbs());

  if (b_.size() <= 16) {
    const BoltzmannMoments mom = boltzmann_exact_moments(spec_.W, b_, Q_);
    ex_ = mom.ex;
    exx_ = mom.exx;
    have_moments_ = true;
  }
}

double BoltzmannModel::log_density(const Vec& x) const {
  const Vec u = Q_ * x + b_;
  double acc = -0.5 * x.squaredNorm();
  for (Eigen::Index k = 0; k < u.size(); ++k) {
    // log cosh(u) = |u| + log1p(exp(-2|u|)) - log 2, overflow-safe
    const double a = std::abs(u[k]);
    acc += a + std::log1p(std::exp(-2.0 * a)) - 0.6931471805599453;
  }
  return acc;
}

Vec BoltzmannModel::grad_log_density(const Vec& x) const {
  const Vec u = Q_ * x + b_;
  return -x + Q_.transpose() * u.array().tanh().matrix();
}

Vec BoltzmannModel::exact_mean() const {
  if (!have_moments_) throw std::logic_error("boltzmann: d_b too large");
  return ex_;
}

Vec BoltzmannModel::exact_second_moment() const {
  if (!have_moments_) throw std::logic_error("boltzmann: d_b too large");
  return exx_.diagonal();
}

BoltzmannSpec build_Q(const Mat& W, const Vec& b, double jitter) {
  if (W.rows() != W.cols() || W.rows() != b.size())
    throw std::invalid_argument("build_Q: dimension mismatch");
  if (!W.isApprox(W.transpose(), 1e-12))
    throw std::invalid_argument("build_Q: W not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(W);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("build_Q: eigendecomposition failed");
  const double lmin = es.eigenvalues().minCoeff();
  const double shift = std::abs(lmin) + jitter;
  BoltzmannSpec spec;
  spec.W = W;
  spec.b = b;
  spec.D = shift * Mat::Identity(W.rows(), W.cols());
  const Vec lam = (es.eigenvalues().array() + shift).cwiseMax(0.0).sqrt();
  spec.Q = es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
  return spec;
}

BoltzmannMoments boltzmann_exact_moments(const Mat& W, const Vec& b,
                                         const Mat& Q) {
  const Eigen::Index db = b.size();
  if (db > 20) throw std::invalid_argument("enumeration infeasible: d_b > 20");
  const std::uint64_t n = 1ull << db;
  // stabilized weights: subtract the maximum log-weight
  std::vector<double> logw(n);
  double best = -std::numeric_limits<double>::infinity();
  Vec s(db);
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    for (Eigen::Index i = 0; i < db; ++i)
      s[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    logw[mask] = 0.5 * s.dot(W * s) + b.dot(s);
    best = std::max(best, logw[mask]);
  }
  BoltzmannMoments mom;
  mom.es = Vec::Zero(db);
  mom.ess = Mat::Zero(db, db);
  double z = 0.0;
  for (std::uint64_t mask = 0; mask < n; ++mask) {
    for (Eigen::Index i = 0; i < db; ++i)
      s[i] = (mask >> i) & 1 ? 1.0 : -1.0;
    const double w = std::exp(logw[mask] - best);
    z += w;
    mom.es += w * s;
    mom.ess += w * (s * s.transpose());
  }
  mom.es /= z;
  mom.ess /= z;
  mom.ex = Q.transpose() * mom.es;
  mom.exx = Q.transpose() * mom.ess * Q +
            Mat::Identity(Q.cols(), Q.cols());
  return mom;
}

}  // namespace zzct
