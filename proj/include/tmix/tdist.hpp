#pragma once

// Density kernels for mixtures of multivariate t distributions, evaluated on
// the observed margin of each case. Everything is computed in log space; the
// per-pattern Cholesky factorization is reused across cases sharing a mask.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "tmix/dataset.hpp"
#include "tmix/math.hpp"

namespace tmix {

inline constexpr double kDefaultNuMin = 0.5;
inline constexpr double kDefaultNuMax = 200.0;

struct ClusterParams {
    double pi = 1.0;
    Vector mu;
    Matrix sigma;
    double nu = 50.0;
};

struct MixtureParams {
    std::vector<ClusterParams> clusters;

    int K() const { return static_cast<int>(clusters.size()); }

    void validate(double nu_min = kDefaultNuMin, double nu_max = kDefaultNuMax) const {
        if (clusters.empty()) throw std::invalid_argument("MixtureParams: K >= 1 required");
        double s = 0.0;
        for (const auto& c : clusters) {
            if (!(c.pi > 0.0 && c.pi <= 1.0))
                throw std::invalid_argument("MixtureParams: pi out of (0,1]");
            if (!(c.nu > nu_min - 1e-12 && c.nu <= nu_max + 1e-12))
                throw std::invalid_argument("MixtureParams: nu out of bounds");
            if (c.sigma.rows() != c.sigma.cols() || c.sigma.rows() != c.mu.size())
                throw std::invalid_argument("MixtureParams: dimension mismatch");
            s += c.pi;
        }
        if (std::abs(s - 1.0) > 1e-12 * clusters.size() + 1e-12)
            throw std::invalid_argument("MixtureParams: mixing proportions must sum to 1");
    }
};

class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Cholesky factorization of Sigma[obs, obs] for one missingness pattern.
struct PatternFactorization {
    std::vector<int> obs;  // observed feature indices, strictly increasing
    Matrix chol;           // lower triangular L with L L' = Sigma[obs, obs]
    double logdet = 0.0;   // log |Sigma[obs, obs]|

    Eigen::Index dim() const { return chol.rows(); }
};

// Sigma is symmetrized before factorization; failure to factorize signals a
// numerically degenerate dispersion.
inline PatternFactorization factorize(const Matrix& sigma, const std::vector<int>& obs) {
    const auto q = static_cast<Eigen::Index>(obs.size());
    Matrix sub(q, q);
    for (Eigen::Index a = 0; a < q; ++a)
        for (Eigen::Index b = 0; b < q; ++b) {
            const double s = 0.5 * (sigma(obs[static_cast<size_t>(a)], obs[static_cast<size_t>(b)]) +
                                    sigma(obs[static_cast<size_t>(b)], obs[static_cast<size_t>(a)]));
            sub(a, b) = s;
        }
    Eigen::LLT<Matrix> llt(sub);
    if (llt.info() != Eigen::Success)
        throw NumericalError("factorize: dispersion submatrix not positive definite");
    PatternFactorization f;
    f.obs = obs;
    f.chol = llt.matrixL();
    f.logdet = 2.0 * f.chol.diagonal().array().log().sum();
    return f;
}

inline Vector gather(const Eigen::Ref<const Eigen::RowVectorXd>& row, const std::vector<int>& idx) {
    Vector out(static_cast<Eigen::Index>(idx.size()));
    for (size_t a = 0; a < idx.size(); ++a) out(static_cast<Eigen::Index>(a)) = row(idx[a]);
    return out;
}

// Squared Mahalanobis distance (y - mu)' Sigma_oo^{-1} (y - mu) via a single
// triangular solve against the cached factor.
inline double mahalanobis(const Vector& y_obs, const Vector& mu_obs,
                          const PatternFactorization& fact) {
    if (y_obs.size() != fact.dim() || mu_obs.size() != fact.dim())
        throw std::invalid_argument("mahalanobis: dimension mismatch");
    Vector d = y_obs - mu_obs;
    fact.chol.triangularView<Eigen::Lower>().solveInPlace(d);
    return d.squaredNorm();
}

inline double log_t_from_delta(double q, double nu, double logdet, double delta) {
    const double lt = std::lgamma(0.5 * (nu + q)) - std::lgamma(0.5 * nu)
                    - 0.5 * q * std::log(nu * std::numbers::pi)
                    - 0.5 * logdet
                    - 0.5 * (nu + q) * std::log1p(delta / nu);
    if (!std::isfinite(lt)) throw NumericalError("log_t_density: non-finite result");
    return lt;
}

// log t_q(y; mu_obs, Sigma_oo, nu) for the observed margin described by fact.
inline double log_t_density(const Vector& y_obs, const ClusterParams& params,
                            const PatternFactorization& fact) {
    const double delta = mahalanobis(y_obs, gather(params.mu.transpose(), fact.obs), fact);
    return log_t_from_delta(static_cast<double>(fact.dim()), params.nu, fact.logdet, delta);
}

// log N(y; mu, Sigma_oo / w).
inline double log_gaussian_density(const Vector& y_obs, const Vector& mu_obs,
                                   const PatternFactorization& fact, double w) {
    if (!(w > 0.0)) throw std::invalid_argument("log_gaussian_density: w <= 0");
    const double q = static_cast<double>(fact.dim());
    const double delta = mahalanobis(y_obs, mu_obs, fact);
    return -0.5 * q * std::log(2.0 * std::numbers::pi / w) - 0.5 * fact.logdet
         - 0.5 * w * delta;
}

// log Gamma(w; shape nu/2, rate nu/2).
inline double log_gamma_density(double w, double nu) {
    if (!(w > 0.0) || !(nu > 0.0))
        throw std::invalid_argument("log_gamma_density: nonpositive argument");
    const double h = 0.5 * nu;
    return h * std::log(h) - std::lgamma(h) + (h - 1.0) * std::log(w) - h * w;
}

// log sum_k pi_k t(y; ...) with one factorization per cluster, via log-sum-exp.
inline double log_mixture_density(const Vector& y_obs, const MixtureParams& mix,
                                  std::span<const PatternFactorization> facts) {
    if (static_cast<int>(facts.size()) != mix.K())
        throw std::invalid_argument("log_mixture_density: factorization count != K");
    std::vector<double> terms(facts.size());
    for (size_t k = 0; k < facts.size(); ++k)
        terms[k] = std::log(mix.clusters[k].pi) + log_t_density(y_obs, mix.clusters[k], facts[k]);
    return log_sum_exp(terms);
}

}  // namespace tmix
