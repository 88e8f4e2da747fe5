#pragma once

// AECM estimation engine for t-mixtures on partially observed data.
//
// One iteration cycles: E-step; CM-step 1 updating {pi, mu, nu}; E-step;
// CM-step 2 updating {Sigma}. The observed variant updates mu and Sigma on
// observed cells only; the full variant carries conditional expectations of
// the missing coordinates instead. Initialization is Rnd-EM: many seeded
// short runs, the best few promoted to long runs.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tmix/dataset.hpp"
#include "tmix/math.hpp"
#include "tmix/tdist.hpp"

namespace tmix {

enum class Method { observed, full, complete_case };
enum class NuMode { root_solve, approx };
enum class NuEquation { standard, paper_literal };

struct FitConfig {
    double epsilon = 1e-3;
    int max_iters = 1000;
    long n_starts = 0;   // 0 -> 10 * n * p * K
    int short_iters = 5;
    int n_finalists = 4;
    NuMode nu_mode = NuMode::root_solve;    // long runs; short runs always use approx
    NuEquation nu_equation = NuEquation::standard;
    std::uint64_t seed = 0;
    double nu_min = kDefaultNuMin;
    double nu_max = kDefaultNuMax;
    int threads = 1;
};

struct Responsibilities {
    Matrix z;  // n x K posterior memberships, rows sum to 1
    Matrix w;  // n x K characteristic weights, positive
};

struct FitDiagnostics {
    int pd_repairs = 0;          // eigenvalue-clip events in the Sigma update
    int abandoned_starts = 0;    // short or long runs dropped as degenerate
    int finalist_index = -1;     // which finalist produced the returned fit
};

struct FitResult {
    MixtureParams params;
    std::vector<double> loglik_trace;
    int iterations = 0;
    bool converged = false;
    Responsibilities responsibilities;
    std::vector<int> assignments;
    Method method = Method::observed;
    double loglik = -std::numeric_limits<double>::infinity();
    Eigen::Index n_eff = 0;          // cases entering the likelihood
    std::vector<int> fit_rows;       // complete_case: rows the model was fit on
    FitDiagnostics diag;
};

class FitError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Operation counters (observed-cell touch accounting in the CM updates).

inline thread_local std::uint64_t g_mu_cell_touches = 0;
inline thread_local std::uint64_t g_sigma_pair_touches = 0;

inline void reset_touch_counters() {
    g_mu_cell_touches = 0;
    g_sigma_pair_touches = 0;
}

// ---------------------------------------------------------------------------
// E-step

struct EStepResult {
    Responsibilities resp;
    double loglik = 0.0;
};

inline std::vector<std::vector<PatternFactorization>>
build_factor_cache(const std::vector<MissingnessPattern>& patterns, const MixtureParams& mix) {
    std::vector<std::vector<PatternFactorization>> cache(patterns.size());
    for (size_t g = 0; g < patterns.size(); ++g) {
        cache[g].reserve(static_cast<size_t>(mix.K()));
        for (const auto& c : mix.clusters)
            cache[g].push_back(factorize(c.sigma, patterns[g].observed_indices));
    }
    return cache;
}

inline EStepResult e_step(const Dataset& d, const std::vector<MissingnessPattern>& patterns,
                          const MixtureParams& mix) {
    const int K = mix.K();
    EStepResult out;
    out.resp.z.resize(d.n(), K);
    out.resp.w.resize(d.n(), K);
    auto cache = build_factor_cache(patterns, mix);
    std::vector<double> logf(static_cast<size_t>(K));
    for (size_t g = 0; g < patterns.size(); ++g) {
        const auto& pat = patterns[g];
        const double q = static_cast<double>(pat.observed_indices.size());
        for (int i : pat.member_rows) {
            const Vector y = gather(d.values.row(i), pat.observed_indices);
            for (int k = 0; k < K; ++k) {
                const auto& c = mix.clusters[static_cast<size_t>(k)];
                const auto& f = cache[g][static_cast<size_t>(k)];
                const double delta = mahalanobis(y, gather(c.mu.transpose(), f.obs), f);
                logf[static_cast<size_t>(k)] =
                    std::log(c.pi) + log_t_from_delta(q, c.nu, f.logdet, delta);
                out.resp.w(i, k) = (c.nu + q) / (c.nu + delta);
            }
            const double lse = log_sum_exp(logf);
            if (!std::isfinite(lse)) throw NumericalError("e_step: non-finite log density");
            for (int k = 0; k < K; ++k)
                out.resp.z(i, k) = std::exp(logf[static_cast<size_t>(k)] - lse);
            out.loglik += lse;
        }
    }
    return out;
}

inline double observed_loglik(const Dataset& d, const std::vector<MissingnessPattern>& patterns,
                              const MixtureParams& mix) {
    double ll = 0.0;
    auto cache = build_factor_cache(patterns, mix);
    for (size_t g = 0; g < patterns.size(); ++g) {
        const auto& pat = patterns[g];
        for (int i : pat.member_rows) {
            const Vector y = gather(d.values.row(i), pat.observed_indices);
            ll += log_mixture_density(y, mix, cache[g]);
        }
    }
    return ll;
}

inline std::vector<int> hard_assign(const Responsibilities& resp) {
    std::vector<int> labels(static_cast<size_t>(resp.z.rows()));
    for (Eigen::Index i = 0; i < resp.z.rows(); ++i) {
        int best = 0;
        for (Eigen::Index k = 1; k < resp.z.cols(); ++k)
            if (resp.z(i, k) > resp.z(i, best)) best = static_cast<int>(k);
        labels[static_cast<size_t>(i)] = best;
    }
    return labels;
}

// ---------------------------------------------------------------------------
// CM updates, observed variant

inline Vector cm_update_pi(const Responsibilities& resp) {
    return resp.z.colwise().sum() / static_cast<double>(resp.z.rows());
}

inline bool has_empty_cluster(const Responsibilities& resp, double tol_per_cluster = 1e-8) {
    const double thresh = static_cast<double>(resp.z.cols()) * tol_per_cluster;
    return (resp.z.colwise().sum().array() < thresh).any();
}

// Coordinatewise weighted mean over observed cells: the diagonal system of the
// mu update.
inline Vector cm_update_mu(const Dataset& d, const std::vector<MissingnessPattern>& patterns,
                           const Responsibilities& resp, int k) {
    Vector num = Vector::Zero(d.p());
    Vector den = Vector::Zero(d.p());
    for (const auto& pat : patterns) {
        for (int i : pat.member_rows) {
            const double zw = resp.z(i, k) * resp.w(i, k);
            for (int j : pat.observed_indices) {
                num(j) += zw * d.values(i, j);
                den(j) += zw;
                ++g_mu_cell_touches;
            }
        }
    }
    for (Eigen::Index j = 0; j < d.p(); ++j)
        if (!(den(j) > 0.0))
            throw FitError("cm_update_mu: cluster observes no data in feature " + std::to_string(j));
    return num.cwiseQuotient(den);
}

// Hadamard-ratio dispersion update over co-observed cell pairs; symmetrized.
// Positive definiteness is not guaranteed and is repaired by the caller.
inline Matrix cm_update_sigma(const Dataset& d, const std::vector<MissingnessPattern>& patterns,
                              const Responsibilities& resp, const Vector& mu, int k) {
    const auto p = d.p();
    Matrix num = Matrix::Zero(p, p);
    Matrix den = Matrix::Zero(p, p);
    for (const auto& pat : patterns) {
        const auto& obs = pat.observed_indices;
        for (int i : pat.member_rows) {
            const double z = resp.z(i, k);
            const double zw = z * resp.w(i, k);
            for (size_t a = 0; a < obs.size(); ++a) {
                const double da = d.values(i, obs[a]) - mu(obs[a]);
                for (size_t b = a; b < obs.size(); ++b) {
                    const double db = d.values(i, obs[b]) - mu(obs[b]);
                    num(obs[a], obs[b]) += zw * da * db;
                    den(obs[a], obs[b]) += z;
                    ++g_sigma_pair_touches;
                }
            }
        }
    }
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = a; b < p; ++b)
            if (!(den(a, b) > 0.0))
                throw FitError("cm_update_sigma: no co-observations for feature pair (" +
                               std::to_string(a) + "," + std::to_string(b) + ")");
    Matrix sigma(p, p);
    for (Eigen::Index a = 0; a < p; ++a)
        for (Eigen::Index b = a; b < p; ++b) {
            const double v = num(a, b) / den(a, b);
            sigma(a, b) = v;
            sigma(b, a) = v;
        }
    return sigma;
}

// Clips eigenvalues below 1e-8 * lambda_max up to that floor. Returns true if
// a repair fired. Throws when even the floor is not positive.
inline bool repair_positive_definite(Matrix& sigma) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma);
    if (es.info() != Eigen::Success)
        throw NumericalError("repair_positive_definite: eigendecomposition failed");
    const Vector& ev = es.eigenvalues();
    const double lmax = ev.maxCoeff();
    if (!(lmax > 0.0)) throw NumericalError("repair_positive_definite: no positive eigenvalue");
    const double floor = 1e-8 * lmax;
    if (ev.minCoeff() >= floor) return false;
    Vector clipped = ev.cwiseMax(floor);
    sigma = es.eigenvectors() * clipped.asDiagonal() * es.eigenvectors().transpose();
    sigma = 0.5 * (sigma + sigma.transpose());
    return true;
}

// ---------------------------------------------------------------------------
// nu update (shared by both variants)

// Per-cluster average of the E-step statistic
//   log w_hat + psi((nu_old + q_i)/2) - log((nu_old + q_i)/2) - w_hat
// weighted by z_hat. q_i is the observed feature count of case i.
inline Vector nu_statistic(const Responsibilities& resp, const std::vector<int>& p_obs,
                           const Vector& nu_old) {
    const Eigen::Index n = resp.z.rows();
    const Eigen::Index K = resp.z.cols();
    Vector s = Vector::Zero(K), zsum = Vector::Zero(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const double half_nu_old = 0.5 * nu_old(k);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double z = resp.z(i, k);
            const double w = resp.w(i, k);
            const double h = half_nu_old + 0.5 * static_cast<double>(p_obs[static_cast<size_t>(i)]);
            s(k) += z * (std::log(w) - w + digamma(h) - std::log(h));
            zsum(k) += z;
        }
        if (!(zsum(k) > 0.0)) throw FitError("nu update: empty cluster");
        s(k) /= zsum(k);
    }
    return s;
}

inline double nu_equation_constant(NuEquation eq) {
    return eq == NuEquation::paper_literal ? 2.0 : 1.0;
}

inline Vector cm_update_nu(const Responsibilities& resp, const std::vector<int>& p_obs,
                           const Vector& nu_old, NuMode mode,
                           NuEquation eq = NuEquation::standard,
                           double nu_min = kDefaultNuMin, double nu_max = kDefaultNuMax) {
    const Vector s = nu_statistic(resp, p_obs, nu_old);
    Vector out(nu_old.size());
    const double c = nu_equation_constant(eq);
    for (Eigen::Index k = 0; k < nu_old.size(); ++k) {
        if (mode == NuMode::root_solve) {
            auto g = [&](double nu) {
                return c + std::log(0.5 * nu) - digamma(0.5 * nu) + s(k);
            };
            out(k) = brent_root(g, nu_min, nu_max, 1e-8).x;
        } else {
            // closed-form approximation; v targets log(nu/2) - psi(nu/2) = v
            const double v = -c - s(k);
            double nu;
            if (v <= 0.0 || std::exp(v) >= 1e12) {
                nu = nu_max;  // no interior solution
            } else {
                const double ev = std::exp(v);
                const double half_old = 0.5 * nu_old(k);
                nu = (-ev + 2.0 * ev * (std::exp(digamma(half_old)) - half_old + 0.5)) / (1.0 - ev);
            }
            out(k) = std::clamp(nu, nu_min, nu_max);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Full-EM variant: conditional expectations of the missing coordinates

namespace detail {
inline std::vector<int> missing_indices(const MissingnessPattern& pat, Eigen::Index p) {
    std::vector<int> m;
    size_t a = 0;
    for (int j = 0; j < static_cast<int>(p); ++j) {
        if (a < pat.observed_indices.size() && pat.observed_indices[a] == j) ++a;
        else m.push_back(j);
    }
    return m;
}
}  // namespace detail

// y_hat = mu + Sigma O'(O Sigma O')^{-1} O (y - mu); observed coordinates pass
// through unchanged.
inline Vector full_em_conditional_mean(const Eigen::RowVectorXd& y_row,
                                       const MissingnessPattern& pat,
                                       const ClusterParams& c,
                                       const PatternFactorization& fact) {
    const auto p = c.mu.size();
    Vector yhat = c.mu;
    const auto& obs = pat.observed_indices;
    Vector t(static_cast<Eigen::Index>(obs.size()));
    for (size_t a = 0; a < obs.size(); ++a) {
        yhat(obs[a]) = y_row(obs[a]);
        t(static_cast<Eigen::Index>(a)) = y_row(obs[a]) - c.mu(obs[a]);
    }
    const auto miss = detail::missing_indices(pat, p);
    if (miss.empty()) return yhat;
    // solve Sigma_oo x = t, then y_hat_m = mu_m + Sigma_mo x
    Vector x = t;
    fact.chol.triangularView<Eigen::Lower>().solveInPlace(x);
    fact.chol.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    for (int j : miss) {
        double acc = 0.0;
        for (size_t a = 0; a < obs.size(); ++a)
            acc += c.sigma(j, obs[a]) * x(static_cast<Eigen::Index>(a));
        yhat(j) += acc;
    }
    return yhat;
}

// Omega_hat = z [ w (y_hat - mu)(y_hat - mu)' + Sigma - Sigma_:o Sigma_oo^{-1} Sigma_o: ].
inline Matrix full_em_omega(const Eigen::RowVectorXd& y_row, const MissingnessPattern& pat,
                            const ClusterParams& c, const PatternFactorization& fact,
                            double z, double w) {
    const auto p = c.mu.size();
    const Vector yhat = full_em_conditional_mean(y_row, pat, c, fact);
    const Vector dvec = yhat - c.mu;
    Matrix omega = w * (dvec * dvec.transpose());
    const auto miss = detail::missing_indices(pat, p);
    if (!miss.empty()) {
        const auto& obs = pat.observed_indices;
        const auto q = static_cast<Eigen::Index>(obs.size());
        Matrix som(q, static_cast<Eigen::Index>(miss.size()));
        for (Eigen::Index a = 0; a < q; ++a)
            for (size_t b = 0; b < miss.size(); ++b)
                som(a, static_cast<Eigen::Index>(b)) = c.sigma(obs[static_cast<size_t>(a)], miss[b]);
        Matrix x = som;
        fact.chol.triangularView<Eigen::Lower>().solveInPlace(x);
        fact.chol.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
        const Matrix corr = -som.transpose() * x;  // Sigma_mm added below
        for (size_t a = 0; a < miss.size(); ++a)
            for (size_t b = 0; b < miss.size(); ++b)
                omega(miss[a], miss[b]) +=
                    c.sigma(miss[a], miss[b]) + corr(static_cast<Eigen::Index>(a),
                                                     static_cast<Eigen::Index>(b));
    }
    return z * omega;
}

// mu update of the full-EM comparison: z w weighted mean of conditional means.
inline Vector full_em_update_mu(const Dataset& d, const std::vector<MissingnessPattern>& patterns,
                                const Responsibilities& resp, const MixtureParams& mix, int k,
                                const std::vector<std::vector<PatternFactorization>>& cache) {
    const auto& c = mix.clusters[static_cast<size_t>(k)];
    Vector num = Vector::Zero(d.p());
    double den = 0.0;
    for (size_t g = 0; g < patterns.size(); ++g) {
        for (int i : patterns[g].member_rows) {
            const double zw = resp.z(i, k) * resp.w(i, k);
            num += zw * full_em_conditional_mean(d.values.row(i), patterns[g], c,
                                                 cache[g][static_cast<size_t>(k)]);
            den += zw;
        }
    }
    if (!(den > 0.0)) throw FitError("full_em_update_mu: empty cluster");
    return num / den;
}

// Sigma update of the full-EM comparison; mu is the freshly updated mean.
inline Matrix full_em_update_sigma(const Dataset& d, const std::vector<MissingnessPattern>& patterns,
                                   const Responsibilities& resp, const MixtureParams& mix, int k,
                                   const Vector& mu,
                                   const std::vector<std::vector<PatternFactorization>>& cache) {
    ClusterParams c = mix.clusters[static_cast<size_t>(k)];
    c.mu = mu;  // Omega is centered at the updated mean, Sigma is the current one
    Matrix num = Matrix::Zero(d.p(), d.p());
    double den = 0.0;
    for (size_t g = 0; g < patterns.size(); ++g) {
        for (int i : patterns[g].member_rows) {
            num += full_em_omega(d.values.row(i), patterns[g], c,
                                 cache[g][static_cast<size_t>(k)], resp.z(i, k), resp.w(i, k));
            den += resp.z(i, k);
        }
    }
    if (!(den > 0.0)) throw FitError("full_em_update_sigma: empty cluster");
    Matrix sigma = num / den;
    return 0.5 * (sigma + sigma.transpose());
}

// Convenience pairing of the two updates (mu first, then Sigma at the new mu).
inline std::pair<std::vector<Vector>, std::vector<Matrix>>
full_em_cm_updates(const Dataset& d, const std::vector<MissingnessPattern>& patterns,
                   const Responsibilities& resp, const MixtureParams& mix) {
    auto cache = build_factor_cache(patterns, mix);
    std::vector<Vector> mus;
    std::vector<Matrix> sigmas;
    for (int k = 0; k < mix.K(); ++k) {
        mus.push_back(full_em_update_mu(d, patterns, resp, mix, k, cache));
        sigmas.push_back(full_em_update_sigma(d, patterns, resp, mix, k, mus.back(), cache));
    }
    return {std::move(mus), std::move(sigmas)};
}

// ---------------------------------------------------------------------------
// AECM driver

namespace detail {

struct AecmRun {
    MixtureParams params;
    std::vector<double> trace;
    Responsibilities resp;       // at the final parameters
    int iterations = 0;
    bool converged = false;
    int pd_repairs = 0;
    bool degenerate = false;
    std::string reason;
};

inline std::vector<int> observed_counts(const std::vector<MissingnessPattern>& patterns,
                                        Eigen::Index n) {
    std::vector<int> q(static_cast<size_t>(n), 0);
    for (const auto& pat : patterns)
        for (int i : pat.member_rows)
            q[static_cast<size_t>(i)] = static_cast<int>(pat.observed_indices.size());
    return q;
}

// Runs AECM cycles from the given parameters; variant full_updates selects the
// conditional-expectation mu/Sigma updates.
inline AecmRun run_aecm(const Dataset& d, const std::vector<MissingnessPattern>& patterns,
                        MixtureParams params, int max_iters, double epsilon,
                        NuMode nu_mode, const FitConfig& cfg, bool full_updates) {
    AecmRun run;
    const int K = params.K();
    const auto p_obs = observed_counts(patterns, d.n());
    try {
        EStepResult e = e_step(d, patterns, params);
        run.trace.push_back(e.loglik);
        for (int iter = 0; iter < max_iters; ++iter) {
            const MixtureParams cycle_start = params;
            if (has_empty_cluster(e.resp)) {
                run.degenerate = true;
                run.reason = "empty cluster";
                break;
            }
            // CM-step 1: pi, mu, nu
            const Vector pi = cm_update_pi(e.resp);
            Vector nu_old(K);
            for (int k = 0; k < K; ++k) nu_old(k) = params.clusters[static_cast<size_t>(k)].nu;
            std::vector<Vector> mus(static_cast<size_t>(K));
            if (full_updates) {
                auto cache = build_factor_cache(patterns, params);
                for (int k = 0; k < K; ++k)
                    mus[static_cast<size_t>(k)] =
                        full_em_update_mu(d, patterns, e.resp, params, k, cache);
            } else {
                for (int k = 0; k < K; ++k)
                    mus[static_cast<size_t>(k)] = cm_update_mu(d, patterns, e.resp, k);
            }
            const Vector nu = cm_update_nu(e.resp, p_obs, nu_old, nu_mode, cfg.nu_equation,
                                           cfg.nu_min, cfg.nu_max);
            for (int k = 0; k < K; ++k) {
                auto& c = params.clusters[static_cast<size_t>(k)];
                c.pi = pi(k);
                c.mu = mus[static_cast<size_t>(k)];
                c.nu = nu(k);
            }
            // E-step between the CM blocks
            EStepResult e2 = e_step(d, patterns, params);
            if (has_empty_cluster(e2.resp)) {
                run.degenerate = true;
                run.reason = "empty cluster";
                break;
            }
            // CM-step 2: Sigma
            {
                std::vector<Matrix> sigmas(static_cast<size_t>(K));
                if (full_updates) {
                    auto cache = build_factor_cache(patterns, params);
                    for (int k = 0; k < K; ++k)
                        sigmas[static_cast<size_t>(k)] = full_em_update_sigma(
                            d, patterns, e2.resp, params, k, params.clusters[static_cast<size_t>(k)].mu,
                            cache);
                } else {
                    for (int k = 0; k < K; ++k)
                        sigmas[static_cast<size_t>(k)] =
                            cm_update_sigma(d, patterns, e2.resp,
                                            params.clusters[static_cast<size_t>(k)].mu, k);
                }
                for (int k = 0; k < K; ++k) {
                    if (repair_positive_definite(sigmas[static_cast<size_t>(k)]))
                        ++run.pd_repairs;
                    params.clusters[static_cast<size_t>(k)].sigma =
                        std::move(sigmas[static_cast<size_t>(k)]);
                }
            }
            run.iterations = iter + 1;
            // end-of-cycle E-step doubles as the next cycle's first E-step
            EStepResult e_next = e_step(d, patterns, params);
            const double progress = e_next.loglik - run.trace.back();
            if (progress < 0.0) {
                // the coordinatewise updates are not exact conditional
                // maximizers under missingness; reject a worsening step and
                // keep the previous iterate
                params = cycle_start;
                run.iterations = iter;
                run.converged = true;
                break;
            }
            e = std::move(e_next);
            run.trace.push_back(e.loglik);
            if (progress < epsilon) {
                run.converged = true;
                break;
            }
        }
        run.resp = std::move(e.resp);
    } catch (const NumericalError& err) {
        run.degenerate = true;
        run.reason = err.what();
    } catch (const FitError& err) {
        run.degenerate = true;
        run.reason = err.what();
    }
    run.params = std::move(params);
    return run;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 over (seed, stream)
    std::uint64_t x = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    x ^= x >> 30; x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27; x *= 0x94D049BB133111EBull;
    x ^= x >> 31;
    return x;
}

struct ColumnStats {
    Vector mean;
    Vector var;
};

inline ColumnStats observed_column_stats(const Dataset& d) {
    ColumnStats s;
    s.mean = Vector::Zero(d.p());
    s.var = Vector::Zero(d.p());
    for (Eigen::Index j = 0; j < d.p(); ++j) {
        double m = 0.0, m2 = 0.0;
        long cnt = 0;
        for (Eigen::Index i = 0; i < d.n(); ++i)
            if (d.mask(i, j)) {
                m += d.values(i, j);
                ++cnt;
            }
        m /= static_cast<double>(cnt);
        for (Eigen::Index i = 0; i < d.n(); ++i)
            if (d.mask(i, j)) m2 += (d.values(i, j) - m) * (d.values(i, j) - m);
        s.mean(j) = m;
        s.var(j) = cnt > 1 ? m2 / static_cast<double>(cnt - 1) : 1.0;
        if (!(s.var(j) > 0.0)) s.var(j) = 1.0;
    }
    return s;
}

// Random start: K distinct rows as means (missing coordinates filled with the
// observed feature mean), diagonal observed-variance dispersions, nu = 50.
inline MixtureParams random_start(const Dataset& d, int K, const ColumnStats& stats,
                                  std::mt19937_64& rng) {
    std::vector<Eigen::Index> rows(static_cast<size_t>(d.n()));
    std::iota(rows.begin(), rows.end(), 0);
    for (int k = 0; k < K; ++k) {
        std::uniform_int_distribution<size_t> pick(static_cast<size_t>(k), rows.size() - 1);
        std::swap(rows[static_cast<size_t>(k)], rows[pick(rng)]);
    }
    MixtureParams mix;
    const Matrix sigma0 = stats.var.asDiagonal();
    for (int k = 0; k < K; ++k) {
        ClusterParams c;
        c.pi = 1.0 / static_cast<double>(K);
        c.nu = 50.0;
        c.sigma = sigma0;
        c.mu.resize(d.p());
        const Eigen::Index r = rows[static_cast<size_t>(k)];
        for (Eigen::Index j = 0; j < d.p(); ++j)
            c.mu(j) = d.mask(r, j) ? d.values(r, j) : stats.mean(j);
        mix.clusters.push_back(std::move(c));
    }
    return mix;
}

}  // namespace detail

// Rnd-EM: n_starts seeded short runs (approx nu mode), ranked by observed
// log-likelihood; the top n_finalists end states are returned in rank order,
// ties broken by start index.
inline std::vector<MixtureParams>
rnd_em_initialize(const Dataset& d, int K, Method method, const FitConfig& cfg,
                  int* abandoned = nullptr) {
    if (cfg.n_finalists < 1 || (cfg.n_starts > 0 && cfg.n_starts < cfg.n_finalists))
        throw std::invalid_argument("rnd_em_initialize: n_starts >= n_finalists >= 1 required");
    if (d.n() < K) throw FitError("rnd_em_initialize: fewer cases than clusters");
    const auto patterns = pattern_groups(d);
    const long n_starts = cfg.n_starts > 0
        ? cfg.n_starts
        : 10L * static_cast<long>(d.n()) * static_cast<long>(d.p()) * K;
    const auto stats = detail::observed_column_stats(d);
    const bool full_updates = (method == Method::full);

    struct Candidate {
        double loglik = -std::numeric_limits<double>::infinity();
        long start = -1;
        MixtureParams params;
        bool ok = false;
    };
    std::vector<Candidate> cands(static_cast<size_t>(n_starts));
    auto run_range = [&](long lo, long hi) {
        for (long s = lo; s < hi; ++s) {
            std::mt19937_64 rng(detail::mix_seed(cfg.seed, static_cast<std::uint64_t>(s)));
            MixtureParams start = detail::random_start(d, K, stats, rng);
            auto run = detail::run_aecm(d, patterns, std::move(start), cfg.short_iters,
                                        cfg.epsilon, NuMode::approx, cfg, full_updates);
            auto& c = cands[static_cast<size_t>(s)];
            if (!run.degenerate && !run.trace.empty()) {
                c.ok = true;
                c.loglik = run.trace.back();
                c.start = s;
                c.params = std::move(run.params);
            }
        }
    };
    const int nthreads = std::max(1, cfg.threads);
    if (nthreads == 1 || n_starts < 2 * nthreads) {
        run_range(0, n_starts);
    } else {
        std::vector<std::thread> pool;
        const long chunk = (n_starts + nthreads - 1) / nthreads;
        for (int t = 0; t < nthreads; ++t) {
            const long lo = t * chunk, hi = std::min<long>(n_starts, lo + chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    std::vector<const Candidate*> ok;
    int dropped = 0;
    for (const auto& c : cands) {
        if (c.ok) ok.push_back(&c);
        else ++dropped;
    }
    if (abandoned) *abandoned += dropped;
    if (ok.empty()) throw FitError("rnd_em_initialize: all starts degenerate");
    std::stable_sort(ok.begin(), ok.end(), [](const Candidate* a, const Candidate* b) {
        if (a->loglik != b->loglik) return a->loglik > b->loglik;
        return a->start < b->start;
    });
    std::vector<MixtureParams> finalists;
    const size_t nf = std::min<size_t>(static_cast<size_t>(cfg.n_finalists), ok.size());
    for (size_t i = 0; i < nf; ++i) finalists.push_back(ok[i]->params);
    return finalists;
}

namespace detail {

inline FitResult fit_with_initializer(const Dataset& d, int K, Method method,
                                      const FitConfig& cfg) {
    const auto patterns = pattern_groups(d);
    FitDiagnostics diag;
    auto finalists = rnd_em_initialize(d, K, method, cfg, &diag.abandoned_starts);
    const bool full_updates = (method == Method::full);
    std::optional<AecmRun> best;
    int best_idx = -1;
    std::string last_reason;
    for (size_t f = 0; f < finalists.size(); ++f) {
        auto run = run_aecm(d, patterns, finalists[f], cfg.max_iters, cfg.epsilon,
                            cfg.nu_mode, cfg, full_updates);
        if (run.degenerate) {
            ++diag.abandoned_starts;
            last_reason = run.reason;
            continue;
        }
        if (!best || run.trace.back() > best->trace.back()) {
            best = std::move(run);
            best_idx = static_cast<int>(f);
        }
    }
    if (!best)
        throw FitError("fit: all finalists degenerate (" + last_reason + ")");
    FitResult res;
    res.params = std::move(best->params);
    res.loglik_trace = std::move(best->trace);
    res.iterations = best->iterations;
    res.converged = best->converged;
    res.responsibilities = std::move(best->resp);
    res.assignments = hard_assign(res.responsibilities);
    res.method = method;
    res.loglik = res.loglik_trace.back();
    res.n_eff = d.n();
    diag.pd_repairs = best->pd_repairs;
    diag.finalist_index = best_idx;
    res.diag = diag;
    return res;
}

}  // namespace detail

// Fits a K-component t mixture. complete_case fits on the fully observed rows
// and then assigns every row by its marginal posterior on observed coordinates.
inline FitResult fit(const Dataset& d, int K, Method method, const FitConfig& cfg = {}) {
    if (K < 1) throw std::invalid_argument("fit: K >= 1 required");
    d.validate();
    if (method != Method::complete_case)
        return detail::fit_with_initializer(d, K, method, cfg);

    auto subset = complete_case_subset(d);
    if (subset.data.n() < K)
        throw FitError("fit: fewer complete cases than clusters");
    FitResult res = detail::fit_with_initializer(subset.data, K, Method::observed, cfg);
    res.method = Method::complete_case;
    res.n_eff = subset.data.n();
    res.fit_rows = std::move(subset.original_rows);
    // marginal-posterior assignment of every row on its observed coordinates
    const auto patterns = pattern_groups(d);
    EStepResult e = e_step(d, patterns, res.params);
    res.responsibilities = std::move(e.resp);
    res.assignments = hard_assign(res.responsibilities);
    return res;
}

}  // namespace tmix
