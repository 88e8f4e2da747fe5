#pragma once

// Synthetic t-mixture data generation with controlled eccentricity and
// separation, plus the four benchmark missingness mechanisms.

#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmix/aecm.hpp"
#include "tmix/dataset.hpp"
#include "tmix/tdist.hpp"

namespace tmix {

enum class Mechanism { MCAR, MAR, NMAR1, NMAR2 };

inline std::string to_string(Mechanism m) {
    switch (m) {
        case Mechanism::MCAR: return "MCAR";
        case Mechanism::MAR: return "MAR";
        case Mechanism::NMAR1: return "NMAR1";
        case Mechanism::NMAR2: return "NMAR2";
    }
    throw std::logic_error("unknown mechanism");
}

inline Mechanism mechanism_from_string(const std::string& s) {
    if (s == "MCAR") return Mechanism::MCAR;
    if (s == "MAR") return Mechanism::MAR;
    if (s == "NMAR1") return Mechanism::NMAR1;
    if (s == "NMAR2") return Mechanism::NMAR2;
    throw std::invalid_argument("unknown mechanism: " + s);
}

struct SimulationSpec {
    int n = 100;
    int p = 3;
    int K = 3;
    double eccentricity = 0.5;   // e in [0,1): sqrt(1 - lambda_min/lambda_max)
    double separation = 6.0;     // min pairwise Mahalanobis distance between means
    double nu = 15.0;
    double lambda = 0.1;         // overall missingness proportion
    Mechanism mechanism = Mechanism::MCAR;
    std::uint64_t seed = 0;

    void validate() const {
        if (n < 1 || p < 1 || K < 1) throw std::invalid_argument("SimulationSpec: bad sizes");
        if (!(eccentricity >= 0.0 && eccentricity < 1.0))
            throw std::invalid_argument("SimulationSpec: eccentricity must be in [0,1)");
        if (!(lambda >= 0.0 && lambda < 1.0))
            throw std::invalid_argument("SimulationSpec: lambda must be in [0,1)");
        if (!(separation >= 0.0)) throw std::invalid_argument("SimulationSpec: separation < 0");
    }
};

struct SimulatedDataset {
    Dataset data;                 // post-deletion
    std::vector<int> truth_labels;
    MixtureParams truth_params;
    Matrix full_values;           // pre-deletion
};

namespace detail {

inline Matrix random_orthogonal(int p, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss;
    Matrix a(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) a(i, j) = gauss(rng);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < p; ++j)
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    return q;
}

}  // namespace detail

// Dispersions Q diag(lambda) Q' with log-spaced eigenvalues satisfying
// sqrt(1 - lambda_min/lambda_max) = e; means scaled so the minimum pairwise
// Mahalanobis distance under the average dispersion equals spec.separation.
inline MixtureParams gen_params(const SimulationSpec& spec) {
    spec.validate();
    std::mt19937_64 rng(spec.seed ^ 0xA5A5A5A5A5A5A5A5ull);
    const int p = spec.p, K = spec.K;
    const double ratio = 1.0 - spec.eccentricity * spec.eccentricity;  // lambda_min/lambda_max
    MixtureParams mix;
    for (int k = 0; k < K; ++k) {
        ClusterParams c;
        c.pi = 1.0 / static_cast<double>(K);
        c.nu = spec.nu;
        Vector ev(p);
        if (p == 1) {
            ev(0) = 1.0;
        } else {
            const double lmax = 1.0, lmin = ratio;
            for (int j = 0; j < p; ++j)
                ev(j) = std::exp(std::log(lmin) +
                                 (std::log(lmax) - std::log(lmin)) * j / static_cast<double>(p - 1));
        }
        const Matrix q = detail::random_orthogonal(p, rng);
        c.sigma = q * ev.asDiagonal() * q.transpose();
        c.sigma = 0.5 * (c.sigma + c.sigma.transpose());
        c.mu = Vector::Zero(p);
        mix.clusters.push_back(std::move(c));
    }
    if (K > 1 && spec.separation > 0.0) {
        Matrix sigma_bar = Matrix::Zero(p, p);
        for (const auto& c : mix.clusters) sigma_bar += c.sigma;
        sigma_bar /= static_cast<double>(K);
        const Eigen::LLT<Matrix> llt(sigma_bar);
        std::normal_distribution<double> gauss;
        for (int attempt = 0; attempt < 100; ++attempt) {
            std::vector<Vector> dirs;
            for (int k = 0; k < K; ++k) {
                Vector u(p);
                for (int j = 0; j < p; ++j) u(j) = gauss(rng);
                dirs.push_back(u.normalized());
            }
            double dmin = std::numeric_limits<double>::infinity();
            for (int a = 0; a < K; ++a)
                for (int b = a + 1; b < K; ++b) {
                    Vector diff = dirs[static_cast<size_t>(a)] - dirs[static_cast<size_t>(b)];
                    llt.matrixL().solveInPlace(diff);
                    dmin = std::min(dmin, diff.norm());
                }
            if (dmin > 1e-3) {
                const double scale = spec.separation / dmin;
                for (int k = 0; k < K; ++k)
                    mix.clusters[static_cast<size_t>(k)].mu = scale * dirs[static_cast<size_t>(k)];
                break;
            }
        }
    }
    return mix;
}

// Hierarchical draw: z ~ Multinomial(pi), w ~ Gamma(nu/2, rate nu/2),
// y ~ N(mu, Sigma/w). Returns the pre-deletion dataset (fully observed).
inline SimulatedDataset sample(const SimulationSpec& spec, const MixtureParams& params) {
    spec.validate();
    params.validate();
    std::mt19937_64 rng(spec.seed ^ 0x5C5C5C5C5C5C5C5Cull);
    std::vector<double> pis;
    for (const auto& c : params.clusters) pis.push_back(c.pi);
    std::discrete_distribution<int> pick(pis.begin(), pis.end());
    std::normal_distribution<double> gauss;
    SimulatedDataset out;
    out.truth_params = params;
    out.full_values.resize(spec.n, spec.p);
    out.truth_labels.resize(static_cast<size_t>(spec.n));
    std::vector<Matrix> chols;
    for (const auto& c : params.clusters)
        chols.push_back(Eigen::LLT<Matrix>(c.sigma).matrixL());
    for (int i = 0; i < spec.n; ++i) {
        const int k = pick(rng);
        out.truth_labels[static_cast<size_t>(i)] = k;
        const auto& c = params.clusters[static_cast<size_t>(k)];
        std::gamma_distribution<double> gamma(0.5 * c.nu, 2.0 / c.nu);
        const double w = gamma(rng);
        Vector x(spec.p);
        for (int j = 0; j < spec.p; ++j) x(j) = gauss(rng);
        out.full_values.row(i) =
            (c.mu + chols[static_cast<size_t>(k)] * x / std::sqrt(w)).transpose();
    }
    out.data.values = out.full_values;
    out.data.mask.setConstant(spec.n, spec.p, true);
    return out;
}

namespace detail {

struct Cell {
    int row;
    int col;
};

// Masks exactly `target` cells drawn uniformly from `allowed`, keeping at
// least one observed entry in every row and column. Cells whose deletion
// would empty a row or column are skipped and replaced by later candidates.
inline Dataset mask_cells(const Matrix& full, std::vector<Cell> allowed, long target,
                          std::mt19937_64& rng) {
    const auto n = full.rows();
    const auto p = full.cols();
    MaskMatrix mask = MaskMatrix::Constant(n, p, true);
    std::vector<long> row_obs(static_cast<size_t>(n), p), col_obs(static_cast<size_t>(p), n);
    std::shuffle(allowed.begin(), allowed.end(), rng);
    long masked = 0;
    for (const auto& c : allowed) {
        if (masked >= target) break;
        if (row_obs[static_cast<size_t>(c.row)] <= 1 || col_obs[static_cast<size_t>(c.col)] <= 1)
            continue;
        mask(c.row, c.col) = false;
        --row_obs[static_cast<size_t>(c.row)];
        --col_obs[static_cast<size_t>(c.col)];
        ++masked;
    }
    if (masked < target)
        throw std::runtime_error("mask_cells: infeasible missingness target");
    Dataset d;
    d.mask = std::move(mask);
    d.values = full;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            if (!d.mask(i, j)) d.values(i, j) = 0.0;  // sentinel, never read
    d.validate();
    return d;
}

}  // namespace detail

inline long mcar_target(double lambda, Eigen::Index n, Eigen::Index p) {
    return std::lround(lambda * static_cast<double>(n) * static_cast<double>(p));
}

// Uniform deletion of round(lambda * n * p) cells across the whole table.
inline Dataset apply_mcar(const Matrix& full, double lambda, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x11C34C11C34C11C3ull);
    std::vector<detail::Cell> cells;
    for (int i = 0; i < full.rows(); ++i)
        for (int j = 0; j < full.cols(); ++j) cells.push_back({i, j});
    return detail::mask_cells(full, std::move(cells), mcar_target(lambda, full.rows(), full.cols()), rng);
}

// MCAR restricted to the first ceil(2p/3) features at the elevated rate that
// keeps the overall proportion at lambda; remaining features stay complete.
inline Dataset apply_mar(const Matrix& full, double lambda, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x22A7522A7522A752ull);
    const int p = static_cast<int>(full.cols());
    const int f = (2 * p + 2) / 3;  // ceil(2p/3)
    if (f >= p && p > 1)
        throw std::invalid_argument("apply_mar: no fully observed feature remains");
    std::vector<detail::Cell> cells;
    for (int i = 0; i < full.rows(); ++i)
        for (int j = 0; j < f; ++j) cells.push_back({i, j});
    return detail::mask_cells(full, std::move(cells), mcar_target(lambda, full.rows(), full.cols()), rng);
}

// First-labeled cluster fully observed; MCAR within the remaining clusters.
inline Dataset apply_nmar1(const Matrix& full, const std::vector<int>& labels, double lambda,
                           std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x33B9633B9633B963ull);
    if (static_cast<Eigen::Index>(labels.size()) != full.rows())
        throw std::invalid_argument("apply_nmar1: label length mismatch");
    const int protected_label = 0;
    bool any_unprotected = false;
    for (int l : labels)
        if (l != protected_label) { any_unprotected = true; break; }
    if (!any_unprotected) throw std::invalid_argument("apply_nmar1: no unprotected cluster");
    std::vector<detail::Cell> cells;
    for (int i = 0; i < full.rows(); ++i) {
        if (labels[static_cast<size_t>(i)] == protected_label) continue;
        for (int j = 0; j < full.cols(); ++j) cells.push_back({i, j});
    }
    return detail::mask_cells(full, std::move(cells), mcar_target(lambda, full.rows(), full.cols()), rng);
}

// First-labeled cluster fully observed; within the rest, the bottom quantile
// of each feature is deleted, quotas split evenly across features so the
// total matches round(lambda * n * p) up to row-preservation skips.
inline Dataset apply_nmar2(const Matrix& full, const std::vector<int>& labels, double lambda,
                           std::uint64_t seed) {
    (void)seed;  // value-driven deletion is deterministic
    if (static_cast<Eigen::Index>(labels.size()) != full.rows())
        throw std::invalid_argument("apply_nmar2: label length mismatch");
    const int protected_label = 0;
    std::vector<int> unprot;
    for (int i = 0; i < full.rows(); ++i)
        if (labels[static_cast<size_t>(i)] != protected_label) unprot.push_back(i);
    if (unprot.empty()) throw std::invalid_argument("apply_nmar2: no unprotected cluster");

    const auto n = full.rows();
    const auto p = full.cols();
    const long target = mcar_target(lambda, n, p);
    MaskMatrix mask = MaskMatrix::Constant(n, p, true);
    std::vector<long> row_obs(static_cast<size_t>(n), p);
    for (int j = 0; j < p; ++j) {
        long quota = target / p + (j < static_cast<int>(target % p) ? 1 : 0);
        std::vector<int> order = unprot;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return full(a, j) < full(b, j); });
        for (int i : order) {
            if (quota == 0) break;
            if (row_obs[static_cast<size_t>(i)] <= 1) continue;
            mask(i, j) = false;
            --row_obs[static_cast<size_t>(i)];
            --quota;
        }
    }
    Dataset d;
    d.mask = std::move(mask);
    d.values = full;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j)
            if (!d.mask(i, j)) d.values(i, j) = 0.0;
    d.validate();
    return d;
}

// Full pipeline: parameters, hierarchical sample, then the spec's mechanism.
inline SimulatedDataset simulate(const SimulationSpec& spec) {
    const MixtureParams params = gen_params(spec);
    SimulatedDataset sim = sample(spec, params);
    if (spec.lambda > 0.0) {
        switch (spec.mechanism) {
            case Mechanism::MCAR:
                sim.data = apply_mcar(sim.full_values, spec.lambda, spec.seed);
                break;
            case Mechanism::MAR:
                sim.data = apply_mar(sim.full_values, spec.lambda, spec.seed);
                break;
            case Mechanism::NMAR1:
                sim.data = apply_nmar1(sim.full_values, sim.truth_labels, spec.lambda, spec.seed);
                break;
            case Mechanism::NMAR2:
                sim.data = apply_nmar2(sim.full_values, sim.truth_labels, spec.lambda, spec.seed);
                break;
        }
    }
    return sim;
}

}  // namespace tmix
