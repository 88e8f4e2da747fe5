#pragma once

// BIC model selection over a grid of cluster counts.

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmix/aecm.hpp"

namespace tmix {

// Free parameters of an unconstrained K-component t mixture in p dimensions:
// mixing, means, symmetric dispersions, per-cluster degrees of freedom.
inline long free_param_count(int K, int p) {
    if (K < 1 || p < 1) throw std::invalid_argument("free_param_count: K, p >= 1 required");
    const long k = K, d = p;
    return (k - 1) + k * d + k * d * (d + 1) / 2 + k;
}

inline double bic(double loglik, long m, Eigen::Index n_eff) {
    if (n_eff < 1) throw std::invalid_argument("bic: n_eff >= 1 required");
    return -2.0 * loglik + static_cast<double>(m) * std::log(static_cast<double>(n_eff));
}

struct KFitEntry {
    int K = 0;
    std::optional<FitResult> fit;  // empty when the fit failed
    double bic = std::numeric_limits<double>::quiet_NaN();
    std::string error;
};

struct SelectionResult {
    std::vector<KFitEntry> per_k;
    int best_k = 0;  // smallest K attaining the minimum BIC among successes
};

// Fits each K in [k_min, k_max] independently (fresh Rnd-EM initialization)
// and selects the BIC minimizer. Failed fits are recorded and excluded.
inline SelectionResult select_k(const Dataset& d, int k_min, int k_max, Method method,
                                const FitConfig& cfg = {}) {
    if (k_min < 1 || k_max < k_min) throw std::invalid_argument("select_k: bad K range");
    SelectionResult out;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int K = k_min; K <= k_max; ++K) {
        KFitEntry entry;
        entry.K = K;
        try {
            FitResult fr = fit(d, K, method, cfg);
            entry.bic = bic(fr.loglik, free_param_count(K, static_cast<int>(d.p())), fr.n_eff);
            entry.fit = std::move(fr);
            if (entry.bic < best_bic) {
                best_bic = entry.bic;
                out.best_k = K;
            }
        } catch (const std::exception& e) {
            entry.error = e.what();
        }
        out.per_k.push_back(std::move(entry));
    }
    if (out.best_k == 0) throw FitError("select_k: every K failed");
    return out;
}

}  // namespace tmix
