#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "tmix/aecm.hpp"
#include "tmix/simulation.hpp"

using Catch::Approx;
using tmix::ClusterParams;
using tmix::Dataset;
using tmix::Matrix;
using tmix::MixtureParams;
using tmix::Responsibilities;
using tmix::Vector;

namespace {

Dataset full_dataset(const Matrix& values) {
    Dataset d;
    d.values = values;
    d.mask.setConstant(values.rows(), values.cols(), true);
    return d;
}

MixtureParams single_cluster(const Vector& mu, const Matrix& sigma, double nu) {
    MixtureParams mix;
    ClusterParams c;
    c.pi = 1.0;
    c.mu = mu;
    c.sigma = sigma;
    c.nu = nu;
    mix.clusters.push_back(std::move(c));
    return mix;
}

// two tight, well separated point clouds; easy fixture for fit smoke tests
Dataset two_blob_dataset(int per_cluster, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.3);
    Matrix values(2 * per_cluster, 2);
    for (int i = 0; i < per_cluster; ++i) {
        values(i, 0) = g(rng);
        values(i, 1) = g(rng);
        values(per_cluster + i, 0) = 8.0 + g(rng);
        values(per_cluster + i, 1) = 8.0 + g(rng);
    }
    return full_dataset(values);
}

tmix::FitConfig quick_config(std::uint64_t seed = 5) {
    tmix::FitConfig cfg;
    cfg.n_starts = 6;
    cfg.n_finalists = 2;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("e_step weights at the center", "[aecm]") {
    // fully observed at mu: delta = 0, w = (nu + p) / nu
    Matrix v(2, 3);
    v << 0, 0, 0, 1, 1, 1;
    auto d = full_dataset(v);
    auto mix = single_cluster(Vector::Zero(3), Matrix::Identity(3, 3), 15.0);
    const auto patterns = tmix::pattern_groups(d);
    const auto e = tmix::e_step(d, patterns, mix);
    CHECK(e.resp.z(0, 0) == 1.0);
    CHECK(e.resp.w(0, 0) == Approx(18.0 / 15.0).margin(1e-12));
    CHECK(e.resp.w(1, 0) == Approx(18.0 / 18.0).margin(1e-12));  // delta = 3
}

TEST_CASE("e_step on a partial row uses only observed coordinates", "[aecm]") {
    Dataset d;
    d.values.resize(2, 3);
    d.values << 0, 0, 0, 0, 99, 99;  // masked cells hold sentinels
    d.mask.resize(2, 3);
    d.mask << true, true, true, true, false, false;
    auto mix = single_cluster(Vector::Zero(3), Matrix::Identity(3, 3), 15.0);
    const auto patterns = tmix::pattern_groups(d);
    const auto e = tmix::e_step(d, patterns, mix);
    CHECK(e.resp.w(1, 0) == Approx(16.0 / 15.0).margin(1e-12));  // q = 1 at mu
    // loglik splits as the sum of the per-row marginal densities
    CHECK(e.loglik == Approx(tmix::observed_loglik(d, patterns, mix)).margin(1e-12));
}

TEST_CASE("e_step symmetry gives half/half responsibilities", "[aecm]") {
    Matrix v(1, 1);
    v << 1.0;
    auto d = full_dataset(v);
    MixtureParams mix;
    for (double mu : {0.0, 2.0}) {
        ClusterParams c;
        c.pi = 0.5;
        c.mu = Vector::Constant(1, mu);
        c.sigma = Matrix::Identity(1, 1);
        c.nu = 7.0;
        mix.clusters.push_back(std::move(c));
    }
    const auto e = tmix::e_step(d, tmix::pattern_groups(d), mix);
    CHECK(e.resp.z(0, 0) == Approx(0.5).margin(1e-12));
    CHECK(e.resp.z(0, 1) == Approx(0.5).margin(1e-12));
}

TEST_CASE("characteristic weights decrease with distance", "[aecm]") {
    Matrix v(3, 1);
    v << 0.0, 1.0, 3.0;
    auto d = full_dataset(v);
    auto mix = single_cluster(Vector::Zero(1), Matrix::Identity(1, 1), 5.0);
    const auto e = tmix::e_step(d, tmix::pattern_groups(d), mix);
    CHECK(e.resp.w(0, 0) > e.resp.w(1, 0));
    CHECK(e.resp.w(1, 0) > e.resp.w(2, 0));
}

TEST_CASE("cm_update_pi averages responsibilities", "[aecm]") {
    Responsibilities resp;
    resp.z.resize(2, 2);
    resp.z << 1.0, 0.0, 0.5, 0.5;
    resp.w = Matrix::Ones(2, 2);
    const Vector pi = tmix::cm_update_pi(resp);
    CHECK(pi(0) == Approx(0.75));
    CHECK(pi(1) == Approx(0.25));
}

TEST_CASE("cm_update_mu is the zw-weighted mean over observed cells", "[aecm]") {
    Dataset d;
    d.values.resize(3, 2);
    d.values << 1, 10, 3, 0, 5, 20;
    d.mask.resize(3, 2);
    d.mask << true, true, true, false, true, true;
    Responsibilities resp;
    resp.z.resize(3, 1);
    resp.z << 1.0, 0.5, 0.25;
    resp.w.resize(3, 1);
    resp.w << 2.0, 1.0, 4.0;
    const auto patterns = tmix::pattern_groups(d);
    const Vector mu = tmix::cm_update_mu(d, patterns, resp, 0);
    // zw = {2.0, 0.5, 1.0}
    CHECK(mu(0) == Approx((2.0 * 1 + 0.5 * 3 + 1.0 * 5) / 3.5));
    CHECK(mu(1) == Approx((2.0 * 10 + 1.0 * 20) / 3.0));  // row 1 unobserved in feature 1
}

TEST_CASE("cm_update_mu rejects clusters with no mass on a feature", "[aecm]") {
    Dataset d;
    d.values.resize(2, 2);
    d.values << 1, 2, 3, 0;
    d.mask.resize(2, 2);
    d.mask << true, true, true, false;
    Responsibilities resp;
    resp.z.resize(2, 1);
    resp.z << 0.0, 1.0;  // all mass on the row missing feature 1
    resp.w = Matrix::Ones(2, 1);
    CHECK_THROWS_AS(tmix::cm_update_mu(d, tmix::pattern_groups(d), resp, 0), tmix::FitError);
}

TEST_CASE("cm_update_sigma matches the direct pairwise ratio", "[aecm]") {
    Dataset d;
    d.values.resize(3, 2);
    d.values << 1, 2, -1, 0, 2, 3;
    d.mask.resize(3, 2);
    d.mask << true, true, true, false, true, true;
    Responsibilities resp;
    resp.z.resize(3, 1);
    resp.z << 0.5, 1.0, 0.25;
    resp.w.resize(3, 1);
    resp.w << 1.0, 2.0, 0.5;
    Vector mu(2);
    mu << 0.5, 1.5;
    const Matrix sigma = tmix::cm_update_sigma(d, tmix::pattern_groups(d), resp, mu, 0);
    CHECK(sigma == sigma.transpose().eval());
    // element (0,0): all three rows observe feature 0
    double num = 0.0, den = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double dd = d.values(i, 0) - mu(0);
        num += resp.z(i, 0) * resp.w(i, 0) * dd * dd;
        den += resp.z(i, 0);
    }
    CHECK(sigma(0, 0) == Approx(num / den));
    // element (0,1): only rows 0 and 2 co-observe
    num = den = 0.0;
    for (int i : {0, 2}) {
        num += resp.z(i, 0) * resp.w(i, 0) * (d.values(i, 0) - mu(0)) * (d.values(i, 1) - mu(1));
        den += resp.z(i, 0);
    }
    CHECK(sigma(0, 1) == Approx(num / den));
}

TEST_CASE("cm_update_sigma requires co-observations for every pair", "[aecm]") {
    Dataset d;
    d.values.resize(2, 2);
    d.values << 1, 0, 0, 2;
    d.mask.resize(2, 2);
    d.mask << true, false, false, true;
    Responsibilities resp;
    resp.z = Matrix::Ones(2, 1);
    resp.w = Matrix::Ones(2, 1);
    Vector mu = Vector::Zero(2);
    CHECK_THROWS_AS(tmix::cm_update_sigma(d, tmix::pattern_groups(d), resp, mu, 0),
                    tmix::FitError);
}

TEST_CASE("repair_positive_definite clips only when needed", "[aecm]") {
    Matrix ok(2, 2);
    ok << 2, 0.5, 0.5, 1;
    Matrix before = ok;
    CHECK_FALSE(tmix::repair_positive_definite(ok));
    CHECK(ok == before);

    Matrix bad(2, 2);
    bad << 1, 2, 2, 1;  // eigenvalues 3, -1
    CHECK(tmix::repair_positive_definite(bad));
    Eigen::SelfAdjointEigenSolver<Matrix> es(bad);
    CHECK(es.eigenvalues().minCoeff() >= 1e-8 * es.eigenvalues().maxCoeff() * 0.999);
}

TEST_CASE("nu root solve matches an independent bisection", "[aecm]") {
    Responsibilities resp;
    resp.z = Matrix::Ones(4, 1);
    resp.w.resize(4, 1);
    resp.w << 0.8, 0.9, 1.1, 1.25;
    const std::vector<int> p_obs{3, 3, 3, 3};
    Vector nu_old = Vector::Constant(1, 12.0);
    const Vector nu = tmix::cm_update_nu(resp, p_obs, nu_old, tmix::NuMode::root_solve);

    const Vector s = tmix::nu_statistic(resp, p_obs, nu_old);
    auto g = [&](double x) { return 1.0 + std::log(0.5 * x) - tmix::digamma(0.5 * x) + s(0); };
    double lo = 0.5, hi = 200.0;
    REQUIRE(g(lo) * g(hi) < 0.0);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(lo) * g(mid) <= 0.0 ? hi : lo) = mid;
    }
    CHECK(nu(0) == Approx(0.5 * (lo + hi)).margin(1e-6));
    CHECK(nu(0) == Approx(12.349037).margin(1e-4));

    // approximation started near the root lands close to it
    const Vector nu_a = tmix::cm_update_nu(resp, p_obs, nu_old, tmix::NuMode::approx);
    CHECK(nu_a(0) == Approx(nu(0)).margin(0.1));
}

TEST_CASE("nu update saturates at the cap when weights sit at one", "[aecm]") {
    // w = 1 exactly with nu_old at the cap: the Gaussian limit, the root
    // equation has no solution below nu_max and both modes clamp there
    Responsibilities resp;
    resp.z = Matrix::Ones(3, 1);
    resp.w = Matrix::Ones(3, 1);
    const std::vector<int> p_obs{2, 2, 2};
    Vector nu_old = Vector::Constant(1, tmix::kDefaultNuMax);
    for (auto mode : {tmix::NuMode::root_solve, tmix::NuMode::approx}) {
        const Vector nu = tmix::cm_update_nu(resp, p_obs, nu_old, mode);
        CHECK(nu(0) == Approx(tmix::kDefaultNuMax).margin(1e-6));
    }
}

TEST_CASE("nu update doubled-constant variant drives nu to the cap", "[aecm]") {
    Responsibilities resp;
    resp.z = Matrix::Ones(4, 1);
    resp.w.resize(4, 1);
    resp.w << 0.5, 0.8, 1.2, 1.6;  // dispersed weights, far from Gaussian
    const std::vector<int> p_obs{3, 3, 3, 3};
    Vector nu_old = Vector::Constant(1, 10.0);
    const Vector nu = tmix::cm_update_nu(resp, p_obs, nu_old, tmix::NuMode::root_solve,
                                         tmix::NuEquation::paper_literal);
    CHECK(nu(0) == Approx(tmix::kDefaultNuMax).margin(1e-6));
}

TEST_CASE("full_em_conditional_mean passes observed coordinates through", "[aecm]") {
    ClusterParams c;
    c.mu.resize(2);
    c.mu << 1.0, 2.0;
    c.sigma.resize(2, 2);
    c.sigma << 2.0, 0.8, 0.8, 1.0;
    c.nu = 8.0;
    c.pi = 1.0;

    tmix::MissingnessPattern pat_full;
    pat_full.observed_indices = {0, 1};
    auto f_full = tmix::factorize(c.sigma, pat_full.observed_indices);
    Eigen::RowVectorXd y(2);
    y << 3.0, -1.0;
    const Vector same = tmix::full_em_conditional_mean(y, pat_full, c, f_full);
    CHECK(same(0) == 3.0);
    CHECK(same(1) == -1.0);

    // feature 1 missing: regression on feature 0
    tmix::MissingnessPattern pat;
    pat.observed_indices = {0};
    auto f = tmix::factorize(c.sigma, pat.observed_indices);
    const Vector yhat = tmix::full_em_conditional_mean(y, pat, c, f);
    CHECK(yhat(0) == 3.0);
    CHECK(yhat(1) == Approx(2.0 + 0.8 / 2.0 * (3.0 - 1.0)).margin(1e-12));
}

TEST_CASE("full_em_omega adds the conditional covariance on the missing block", "[aecm]") {
    ClusterParams c;
    c.mu.resize(2);
    c.mu << 0.0, 0.0;
    c.sigma.resize(2, 2);
    c.sigma << 2.0, 0.8, 0.8, 1.0;
    c.nu = 8.0;
    c.pi = 1.0;
    Eigen::RowVectorXd y(2);
    y << 3.0, 0.0;

    // fully observed: omega = z w d d'
    tmix::MissingnessPattern pat_full;
    pat_full.observed_indices = {0, 1};
    auto f_full = tmix::factorize(c.sigma, pat_full.observed_indices);
    const Matrix om_full = tmix::full_em_omega(y, pat_full, c, f_full, 0.5, 2.0);
    Vector dvec(2);
    dvec << 3.0, 0.0;
    CHECK((om_full - 0.5 * 2.0 * dvec * dvec.transpose()).norm() < 1e-12);

    // feature 1 missing: (1,1) gains the Schur complement sigma_11 - sigma_10^2/sigma_00
    tmix::MissingnessPattern pat;
    pat.observed_indices = {0};
    auto f = tmix::factorize(c.sigma, pat.observed_indices);
    const double z = 1.0, w = 1.5;
    const Matrix om = tmix::full_em_omega(y, pat, c, f, z, w);
    const double yhat1 = 0.8 / 2.0 * 3.0;
    const double schur = 1.0 - 0.8 * 0.8 / 2.0;
    CHECK(om(0, 0) == Approx(z * w * 9.0).margin(1e-12));
    CHECK(om(0, 1) == Approx(z * w * 3.0 * yhat1).margin(1e-12));
    CHECK(om(1, 1) == Approx(z * (w * yhat1 * yhat1 + schur)).margin(1e-12));
    Eigen::SelfAdjointEigenSolver<Matrix> es(om);
    CHECK(es.eigenvalues().minCoeff() > -1e-12);
}

TEST_CASE("full updates reduce to observed updates on complete data", "[aecm]") {
    auto d = two_blob_dataset(15, 42);
    const auto patterns = tmix::pattern_groups(d);
    MixtureParams mix;
    for (double m : {0.0, 8.0}) {
        ClusterParams c;
        c.pi = 0.5;
        c.mu = Vector::Constant(2, m);
        c.sigma = Matrix::Identity(2, 2);
        c.nu = 10.0;
        mix.clusters.push_back(std::move(c));
    }
    const auto e = tmix::e_step(d, patterns, mix);
    const auto [mus, sigmas] = tmix::full_em_cm_updates(d, patterns, e.resp, mix);
    for (int k = 0; k < 2; ++k) {
        const Vector mu_obs = tmix::cm_update_mu(d, patterns, e.resp, k);
        const Matrix sig_obs = tmix::cm_update_sigma(d, patterns, e.resp, mus[static_cast<size_t>(k)], k);
        CHECK((mus[static_cast<size_t>(k)] - mu_obs).lpNorm<Eigen::Infinity>() < 1e-10);
        CHECK((sigmas[static_cast<size_t>(k)] - sig_obs).lpNorm<Eigen::Infinity>() < 1e-10);
    }
}

TEST_CASE("hard_assign breaks ties toward the lower label", "[aecm]") {
    Responsibilities resp;
    resp.z.resize(2, 3);
    resp.z << 0.2, 0.4, 0.4, 0.5, 0.25, 0.25;
    const auto labels = tmix::hard_assign(resp);
    CHECK(labels == std::vector<int>{1, 0});
}

TEST_CASE("fit recovers two well separated blobs", "[aecm]") {
    auto d = two_blob_dataset(20, 7);
    const auto res = tmix::fit(d, 2, tmix::Method::observed, quick_config());
    REQUIRE(res.assignments.size() == 40);
    CHECK(res.converged);
    const int first = res.assignments[0];
    for (int i = 0; i < 20; ++i) CHECK(res.assignments[static_cast<size_t>(i)] == first);
    for (int i = 20; i < 40; ++i) CHECK(res.assignments[static_cast<size_t>(i)] == 1 - first);
    // soft memberships are near-degenerate here
    for (int i = 0; i < 40; ++i)
        CHECK(res.responsibilities.z(i, res.assignments[static_cast<size_t>(i)]) > 0.99);
    CHECK(res.n_eff == 40);
}

TEST_CASE("fit loglik trace is nondecreasing on the returned run", "[aecm]") {
    tmix::SimulationSpec spec;
    spec.n = 120;
    spec.p = 3;
    spec.K = 2;
    spec.lambda = 0.1;
    spec.seed = 19;
    auto sim = tmix::simulate(spec);
    const auto res = tmix::fit(sim.data, 2, tmix::Method::observed, quick_config(11));
    REQUIRE(res.loglik_trace.size() >= 2);
    for (size_t i = 1; i < res.loglik_trace.size(); ++i)
        CHECK(res.loglik_trace[i] >= res.loglik_trace[i - 1] - 1e-8);
    CHECK(res.loglik == res.loglik_trace.back());
}

TEST_CASE("fit is deterministic for a fixed seed", "[aecm]") {
    tmix::SimulationSpec spec;
    spec.n = 80;
    spec.seed = 3;
    spec.lambda = 0.15;
    auto sim = tmix::simulate(spec);
    const auto a = tmix::fit(sim.data, 3, tmix::Method::observed, quick_config(21));
    const auto b = tmix::fit(sim.data, 3, tmix::Method::observed, quick_config(21));
    CHECK(a.loglik == b.loglik);
    CHECK(a.assignments == b.assignments);
    CHECK(a.iterations == b.iterations);
    for (int k = 0; k < 3; ++k) {
        CHECK(a.params.clusters[static_cast<size_t>(k)].nu ==
              b.params.clusters[static_cast<size_t>(k)].nu);
        CHECK(a.params.clusters[static_cast<size_t>(k)].mu ==
              b.params.clusters[static_cast<size_t>(k)].mu);
    }
}

TEST_CASE("fit results are unchanged by extra worker threads", "[aecm]") {
    auto d = two_blob_dataset(15, 23);
    auto cfg = quick_config(9);
    cfg.n_starts = 12;
    const auto serial = tmix::fit(d, 2, tmix::Method::observed, cfg);
    cfg.threads = 4;
    const auto parallel = tmix::fit(d, 2, tmix::Method::observed, cfg);
    CHECK(serial.loglik == parallel.loglik);
    CHECK(serial.assignments == parallel.assignments);
}

TEST_CASE("fit K=1 reproduces weighted moment estimates", "[aecm]") {
    tmix::SimulationSpec spec;
    spec.n = 300;
    spec.K = 1;
    spec.p = 2;
    spec.nu = 15.0;
    spec.lambda = 0.0;
    spec.separation = 0.0;
    spec.seed = 31;
    auto sim = tmix::simulate(spec);
    auto cfg = quick_config(2);
    cfg.n_starts = 2;
    cfg.n_finalists = 1;
    const auto res = tmix::fit(sim.data, 1, tmix::Method::observed, cfg);
    CHECK(res.params.clusters[0].pi == Approx(1.0));
    CHECK((res.params.clusters[0].mu - sim.truth_params.clusters[0].mu).norm() < 0.3);
    // every assignment trivially lands in the only cluster
    for (int l : res.assignments) CHECK(l == 0);
}

TEST_CASE("estimated degrees of freedom recover the truth on a large sample", "[aecm]") {
    tmix::SimulationSpec spec;
    spec.n = 2000;
    spec.K = 1;
    spec.p = 3;
    spec.nu = 15.0;
    spec.lambda = 0.0;
    spec.separation = 0.0;
    spec.seed = 77;
    auto sim = tmix::simulate(spec);
    auto cfg = quick_config(4);
    cfg.n_starts = 2;
    cfg.n_finalists = 1;
    const auto res = tmix::fit(sim.data, 1, tmix::Method::observed, cfg);
    CHECK(res.params.clusters[0].nu > 10.0);
    CHECK(res.params.clusters[0].nu < 25.0);
}

TEST_CASE("complete_case fits on complete rows and labels every row", "[aecm]") {
    auto d = two_blob_dataset(20, 13);
    // punch holes in a few rows of each blob
    d.mask(2, 1) = false;
    d.mask(5, 0) = false;
    d.mask(25, 1) = false;
    const auto res = tmix::fit(d, 2, tmix::Method::complete_case, quick_config(6));
    CHECK(res.method == tmix::Method::complete_case);
    CHECK(res.n_eff == 37);
    CHECK(res.fit_rows.size() == 37);
    CHECK(res.assignments.size() == 40);  // incomplete rows still assigned
    const int first = res.assignments[0];
    CHECK(res.assignments[2] == first);
    CHECK(res.assignments[25] == 1 - first);
}

TEST_CASE("default start budget equals 10npK", "[aecm]") {
    auto d = two_blob_dataset(3, 99);  // n = 6, p = 2
    tmix::FitConfig cfg;
    cfg.seed = 17;
    cfg.short_iters = 1;
    cfg.n_starts = 0;  // default budget
    tmix::reset_touch_counters();
    auto defaulted = tmix::rnd_em_initialize(d, 2, tmix::Method::observed, cfg);
    const auto touches_default = tmix::g_mu_cell_touches;
    cfg.n_starts = 10L * 6 * 2 * 2;
    tmix::reset_touch_counters();
    auto explicit_budget = tmix::rnd_em_initialize(d, 2, tmix::Method::observed, cfg);
    CHECK(touches_default == tmix::g_mu_cell_touches);
    CHECK(touches_default > 0);
    CHECK(defaulted.size() == explicit_budget.size());
}

TEST_CASE("rnd_em finalists are ranked by short-run log-likelihood", "[aecm]") {
    auto d = two_blob_dataset(15, 3);
    const auto patterns = tmix::pattern_groups(d);
    tmix::FitConfig cfg;
    cfg.seed = 8;
    cfg.n_starts = 20;
    cfg.n_finalists = 4;
    const auto finalists = tmix::rnd_em_initialize(d, 2, tmix::Method::observed, cfg);
    REQUIRE(finalists.size() >= 2);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& f : finalists) {
        const double ll = tmix::observed_loglik(d, patterns, f);
        CHECK(ll <= prev + 1e-9);
        prev = ll;
    }
}

TEST_CASE("rnd_em validates its start budget", "[aecm]") {
    auto d = two_blob_dataset(5, 1);
    tmix::FitConfig cfg;
    cfg.n_starts = 2;
    cfg.n_finalists = 5;
    CHECK_THROWS_AS(tmix::rnd_em_initialize(d, 2, tmix::Method::observed, cfg),
                    std::invalid_argument);
}

TEST_CASE("touch counters report observed-cell work", "[aecm]") {
    Dataset d;
    d.values.resize(3, 2);
    d.values << 1, 2, 3, 0, 5, 6;
    d.mask.resize(3, 2);
    d.mask << true, true, true, false, true, true;
    Responsibilities resp;
    resp.z = Matrix::Ones(3, 1);
    resp.w = Matrix::Ones(3, 1);
    const auto patterns = tmix::pattern_groups(d);
    tmix::reset_touch_counters();
    const Vector mu = tmix::cm_update_mu(d, patterns, resp, 0);
    CHECK(tmix::g_mu_cell_touches == 5);  // 5 observed cells
    tmix::cm_update_sigma(d, patterns, resp, mu, 0);
    // rows with q observed cells contribute q(q+1)/2 pairs: 3 + 1 + 3
    CHECK(tmix::g_sigma_pair_touches == 7);
}

TEST_CASE("fit rejects invalid inputs", "[aecm]") {
    auto d = two_blob_dataset(5, 2);
    CHECK_THROWS_AS(tmix::fit(d, 0, tmix::Method::observed), std::invalid_argument);
}

TEST_CASE("scaling features rescales the fit without changing assignments", "[aecm]") {
    tmix::SimulationSpec spec;
    spec.n = 150;
    spec.K = 2;
    spec.p = 2;
    spec.lambda = 0.1;
    spec.seed = 55;
    auto sim = tmix::simulate(spec);
    auto cfg = quick_config(14);
    const auto base = tmix::fit(sim.data, 2, tmix::Method::observed, cfg);

    Dataset scaled = sim.data;
    const double c0 = 10.0, c1 = 0.25;
    scaled.values.col(0) *= c0;
    scaled.values.col(1) *= c1;
    const auto res = tmix::fit(scaled, 2, tmix::Method::observed, cfg);
    CHECK(res.assignments == base.assignments);
    for (int k = 0; k < 2; ++k) {
        const auto& a = base.params.clusters[static_cast<size_t>(k)];
        const auto& b = res.params.clusters[static_cast<size_t>(k)];
        CHECK(b.mu(0) == Approx(c0 * a.mu(0)).margin(1e-5 * std::abs(c0 * a.mu(0)) + 1e-7));
        CHECK(b.mu(1) == Approx(c1 * a.mu(1)).margin(1e-5 * std::abs(c1 * a.mu(1)) + 1e-7));
        CHECK(b.sigma(0, 1) == Approx(c0 * c1 * a.sigma(0, 1)).epsilon(1e-4));
        CHECK(b.nu == Approx(a.nu).epsilon(1e-4));
    }
}
