// Test-only dense reference implementations. Everything here recomputes from
// first principles (dense matrices, QR / explicit inverses) so it shares no
// code path with the sparse solver it checks.
#pragma once

#include <Eigen/Dense>
#include <random>
#include <string>
#include <vector>

#include "apm/design.hpp"
#include "apm/rng.hpp"

namespace oracle {

using apm::design::ColumnKind;
using apm::design::ColumnSpec;
using apm::design::DesignProblem;

struct Dense {
    Eigen::MatrixXd x_raw;   // N x p, 0/1 entries
    Eigen::MatrixXd x_std;   // active standardized columns
    Eigen::VectorXd w_norm;  // weights / mean(weights)
    Eigen::VectorXd y;
    Eigen::VectorXd scales;               // full p
    std::vector<Eigen::Index> active;     // active column -> full column
    std::vector<char> penalized_active;
};

inline Dense densify(const DesignProblem& p) {
    Dense d;
    const auto n = static_cast<Eigen::Index>(p.n_rows);
    const auto pc = static_cast<Eigen::Index>(p.cols());
    d.x_raw = Eigen::MatrixXd::Zero(n, pc);
    for (std::size_t i = 0; i < p.n_rows; ++i)
        for (const auto* c = p.row_begin(i); c != p.row_end(i); ++c)
            d.x_raw(static_cast<Eigen::Index>(i), *c) = 1.0;
    d.y = p.response;
    d.w_norm = p.weights / (p.weights.sum() / static_cast<double>(p.n_rows));

    // Weighted RMS scales, straight from the definition.
    Eigen::VectorXd wshare = p.weights / p.weights.sum();
    d.scales.resize(pc);
    for (Eigen::Index k = 0; k < pc; ++k)
        d.scales[k] = std::sqrt((d.x_raw.col(k).array().square() * wshare.array()).sum());
    if (!p.catalog.entries.empty() && p.catalog.entries[0].kind == ColumnKind::INTERCEPT)
        d.scales[0] = 1.0;

    for (Eigen::Index k = 0; k < pc; ++k) {
        if (d.scales[k] > 0.0) {
            d.active.push_back(k);
            d.penalized_active.push_back(p.catalog.entries[static_cast<std::size_t>(k)].penalized);
        }
    }
    d.x_std.resize(n, static_cast<Eigen::Index>(d.active.size()));
    for (std::size_t a = 0; a < d.active.size(); ++a)
        d.x_std.col(static_cast<Eigen::Index>(a)) = d.x_raw.col(d.active[a]) / d.scales[d.active[a]];
    return d;
}

inline Eigen::MatrixXd penalty(const Dense& d) {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(d.x_std.cols(), d.x_std.cols());
    for (Eigen::Index k = 0; k < p.rows(); ++k)
        if (d.penalized_active[static_cast<std::size_t>(k)]) p(k, k) = 1.0;
    return p;
}

/// Weighted OLS through a QR factorization of the sqrt-weighted rows.
inline Eigen::VectorXd ols_std(const Dense& d) {
    Eigen::VectorXd sw = d.w_norm.cwiseSqrt();
    Eigen::MatrixXd xs = sw.asDiagonal() * d.x_std;
    Eigen::VectorXd ys = sw.asDiagonal() * d.y;
    return xs.colPivHouseholderQr().solve(ys);
}

/// Ridge through the explicit closed form (G + λP)⁻¹ X̃ᵀWy.
inline Eigen::VectorXd ridge_std(const Dense& d, double lambda) {
    Eigen::MatrixXd g = d.x_std.transpose() * d.w_norm.asDiagonal() * d.x_std;
    Eigen::VectorXd b = d.x_std.transpose() * d.w_norm.asDiagonal() * d.y;
    Eigen::MatrixXd a = g + lambda * penalty(d);
    return a.inverse() * b;
}

/// Back-transforms a standardized solution to original units (full indexing).
inline Eigen::VectorXd to_original(const Dense& d, const Eigen::VectorXd& beta_std) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d.scales.size());
    for (std::size_t a = 0; a < d.active.size(); ++a)
        out[d.active[a]] = beta_std[static_cast<Eigen::Index>(a)] / d.scales[d.active[a]];
    return out;
}

/// The N×N hat matrix built literally; returns its trace.
inline double hat_trace(const Dense& d, double lambda) {
    Eigen::MatrixXd g = d.x_std.transpose() * d.w_norm.asDiagonal() * d.x_std;
    Eigen::MatrixXd a = g + lambda * penalty(d);
    Eigen::MatrixXd h = d.x_std * a.inverse() * d.x_std.transpose() * d.w_norm.asDiagonal();
    return h.trace();
}

/// The symmetric weighted hat matrix W^{1/2} X̃ (G+λP)⁻¹ X̃ᵀ W^{1/2}.
inline Eigen::MatrixXd hat_sym(const Dense& d, double lambda) {
    Eigen::MatrixXd g = d.x_std.transpose() * d.w_norm.asDiagonal() * d.x_std;
    Eigen::MatrixXd a = g + lambda * penalty(d);
    Eigen::VectorXd sw = d.w_norm.cwiseSqrt();
    Eigen::MatrixXd xs = sw.asDiagonal() * d.x_std;
    return xs * a.inverse() * xs.transpose();
}

inline double wrss(const Dense& d, const Eigen::VectorXd& beta_std) {
    Eigen::VectorXd r = d.y - d.x_std * beta_std;
    return (d.w_norm.array() * r.array().square()).sum();
}

/// Classical weighted-OLS standard errors in original units.
inline Eigen::VectorXd ols_se(const Dense& d) {
    Eigen::MatrixXd g = d.x_std.transpose() * d.w_norm.asDiagonal() * d.x_std;
    Eigen::VectorXd beta = ols_std(d);
    const double n = static_cast<double>(d.x_std.rows());
    const double p = static_cast<double>(d.x_std.cols());
    double s2 = wrss(d, beta) / (n - p);
    Eigen::VectorXd diag = g.inverse().diagonal();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d.scales.size());
    for (std::size_t a = 0; a < d.active.size(); ++a)
        out[d.active[a]] = std::sqrt(s2 * diag[static_cast<Eigen::Index>(a)]) / d.scales[d.active[a]];
    return out;
}

inline double gcv_dense(const Dense& d, double lambda) {
    Eigen::MatrixXd g = d.x_std.transpose() * d.w_norm.asDiagonal() * d.x_std;
    Eigen::MatrixXd a = g + lambda * penalty(d);
    Eigen::VectorXd b = d.x_std.transpose() * d.w_norm.asDiagonal() * d.y;
    Eigen::VectorXd beta = a.inverse() * b;
    const double n = static_cast<double>(d.x_std.rows());
    double tr = hat_trace(d, lambda);
    return n * wrss(d, beta) / ((n - tr) * (n - tr));
}

/// Random weighted 0/1 instance with an unpenalized all-ones intercept and
/// p-1 penalized Bernoulli indicator columns; regenerates until full rank.
inline DesignProblem random_instance(std::uint64_t seed, int n, int p, double density = 0.35) {
    using apm::design::ColumnCatalog;
    for (std::uint64_t attempt = 0;; ++attempt) {
        std::mt19937_64 eng(apm::derive_seed(seed, 0xde51, attempt));
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::uniform_real_distribution<double> wdist(0.5, 2.5);
        std::normal_distribution<double> noise(0.0, 1.0);

        DesignProblem prob;
        prob.catalog.partition = apm::design::PartitionKind::EV;
        prob.catalog.stat = apm::shiftlog::Stat::SHOTS;
        prob.catalog.entries.push_back({ColumnKind::INTERCEPT, std::nullopt, false});
        for (int k = 1; k < p; ++k)
            prob.catalog.entries.push_back({ColumnKind::SKATER_OFF, "c" + std::to_string(k), true});
        prob.catalog.rebuild_index();

        prob.n_rows = static_cast<std::size_t>(n);
        prob.row_offsets.push_back(0);
        prob.weights.resize(n);
        prob.response.resize(n);
        for (int i = 0; i < n; ++i) {
            prob.col_indices.push_back(0);
            for (int k = 1; k < p; ++k)
                if (unif(eng) < density) prob.col_indices.push_back(k);
            prob.row_offsets.push_back(static_cast<std::int32_t>(prob.col_indices.size()));
            prob.weights[i] = wdist(eng);
            prob.response[i] = noise(eng) * 2.0 + 1.0;
        }
        prob.scales = Eigen::VectorXd::Ones(p);
        prob = apm::design::standardize(std::move(prob));

        Dense d = densify(prob);
        if (static_cast<int>(d.active.size()) != p) continue;  // a column never appeared
        Eigen::FullPivLU<Eigen::MatrixXd> lu(d.x_std);
        if (lu.rank() == p) return prob;
    }
}

}  // namespace oracle
