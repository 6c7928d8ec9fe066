#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "apm/csv.hpp"
#include "apm/design.hpp"
#include "apm/errors.hpp"
#include "apm/rng.hpp"
#include "apm/solver.hpp"
#include "json.hpp"

namespace apm::lambda_select {

struct SelectionConfig {
    double grid_min = 1e-4;
    double grid_max = 1e2;
    int grid_points = 25;
    int refine_points = 8;     // extra points inserted around the GCV minimizer
    int probes = 20;           // Hutchinson probes per grid point
    std::uint64_t seed = 0x5eed;
    double vif_ceiling = 10.0;
    double stabilization_threshold = 0.02;
};

struct GridPoint {
    double lambda = 0.0;
    double gcv = 0.0;
    double max_vif = 0.0;
    double trace_est = 0.0;
    double wrss = 0.0;
    double beta_std_norm = 0.0;    // penalized standardized coefficients
    Eigen::VectorXd coefficients;  // original per-60 units, full column indexing
};

struct LambdaReport {
    double gcv_lambda = 0.0;
    double hkb_lambda = 0.0;
    double vif_lambda = 0.0;
    double stabilization_lambda = 0.0;
    double chosen = 0.0;
    std::vector<GridPoint> grid;
    std::uint64_t probe_seed = 0;
    int probe_count = 0;
    std::string policy = "AUTO";
    std::vector<std::string> warnings;

    nlohmann::json to_json() const {
        auto num = [](double v) -> nlohmann::json {
            if (std::isfinite(v)) return v;
            return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
        };
        nlohmann::json grid_json = nlohmann::json::array();
        for (const auto& g : grid)
            grid_json.push_back({{"lambda", g.lambda},
                                 {"gcv", num(g.gcv)},
                                 {"max_vif", num(g.max_vif)},
                                 {"trace_est", num(g.trace_est)},
                                 {"beta_std_norm", num(g.beta_std_norm)}});
        return nlohmann::json{{"policy", policy},
                              {"chosen", num(chosen)},
                              {"gcv_lambda", num(gcv_lambda)},
                              {"hkb_lambda", num(hkb_lambda)},
                              {"vif_lambda", num(vif_lambda)},
                              {"stabilization_lambda", num(stabilization_lambda)},
                              {"probe_seed", probe_seed},
                              {"probe_count", probe_count},
                              {"warnings", warnings},
                              {"grid", grid_json}};
    }

    void write_grid_csv(std::ostream& out) const {
        if (grid.empty()) return;
        out << "lambda,gcv,max_vif";
        for (Eigen::Index k = 0; k < grid.front().coefficients.size(); ++k) out << ",coef_" << k;
        out << '\n';
        for (const auto& g : grid) {
            out << csv::fmt(g.lambda) << ',' << csv::fmt(g.gcv) << ',' << csv::fmt(g.max_vif);
            for (Eigen::Index k = 0; k < g.coefficients.size(); ++k)
                out << ',' << csv::fmt(g.coefficients[k]);
            out << '\n';
        }
    }
};

namespace detail {

/// Rademacher probe for one row stream. Probe t is a function of
/// (seed, t) only, so every lambda on the grid sees the same probes and the
/// estimated trace inherits the exact trace's monotonicity in lambda.
inline Eigen::VectorXd probe_vector(std::uint64_t seed, std::uint64_t index, std::size_t n) {
    auto eng = make_engine(seed, 0x9b0b, index);
    Eigen::VectorXd eps(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) eps[static_cast<Eigen::Index>(i)] = rademacher(eng);
    return eps;
}

/// z = X̃ᵀ W^{1/2} ε in active-column indexing (weights normalized to mean 1).
inline Eigen::VectorXd probe_z(const design::DesignProblem& p, const solver::GramSystem& gs,
                               const Eigen::VectorXd& eps) {
    const double mean_w = p.weight_mean();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gs.active.size()));
    for (std::size_t i = 0; i < p.n_rows; ++i) {
        const double c =
            std::sqrt(p.weights[static_cast<Eigen::Index>(i)] / mean_w) * eps[static_cast<Eigen::Index>(i)];
        for (const auto* col = p.row_begin(i); col != p.row_end(i); ++col) {
            const std::int32_t a = gs.active_of_full[*col];
            if (a >= 0) z[a] += c / p.scales[*col];
        }
    }
    return z;
}

/// One-time spectral form of the normal equations. The penalized block's
/// Schur complement S = G_QQ - G_QU G_UUְ¹ G_UQ is eigendecomposed once;
/// after that every lambda-dependent quantity costs O(p²) or less.
class Spectrum {
public:
    solver::GramSystem gs;

    explicit Spectrum(const design::DesignProblem& p) : gs(solver::build_gram(p)) {
        for (std::size_t k = 0; k < gs.penalized.size(); ++k)
            (gs.penalized[k] ? pen_ : unpen_).push_back(static_cast<Eigen::Index>(k));
        const auto nq = static_cast<Eigen::Index>(pen_.size());
        const auto nu = static_cast<Eigen::Index>(unpen_.size());

        Eigen::MatrixXd s(nq, nq);
        for (Eigen::Index i = 0; i < nq; ++i)
            for (Eigen::Index j = 0; j < nq; ++j) s(i, j) = gs.gram(pen_[i], pen_[j]);
        bu_.resize(nu);
        Eigen::VectorXd bq(nq);
        for (Eigen::Index i = 0; i < nq; ++i) bq[i] = gs.xtwy[pen_[i]];
        if (nu > 0) {
            Eigen::MatrixXd guu(nu, nu);
            guq_.resize(nu, nq);
            for (Eigen::Index i = 0; i < nu; ++i) {
                bu_[i] = gs.xtwy[unpen_[i]];
                for (Eigen::Index j = 0; j < nu; ++j) guu(i, j) = gs.gram(unpen_[i], unpen_[j]);
                for (Eigen::Index j = 0; j < nq; ++j) guq_(i, j) = gs.gram(unpen_[i], pen_[j]);
            }
            guu_llt_.compute(guu);
            if (guu_llt_.info() != Eigen::Success)
                throw Error(ErrorKind::Numeric, "unpenalized block is not positive definite");
            s -= guq_.transpose() * guu_llt_.solve(guq_);
            bq -= guq_.transpose() * guu_llt_.solve(bu_);
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        if (es.info() != Eigen::Success)
            throw Error(ErrorKind::Numeric, "eigendecomposition of the Gram system failed");
        d_ = es.eigenvalues().cwiseMax(0.0);
        v_ = es.eigenvectors();
        eta_ = v_.transpose() * bq;

        // Correlation-scaled copy for VIF: S_R = D_Q^{-1/2} S D_Q^{-1/2}.
        Eigen::VectorXd dq(nq);
        for (Eigen::Index i = 0; i < nq; ++i) dq[i] = std::sqrt(gs.gram(pen_[i], pen_[i]));
        Eigen::MatrixXd sr = s;
        for (Eigen::Index i = 0; i < nq; ++i)
            for (Eigen::Index j = 0; j < nq; ++j) sr(i, j) /= dq[i] * dq[j];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esr(sr);
        if (esr.info() != Eigen::Success)
            throw Error(ErrorKind::Numeric, "eigendecomposition of the correlation system failed");
        dr_ = esr.eigenvalues().cwiseMax(0.0);
        vr_sq_ = esr.eigenvectors().cwiseAbs2();
    }

    std::size_t n_penalized() const { return pen_.size(); }
    std::size_t n_active() const { return gs.active.size(); }
    double n_rows() const { return gs.n; }

    bool singular_at_zero() const {
        if (d_.size() == 0) return false;
        return d_[0] <= 1e-10 * std::max(d_[d_.size() - 1], 1.0);
    }

    /// tr(H) = |U| + Σ d/(d+λ).
    double trace_exact(double lambda) const {
        double tr = static_cast<double>(unpen_.size());
        for (Eigen::Index m = 0; m < d_.size(); ++m)
            if (d_[m] + lambda > 0.0) tr += d_[m] / (d_[m] + lambda);
        return tr;
    }

    /// Standardized solution in active indexing.
    Eigen::VectorXd beta_active(double lambda) const {
        const auto nq = static_cast<Eigen::Index>(pen_.size());
        Eigen::VectorXd y = eta_;
        for (Eigen::Index m = 0; m < y.size(); ++m) {
            const double denom = d_[m] + lambda;
            y[m] = denom > 0.0 ? y[m] / denom : 0.0;
        }
        Eigen::VectorXd beta_q = v_ * y;
        Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gs.active.size()));
        for (Eigen::Index i = 0; i < nq; ++i) out[pen_[i]] = beta_q[i];
        if (!unpen_.empty()) {
            Eigen::VectorXd bu_adj = bu_ - guq_ * beta_q;
            Eigen::VectorXd beta_u = guu_llt_.solve(bu_adj);
            for (std::size_t i = 0; i < unpen_.size(); ++i)
                out[unpen_[i]] = beta_u[static_cast<Eigen::Index>(i)];
        }
        return out;
    }

    double wrss(const Eigen::VectorXd& beta_act) const {
        return std::max(0.0, gs.ytwy - 2.0 * beta_act.dot(gs.xtwy) +
                                 beta_act.dot(gs.gram * beta_act));
    }

    double penalized_norm(const Eigen::VectorXd& beta_act) const {
        double n2 = 0.0;
        for (Eigen::Index q : pen_) n2 += beta_act[q] * beta_act[q];
        return std::sqrt(n2);
    }

    /// εᵀH_Wε precomputation: the quadratic form is c0 + Σ ζ²/(d+λ).
    struct ProbeForm {
        double c0 = 0.0;
        Eigen::VectorXd zeta;
    };

    ProbeForm prepare_probe(const Eigen::VectorXd& z_active) const {
        ProbeForm f;
        const auto nq = static_cast<Eigen::Index>(pen_.size());
        Eigen::VectorXd zq(nq);
        for (Eigen::Index i = 0; i < nq; ++i) zq[i] = z_active[pen_[i]];
        if (!unpen_.empty()) {
            Eigen::VectorXd zu(static_cast<Eigen::Index>(unpen_.size()));
            for (std::size_t i = 0; i < unpen_.size(); ++i)
                zu[static_cast<Eigen::Index>(i)] = z_active[unpen_[i]];
            Eigen::VectorXd gz = guu_llt_.solve(zu);
            f.c0 = zu.dot(gz);
            zq -= guq_.transpose() * gz;
        }
        f.zeta = v_.transpose() * zq;
        return f;
    }

    double probe_estimate(const ProbeForm& f, double lambda) const {
        double q = f.c0;
        for (Eigen::Index m = 0; m < f.zeta.size(); ++m) {
            const double denom = d_[m] + lambda;
            if (denom > 0.0) q += f.zeta[m] * f.zeta[m] / denom;
        }
        return q;
    }

    /// Largest VIF over penalized columns at this lambda (correlation scale).
    double max_vif(double lambda) const {
        if (dr_.size() == 0) return 0.0;
        const double dmax = std::max(dr_[dr_.size() - 1], 0.0);
        const double rank_tol = 1e-10 * std::max(dmax, 1.0);
        double worst = 0.0;
        for (Eigen::Index q = 0; q < vr_sq_.rows(); ++q) {
            double value = 0.0;
            for (Eigen::Index m = 0; m < dr_.size(); ++m) {
                const double dm = dr_[m];
                if (lambda == 0.0 && dm <= rank_tol) {
                    if (vr_sq_(q, m) > 1e-12) return std::numeric_limits<double>::infinity();
                    continue;
                }
                value += vr_sq_(q, m) * dm / ((dm + lambda) * (dm + lambda));
            }
            worst = std::max(worst, value);
        }
        return worst;
    }

    /// Back-transforms an active standardized solution to per-60 units.
    Eigen::VectorXd to_original(const design::DesignProblem& p,
                                const Eigen::VectorXd& beta_act) const {
        Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.cols()));
        for (std::size_t k = 0; k < gs.active.size(); ++k)
            out[gs.active[k]] =
                beta_act[static_cast<Eigen::Index>(k)] / gs.scales_active[static_cast<Eigen::Index>(k)];
        return out;
    }

private:
    std::vector<Eigen::Index> pen_, unpen_;
    Eigen::LLT<Eigen::MatrixXd> guu_llt_;
    Eigen::MatrixXd guq_;
    Eigen::VectorXd bu_;
    Eigen::MatrixXd v_;
    Eigen::VectorXd d_;
    Eigen::VectorXd eta_;
    Eigen::VectorXd dr_;
    Eigen::MatrixXd vr_sq_;
};

inline std::vector<double> log_grid(double lo, double hi, int points) {
    std::vector<double> g;
    if (points <= 1 || lo >= hi) {
        g.push_back(lo);
        return g;
    }
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < points; ++i)
        g.push_back(std::pow(10.0, llo + (lhi - llo) * static_cast<double>(i) /
                                             static_cast<double>(points - 1)));
    return g;
}

}  // namespace detail

/// Randomized trace estimate (1/σ²)·εᵀH_Wε averaged over Rademacher probes
/// (σ² = 1). Each probe costs one X̃ᵀ(W^{1/2}ε) pass and one p×p solve; no
/// N×N object is ever formed.
inline double hutchinson_trace(const design::DesignProblem& p, double lambda, int probes,
                               std::uint64_t seed) {
    if (probes < 1) throw Error(ErrorKind::Config, "probe count must be >= 1");
    solver::GramSystem gs = solver::build_gram(p);
    solver::detail::SpdSolver f;
    f.compute(gs.penalized_matrix(lambda));
    double sum = 0.0;
    for (int t = 0; t < probes; ++t) {
        Eigen::VectorXd eps = detail::probe_vector(seed, static_cast<std::uint64_t>(t), p.n_rows);
        Eigen::VectorXd z = detail::probe_z(p, gs, eps);
        sum += z.dot(f.solve(z));
    }
    return sum / static_cast<double>(probes);
}

/// GCV score N·WRSS(λ)/(N - tr̂(H))² under mean-1 normalized weights.
inline double gcv_score(const design::DesignProblem& p, double lambda, double trace_estimate) {
    const double n = static_cast<double>(p.n_rows);
    if (trace_estimate >= n)
        throw Error(ErrorKind::Numeric, "trace estimate reaches the row count; GCV undefined");
    solver::GramSystem gs = solver::build_gram(p);
    Eigen::MatrixXd a = gs.penalized_matrix(lambda);
    solver::detail::SpdSolver f;
    f.compute(a);
    Eigen::VectorXd beta = f.solve(gs.xtwy);
    const double wrss =
        std::max(0.0, gs.ytwy - 2.0 * beta.dot(gs.xtwy) + beta.dot(gs.gram * beta));
    const double denom = n - trace_estimate;
    return n * wrss / (denom * denom);
}

/// Hoerl-Kennard-Baldwin estimate p·σ̂²/β̃ᵀβ̃ over penalized standardized
/// coefficients of the λ=0 fit. When the λ=0 system is singular the fit at
/// `surrogate_lambda` stands in for it.
inline double hkb_lambda(const design::DesignProblem& p, double surrogate_lambda = 1e-4) {
    detail::Spectrum spectrum(p);
    const double lambda0 = spectrum.singular_at_zero() ? surrogate_lambda : 0.0;
    Eigen::VectorXd beta = spectrum.beta_active(lambda0);
    const double n = spectrum.n_rows();
    const double tr = spectrum.trace_exact(lambda0);
    if (n <= tr)
        throw Error(ErrorKind::Numeric, "overparameterized system: HKB estimate undefined");
    const double sigma2 = spectrum.wrss(beta) / (n - tr);
    const double bb = spectrum.penalized_norm(beta);
    if (bb == 0.0) return std::numeric_limits<double>::infinity();
    return static_cast<double>(spectrum.n_penalized()) * sigma2 / (bb * bb);
}

struct Stabilization {
    double lambda = 0.0;
    bool stabilized = false;
};

/// Smallest grid λ from which the relative coefficient movement
/// ‖β(λ_next) - β(λ)‖/‖β(λ)‖ stays below `threshold` for the rest of the
/// grid. Falls back to the largest grid λ when the path never settles.
inline Stabilization stabilization_lambda(
    const std::vector<std::pair<double, Eigen::VectorXd>>& grid_fits, double threshold) {
    if (grid_fits.size() < 3)
        throw Error(ErrorKind::Config, "stabilization needs at least 3 grid points");
    const std::size_t moves = grid_fits.size() - 1;
    std::vector<double> movement(moves);
    for (std::size_t i = 0; i < moves; ++i) {
        const double base = std::max(grid_fits[i].second.norm(), 1e-300);
        movement[i] = (grid_fits[i + 1].second - grid_fits[i].second).norm() / base;
    }
    std::size_t idx = moves;  // first index whose suffix is all below threshold
    for (std::size_t i = moves; i-- > 0;) {
        if (movement[i] < threshold)
            idx = i;
        else
            break;
    }
    if (idx == moves) return {grid_fits.back().first, false};
    return {grid_fits[idx].first, true};
}

/// Runs the four-signal policy: randomized GCV on a refined log grid, the
/// HKB closed form, the smallest grid λ keeping every VIF under the ceiling,
/// and trace-curve stabilization; returns the maximum as `chosen`.
inline LambdaReport select_lambda(const design::DesignProblem& p, const SelectionConfig& config) {
    if (config.grid_points < 3) throw Error(ErrorKind::Config, "grid needs at least 3 points");
    if (!(config.grid_min > 0.0) || config.grid_max < config.grid_min)
        throw Error(ErrorKind::Config, "invalid lambda grid bounds");

    LambdaReport report;
    report.policy = "AUTO";
    report.probe_seed = config.seed;
    report.probe_count = config.probes;

    detail::Spectrum spectrum(p);
    const double n = spectrum.n_rows();

    std::vector<detail::Spectrum::ProbeForm> probe_forms;
    probe_forms.reserve(static_cast<std::size_t>(config.probes));
    for (int t = 0; t < config.probes; ++t) {
        Eigen::VectorXd eps =
            detail::probe_vector(config.seed, static_cast<std::uint64_t>(t), p.n_rows);
        probe_forms.push_back(spectrum.prepare_probe(detail::probe_z(p, spectrum.gs, eps)));
    }

    bool warned_gcv = false;
    std::vector<Eigen::VectorXd> betas;  // standardized, active indexing
    auto evaluate = [&](double lambda) -> GridPoint {
        GridPoint g;
        g.lambda = lambda;
        double tr = 0.0;
        for (const auto& f : probe_forms) tr += spectrum.probe_estimate(f, lambda);
        g.trace_est = tr / static_cast<double>(config.probes);
        Eigen::VectorXd beta = spectrum.beta_active(lambda);
        g.wrss = spectrum.wrss(beta);
        if (g.trace_est >= n) {
            g.gcv = std::numeric_limits<double>::infinity();
            if (!warned_gcv) {
                report.warnings.push_back("trace estimate reached the row count at lambda=" +
                                          csv::fmt(lambda) + "; GCV skipped there");
                warned_gcv = true;
            }
        } else {
            const double denom = n - g.trace_est;
            g.gcv = n * g.wrss / (denom * denom);
        }
        g.max_vif = spectrum.max_vif(lambda);
        g.beta_std_norm = spectrum.penalized_norm(beta);
        g.coefficients = spectrum.to_original(p, beta);
        betas.push_back(std::move(beta));
        return g;
    };

    std::vector<double> lambdas =
        detail::log_grid(config.grid_min, config.grid_max, config.grid_points);
    for (double l : lambdas) report.grid.push_back(evaluate(l));

    // One refinement pass around the coarse minimizer.
    std::size_t imin = 0;
    for (std::size_t i = 1; i < report.grid.size(); ++i)
        if (report.grid[i].gcv < report.grid[imin].gcv) imin = i;
    const double lo = report.grid[imin > 0 ? imin - 1 : 0].lambda;
    const double hi = report.grid[std::min(imin + 1, report.grid.size() - 1)].lambda;
    if (hi > lo) {
        std::vector<double> fine = detail::log_grid(lo, hi, config.refine_points + 2);
        for (std::size_t i = 1; i + 1 < fine.size(); ++i) report.grid.push_back(evaluate(fine[i]));
    }

    // Sort the merged grid (betas travel with their points).
    {
        std::vector<std::size_t> order(report.grid.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return report.grid[a].lambda < report.grid[b].lambda;
        });
        std::vector<GridPoint> sorted_grid;
        std::vector<Eigen::VectorXd> sorted_betas;
        for (std::size_t i : order) {
            sorted_grid.push_back(std::move(report.grid[i]));
            sorted_betas.push_back(std::move(betas[i]));
        }
        report.grid = std::move(sorted_grid);
        betas = std::move(sorted_betas);
    }

    report.gcv_lambda = report.grid.front().lambda;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : report.grid)
        if (g.gcv < best) {
            best = g.gcv;
            report.gcv_lambda = g.lambda;
        }

    if (spectrum.singular_at_zero())
        report.warnings.push_back("Gram system singular at lambda=0; HKB uses the fit at the "
                                  "smallest grid lambda");
    report.hkb_lambda = hkb_lambda(p, config.grid_min);

    report.vif_lambda = report.grid.back().lambda;
    bool vif_found = false;
    for (const auto& g : report.grid) {
        if (g.max_vif < config.vif_ceiling) {
            report.vif_lambda = g.lambda;
            vif_found = true;
            break;
        }
    }
    if (!vif_found)
        report.warnings.push_back("max VIF stayed at or above the ceiling across the grid");

    std::vector<std::pair<double, Eigen::VectorXd>> path;
    path.reserve(report.grid.size());
    for (std::size_t i = 0; i < report.grid.size(); ++i)
        path.emplace_back(report.grid[i].lambda, betas[i]);
    Stabilization stab = stabilization_lambda(path, config.stabilization_threshold);
    report.stabilization_lambda = stab.lambda;
    if (!stab.stabilized)
        report.warnings.push_back("coefficient path never stabilized on the grid");

    report.chosen = std::max({report.gcv_lambda, report.hkb_lambda, report.vif_lambda,
                              report.stabilization_lambda});
    return report;
}

}  // namespace apm::lambda_select
