#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "apm/design.hpp"
#include "apm/errors.hpp"

namespace apm::solver {

/// Normal-equation system over the active (non-degenerate) columns, built
/// with weights normalized to mean 1 so lambda keeps one interpretation
/// regardless of the unit the raw weights arrive in.
struct GramSystem {
    Eigen::MatrixXd gram;   // X̃ᵀWX̃, active columns
    Eigen::VectorXd xtwy;   // X̃ᵀWy
    double ytwy = 0.0;      // yᵀWy
    double n = 0.0;
    std::vector<std::int32_t> active;           // active column -> full column id
    std::vector<std::int32_t> active_of_full;   // full column -> active index or -1
    Eigen::VectorXd scales_active;
    std::vector<char> penalized;                // per active column
    std::size_t n_penalized = 0;

    Eigen::MatrixXd penalized_matrix(double lambda) const {
        Eigen::MatrixXd a = gram;
        for (std::size_t k = 0; k < penalized.size(); ++k)
            if (penalized[k]) a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += lambda;
        return a;
    }
};

inline GramSystem build_gram(const design::DesignProblem& p) {
    if (!p.standardized)
        throw Error(ErrorKind::Validation, "design problem must be standardized before solving");
    if (p.n_rows == 0) throw Error(ErrorKind::Validation, "design problem has no rows");

    GramSystem gs;
    const auto pfull = static_cast<std::int32_t>(p.cols());
    gs.active_of_full.assign(pfull, -1);
    for (std::int32_t k = 0; k < pfull; ++k) {
        if (p.scales[k] > 0.0) {
            gs.active_of_full[k] = static_cast<std::int32_t>(gs.active.size());
            gs.active.push_back(k);
        }
    }
    const auto pa = static_cast<Eigen::Index>(gs.active.size());
    gs.gram = Eigen::MatrixXd::Zero(pa, pa);
    gs.xtwy = Eigen::VectorXd::Zero(pa);
    gs.scales_active.resize(pa);
    gs.penalized.resize(gs.active.size());
    for (std::size_t k = 0; k < gs.active.size(); ++k) {
        gs.scales_active[static_cast<Eigen::Index>(k)] = p.scales[gs.active[k]];
        gs.penalized[k] = p.catalog.entries[static_cast<std::size_t>(gs.active[k])].penalized;
        if (gs.penalized[k]) ++gs.n_penalized;
    }
    gs.n = static_cast<double>(p.n_rows);

    const double mean_w = p.weight_mean();
    std::vector<std::pair<std::int32_t, double>> row;  // (active index, standardized value)
    for (std::size_t i = 0; i < p.n_rows; ++i) {
        const double wn = p.weights[static_cast<Eigen::Index>(i)] / mean_w;
        const double y = p.response[static_cast<Eigen::Index>(i)];
        gs.ytwy += wn * y * y;
        row.clear();
        for (const auto* c = p.row_begin(i); c != p.row_end(i); ++c) {
            const std::int32_t a = gs.active_of_full[*c];
            if (a >= 0) row.emplace_back(a, 1.0 / p.scales[*c]);
        }
        for (const auto& [a, va] : row) {
            gs.xtwy[a] += wn * va * y;
            for (const auto& [b, vb] : row)
                if (b >= a) gs.gram(a, b) += wn * va * vb;
        }
    }
    gs.gram.triangularView<Eigen::StrictlyLower>() =
        gs.gram.triangularView<Eigen::StrictlyUpper>().transpose();
    return gs;
}

namespace detail {

/// Cholesky with a symmetric-indefinite fallback.
struct SpdSolver {
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::LDLT<Eigen::MatrixXd> ldlt;
    bool use_ldlt = false;

    void compute(const Eigen::MatrixXd& a) {
        llt.compute(a);
        if (llt.info() != Eigen::Success) {
            use_ldlt = true;
            ldlt.compute(a);
            if (ldlt.info() != Eigen::Success)
                throw Error(ErrorKind::Numeric, "normal-equation factorization failed");
        }
    }
    template <typename Rhs>
    typename Rhs::PlainObject solve(const Rhs& b) const {
        if (use_ldlt) return ldlt.solve(b);
        return llt.solve(b);
    }
};

inline void require_full_rank_at_zero(const Eigen::MatrixXd& a) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (lu.rank() < a.rows())
        throw Error(ErrorKind::Numeric,
                    "Gram matrix is singular at lambda 0, so the least squares estimates are "
                    "not unique; refit with lambda > 0");
}

/// diag(A⁻¹ G A⁻¹) given A's factorization.
inline Eigen::VectorXd sandwich_diagonal(const SpdSolver& f, const Eigen::MatrixXd& gram) {
    const Eigen::Index pa = gram.rows();
    Eigen::MatrixXd inv = f.solve(Eigen::MatrixXd::Identity(pa, pa));
    Eigen::MatrixXd t = inv * gram;
    return (t.cwiseProduct(inv)).rowwise().sum();  // inv is symmetric
}

}  // namespace detail

struct RidgeFit {
    double lambda = 0.0;
    Eigen::VectorXd coefficients;  // original per-60 units, full column indexing
    Eigen::VectorXd std_errors;    // original units; +inf for degenerate columns
    Eigen::VectorXd beta_std;      // standardized coordinates, full column indexing
    double sigma2_hat = 0.0;
    double effective_df = 0.0;     // tr(H)
    double weighted_mse = 0.0;     // WRSS / N
    double wrss = 0.0;
    std::size_t n_rows = 0;
    GramSystem system;             // retained for diagnostics
};

/// Minimizes Σ ŵᵢ(yᵢ - ŷᵢ)² + λ Σ_pen β̃ₖ² over standardized coefficients
/// (ŵ = w/mean(w), intercept unpenalized), then back-transforms to per-60
/// units. Degenerate columns are dropped from the solve and reported with
/// coefficient 0 and infinite standard error.
inline RidgeFit solve_ridge(const design::DesignProblem& p, double lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw Error(ErrorKind::Config, "lambda must be finite and >= 0");

    RidgeFit fit;
    fit.lambda = lambda;
    fit.n_rows = p.n_rows;
    fit.system = build_gram(p);
    const GramSystem& gs = fit.system;

    Eigen::MatrixXd a = gs.penalized_matrix(lambda);
    if (lambda == 0.0) detail::require_full_rank_at_zero(a);
    detail::SpdSolver f;
    f.compute(a);

    Eigen::VectorXd beta = f.solve(gs.xtwy);
    fit.wrss = std::max(0.0, gs.ytwy - 2.0 * beta.dot(gs.xtwy) + beta.dot(gs.gram * beta));
    fit.weighted_mse = fit.wrss / gs.n;
    fit.effective_df = f.solve(gs.gram).trace();
    if (gs.n <= fit.effective_df)
        throw Error(ErrorKind::Numeric,
                    "overparameterized fit: rows do not exceed the effective degrees of freedom");
    fit.sigma2_hat = fit.wrss / (gs.n - fit.effective_df);

    const auto pfull = static_cast<Eigen::Index>(p.cols());
    const double inf = std::numeric_limits<double>::infinity();
    fit.coefficients = Eigen::VectorXd::Zero(pfull);
    fit.beta_std = Eigen::VectorXd::Zero(pfull);
    fit.std_errors = Eigen::VectorXd::Constant(pfull, inf);

    Eigen::VectorXd mdiag = detail::sandwich_diagonal(f, gs.gram);
    for (std::size_t k = 0; k < gs.active.size(); ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        const std::int32_t full = gs.active[k];
        fit.beta_std[full] = beta[ki];
        fit.coefficients[full] = beta[ki] / gs.scales_active[ki];
        fit.std_errors[full] =
            std::sqrt(std::max(0.0, fit.sigma2_hat * mdiag[ki])) / gs.scales_active[ki];
    }
    return fit;
}

/// SE_k = sqrt(σ̂² [A⁻¹GA⁻¹]_kk) / s_k with A = G + λP. Recomputed from the
/// fit's retained system; solve_ridge populates the same values.
inline Eigen::VectorXd standard_errors(const RidgeFit& fit, const design::DesignProblem& p) {
    const GramSystem& gs = fit.system;
    if (gs.n <= fit.effective_df)
        throw Error(ErrorKind::Numeric,
                    "overparameterized fit: rows do not exceed the effective degrees of freedom");
    detail::SpdSolver f;
    f.compute(gs.penalized_matrix(fit.lambda));
    Eigen::VectorXd mdiag = detail::sandwich_diagonal(f, gs.gram);
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd se = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p.cols()), inf);
    for (std::size_t k = 0; k < gs.active.size(); ++k) {
        const auto ki = static_cast<Eigen::Index>(k);
        se[gs.active[k]] =
            std::sqrt(std::max(0.0, fit.sigma2_hat * mdiag[ki])) / gs.scales_active[ki];
    }
    return se;
}

/// tr(H) via tr((G+λP)⁻¹G); never materializes the N×N hat matrix.
inline double hat_trace_exact(const design::DesignProblem& p, double lambda) {
    GramSystem gs = build_gram(p);
    detail::SpdSolver f;
    f.compute(gs.penalized_matrix(lambda));
    return f.solve(gs.gram).trace();
}

/// Variance inflation factors: diag((R+λP)⁻¹R(R+λP)⁻¹) on the
/// correlation-scaled Gram matrix R, so orthonormal columns at λ=0 give 1.
/// Entries for unpenalized or degenerate columns are NaN. At λ=0 a
/// rank-deficient system reports +inf for the columns involved.
inline Eigen::VectorXd vif(const design::DesignProblem& p, double lambda) {
    if (!std::isfinite(lambda) || lambda < 0.0)
        throw Error(ErrorKind::Config, "lambda must be finite and >= 0");
    GramSystem gs = build_gram(p);
    const Eigen::Index pa = gs.gram.rows();

    Eigen::VectorXd dsqrt = gs.gram.diagonal().cwiseSqrt();
    Eigen::MatrixXd r = gs.gram;
    for (Eigen::Index i = 0; i < pa; ++i)
        for (Eigen::Index j = 0; j < pa; ++j) r(i, j) /= dsqrt[i] * dsqrt[j];

    std::vector<Eigen::Index> pen, unpen;
    for (std::size_t k = 0; k < gs.penalized.size(); ++k)
        (gs.penalized[k] ? pen : unpen).push_back(static_cast<Eigen::Index>(k));

    const auto np = static_cast<Eigen::Index>(pen.size());
    const auto nu = static_cast<Eigen::Index>(unpen.size());
    Eigen::MatrixXd s(np, np);
    for (Eigen::Index i = 0; i < np; ++i)
        for (Eigen::Index j = 0; j < np; ++j) s(i, j) = r(pen[i], pen[j]);
    if (nu > 0) {
        Eigen::MatrixXd ruu(nu, nu), ruq(nu, np);
        for (Eigen::Index i = 0; i < nu; ++i) {
            for (Eigen::Index j = 0; j < nu; ++j) ruu(i, j) = r(unpen[i], unpen[j]);
            for (Eigen::Index j = 0; j < np; ++j) ruq(i, j) = r(unpen[i], pen[j]);
        }
        s -= ruq.transpose() * ruu.llt().solve(ruq);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success)
        throw Error(ErrorKind::Numeric, "eigendecomposition failed in VIF computation");
    const Eigen::VectorXd& d = es.eigenvalues();
    const Eigen::MatrixXd& v = es.eigenvectors();
    const double dmax = std::max(d.size() ? d[d.size() - 1] : 0.0, 0.0);
    const double rank_tol = 1e-10 * std::max(dmax, 1.0);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd out = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(p.cols()), nan);
    for (Eigen::Index q = 0; q < np; ++q) {
        double value = 0.0;
        bool unbounded = false;
        for (Eigen::Index m = 0; m < d.size(); ++m) {
            const double dm = std::max(d[m], 0.0);
            const double load = v(q, m) * v(q, m);
            if (lambda == 0.0 && dm <= rank_tol) {
                if (load > 1e-12) unbounded = true;
                continue;
            }
            value += load * dm / ((dm + lambda) * (dm + lambda));
        }
        out[gs.active[static_cast<std::size_t>(pen[q])]] = unbounded ? inf : value;
    }
    return out;
}

inline double max_vif(const Eigen::VectorXd& vifs) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < vifs.size(); ++i)
        if (!std::isnan(vifs[i])) m = std::max(m, vifs[i]);
    return m;
}

}  // namespace apm::solver
