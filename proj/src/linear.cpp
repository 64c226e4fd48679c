#include <algorithm>
#include <chrono>
#include <cmath>

#include <Eigen/Dense>

#include "epibench/error.hpp"
#include "epibench/regression.hpp"

namespace epibench {

namespace {

struct Centered {
    std::vector<double> x_mean;
    double y_mean = 0.0;
    std::vector<double> w;  ///< normalized to sum to 1
};

Centered weighted_centering(const Matrix& x, std::span<const double> y, std::span<const double> w)
{
    const std::size_t n = x.rows;
    Centered c;
    c.w.assign(n, 1.0);
    if (!w.empty()) {
        c.w.assign(w.begin(), w.end());
    }
    double total = 0.0;
    for (double v : c.w) {
        total += v;
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        throw Error(ErrorCode::FitFailed, "sample weights must have a positive finite sum");
    }
    for (double& v : c.w) {
        v /= total;
    }
    c.x_mean.assign(x.cols, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
        c.y_mean += c.w[r] * y[r];
        for (std::size_t j = 0; j < x.cols; ++j) {
            c.x_mean[j] += c.w[r] * x(r, j);
        }
    }
    return c;
}

void require_shapes(const Matrix& x, std::span<const double> y, std::span<const double> w)
{
    if (x.rows != y.size()) {
        throw Error(ErrorCode::FitFailed, "feature rows and target length differ");
    }
    if (!w.empty() && w.size() != y.size()) {
        throw Error(ErrorCode::FitFailed, "weight length and target length differ");
    }
    if (x.rows == 0) {
        throw Error(ErrorCode::FitFailed, "cannot fit on zero rows");
    }
    for (double v : w) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw Error(ErrorCode::FitFailed, "sample weights must be finite and non-negative");
        }
    }
}

}  // namespace

double soft_threshold(double z, double gamma)
{
    if (z > gamma) {
        return z - gamma;
    }
    if (z < -gamma) {
        return z + gamma;
    }
    return 0.0;
}

double linear_objective(const LinearModel& m, const Matrix& x, std::span<const double> y,
                        std::span<const double> w, double alpha, double l1_ratio)
{
    double loss = 0.0;
    double total = 0.0;
    for (std::size_t r = 0; r < x.rows; ++r) {
        double pred = m.intercept;
        for (std::size_t j = 0; j < x.cols; ++j) {
            pred += x(r, j) * m.coef[j];
        }
        const double wr = w.empty() ? 1.0 : w[r];
        loss += wr * (y[r] - pred) * (y[r] - pred);
        total += wr;
    }
    double l1 = 0.0;
    double l2 = 0.0;
    for (double b : m.coef) {
        l1 += std::abs(b);
        l2 += b * b;
    }
    return loss / (2.0 * total) + alpha * (l1_ratio * l1 + 0.5 * (1.0 - l1_ratio) * l2);
}

LinearModel solve_ridge(const Matrix& x, std::span<const double> y, std::span<const double> w, double alpha)
{
    require_shapes(x, y, w);
    const Centered c = weighted_centering(x, y, w);
    const auto n = static_cast<Eigen::Index>(x.rows);
    const auto p = static_cast<Eigen::Index>(x.cols);

    // Rows scaled by sqrt(normalized weight) turn the weighted problem into
    // ordinary least squares on (a, b).
    Eigen::MatrixXd a(n, p);
    Eigen::VectorXd b(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double s = std::sqrt(c.w[static_cast<std::size_t>(r)]);
        b(r) = s * (y[static_cast<std::size_t>(r)] - c.y_mean);
        for (Eigen::Index j = 0; j < p; ++j) {
            a(r, j) = s * (x(static_cast<std::size_t>(r), static_cast<std::size_t>(j)) -
                           c.x_mean[static_cast<std::size_t>(j)]);
        }
    }

    Eigen::VectorXd beta(p);
    if (alpha == 0.0) {
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
        if (qr.rank() < p) {
            throw Error(ErrorCode::SingularSystem,
                        "least-squares system is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                            std::to_string(p) + "); use ridge with alpha > 0");
        }
        beta = qr.solve(b);
    } else {
        Eigen::MatrixXd gram = a.transpose() * a;
        gram.diagonal().array() += alpha;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success) {
            throw Error(ErrorCode::SingularSystem, "ridge normal equations could not be factored");
        }
        beta = ldlt.solve(a.transpose() * b);
    }

    LinearModel m;
    m.coef.assign(beta.data(), beta.data() + p);
    m.intercept = c.y_mean;
    for (std::size_t j = 0; j < x.cols; ++j) {
        m.intercept -= c.x_mean[j] * m.coef[j];
    }
    return m;
}

LinearModel coordinate_descent(const Matrix& x, std::span<const double> y, std::span<const double> w,
                               double alpha, double l1_ratio, double tol, std::size_t max_sweeps,
                               std::vector<double>* objective_trace)
{
    require_shapes(x, y, w);
    const Centered c = weighted_centering(x, y, w);
    const std::size_t n = x.rows;
    const std::size_t p = x.cols;

    // Centered copy, column-major for the coordinate sweeps.
    std::vector<double> xc(n * p);
    std::vector<double> col_norm(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t r = 0; r < n; ++r) {
            const double v = x(r, j) - c.x_mean[j];
            xc[j * n + r] = v;
            col_norm[j] += c.w[r] * v * v;
        }
    }
    std::vector<double> residual(n);
    for (std::size_t r = 0; r < n; ++r) {
        residual[r] = y[r] - c.y_mean;
    }

    const double l1_penalty = alpha * l1_ratio;
    const double l2_penalty = alpha * (1.0 - l1_ratio);
    LinearModel m;
    m.coef.assign(p, 0.0);

    auto record = [&] {
        if (objective_trace != nullptr) {
            LinearModel snapshot = m;
            snapshot.intercept = c.y_mean;
            for (std::size_t j = 0; j < p; ++j) {
                snapshot.intercept -= c.x_mean[j] * m.coef[j];
            }
            objective_trace->push_back(linear_objective(snapshot, x, y, w, alpha, l1_ratio));
        }
    };
    record();

    bool converged = p == 0;
    for (std::size_t sweep = 1; sweep <= max_sweeps && !converged; ++sweep) {
        double max_change = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double* column = &xc[j * n];
            const double old = m.coef[j];
            double rho = 0.0;
            for (std::size_t r = 0; r < n; ++r) {
                rho += c.w[r] * column[r] * residual[r];
            }
            rho += col_norm[j] * old;
            const double denom = col_norm[j] + l2_penalty;
            const double updated = denom > 0.0 ? soft_threshold(rho, l1_penalty) / denom : 0.0;
            const double delta = updated - old;
            if (delta != 0.0) {
                for (std::size_t r = 0; r < n; ++r) {
                    residual[r] -= delta * column[r];
                }
                m.coef[j] = updated;
            }
            max_change = std::max(max_change, std::abs(delta));
        }
        m.sweeps = sweep;
        record();
        converged = max_change <= tol;
    }
    if (!converged) {
        throw Error(ErrorCode::NonConvergence,
                    "coordinate descent did not converge within " + std::to_string(max_sweeps) + " sweeps");
    }

    m.intercept = c.y_mean;
    for (std::size_t j = 0; j < p; ++j) {
        m.intercept -= c.x_mean[j] * m.coef[j];
    }
    return m;
}

FittedModel fit_linear_family(const RegressorSpec& spec, const Matrix& x, std::span<const double> y,
                              std::span<const double> w)
{
    require_valid(spec);
    const auto start = std::chrono::steady_clock::now();
    const auto& hp = spec.hp;
    LinearModel m;
    switch (spec.kind) {
    case RegressorKind::Ols:
        m = solve_ridge(x, y, w, 0.0);
        break;
    case RegressorKind::Ridge:
        m = solve_ridge(x, y, w, hp.alpha);
        break;
    case RegressorKind::Lasso:
        m = coordinate_descent(x, y, w, hp.alpha, 1.0, hp.tol, hp.max_sweeps);
        break;
    case RegressorKind::ElasticNet:
        m = coordinate_descent(x, y, w, hp.alpha, hp.l1_ratio, hp.tol, hp.max_sweeps);
        break;
    default:
        throw Error(ErrorCode::ConfigInvalid, "fit_linear_family needs ols, ridge, lasso or elastic_net");
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return FittedModel(spec, std::move(m), elapsed.count());
}

}  // namespace epibench
