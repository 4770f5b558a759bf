#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "bdm/errors.hpp"
#include "bdm/kernels.hpp"
#include "bdm/regression.hpp"

namespace bdm::regression {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct PathState {
    std::size_t n = 0;
    std::size_t p = 0;
    Matrix Xs;                       // standardized (or raw) columns
    std::vector<double> yc;          // centered (or raw) targets
    Matrix gram;                     // Xs^T Xs over usable columns
    std::vector<char> usable;
    std::vector<double> beta;        // solver frame
    std::vector<std::size_t> active;
    std::vector<char> in_active;
    std::vector<double> corr;        // Xs^T residual
    double alpha = 0.0;              // max |corr| over usable columns
};

void refresh_correlations(PathState& st) {
    std::vector<double> r = st.yc;
    for (std::size_t idx = 0; idx < st.active.size(); ++idx) {
        const std::size_t j = st.active[idx];
        if (st.beta[j] != 0.0) kernels::axpy(-st.beta[j], st.Xs.col(j), r.data(), st.n);
    }
    st.alpha = 0.0;
    for (std::size_t j = 0; j < st.p; ++j) {
        st.corr[j] = st.usable[j] ? kernels::dot(st.Xs.col(j), r.data(), st.n) : 0.0;
        st.alpha = std::max(st.alpha, std::abs(st.corr[j]));
    }
}

// Solve gram[A,A] x = rhs. Returns false when the active Gram is numerically
// singular.
bool solve_active(const PathState& st, std::span<const std::size_t> active,
                  std::span<const double> rhs, std::vector<double>& out) {
    const std::size_t m = active.size();
    Eigen::MatrixXd g(m, m);
    Eigen::VectorXd b(m);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t c = 0; c < m; ++c) g(a, c) = st.gram(active[a], active[c]);
        b(a) = rhs[a];
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success) return false;
    const auto& diag = ldlt.vectorD();
    double dmax = 0.0;
    for (Eigen::Index k = 0; k < diag.size(); ++k) dmax = std::max(dmax, std::abs(diag(k)));
    for (Eigen::Index k = 0; k < diag.size(); ++k)
        if (!(std::abs(diag(k)) > 1e-12 * std::max(dmax, 1e-300))) return false;
    Eigen::VectorXd x = ldlt.solve(b);
    if (!x.allFinite()) return false;
    out.assign(x.data(), x.data() + m);
    return true;
}

bool addable(const PathState& st, std::size_t j) {
    std::vector<std::size_t> ext(st.active.begin(), st.active.end());
    ext.push_back(j);
    std::vector<double> rhs(ext.size(), 1.0);
    std::vector<double> tmp;
    return solve_active(st, ext, rhs, tmp);
}

} // namespace

std::vector<double> LarsPath::coefficients_at(double alpha) const {
    std::vector<double> out(column_mean.size(), 0.0);
    if (knots.empty()) return out;
    if (alpha >= knots.front().alpha) return out;
    if (alpha <= knots.back().alpha) return knots.back().coefficients;
    std::size_t k = 1;
    while (k < knots.size() && knots[k].alpha > alpha) ++k;
    const auto& hi = knots[k - 1];
    const auto& lo = knots[k];
    const double w = (hi.alpha - alpha) / (hi.alpha - lo.alpha);
    for (std::size_t j = 0; j < out.size(); ++j)
        out[j] = hi.coefficients[j] + w * (lo.coefficients[j] - hi.coefficients[j]);
    return out;
}

double LarsPath::intercept_at(double alpha) const {
    const auto coefs = coefficients_at(alpha);
    double b = y_mean;
    for (std::size_t j = 0; j < coefs.size(); ++j) b -= coefs[j] * column_mean[j];
    return b;
}

LarsPath lars_path(const Matrix& X, std::span<const double> y, LarsMode mode,
                   bool standardize) {
    const std::size_t n = X.rows();
    const std::size_t p = X.cols();
    if (p < 1) throw ShapeError("lars_path: X needs at least one column");
    if (y.size() != n) throw ShapeError("lars_path: y length does not match X rows");
    if (n < 2) throw InsufficientDataError("lars_path: need at least 2 rows");

    LarsPath path;
    path.column_mean.assign(p, 0.0);
    path.column_norm.assign(p, 1.0);

    PathState st;
    st.n = n;
    st.p = p;
    st.Xs = Matrix(n, p);
    st.usable.assign(p, 1);
    st.beta.assign(p, 0.0);
    st.in_active.assign(p, 0);
    st.corr.assign(p, 0.0);

    for (std::size_t j = 0; j < p; ++j) {
        const double mu = standardize ? kernels::mean(X.col(j), n) : 0.0;
        kernels::scale_shift(X.col(j), -mu, 1.0, st.Xs.col(j), n);
        const double norm = std::sqrt(kernels::sumsq(st.Xs.col(j), n));
        path.column_mean[j] = mu;
        if (norm <= 1e-10 * std::sqrt(static_cast<double>(n)) * (1.0 + std::abs(mu))) {
            st.usable[j] = 0;
            path.excluded.push_back(j);
            path.events.push_back({0.0, "zero-variance column " + std::to_string(j) +
                                            " excluded"});
            std::fill(st.Xs.col(j), st.Xs.col(j) + n, 0.0);
            continue;
        }
        if (standardize) {
            kernels::scale_shift(st.Xs.col(j), 0.0, 1.0 / norm, st.Xs.col(j), n);
            path.column_norm[j] = norm;
        }
    }

    path.y_mean = standardize ? kernels::mean(y.data(), n) : 0.0;
    st.yc.resize(n);
    kernels::scale_shift(y.data(), -path.y_mean, 1.0, st.yc.data(), n);

    st.gram = Matrix(p, p);
    for (std::size_t a = 0; a < p; ++a) {
        if (!st.usable[a]) continue;
        for (std::size_t b = a; b < p; ++b) {
            if (!st.usable[b]) continue;
            const double g = kernels::dot(st.Xs.col(a), st.Xs.col(b), n);
            st.gram(a, b) = g;
            st.gram(b, a) = g;
        }
    }

    auto mapped_beta = [&] {
        std::vector<double> out(p, 0.0);
        for (std::size_t j = 0; j < p; ++j)
            if (st.beta[j] != 0.0) out[j] = st.beta[j] / path.column_norm[j];
        return out;
    };
    auto emit = [&](double alpha) {
        path.knots.push_back({alpha, mapped_beta(), st.active});
    };
    auto terminal_ols = [&] {
        if (!st.active.empty()) {
            std::vector<double> rhs(st.active.size());
            for (std::size_t a = 0; a < st.active.size(); ++a)
                rhs[a] = kernels::dot(st.Xs.col(st.active[a]), st.yc.data(), n);
            std::vector<double> sol;
            if (solve_active(st, st.active, rhs, sol)) {
                for (std::size_t a = 0; a < st.active.size(); ++a)
                    st.beta[st.active[a]] = sol[a];
            }
        }
        path.knots.push_back({0.0, mapped_beta(), st.active});
    };

    refresh_correlations(st);
    const double alpha0 = st.alpha;
    const double tiny = 1e-14 * std::max(1.0, alpha0);

    if (alpha0 <= tiny) {
        path.knots.push_back({0.0, mapped_beta(), {}});
        return path;
    }

    // First entry: largest absolute correlation, ties to the lowest index.
    {
        std::size_t j0 = kNone;
        for (std::size_t j = 0; j < p; ++j) {
            if (!st.usable[j]) continue;
            if (std::abs(st.corr[j]) >= st.alpha - tiny) {
                if (j0 == kNone) {
                    j0 = j;
                } else {
                    path.events.push_back({st.alpha, "entry tie between column " +
                                                         std::to_string(j0) + " and " +
                                                         std::to_string(j)});
                }
            }
        }
        st.active.push_back(j0);
        st.in_active[j0] = 1;
        emit(st.alpha);
    }

    std::size_t last_dropped = kNone;
    const std::size_t max_steps = 8 * p + 64;
    bool finished = false;

    for (std::size_t step = 0; step < max_steps && !finished; ++step) {
        // Direction: gram[A,A] d = sign(corr_A).
        std::vector<double> s(st.active.size());
        for (std::size_t a = 0; a < st.active.size(); ++a)
            s[a] = st.corr[st.active[a]] >= 0.0 ? 1.0 : -1.0;
        std::vector<double> d;
        if (!solve_active(st, st.active, s, d)) {
            // Most recent addition made the active Gram singular; retire it.
            const std::size_t j = st.active.back();
            st.active.pop_back();
            st.in_active[j] = 0;
            st.usable[j] = 0;
            st.beta[j] = 0.0;
            path.excluded.push_back(j);
            path.events.push_back(
                {st.alpha, "collinear column " + std::to_string(j) + " excluded"});
            if (st.active.empty()) {
                terminal_ols();
                finished = true;
            }
            continue;
        }

        // a_j = x_j^T Xs_A d for all usable columns, via the Gram matrix.
        std::vector<double> a(p, 0.0);
        for (std::size_t j = 0; j < p; ++j) {
            if (!st.usable[j]) continue;
            double acc = 0.0;
            for (std::size_t k = 0; k < st.active.size(); ++k)
                acc += st.gram(j, st.active[k]) * d[k];
            a[j] = acc;
        }

        const double C = st.alpha;
        double gamma_join = kInf;
        std::size_t j_join = kNone;
        while (true) {
            gamma_join = kInf;
            j_join = kNone;
            for (std::size_t j = 0; j < p; ++j) {
                if (!st.usable[j] || st.in_active[j] || j == last_dropped) continue;
                for (int sign = 0; sign < 2; ++sign) {
                    const double num = sign == 0 ? C - st.corr[j] : C + st.corr[j];
                    const double den = sign == 0 ? 1.0 - a[j] : 1.0 + a[j];
                    if (!(den > 1e-12)) continue;
                    double g = num / den;
                    if (g < -tiny || g >= gamma_join - tiny) {
                        if (j_join != kNone && std::abs(g - gamma_join) <= tiny && g >= -tiny)
                            path.events.push_back(
                                {C, "entry tie between column " + std::to_string(j_join) +
                                        " and " + std::to_string(j)});
                        continue;
                    }
                    gamma_join = std::max(g, 0.0);
                    j_join = j;
                }
            }
            if (j_join == kNone || addable(st, j_join)) break;
            st.usable[j_join] = 0;
            path.excluded.push_back(j_join);
            path.events.push_back(
                {C, "collinear column " + std::to_string(j_join) + " excluded"});
        }

        double gamma_cross = kInf;
        std::size_t idx_cross = kNone;
        if (mode == LarsMode::lasso) {
            for (std::size_t k = 0; k < st.active.size(); ++k) {
                const std::size_t j = st.active[k];
                if (d[k] == 0.0) continue;
                const double g = -st.beta[j] / d[k];
                if (g > tiny && g < gamma_cross) {
                    gamma_cross = g;
                    idx_cross = k;
                }
            }
        }

        const double gamma_terminal = C;
        double gamma = std::min({gamma_join, gamma_cross, gamma_terminal});

        if (gamma >= gamma_terminal - tiny) {
            terminal_ols();
            finished = true;
            break;
        }

        for (std::size_t k = 0; k < st.active.size(); ++k)
            st.beta[st.active[k]] += gamma * d[k];

        last_dropped = kNone;
        if (gamma_cross <= gamma_join) {
            const std::size_t j = st.active[idx_cross];
            st.beta[j] = 0.0;
            st.active.erase(st.active.begin() + static_cast<std::ptrdiff_t>(idx_cross));
            st.in_active[j] = 0;
            last_dropped = j;
            path.events.push_back({C - gamma, "column " + std::to_string(j) +
                                                  " dropped at its zero crossing"});
        } else {
            st.active.push_back(j_join);
            st.in_active[j_join] = 1;
        }

        refresh_correlations(st);

        if (st.active.empty() && st.alpha <= tiny) {
            path.knots.push_back({0.0, mapped_beta(), st.active});
            finished = true;
            break;
        }

        if (!path.knots.empty() && path.knots.back().alpha - st.alpha <= tiny) {
            // Membership changed without alpha moving; fold into the last knot.
            path.knots.back().coefficients = mapped_beta();
            path.knots.back().active = st.active;
        } else {
            emit(st.alpha);
        }
    }

    if (!finished) {
        path.events.push_back({st.alpha, "step cap reached, closing path"});
        terminal_ols();
    }
    return path;
}

} // namespace bdm::regression
