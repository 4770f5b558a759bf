#include "bdm/ecm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <limits>

#include <Eigen/Dense>
#include <json.hpp>

#include "bdm/errors.hpp"

namespace bdm::ecm {

using nlohmann::json;

double predict_voltage(const EcmParams& p, double i_ma, double dod_mah, double t_c) {
    const double kp = p.dod_kp(t_c);
    if (!(kp > 0.0))
        throw DomainError("predict_voltage: dod_kp(T) <= 0 at T = " + std::to_string(t_c));
    // Keep the current term last so the model stays exactly affine in I.
    const double base =
        p.u0 - p.k_dod(t_c) * dod_mah - p.u_p(t_c) * std::exp(-dod_mah / kp);
    return base - p.r(t_c) * i_ma;
}

namespace {

struct PooledData {
    std::vector<double> i, dod, t, v;
    double t_min = 0.0, t_max = 0.0;
};

PooledData pool_samples(std::span<const DischargeSegment> segments) {
    PooledData d;
    for (const auto& seg : segments) {
        for (std::size_t k = 0; k < seg.samples.size(); ++k) {
            d.i.push_back(seg.samples[k].batt_current);
            d.dod.push_back(seg.dod[k]);
            d.t.push_back(seg.samples[k].batt_temp);
            d.v.push_back(seg.samples[k].batt_voltage);
        }
    }
    if (!d.t.empty()) {
        auto [mn, mx] = std::minmax_element(d.t.begin(), d.t.end());
        d.t_min = *mn;
        d.t_max = *mx;
    }
    return d;
}

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

struct InnerSolve {
    double sse = kInfeasible;
    EcmParams params;
    bool rank_deficient = false;
    std::string collinear;
};

// For fixed dod_kp = (qa, qb) the model is linear in the remaining
// coefficients; solve that subproblem by column-pivoted QR.
InnerSolve solve_linear(const PooledData& d, double qa, double qb, bool affine) {
    InnerSolve out;
    const std::size_t n = d.v.size();

    // dod_kp must stay positive over the data's temperature range; affine in T
    // means checking the endpoints suffices.
    if (!(qa + qb * d.t_min > 0.0) || !(qa + qb * d.t_max > 0.0)) return out;

    const int m = affine ? 7 : 4;
    Eigen::MatrixXd A(n, m);
    Eigen::VectorXd b(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double e = std::exp(-d.dod[k] / (qa + qb * d.t[k]));
        A(k, 0) = 1.0;
        if (affine) {
            A(k, 1) = -d.dod[k];
            A(k, 2) = -d.dod[k] * d.t[k];
            A(k, 3) = -d.i[k];
            A(k, 4) = -d.i[k] * d.t[k];
            A(k, 5) = -e;
            A(k, 6) = -e * d.t[k];
        } else {
            A(k, 1) = -d.dod[k];
            A(k, 2) = -d.i[k];
            A(k, 3) = -e;
        }
        b(k) = d.v[k];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < m) {
        static const char* kNamesAffine[7] = {"1",  "dod", "dod*t", "i",
                                              "i*t", "exp", "exp*t"};
        static const char* kNamesConst[4] = {"1", "dod", "i", "exp"};
        out.rank_deficient = true;
        const auto& perm = qr.colsPermutation().indices();
        for (int c = qr.rank(); c < m; ++c) {
            if (!out.collinear.empty()) out.collinear += ", ";
            out.collinear += affine ? kNamesAffine[perm[c]] : kNamesConst[perm[c]];
        }
        return out;
    }

    const Eigen::VectorXd theta = qr.solve(b);
    EcmParams p;
    p.dod_kp = {qa, qb};
    if (affine) {
        p.u0 = theta(0);
        p.k_dod = {theta(1), theta(2)};
        p.r = {theta(3), theta(4)};
        p.u_p = {theta(5), theta(6)};
    } else {
        p.u0 = theta(0);
        p.k_dod = {theta(1), 0.0};
        p.r = {theta(2), 0.0};
        p.u_p = {theta(3), 0.0};
    }

    // Reject candidates whose identified parameters break the physical-range
    // invariants anywhere on the data's temperature span.
    for (double t : {d.t_min, d.t_max}) {
        if (!(p.k_dod(t) > 0.0) || !(p.r(t) > 0.0) || p.u_p(t) < 0.0) return out;
    }

    out.params = p;
    out.sse = (A * theta - b).squaredNorm();
    return out;
}

struct NmResult {
    std::vector<double> x;
    double f = kInfeasible;
    InnerSolve best_solve;
    int iterations = 0;
    bool converged = false;
};

// Standard Nelder-Mead with a fixed, deterministic schedule.
NmResult nelder_mead(const PooledData& d, bool affine, std::vector<double> x0,
                     int max_iterations) {
    const double reflect = 1.0, expand = 2.0, contract = 0.5, shrink = 0.5;
    const std::size_t dim = x0.size();

    auto eval = [&](const std::vector<double>& x) {
        return solve_linear(d, x[0], dim > 1 ? x[1] : 0.0, affine);
    };

    struct Vertex {
        std::vector<double> x;
        InnerSolve s;
    };
    std::vector<Vertex> simplex;
    simplex.push_back({x0, eval(x0)});
    {
        auto x1 = x0;
        x1[0] = x0[0] * 1.3 + 0.5;
        simplex.push_back({x1, eval(x1)});
    }
    if (dim > 1) {
        auto x2 = x0;
        const double span = std::max(1.0, d.t_max - d.t_min);
        x2[1] = x0[1] + 0.2 * std::max(1.0, x0[0]) / span;
        simplex.push_back({x2, eval(x2)});
    }

    NmResult result;
    result.x = x0;
    auto note_best = [&](const Vertex& v) {
        if (v.s.sse < result.f) {
            result.f = v.s.sse;
            result.x = v.x;
            result.best_solve = v.s;
        }
    };
    for (const auto& v : simplex) note_best(v);

    auto order = [&] {
        std::stable_sort(simplex.begin(), simplex.end(),
                         [](const Vertex& a, const Vertex& b) { return a.s.sse < b.s.sse; });
    };
    auto centroid = [&] {
        std::vector<double> c(dim, 0.0);
        for (std::size_t v = 0; v + 1 < simplex.size(); ++v)
            for (std::size_t k = 0; k < dim; ++k) c[k] += simplex[v].x[k];
        for (auto& ck : c) ck /= static_cast<double>(simplex.size() - 1);
        return c;
    };

    int it = 0;
    for (; it < max_iterations; ++it) {
        order();
        const double f_best = simplex.front().s.sse;
        const double f_worst = simplex.back().s.sse;

        double diam = 0.0;
        double xmag = 0.0;
        for (const auto& v : simplex)
            for (std::size_t k = 0; k < dim; ++k) {
                diam = std::max(diam, std::abs(v.x[k] - simplex.front().x[k]));
                xmag = std::max(xmag, std::abs(v.x[k]));
            }
        const bool x_done = diam <= 1e-9 * (1.0 + xmag);
        const bool f_done = std::isfinite(f_best) && std::isfinite(f_worst) &&
                            (f_worst - f_best) <= 1e-12 * (std::abs(f_best) + 1e-30);
        if (x_done || f_done) {
            result.converged = true;
            break;
        }

        const auto c = centroid();
        auto blend = [&](double w) {
            std::vector<double> x(dim);
            for (std::size_t k = 0; k < dim; ++k)
                x[k] = c[k] + w * (simplex.back().x[k] - c[k]);
            return x;
        };

        const auto xr = blend(-reflect);
        auto sr = eval(xr);
        note_best({xr, sr});
        const double f_second_worst = simplex[simplex.size() - 2].s.sse;

        if (sr.sse < f_best) {
            const auto xe = blend(-expand);
            auto se = eval(xe);
            note_best({xe, se});
            if (se.sse < sr.sse)
                simplex.back() = {xe, se};
            else
                simplex.back() = {xr, sr};
        } else if (sr.sse < f_second_worst) {
            simplex.back() = {xr, sr};
        } else {
            const bool outside = sr.sse < f_worst;
            const auto xc = blend(outside ? -contract : contract);
            auto scv = eval(xc);
            note_best({xc, scv});
            if (scv.sse < std::min(sr.sse, f_worst)) {
                simplex.back() = {xc, scv};
            } else {
                for (std::size_t v = 1; v < simplex.size(); ++v) {
                    for (std::size_t k = 0; k < dim; ++k)
                        simplex[v].x[k] = simplex.front().x[k] +
                                          shrink * (simplex[v].x[k] - simplex.front().x[k]);
                    simplex[v].s = eval(simplex[v].x);
                    note_best(simplex[v]);
                }
            }
        }
    }
    result.iterations = it;
    return result;
}

} // namespace

FitReport fit_ecm(std::span<const DischargeSegment> segments, const EcmFitOptions& options) {
    const PooledData d = pool_samples(segments);
    if (d.v.size() < 50)
        throw InsufficientDataError("fit_ecm: need at least 50 pooled samples, got " +
                                    std::to_string(d.v.size()));

    const double t_span = d.t_max - d.t_min;
    const bool affine = options.affine_in_t && t_span > 1.0;

    // Probe the grid starts first: if every one of them yields a
    // rank-deficient subproblem the data itself is degenerate.
    std::size_t deficient = 0;
    std::string collinear;
    for (double q : options.dod_kp_grid) {
        const auto probe = solve_linear(d, q, 0.0, affine);
        if (probe.rank_deficient) {
            ++deficient;
            collinear = probe.collinear;
        }
    }
    if (deficient == options.dod_kp_grid.size())
        throw DegenerateDataError("fit_ecm: linear subproblem rank-deficient, collinear regressors: " +
                                  collinear);

    // Independent grid starts; results merged in grid order.
    std::vector<std::future<NmResult>> futures;
    futures.reserve(options.dod_kp_grid.size());
    for (double q : options.dod_kp_grid) {
        std::vector<double> x0 = affine ? std::vector<double>{q, 0.0} : std::vector<double>{q};
        futures.push_back(std::async(std::launch::async, [&d, affine, x0, &options] {
            return nelder_mead(d, affine, x0, options.max_outer_iterations);
        }));
    }

    NmResult best;
    int total_iterations = 0;
    bool best_converged = true;
    for (auto& f : futures) {
        NmResult r = f.get();
        total_iterations += r.iterations;
        if (r.f < best.f) {
            best = r;
            best_converged = r.converged;
        }
    }
    if (!std::isfinite(best.f))
        throw DegenerateDataError(
            "fit_ecm: no feasible dod_kp candidate satisfied the parameter-range invariants");

    FitReport report;
    report.params = best.best_solve.params;
    report.iterations = total_iterations;
    report.converged = best_converged;
    report.constant_parameter_mode = !affine;
    report.residuals = residuals(report.params, segments);
    double ss = 0.0;
    for (double r : report.residuals) ss += r * r;
    report.rmse = std::sqrt(ss / static_cast<double>(report.residuals.size()));
    for (const auto& seg : segments) {
        if (std::find(report.curves_used.begin(), report.curves_used.end(), seg.source_date) ==
            report.curves_used.end())
            report.curves_used.push_back(seg.source_date);
    }
    return report;
}

std::vector<double> residuals(const EcmParams& params,
                              std::span<const DischargeSegment> segments) {
    std::vector<double> out;
    for (const auto& seg : segments) {
        for (std::size_t k = 0; k < seg.samples.size(); ++k) {
            const auto& s = seg.samples[k];
            out.push_back(s.batt_voltage -
                          predict_voltage(params, s.batt_current, seg.dod[k], s.batt_temp));
        }
    }
    return out;
}

namespace {

json affine_to_json(const AffineInT& a) { return json{{"a", a.a}, {"b", a.b}}; }

AffineInT affine_from_json(const json& j) {
    return {j.at("a").get<double>(), j.at("b").get<double>()};
}

} // namespace

std::string params_to_json(const EcmParams& p) {
    json j{
        {"u0", p.u0},
        {"k_dod", affine_to_json(p.k_dod)},
        {"r", affine_to_json(p.r)},
        {"u_p", affine_to_json(p.u_p)},
        {"dod_kp", affine_to_json(p.dod_kp)},
        {"units",
         {{"u0", "V"},
          {"k_dod", "V per mA*h, affine in degC"},
          {"r", "V per mA, affine in degC"},
          {"u_p", "V, affine in degC"},
          {"dod_kp", "mA*h, affine in degC"}}},
    };
    return j.dump(2);
}

EcmParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("ecm params: invalid JSON: ") + e.what());
    }
    EcmParams p;
    try {
        p.u0 = j.at("u0").get<double>();
        p.k_dod = affine_from_json(j.at("k_dod"));
        p.r = affine_from_json(j.at("r"));
        p.u_p = affine_from_json(j.at("u_p"));
        p.dod_kp = affine_from_json(j.at("dod_kp"));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("ecm params: ") + e.what());
    }
    return p;
}

void save_params(const std::string& path, const EcmParams& p) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << params_to_json(p) << '\n';
}

EcmParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return params_from_json(text);
}

} // namespace bdm::ecm
