#include "mumarket/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "mumarket/numeric.hpp"
#include "mumarket/pricing.hpp"
#include "mumarket/root_find.hpp"

namespace mumarket {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

ParetoSolution solve_pareto(const std::vector<double>& omega, const UtilitySpec& maker, double W0,
                            const std::vector<UtilitySpec>& traders, const std::vector<double>& w0,
                            double root_eps) {
    const std::size_t J = traders.size();
    const std::size_t I = maker.securities();
    if (omega.size() != J || w0.size() != J) {
        throw std::invalid_argument("solve_pareto: omega/wealth size mismatch");
    }
    for (double w : omega) {
        if (!(w > 0.0)) throw std::invalid_argument("solve_pareto: weights must be positive");
    }
    if (!maker.separable()) {
        throw std::invalid_argument("solve_pareto supports separable expected-utility families only");
    }
    for (const auto& v : traders) {
        if (!v.separable()) {
            throw std::invalid_argument("solve_pareto supports separable expected-utility families only");
        }
    }

    double w_all = W0;
    for (double w : w0) w_all += w;
    const double target = maker.value_at_uniform(W0);

    // Innermost: positions from inverse marginals. Middle: per-state
    // multiplier mu_i clears conservation (residual strictly decreasing in
    // mu_i). Outer: lambda makes the maker's constraint bind (increasing).
    auto state_positions = [&](std::size_t i, double mu_i, double lambda, double& y_i,
                               std::vector<double>& x_i) {
        y_i = maker.inverse_marginal(i, mu_i / lambda);
        for (std::size_t j = 0; j < J; ++j) {
            x_i[j] = traders[j].inverse_marginal(i, mu_i / omega[j]);
        }
    };
    double conservation_tol = std::max(1e-11, 1e-12 * std::abs(w_all));

    std::vector<double> mu(I);
    auto solve_states = [&](double lambda) {
        std::vector<double> x_i(J);
        for (std::size_t i = 0; i < I; ++i) {
            auto residual = [&](double ln_mu) {
                double y_i;
                state_positions(i, std::exp(ln_mu), lambda, y_i, x_i);
                double total = y_i;
                for (double x : x_i) total += x;
                return total - w_all;
            };
            double ln_mu = solve_monotone_root(residual, -1.0, 1.0, conservation_tol,
                                               "pareto state multiplier");
            mu[i] = std::exp(ln_mu);
        }
    };
    auto maker_position = [&](double lambda) {
        std::vector<double> y(I);
        for (std::size_t i = 0; i < I; ++i) y[i] = maker.inverse_marginal(i, mu[i] / lambda);
        return WealthVector(std::move(y));
    };
    auto outer_residual = [&](double ln_lambda) {
        double lambda = std::exp(ln_lambda);
        solve_states(lambda);
        return maker.value(maker_position(lambda)) - target;
    };
    // The binding residual lives on the utility scale, which exponential
    // families can push to tiny magnitudes; an absolute tolerance would leave
    // the multiplier loose along its flat direction.
    double binding_tol = root_eps * std::max(std::abs(target), 1e-100);
    double ln_lambda = solve_monotone_root(outer_residual, -1.0, 1.0, binding_tol,
                                           "pareto binding multiplier");
    double lambda = std::exp(ln_lambda);
    solve_states(lambda);

    WealthVector y_star = maker_position(lambda);
    std::vector<WealthVector> x_star;
    x_star.reserve(J);
    for (std::size_t j = 0; j < J; ++j) {
        std::vector<double> xj(I);
        for (std::size_t i = 0; i < I; ++i) xj[i] = traders[j].inverse_marginal(i, mu[i] / omega[j]);
        x_star.emplace_back(std::move(xj));
    }
    SimplexVector price = instantaneous_price(maker, y_star);
    ParetoSolution sol{std::move(x_star), std::move(y_star), std::move(price), lambda, mu, 0.0};

    // Residuals recomputed from scratch: stationarity, conservation, binding.
    double worst = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
        double scale = std::max(1.0, std::abs(mu[i]));
        worst = std::max(worst,
                         std::abs(lambda * maker.marginal(i, sol.y_star[i]) - mu[i]) / scale);
        double total = sol.y_star[i];
        for (std::size_t j = 0; j < J; ++j) {
            worst = std::max(worst, std::abs(omega[j] * traders[j].marginal(i, sol.x_star[j][i]) -
                                             mu[i]) / scale);
            total += sol.x_star[j][i];
        }
        worst = std::max(worst, std::abs(total - w_all) / std::max(1.0, std::abs(w_all)));
    }
    worst = std::max(worst, std::abs(maker.value(sol.y_star) - target) /
                                 std::max(1.0, std::abs(target)));
    sol.kkt_residual = worst;
    return sol;
}

namespace {

// Summed-marginal root for the aggregate stationary point of relative
// entropy penalties: q_i(nu) solves sum_j f_ij(q_i) = nu per coordinate, and
// nu is pinned by sum_i q_i = 1.
SimplexVector relative_entropy_aggregate(const std::vector<PenaltySpec>& penalties,
                                         double root_eps) {
    const std::size_t I = penalties.front().securities();
    auto summed_marginal = [&](std::size_t i, double q) {
        double s = 0.0;
        for (const auto& pen : penalties) s += pen.marginal(i, q);
        return s;
    };
    constexpr double q_cap = 4.0;
    auto coordinate = [&](std::size_t i, double nu) {
        if (summed_marginal(i, q_cap) <= nu) return q_cap;
        auto f = [&](double q) { return summed_marginal(i, q) - nu; };
        Bracket br{1e-300, q_cap, f(1e-300), f(q_cap)};
        return brent_root(f, br, 1e-14, "aggregate coordinate");
    };
    double nu_lo = kInf, nu_hi = -kInf;
    for (std::size_t i = 0; i < I; ++i) {
        nu_lo = std::min(nu_lo, summed_marginal(i, 1e-14));
        nu_hi = std::max(nu_hi, summed_marginal(i, 1.0));
    }
    auto residual = [&](double nu) {
        double s = 0.0;
        for (std::size_t i = 0; i < I; ++i) s += coordinate(i, nu);
        return s - 1.0;
    };
    Bracket br{nu_lo, nu_hi, residual(nu_lo), residual(nu_hi)};
    double nu = brent_root(residual, br, root_eps, "aggregate multiplier");
    std::vector<double> q(I);
    for (std::size_t i = 0; i < I; ++i) q[i] = coordinate(i, nu);
    return SimplexVector(normalized(q));
}

} // namespace

SimplexVector aggregate_penalty_price(const std::vector<PenaltySpec>& penalties, double root_eps) {
    if (penalties.empty()) throw std::invalid_argument("aggregate price needs at least one penalty");
    const std::size_t I = penalties.front().securities();
    for (const auto& pen : penalties) {
        if (pen.securities() != I) throw std::invalid_argument("aggregate price: dimension mismatch");
    }
    bool all_re = true, all_power = true, all_log = true;
    for (const auto& pen : penalties) {
        all_re &= pen.family() == PenaltySpec::Family::RelativeEntropy;
        all_power &= pen.family() == PenaltySpec::Family::Power;
        all_log &= pen.family() == PenaltySpec::Family::Log;
    }
    if (all_re) return relative_entropy_aggregate(penalties, root_eps);
    if (all_power) {
        double gamma = penalties.front().as_power()->gamma;
        std::vector<double> h;
        std::vector<SimplexVector> beliefs;
        bool any_h = false;
        for (const auto& pen : penalties) {
            const auto* p = pen.as_power();
            if (p->gamma != gamma) {
                throw std::invalid_argument("power-penalty aggregation needs a common gamma");
            }
            h.push_back(p->h);
            beliefs.push_back(p->belief);
            any_h |= p->h > 0.0;
        }
        if (!any_h) throw std::invalid_argument("power-penalty aggregation needs some h > 0");
        std::vector<SimplexVector> rest(beliefs.begin() + 1, beliefs.end());
        return power_mean_price(beliefs.front(), rest, h, gamma);
    }
    if (all_log) {
        std::vector<double> p(I, 0.0);
        bool any_h = false;
        for (const auto& pen : penalties) {
            const auto* lp = pen.as_log();
            for (std::size_t i = 0; i < I; ++i) p[i] += lp->h * lp->belief[i];
            any_h |= lp->h > 0.0;
        }
        if (!any_h) throw std::invalid_argument("log-penalty aggregation needs some h > 0");
        return SimplexVector(normalized(p));
    }
    throw std::invalid_argument("aggregate price: mixed penalty families are unsupported");
}

StationaryKind classify_penalty_stationary(const std::vector<PenaltySpec>& penalties,
                                           const SimplexVector& q) {
    bool any_pos = false, any_neg = false;
    for (std::size_t i = 0; i < q.size(); ++i) {
        double d = 0.0;
        for (const auto& pen : penalties) d += pen.marginal_derivative(i, q[i]);
        if (d > 0.0) any_pos = true;
        if (d < 0.0) any_neg = true;
    }
    if (any_pos && !any_neg) return StationaryKind::Minimum;
    if (any_neg && !any_pos) return StationaryKind::Maximum;
    return StationaryKind::Saddle;
}

ParetoSolution risk_measure_equilibrium(const std::vector<PenaltySpec>& penalties, double W0,
                                        const std::vector<double>& w0, double root_eps) {
    if (penalties.size() != w0.size() + 1) {
        throw std::invalid_argument("risk_measure_equilibrium needs maker + one penalty per trader");
    }
    for (const auto& pen : penalties) {
        if (!pen.increasing_marginals()) {
            throw std::invalid_argument("risk_measure_equilibrium needs increasing-marginal penalties");
        }
    }
    const std::size_t J = w0.size();
    const std::size_t I = penalties.front().securities();
    double w_all = W0;
    for (double w : w0) w_all += w;

    SimplexVector q = aggregate_penalty_price(penalties, root_eps);

    // At the shared optimizer, grad alpha_j(q) differs from a multiple of e
    // only through each agent's own multiplier: x_j = lambda_j e - grad
    // alpha_j(q). The maker's lambda is pinned by the binding constraint and
    // nu (the summed-marginal level) by conservation.
    auto grad_alpha = [&](const PenaltySpec& pen) {
        std::vector<double> g(I);
        for (std::size_t i = 0; i < I; ++i) g[i] = pen.marginal(i, q[i]);
        return g;
    };
    double nu = 0.0;
    for (std::size_t i = 0; i < I; ++i) {
        double s = 0.0;
        for (const auto& pen : penalties) s += pen.marginal(i, q[i]);
        nu += s / static_cast<double>(I);
    }

    UtilitySpec maker = UtilitySpec::risk_measure(penalties[0]);
    double rho_target = -maker.value_at_uniform(W0);
    std::vector<double> g0 = grad_alpha(penalties[0]);
    double qg0 = 0.0;
    for (std::size_t i = 0; i < I; ++i) qg0 += q[i] * g0[i];
    double alpha0 = penalties[0].value(q);
    double lambda0 = -rho_target + qg0 - alpha0;

    std::vector<double> y(I);
    for (std::size_t i = 0; i < I; ++i) y[i] = lambda0 - g0[i];
    WealthVector y_star(std::move(y));

    double lambda_j = (w_all + nu - lambda0) / static_cast<double>(J);
    std::vector<WealthVector> x_star;
    x_star.reserve(J);
    for (std::size_t j = 0; j < J; ++j) {
        std::vector<double> gj = grad_alpha(penalties[j + 1]);
        std::vector<double> xj(I);
        for (std::size_t i = 0; i < I; ++i) xj[i] = lambda_j - gj[i];
        x_star.emplace_back(std::move(xj));
    }
    SimplexVector price = instantaneous_price(maker, y_star);
    ParetoSolution sol{std::move(x_star), std::move(y_star), std::move(price), 1.0, q.entries(),
                       0.0};

    // Residuals: every agent's dual optimizer against q, conservation, binding.
    double worst = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        worst = std::max(worst, std::abs(sol.price[i] - q[i]));
    }
    for (std::size_t j = 0; j < J; ++j) {
        UtilitySpec vj = UtilitySpec::risk_measure(penalties[j + 1]);
        auto qj = vj.risk_dual(sol.x_star[j]).q;
        for (std::size_t i = 0; i < I; ++i) worst = std::max(worst, std::abs(qj[i] - q[i]));
    }
    for (std::size_t i = 0; i < I; ++i) {
        double total = sol.y_star[i];
        for (std::size_t j = 0; j < J; ++j) total += sol.x_star[j][i];
        worst = std::max(worst, std::abs(total - w_all) / std::max(1.0, std::abs(w_all)));
    }
    worst = std::max(worst, std::abs(-maker.risk_dual(sol.y_star).rho - maker.value_at_uniform(W0)) /
                                 std::max(1.0, std::abs(rho_target)));
    sol.kkt_residual = worst;
    return sol;
}

SimplexVector exp_limiting_price(const SimplexVector& theta, double beta,
                                 const std::vector<SimplexVector>& beliefs,
                                 const std::vector<double>& alphas) {
    if (beliefs.size() != alphas.size()) {
        throw std::invalid_argument("exp_limiting_price: beliefs/alphas size mismatch");
    }
    if (!(beta > 0.0)) throw std::invalid_argument("exp_limiting_price: beta must be positive");
    double inv_sum = 1.0 / beta;
    for (double a : alphas) {
        if (!(a > 0.0)) throw std::invalid_argument("exp_limiting_price: alphas must be positive");
        inv_sum += 1.0 / a;
    }
    const std::size_t I = theta.size();
    std::vector<double> logs(I, 0.0);
    for (std::size_t i = 0; i < I; ++i) {
        logs[i] = (1.0 / beta) / inv_sum * std::log(theta[i]);
        for (std::size_t j = 0; j < beliefs.size(); ++j) {
            logs[i] += (1.0 / alphas[j]) / inv_sum * std::log(beliefs[j][i]);
        }
    }
    return SimplexVector(softmax_from_logs(logs));
}

SimplexVector exp_price_update(const SimplexVector& p, const WealthVector& x_j,
                               const SimplexVector& pi_j, double alpha_j, double beta) {
    if (!(alpha_j > 0.0) || !(beta > 0.0)) {
        throw std::invalid_argument("exp_price_update: risk aversions must be positive");
    }
    const std::size_t I = p.size();
    std::vector<double> logs(I);
    for (std::size_t i = 0; i < I; ++i) {
        double adj_belief = std::log(pi_j[i]) - alpha_j * x_j[i];
        logs[i] = (alpha_j * std::log(p[i]) + beta * adj_belief) / (alpha_j + beta);
    }
    return SimplexVector(softmax_from_logs(logs));
}

SimplexVector power_mean_price(const SimplexVector& theta,
                               const std::vector<SimplexVector>& beliefs,
                               const std::vector<double>& h, double gamma) {
    if (h.size() != beliefs.size() + 1) {
        throw std::invalid_argument("power_mean_price: needs one weight per agent, maker first");
    }
    if (!(gamma < 1.0)) throw std::invalid_argument("power_mean_price: gamma must be < 1");
    bool any = false;
    for (double w : h) {
        if (!(w >= 0.0)) throw std::invalid_argument("power_mean_price: weights must be >= 0");
        any |= w > 0.0;
    }
    if (!any) throw std::invalid_argument("power_mean_price: all weights are zero");
    const double r = 1.0 / (1.0 - gamma);
    const std::size_t I = theta.size();
    std::vector<double> p(I);
    for (std::size_t i = 0; i < I; ++i) {
        double inner = h[0] * std::pow(theta[i], r);
        for (std::size_t j = 0; j < beliefs.size(); ++j) {
            inner += h[j + 1] * std::pow(beliefs[j][i], r);
        }
        p[i] = std::pow(inner, 1.0 - gamma);
    }
    return SimplexVector(normalized(p));
}

std::vector<double> omega_dagger(const std::vector<double>& a, const std::vector<double>& b,
                                 const std::vector<double>& w0, double gamma) {
    if (a.size() != b.size() || a.size() != w0.size()) {
        throw std::invalid_argument("omega_dagger: parameter size mismatch");
    }
    if (!(gamma < 1.0)) throw std::invalid_argument("omega_dagger: gamma must be < 1");
    std::vector<double> omega(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!(a[j] > 0.0) || !(b[j] >= 0.0) || !(w0[j] > 0.0)) {
            throw std::invalid_argument("omega_dagger: needs a > 0, b >= 0, w0 > 0");
        }
        omega[j] = std::pow(a[j] * w0[j] / (1.0 - gamma) + b[j], 1.0 - gamma) / a[j];
    }
    return omega;
}

SimplexVector hara_approx_price(const SimplexVector& theta,
                                const std::vector<SimplexVector>& beliefs, double w_hat0,
                                const std::vector<double>& w_hat, double gamma) {
    if (!(w_hat0 > 0.0)) throw std::invalid_argument("hara_approx_price: maker endowment must be > 0");
    for (double w : w_hat) {
        if (!(w > 0.0)) throw std::invalid_argument("hara_approx_price: endowments must be > 0");
    }
    std::vector<double> h;
    h.reserve(w_hat.size() + 1);
    h.push_back(w_hat0);
    h.insert(h.end(), w_hat.begin(), w_hat.end());
    // The inner denominator is a common factor, so the normalized price
    // coincides with the endowment-weighted power mean.
    return power_mean_price(theta, beliefs, h, gamma);
}

SimplexVector crra_limiting_price(const SimplexVector& theta,
                                  const std::vector<SimplexVector>& beliefs, double c_M,
                                  const std::vector<double>& c, double gamma) {
    std::vector<double> h;
    h.reserve(c.size() + 1);
    h.push_back(c_M);
    h.insert(h.end(), c.begin(), c.end());
    return power_mean_price(theta, beliefs, h, gamma);
}

std::vector<double> fit_power_mean_weights(const SimplexVector& theta,
                                           const std::vector<SimplexVector>& beliefs, double gamma,
                                           const SimplexVector& price) {
    const std::size_t I = theta.size();
    const std::size_t K = beliefs.size() + 1;
    const double r = 1.0 / (1.0 - gamma);
    // Linear in the weights after mapping through the power r: solve the
    // non-negative least squares || B c - price^r || by projected gradient.
    std::vector<std::vector<double>> basis(K, std::vector<double>(I));
    for (std::size_t i = 0; i < I; ++i) basis[0][i] = std::pow(theta[i], r);
    for (std::size_t k = 1; k < K; ++k) {
        for (std::size_t i = 0; i < I; ++i) basis[k][i] = std::pow(beliefs[k - 1][i], r);
    }
    std::vector<double> target(I);
    for (std::size_t i = 0; i < I; ++i) target[i] = std::pow(price[i], r);

    std::vector<double> c(K, 1.0 / static_cast<double>(K));
    double lipschitz = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double row = 0.0;
        for (std::size_t i = 0; i < I; ++i) row += basis[k][i] * basis[k][i];
        lipschitz += row;
    }
    double step = 1.0 / (2.0 * lipschitz);
    std::vector<double> resid(I), grad(K);
    for (int it = 0; it < 20000; ++it) {
        for (std::size_t i = 0; i < I; ++i) {
            double model = 0.0;
            for (std::size_t k = 0; k < K; ++k) model += c[k] * basis[k][i];
            resid[i] = model - target[i];
        }
        double g_inf = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            grad[k] = 0.0;
            for (std::size_t i = 0; i < I; ++i) grad[k] += 2.0 * resid[i] * basis[k][i];
            g_inf = std::max(g_inf, std::abs(grad[k]));
        }
        if (g_inf < 1e-14) break;
        for (std::size_t k = 0; k < K; ++k) c[k] = std::max(0.0, c[k] - step * grad[k]);
    }
    double sum = 0.0;
    for (double v : c) sum += v;
    if (sum > 0.0) {
        for (double& v : c) v /= sum;
    }
    return c;
}

double kld(const SimplexVector& p, const SimplexVector& q) {
    if (p.size() != q.size()) throw std::invalid_argument("kld: dimension mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (!(q[i] > 0.0)) throw std::domain_error("kld: q vanishes where p has mass");
        d += p[i] * std::log(p[i] / q[i]);
    }
    return d;
}

double delta_x(const std::vector<WealthVector>& x_sim, const std::vector<WealthVector>& x_ref) {
    if (x_sim.size() != x_ref.size()) throw std::invalid_argument("delta_x: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < x_sim.size(); ++j) {
        double d2 = 0.0, n2 = 0.0;
        for (std::size_t i = 0; i < x_sim[j].size(); ++i) {
            double d = x_sim[j][i] - x_ref[j][i];
            d2 += d * d;
            n2 += x_sim[j][i] * x_sim[j][i];
        }
        num += std::sqrt(d2);
        den += std::sqrt(n2);
    }
    if (!(den > 0.0)) throw std::invalid_argument("delta_x: reference norms vanish");
    return num / den;
}

} // namespace mumarket
