#include "mumarket/best_response.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <cstdio>
#include <string>

#include "mumarket/numeric.hpp"
#include "mumarket/root_find.hpp"

namespace mumarket {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed form for an exponential trader against an exponential maker, worked
// in log space: the coordinate stationarity gives z_i linear in ln(zeta) and
// the binding constraint pins zeta by a log-sum-exp.
std::vector<double> exp_exp_trade(const ExponentialUtility& v, const ExponentialUtility& u,
                                  const WealthVector& x, const WealthVector& y, double W0) {
    const std::size_t n = x.size();
    const double a = v.beta, b = u.beta;
    std::vector<double> lm(n), lt(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
        lm[i] = std::log(v.belief[i]) - a * x[i];
        lt[i] = std::log(u.belief[i]) - b * y[i];
        s[i] = (a * lt[i] + b * lm[i]) / (a + b);
    }
    double ln_zeta = (a + b) / b * (logsumexp(s) + b * W0);
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (lm[i] - lt[i] - ln_zeta) / (a + b);
    return z;
}

// Per-coordinate stationarity solve of ln marginal_V(x_i + z) -
// ln marginal_U(y_i - z) = ln zeta for general separable families; the left
// side is strictly decreasing in z between the domain-exit bounds. The
// residual saturates with the correct sign at (or beyond) either floor, so a
// root crushed against a floor beyond double resolution resolves to the
// float just inside it.
double coordinate_trade(const UtilitySpec& V, const UtilitySpec& U, std::size_t i, double x_i,
                        double y_i, double ln_zeta) {
    const double v_floor = V.coordinate_floor();
    const double u_floor = U.coordinate_floor();
    double lo_bound = v_floor == -kInf ? -kInf : v_floor - x_i;
    double hi_bound = u_floor == kInf || u_floor == -kInf ? kInf : y_i - u_floor;
    auto f = [&](double z) {
        double xv = x_i + z, yu = y_i - z;
        if (!(xv > v_floor)) return 1e300;
        if (!(yu > u_floor)) return -1e300;
        return V.log_marginal(i, xv) - U.log_marginal(i, yu) - ln_zeta;
    };
    auto fdf = [&](double z) {
        double fz = f(z);
        if (std::abs(fz) >= 1e300) return std::pair<double, double>(fz, 0.0);
        double d = V.dlog_marginal(i, x_i + z) + U.dlog_marginal(i, y_i - z);
        return std::pair<double, double>(fz, d);
    };
    double lo = lo_bound == -kInf ? -1.0 : 0.5 * lo_bound;
    double hi = hi_bound == kInf ? 1.0 : 0.5 * hi_bound;
    Bracket br = expand_bracket(f, lo, hi, "trade coordinate");
    return newton_root(fdf, br, 1e-13, "trade coordinate");
}

struct SameGammaPlan {
    double s_v, c_v, s_u, c_u, gamma;
    std::vector<double> lnK_ratio; // ln(K_U,i / K_V,i)
};

// When both marginals have the power shape K (s w + c)^(gamma-1) with a
// shared gamma, the coordinate stationarity is linear in z.
double same_gamma_trade(const SameGammaPlan& plan, std::size_t i, double x_i, double y_i,
                        double ln_zeta) {
    double r = std::exp((ln_zeta + plan.lnK_ratio[i]) / (plan.gamma - 1.0));
    return (r * (plan.s_u * y_i + plan.c_u) - (plan.s_v * x_i + plan.c_v)) /
           (plan.s_v + r * plan.s_u);
}

std::vector<double> separable_trade(const UtilitySpec& V, const UtilitySpec& U,
                                    const WealthVector& x, const WealthVector& y, double W0,
                                    double root_eps, bool allow_linear_step) {
    const std::size_t n = x.size();
    const double target = U.value_at_uniform(W0);

    auto pm_v = V.power_marginal();
    auto pm_u = U.power_marginal();
    SameGammaPlan plan;
    bool fast = allow_linear_step && pm_v && pm_u && pm_v->gamma == pm_u->gamma;
    if (fast) {
        plan.s_v = pm_v->s;
        plan.c_v = pm_v->c;
        plan.s_u = pm_u->s;
        plan.c_u = pm_u->c;
        plan.gamma = pm_v->gamma;
        plan.lnK_ratio.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            plan.lnK_ratio[i] = std::log(pm_u->K[i] / pm_v->K[i]);
        }
    }

    std::vector<double> z(n);
    auto fill_trade = [&](double ln_zeta) {
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = fast ? same_gamma_trade(plan, i, x[i], y[i], ln_zeta)
                        : coordinate_trade(V, U, i, x[i], y[i], ln_zeta);
        }
    };
    // Outer residual is increasing in zeta: larger zeta pushes every
    // coordinate toward the maker, raising U(y - z). At the small-zeta end
    // the maker rides its domain floor; rounding can land a coordinate on
    // the wrong side of it, which stands in for a hugely negative value.
    auto residual = [&](double ln_zeta) {
        fill_trade(ln_zeta);
        WealthVector post = y.plus(z, -1.0);
        if (!U.domain_contains(post)) return -1e300;
        return U.value(post) - target;
    };
    double f_tol = 0.1 * root_eps * std::max(std::abs(target), 1e-100);
    double ln_zeta = solve_monotone_root(residual, -30.0, 30.0, f_tol, "trade multiplier");
    fill_trade(ln_zeta);
    return z;
}

// Risk-measure pair: minimize h(z) = rho_V(x+z) + rho_U(y-z) by gradient
// descent with backtracking (the gradient is tangent to sum z = 0 because
// both dual optimizers are probability vectors), then shift along e to make
// the maker's constraint bind; h is constant along e.
std::vector<double> risk_measure_trade(const UtilitySpec& V, const UtilitySpec& U,
                                       const WealthVector& x, const WealthVector& y, double W0) {
    const std::size_t n = x.size();
    auto h_value = [&](const std::vector<double>& z) {
        return V.risk_dual(x.plus(z)).rho + U.risk_dual(y.plus(z, -1.0)).rho;
    };
    auto h_grad = [&](const std::vector<double>& z) {
        auto qv = V.risk_dual(x.plus(z)).q;
        auto qu = U.risk_dual(y.plus(z, -1.0)).q;
        std::vector<double> g(n);
        for (std::size_t i = 0; i < n; ++i) g[i] = qu[i] - qv[i];
        return g;
    };

    std::vector<double> z(n, 0.0);
    double h = h_value(z);
    double step = 1.0;
    const int max_iter = 10000;
    bool stalled = false;
    for (int it = 0; it < max_iter && !stalled; ++it) {
        std::vector<double> g = h_grad(z);
        double g_inf = 0.0, g_sq = 0.0;
        for (double e : g) {
            g_inf = std::max(g_inf, std::abs(e));
            g_sq += e * e;
        }
        if (g_inf <= 1e-10) break;
        step = std::min(step * 2.0, 1e6);
        std::vector<double> trial(n);
        while (true) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = z[i] - step * g[i];
            double h_trial = h_value(trial);
            if (h_trial <= h - 1e-4 * step * g_sq) {
                z = trial;
                h = h_trial;
                break;
            }
            step *= 0.5;
            if (step < 1e-18) {
                stalled = true; // progress below floating-point resolution
                break;
            }
        }
    }
    // Binding shift: rho_U(y - z - c e) = rho_U(y - z) + c.
    double rho_target = U.risk_dual(WealthVector::constant(n, W0)).rho;
    double c = rho_target - U.risk_dual(y.plus(z, -1.0)).rho;
    for (double& e : z) e += c;
    return z;
}

} // namespace

double stationarity_residual(const std::vector<double>& grad_v, const std::vector<double>& grad_u) {
    double vu = 0.0, uu = 0.0, u_max = 0.0;
    for (std::size_t i = 0; i < grad_v.size(); ++i) {
        vu += grad_v[i] * grad_u[i];
        uu += grad_u[i] * grad_u[i];
        u_max = std::max(u_max, grad_u[i]);
    }
    double zeta = vu / uu;
    double worst = 0.0;
    for (std::size_t i = 0; i < grad_v.size(); ++i) {
        worst = std::max(worst, std::abs(grad_v[i] - zeta * grad_u[i]));
    }
    return worst / (zeta * u_max);
}

double utility_gain(const UtilitySpec& V, const WealthVector& x, const TradeDelta& z) {
    return V.value_delta(x, z.entries());
}

BestResponse best_response(const UtilitySpec& V, const UtilitySpec& U, const WealthVector& x,
                           const WealthVector& y, double W0, double root_eps,
                           ResponseMethod method) {
    if (x.size() != y.size() || V.securities() != x.size() || U.securities() != y.size()) {
        throw std::invalid_argument("best_response: dimension mismatch");
    }
    if (!V.domain_contains(x)) throw std::domain_error("best_response: trader outside own domain");
    if (!U.domain_contains(y)) throw std::domain_error("best_response: maker outside own domain");

    const std::size_t n = x.size();
    const auto* ev = V.as_exponential();
    const auto* eu = U.as_exponential();
    if (method == ResponseMethod::Auto) {
        if (ev && eu) {
            method = ResponseMethod::ClosedForm;
        } else if (V.separable() && U.separable()) {
            method = ResponseMethod::NestedRoot;
        } else if (V.as_risk_measure() && U.as_risk_measure()) {
            method = ResponseMethod::Descent;
        } else {
            throw std::invalid_argument("best_response: unsupported utility family pairing");
        }
    }

    const double target = U.value_at_uniform(W0);
    const double u_now = U.value(y);
    std::vector<double> gv = V.gradient(x);
    std::vector<double> gu = U.gradient(y);

    // Already optimal: constraint binding and gradients aligned.
    double r0 = stationarity_residual(gv, gu);
    bool binding = std::abs(u_now - target) <= 1e-12 * std::max(1.0, std::abs(target));
    if (binding && r0 <= 1e-12) {
        return BestResponse{TradeDelta::zero(n), 0.0, r0};
    }

    std::vector<double> z;
    switch (method) {
        case ResponseMethod::ClosedForm:
            if (!ev || !eu) {
                throw std::invalid_argument("closed-form response needs exponential agents");
            }
            z = exp_exp_trade(*ev, *eu, x, y, W0);
            break;
        case ResponseMethod::NestedRoot:
        case ResponseMethod::NestedRootNewton:
            if (!V.separable() || !U.separable()) {
                throw std::invalid_argument("nested-root response needs separable agents");
            }
            z = separable_trade(V, U, x, y, W0, root_eps,
                                method == ResponseMethod::NestedRoot);
            break;
        case ResponseMethod::Descent:
            if (!V.as_risk_measure() || !U.as_risk_measure()) {
                throw std::invalid_argument("descent response needs risk-measure agents");
            }
            z = risk_measure_trade(V, U, x, y, W0);
            break;
        case ResponseMethod::Auto:
            break;
    }

    TradeDelta delta{std::move(z)};
    double gain = utility_gain(V, x, delta);
    // The loss floor tracks the solver tolerance chain: a residual of
    // root_eps in the maker's binding constraint surfaces in the trader's
    // utility scaled by the stationarity multiplier.
    if (gain < -100.0 * root_eps * std::max(1.0, std::abs(V.value(x)))) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.6e", gain);
        throw NumericalError(std::string("best_response produced a losing trade, gain = ") + buf);
    }
    double residual = stationarity_residual(V.gradient(x.plus(delta.entries())),
                                            U.gradient(y.plus(delta.entries(), -1.0)));
    return BestResponse{std::move(delta), gain, residual};
}

} // namespace mumarket
