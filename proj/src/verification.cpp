#include "mumarket/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "mumarket/best_response.hpp"
#include "mumarket/config.hpp"
#include "mumarket/equilibrium.hpp"
#include "mumarket/errors.hpp"
#include "mumarket/experiments.hpp"
#include "mumarket/numeric.hpp"
#include "mumarket/pricing.hpp"
#include "mumarket/rng.hpp"
#include "mumarket/trading.hpp"

namespace mumarket {

bool VerifyReport::all_binding_pass() const {
    for (const auto& c : checks) {
        if (c.binding && !c.pass) return false;
    }
    return true;
}

std::vector<double> optimize_on_simplex(const std::function<double(const std::vector<double>&)>& f,
                                        std::size_t dims, bool maximize, int iterations) {
    std::vector<double> u(dims, 0.0);
    auto point = [&](const std::vector<double>& uu) { return softmax_from_logs(uu); };
    auto value = [&](const std::vector<double>& uu) {
        double v = f(point(uu));
        return maximize ? v : -v;
    };
    const double h = 1e-6;
    double fv = value(u);
    double step = 0.5;
    std::vector<double> grad(dims), trial(dims);
    for (int it = 0; it < iterations; ++it) {
        double g_inf = 0.0;
        for (std::size_t i = 0; i < dims; ++i) {
            std::vector<double> up = u, dn = u;
            up[i] += h;
            dn[i] -= h;
            grad[i] = (value(up) - value(dn)) / (2.0 * h);
            g_inf = std::max(g_inf, std::abs(grad[i]));
        }
        if (g_inf < 1e-12) break;
        bool accepted = false;
        for (int back = 0; back < 60; ++back) {
            for (std::size_t i = 0; i < dims; ++i) trial[i] = u[i] + step * grad[i];
            double ft = value(trial);
            if (ft > fv) {
                u = trial;
                fv = ft;
                step *= 1.4;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;
    }
    return point(u);
}

namespace {

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

SimplexVector random_belief(SplitMix64& rng, std::size_t n) {
    // Dirichlet(1) softened toward uniform so no outcome is vanishingly rare.
    std::vector<double> p(n);
    double total = 0.0;
    for (double& e : p) {
        e = -std::log(rng.uniform() + 1e-300);
        total += e;
    }
    for (double& e : p) e = 0.85 * e / total + 0.15 / static_cast<double>(n);
    return SimplexVector(normalized(p));
}

double max_abs_diff(const SimplexVector& a, const SimplexVector& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

struct RunRecord {
    Market market;
    Trajectory traj;
};

Market sequence_check_exp_market() {
    std::vector<UtilitySpec> traders;
    traders.push_back(UtilitySpec::exponential(SimplexVector({0.6, 0.25, 0.15}), 0.7));
    traders.push_back(UtilitySpec::exponential(SimplexVector({0.15, 0.55, 0.3}), 2.0));
    traders.push_back(UtilitySpec::exponential(SimplexVector({0.3, 0.3, 0.4}), 1.2));
    return Market{UtilitySpec::exponential(SimplexVector({0.2, 0.5, 0.3}), 1.5), 5.0,
                  std::move(traders), {5.0, 5.0, 5.0}};
}

Market sequence_check_risk_market() {
    std::vector<UtilitySpec> traders;
    traders.push_back(
        UtilitySpec::risk_measure(PenaltySpec::relative_entropy(SimplexVector({0.6, 0.2, 0.2}), 0.8)));
    traders.push_back(
        UtilitySpec::risk_measure(PenaltySpec::relative_entropy(SimplexVector({0.1, 0.4, 0.5}), 2.0)));
    return Market{
        UtilitySpec::risk_measure(PenaltySpec::relative_entropy(SimplexVector({0.3, 0.4, 0.3}), 1.0)),
        5.0, std::move(traders), {5.0, 5.0}};
}

Market hara_example_market(double gamma, double W1, double W2) {
    std::vector<UtilitySpec> traders;
    traders.push_back(UtilitySpec::hara(SimplexVector({0.2, 0.2, 0.6}), 1.0, 0.0, gamma));
    traders.push_back(UtilitySpec::hara(SimplexVector({0.6, 0.1, 0.3}), 1.0, 0.0, gamma));
    return Market{UtilitySpec::hara(SimplexVector({0.25, 0.5, 0.25}), 1.0, 0.8, gamma), 1.0,
                  std::move(traders), {W1, W2}};
}

Market crra_check_market() {
    std::vector<UtilitySpec> traders;
    traders.push_back(UtilitySpec::crra(SimplexVector({0.5, 0.2, 0.3}), 0.5));
    traders.push_back(UtilitySpec::crra(SimplexVector({0.2, 0.45, 0.35}), 0.5));
    return Market{UtilitySpec::crra(SimplexVector({0.3, 0.35, 0.35}), 0.5), 5.0, std::move(traders),
                  {4.0, 6.0}};
}

std::vector<MarketState> replay_states(const Market& market, const Trajectory& traj) {
    std::vector<MarketState> states;
    states.reserve(traj.snapshots.size());
    MarketState s = MarketState::initial(market.W0, market.w0, market.securities());
    for (const auto& snap : traj.snapshots) {
        s = apply_trade(s, snap.trader, TradeDelta(snap.z));
        states.push_back(s);
    }
    return states;
}

} // namespace

VerifyReport run_verification(const VerifyOptions& opt) {
    VerifyReport report;
    std::vector<RunRecord> registry;

    auto run_recorded = [&](const Market& market, const TradingSequence& seq) {
        RunOptions opts;
        opts.sequence = seq;
        opts.trade_eps = opt.trade_eps;
        Trajectory traj = run(market, opts);
        registry.push_back(RunRecord{market, traj});
        return registry.back().traj;
    };
    auto identity_order = [](std::size_t J) {
        std::vector<std::size_t> order(J);
        for (std::size_t j = 0; j < J; ++j) order[j] = j;
        return order;
    };

    // 1 + 2: random exponential markets against the closed-form limit and the
    // one-step update identity.
    {
        SplitMix64 rng(opt.seed);
        bool all_converged = true;
        double worst_limit = 0.0, worst_step = 0.0, worst_seconds = 0.0;
        for (int k = 0; k < 20; ++k) {
            std::size_t I = 2 + rng.below(4);
            std::size_t J = 1 + rng.below(10);
            SimplexVector theta = random_belief(rng, I);
            double beta = rng.uniform(0.2, 5.0);
            std::vector<UtilitySpec> traders;
            std::vector<SimplexVector> beliefs;
            std::vector<double> alphas, w0;
            for (std::size_t j = 0; j < J; ++j) {
                beliefs.push_back(random_belief(rng, I));
                alphas.push_back(rng.uniform(0.2, 5.0));
                traders.push_back(UtilitySpec::exponential(beliefs.back(), alphas.back()));
                w0.push_back(rng.uniform(1.0, 10.0));
            }
            Market market{UtilitySpec::exponential(theta, beta), rng.uniform(1.0, 5.0),
                          std::move(traders), std::move(w0)};
            auto t0 = std::chrono::steady_clock::now();
            const Trajectory& traj =
                run_recorded(market, TradingSequence::round_robin(identity_order(J)));
            worst_seconds = std::max(
                worst_seconds,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            if (!traj.converged) {
                all_converged = false;
                continue;
            }
            worst_limit = std::max(
                worst_limit, max_abs_diff(traj.final_price, exp_limiting_price(theta, beta, beliefs,
                                                                               alphas)));
            // One-step updates along the recorded path.
            const Market& m = registry.back().market;
            MarketState state = MarketState::initial(m.W0, m.w0, m.securities());
            SimplexVector p_prev = instantaneous_price(m.maker, state.y);
            for (const auto& snap : traj.snapshots) {
                const auto* v = m.traders[snap.trader].as_exponential();
                SimplexVector predicted =
                    exp_price_update(p_prev, state.x[snap.trader], v->belief, v->beta, beta);
                worst_step = std::max(worst_step, max_abs_diff(snap.price, predicted));
                state = apply_trade(state, snap.trader, TradeDelta(snap.z));
                p_prev = snap.price;
            }
        }
        report.checks.push_back({"exponential closed-form limit (20 random markets, 1e-6)",
                                 all_converged && worst_limit <= 1e-6 && worst_seconds < 1.0, true,
                                 "max |p_sim - p_formula| = " + sci(worst_limit) +
                                     ", slowest run " + sci(worst_seconds) + " s"});
        report.checks.push_back({"exponential one-step price update (1e-10)",
                                 all_converged && worst_step <= 1e-10, true,
                                 "max |p_sim - p_update| = " + sci(worst_step)});
    }

    // 3: sequence invariance for exponential and relative-entropy markets.
    std::size_t risk_run_index = 0;
    {
        double worst = 0.0;
        bool all_converged = true;
        for (int which = 0; which < 2; ++which) {
            Market market = which == 0 ? sequence_check_exp_market() : sequence_check_risk_market();
            const std::size_t J = market.trader_count();
            std::vector<std::size_t> rev = identity_order(J);
            std::reverse(rev.begin(), rev.end());
            std::vector<TradingSequence> seqs = {
                TradingSequence::round_robin(identity_order(J)),
                TradingSequence::round_robin(rev),
                TradingSequence::random(opt.seed + 11),
                TradingSequence::random(opt.seed + 22),
                TradingSequence::random(opt.seed + 33),
            };
            std::vector<SimplexVector> prices;
            for (const auto& seq : seqs) {
                const Trajectory& traj = run_recorded(market, seq);
                if (which == 1) risk_run_index = registry.size() - 1;
                if (!traj.converged) all_converged = false;
                prices.push_back(traj.final_price);
            }
            for (std::size_t a = 0; a < prices.size(); ++a) {
                for (std::size_t b = a + 1; b < prices.size(); ++b) {
                    worst = std::max(worst, max_abs_diff(prices[a], prices[b]));
                }
            }
        }
        report.checks.push_back({"sequence invariance (exponential + risk-measure, 1e-6)",
                                 all_converged && worst <= 1e-6, true,
                                 "max pairwise price divergence = " + sci(worst)});
    }

    // 4: Pareto optimality of every converged run; for the separable
    // families, recovered weights must also replicate the allocation through
    // the direct frontier solve.
    {
        run_recorded(hara_example_market(0.5, 10.0, 10.0),
                     TradingSequence::round_robin({0, 1}));
        run_recorded(crra_check_market(), TradingSequence::round_robin({0, 1}));

        double worst_kkt = 0.0, worst_entry = 0.0;
        bool ok = true;
        for (const auto& rec : registry) {
            const Market& market = rec.market;
            const Trajectory& traj = rec.traj;
            if (!traj.converged) {
                ok = false;
                continue;
            }
            ConvergenceReport rep = convergence_report(market, traj);
            worst_kkt = std::max(worst_kkt, rep.max_kkt_residual);
            for (double w : rep.omega) ok &= w > 0.0;
            bool separable = market.maker.separable();
            for (const auto& v : market.traders) separable &= v.separable();
            if (!separable) continue;
            ParetoSolution sol =
                solve_pareto(rep.omega, market.maker, market.W0, market.traders, market.w0);
            for (std::size_t j = 0; j < market.trader_count(); ++j) {
                for (std::size_t i = 0; i < market.securities(); ++i) {
                    worst_entry = std::max(
                        worst_entry, std::abs(sol.x_star[j][i] - traj.final_state.x[j][i]));
                }
            }
        }
        report.checks.push_back({"pareto optimality: KKT residuals (1e-7) + frontier replication (1e-6)",
                                 ok && worst_kkt <= 1e-7 && worst_entry <= 1e-6, true,
                                 "max KKT residual = " + sci(worst_kkt) +
                                     ", max allocation deviation = " + sci(worst_entry)});
    }

    // 5: risk-measure aggregation consistency.
    {
        Market market = sequence_check_risk_market();
        std::vector<PenaltySpec> penalties = {*market.maker.penalty(),
                                              *market.traders[0].penalty(),
                                              *market.traders[1].penalty()};
        ParetoSolution eq = risk_measure_equilibrium(penalties, market.W0, market.w0);
        SimplexVector agg = aggregate_penalty_price(penalties);
        double d_eq = max_abs_diff(eq.price, agg);

        std::vector<SimplexVector> beliefs = {penalties[1].belief(), penalties[2].belief()};
        std::vector<double> alphas = {penalties[1].as_relative_entropy()->beta,
                                      penalties[2].as_relative_entropy()->beta};
        SimplexVector geo = exp_limiting_price(penalties[0].belief(),
                                               penalties[0].as_relative_entropy()->beta, beliefs,
                                               alphas);
        double d_geo = max_abs_diff(agg, geo);
        double d_sim = max_abs_diff(registry[risk_run_index].traj.final_price, agg);
        StationaryKind kind = classify_penalty_stationary(penalties, agg);
        report.checks.push_back(
            {"risk-measure aggregation: equilibrium vs argmin (1e-7) vs geometric mean (1e-6)",
             d_eq <= 1e-7 && d_geo <= 1e-6 && d_sim <= 1e-6 &&
                 kind == StationaryKind::Minimum,
             true,
             "equilibrium vs aggregate = " + sci(d_eq) + ", vs geometric formula = " + sci(d_geo) +
                 ", vs simulated limit = " + sci(d_sim) + "; stationary point is a minimum"});
    }

    // 6: which closed power-mean form the brute-force aggregation optimum
    // reproduces (the two published forms disagree away from gamma = 0).
    {
        SimplexVector b0({0.5, 0.25, 0.25}), b1({0.2, 0.3, 0.5}), b2({0.4, 0.4, 0.2});
        std::vector<double> h = {1.0, 0.7, 1.3};
        bool statement_all = true, proof_all = true, max_all = true;
        std::string detail;
        for (double gamma : {-1.0, -0.5, 0.5}) {
            std::vector<PenaltySpec> penalties = {PenaltySpec::power(b0, gamma, h[0]),
                                                  PenaltySpec::power(b1, gamma, h[1]),
                                                  PenaltySpec::power(b2, gamma, h[2])};
            auto total = [&](const std::vector<double>& q) {
                SimplexVector sq(q);
                double s = 0.0;
                for (const auto& pen : penalties) s += pen.value(sq);
                return s;
            };
            SimplexVector brute(optimize_on_simplex(total, 3, /*maximize=*/true));
            max_all &= classify_penalty_stationary(penalties, brute) == StationaryKind::Maximum;

            SimplexVector statement = power_mean_price(b0, {b1, b2}, h, gamma);
            std::vector<double> proof(3);
            const std::vector<SimplexVector> all_beliefs = {b0, b1, b2};
            for (std::size_t i = 0; i < 3; ++i) {
                double inner = 0.0;
                for (std::size_t k = 0; k < 3; ++k) {
                    inner += h[k] * std::pow(all_beliefs[k][i], 1.0 - gamma);
                }
                proof[i] = std::pow(inner, 1.0 / (1.0 - gamma));
            }
            SimplexVector proof_price(normalized(proof));
            double d_statement = max_abs_diff(brute, statement);
            double d_proof = max_abs_diff(brute, proof_price);
            statement_all &= d_statement <= 1e-6;
            proof_all &= d_proof <= 1e-6;
            detail += "gamma=" + sci(gamma) + ": |brute-statement|=" + sci(d_statement) +
                      " |brute-proof|=" + sci(d_proof) + "; ";
        }
        std::string resolution =
            proof_all && !statement_all
                ? "optimum matches the proof form (inner 1-gamma, outer 1/(1-gamma))"
                : (statement_all && !proof_all ? "optimum matches the statement form"
                                               : "ambiguous");
        report.checks.push_back({"power-penalty aggregation form resolution (recorded)",
                                 (proof_all != statement_all) && max_all, true,
                                 detail + resolution + "; stationary point is a maximum"});
    }

    // 7: conservation and maker utility preservation on every snapshot of
    // every recorded run.
    {
        double worst_conservation = 0.0, worst_preservation = 0.0;
        bool ok = true;
        for (const auto& rec : registry) {
            double target = rec.market.maker.value_at_uniform(rec.market.W0);
            try {
                std::vector<MarketState> states = replay_states(rec.market, rec.traj);
                for (std::size_t k = 0; k < states.size(); ++k) {
                    worst_conservation = std::max(worst_conservation, total_wealth_residual(states[k]));
                    worst_preservation = std::max(
                        worst_preservation, std::abs(rec.traj.snapshots[k].market_utility - target));
                }
            } catch (const std::exception&) {
                ok = false;
            }
        }
        report.checks.push_back({"conservation (1e-9) and maker utility preservation (1e-9)",
                                 ok && worst_conservation <= 1e-9 && worst_preservation <= 1e-9,
                                 true,
                                 "max wealth residual = " + sci(worst_conservation) +
                                     ", max utility drift = " + sci(worst_preservation)});
    }

    // 8: instantaneous price against finite-difference order pricing on
    // interior binding states, 100 per family.
    {
        SplitMix64 rng(opt.seed + 800);
        double worst = 0.0;
        const double eps = 1e-6;
        bool enough = true;
        for (int family = 0; family < 5; ++family) {
            int states = 0;
            for (int attempt = 0; attempt < 1000 && states < 100; ++attempt) {
                std::size_t I = 2 + rng.below(3);
                SimplexVector belief = random_belief(rng, I);
                UtilitySpec u = [&]() {
                    switch (family) {
                        case 0: return UtilitySpec::exponential(belief, rng.uniform(0.3, 3.0));
                        case 1:
                            return UtilitySpec::hara(belief, rng.uniform(0.5, 2.0),
                                                     rng.uniform(0.0, 1.0), rng.uniform(-1.0, 0.8));
                        case 2: return UtilitySpec::crra(belief, rng.uniform(0.2, 0.8));
                        case 3:
                            return UtilitySpec::risk_measure(
                                PenaltySpec::relative_entropy(belief, rng.uniform(0.3, 3.0)));
                        default:
                            return UtilitySpec::composite_entropic_log(
                                belief, rng.uniform(0.3, 2.0), rng.uniform(0.0, 1.0), 5.0);
                    }
                }();
                double floor = u.coordinate_floor();
                double lo = std::isfinite(floor) ? floor + 0.3 : -2.0;
                double W0 = std::max(lo + 0.2, 0.5) + rng.uniform(0.0, 2.0);
                std::vector<double> y0(I);
                for (double& e : y0) e = rng.uniform(lo, lo + 4.0);
                WealthVector post = WealthVector::constant(I, 0.0);
                try {
                    post = price_order(u, WealthVector(y0), W0, std::vector<double>(I, 0.0)).post_y;
                } catch (const NumericalError&) {
                    continue; // constraint cannot bind from this start; resample
                }
                if (std::isfinite(floor)) {
                    double margin = 1e300;
                    for (std::size_t i = 0; i < I; ++i) margin = std::min(margin, post[i] - floor);
                    if (margin < 0.05) continue;
                }
                ++states;
                SimplexVector p = instantaneous_price(u, post);
                for (std::size_t i = 0; i < I; ++i) {
                    std::vector<double> dq(I, 0.0);
                    dq[i] = eps;
                    double fd = price_order(u, post, W0, dq).delta_w / eps;
                    worst = std::max(worst, std::abs(p[i] - fd));
                }
            }
            enough &= states == 100;
        }
        report.checks.push_back({"instantaneous price vs finite-difference pricing (1e-4)",
                                 enough && worst <= 1e-4, true, "max deviation = " + sci(worst)});
    }

    // 9: mechanism equivalence: cost-function telescoping, translation
    // invariance, scoring-rule properness.
    {
        SplitMix64 rng(opt.seed + 900);
        double worst_tel = 0.0, worst_shift = 0.0, worst_proper = 0.0, worst_bind = 0.0;
        for (int which = 0; which < 2; ++which) {
            UtilitySpec u = which == 0
                                ? UtilitySpec::exponential(SimplexVector({0.3, 0.45, 0.25}), 1.3)
                                : UtilitySpec::hara(SimplexVector({0.3, 0.45, 0.25}), 1.0, 0.8, 0.5);
            const std::size_t I = 3;
            double W0 = 2.0;
            WealthVector y = WealthVector::constant(I, W0);
            std::vector<double> cumulative(I, 0.0);
            double charges = 0.0;
            for (int k = 0; k < 20; ++k) {
                std::vector<double> dq(I);
                for (double& e : dq) e = rng.uniform(-1.0, 1.0);
                Quote quote = price_order(u, y, W0, dq);
                charges += quote.delta_w;
                y = quote.post_y;
                for (std::size_t i = 0; i < I; ++i) cumulative[i] += dq[i];
                double cost = cost_function_value(u, W0, cumulative);
                worst_tel = std::max(worst_tel, std::abs(cost - (W0 + charges)));
            }
            for (int k = 0; k < 25; ++k) {
                std::vector<double> q(I);
                for (double& e : q) e = rng.uniform(-1.0, 1.0);
                double t = rng.uniform(-1.5, 1.5);
                std::vector<double> shifted = q;
                for (double& e : shifted) e += t;
                worst_shift = std::max(worst_shift,
                                       std::abs(cost_function_value(u, W0, shifted) -
                                                cost_function_value(u, W0, q) - t));
            }
        }
        {
            UtilitySpec u = UtilitySpec::exponential(SimplexVector({0.3, 0.45, 0.25}), 1.1);
            double W0 = 1.5;
            double target = u.value_at_uniform(W0);
            for (int k = 0; k < 1000; ++k) {
                SimplexVector p = random_belief(rng, 3);
                SimplexVector r = random_belief(rng, 3);
                std::vector<double> sp = induced_scoring_rule(u, W0, p);
                std::vector<double> sr = induced_scoring_rule(u, W0, r);
                double ep = 0.0, er = 0.0;
                for (std::size_t i = 0; i < 3; ++i) {
                    ep += p[i] * sp[i];
                    er += p[i] * sr[i];
                }
                worst_proper = std::max(worst_proper, er - ep);
                std::vector<double> neg(3);
                for (std::size_t i = 0; i < 3; ++i) neg[i] = -sp[i];
                worst_bind = std::max(worst_bind,
                                      std::abs(u.value(WealthVector(neg)) - target));
            }
        }
        report.checks.push_back(
            {"mechanism equivalence: telescoping (1e-8), translation (1e-10), properness",
             worst_tel <= 1e-8 && worst_shift <= 1e-10 && worst_proper <= 1e-9 &&
                 worst_bind <= 1e-10,
             true,
             "telescoping = " + sci(worst_tel) + ", translation = " + sci(worst_shift) +
                 ", properness slack = " + sci(worst_proper) + ", binding = " + sci(worst_bind)});
    }

    // 10: reference-example reproduction (best effort; reported, not gating).
    {
        Table2Report rep = reproduce_table2();
        bool matched = rep.best_error <= 0.005 && rep.sign_pattern_ok;
        std::string theta = "(" + sci(rep.best_theta[0]) + ", " + sci(rep.best_theta[1]) + ", " +
                            sci(rep.best_theta[2]) + ")";
        report.checks.push_back(
            {"reference example reproduction (best-effort)", matched, false,
             matched ? "best maker belief " + theta + ", row-1 max price error = " +
                           sci(rep.best_error) + ", utility asymmetry sign reproduced"
                     : "no candidate maker belief matched within 0.005 at the stated endowment "
                       "(best row-1 error " + sci(rep.best_error) + " with " + theta +
                           "); diagnostic: uniform belief with maker endowment " +
                           sci(rep.alt_W0) + " hits row 1 at " + sci(rep.alt_error) +
                           "; open question documented, binding checks unaffected"});
    }

    // 11: heuristic weighting and approximate-price quality at batch scale.
    {
        auto t0 = std::chrono::steady_clock::now();
        RandomMarketSpec spec_a = RandomMarketSpec::standard();
        BatchSummary a = run_hara_batch(spec_a, opt.batch_runs, opt.seed + 1100);

        RandomMarketSpec spec_b = RandomMarketSpec::standard();
        spec_b.W0 = 2.0;
        spec_b.gamma_maker = -0.5;
        spec_b.gamma_trader_low = -0.5;
        spec_b.gamma_trader_high = -0.5;
        BatchSummary b = run_hara_batch(spec_b, opt.batch_runs, opt.seed + 1200);
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

        // At gamma = 0 the risk-adjusted formula degenerates to the
        // wealth-weighted mean exactly.
        SplitMix64 rng(opt.seed + 1300);
        double worst_identity = 0.0;
        for (int k = 0; k < 20; ++k) {
            SimplexVector theta = random_belief(rng, 3);
            std::vector<SimplexVector> beliefs = {random_belief(rng, 3), random_belief(rng, 3)};
            std::vector<double> w = {rng.uniform(1.0, 10.0), rng.uniform(1.0, 10.0)};
            double w0 = rng.uniform(1.0, 10.0);
            SimplexVector approx = hara_approx_price(theta, beliefs, w0, w, 0.0);
            std::vector<double> direct(3);
            for (std::size_t i = 0; i < 3; ++i) {
                direct[i] = w0 * theta[i] + w[0] * beliefs[0][i] + w[1] * beliefs[1][i];
            }
            worst_identity = std::max(worst_identity,
                                      max_abs_diff(approx, SimplexVector(normalized(direct))));
        }

        bool pass = a.converged == a.runs && b.converged == b.runs && a.mean_delta_x <= 0.1 &&
                    a.mean_kld_dagger <= 1e-3 && b.mean_kld_hara < b.mean_kld_baseline &&
                    worst_identity <= 1e-10 && seconds < 180.0;
        report.checks.push_back(
            {"heuristic weights + approximate price quality (batches of " +
                 std::to_string(opt.batch_runs) + ")",
             pass, true,
             "mean delta_x = " + sci(a.mean_delta_x) + ", mean KLD = " + sci(a.mean_kld_dagger) +
                 "; at gamma=-0.5: risk-adjusted KLD " + sci(b.mean_kld_hara) +
                 " < wealth-weighted " + sci(b.mean_kld_baseline) + "; gamma=0 identity = " +
                 sci(worst_identity) + "; " + sci(seconds) + " s"});
    }

    return report;
}

} // namespace mumarket
