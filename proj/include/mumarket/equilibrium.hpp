#pragma once

#include <vector>

#include "mumarket/penalty.hpp"
#include "mumarket/types.hpp"
#include "mumarket/utility.hpp"

namespace mumarket {

// Solution of the weighted-sum frontier problem: maximize sum_j w_j V_j(x_j)
// over allocations with y + sum_j x_j = w_all * e and the maker's utility
// held at its initial level.
struct ParetoSolution {
    std::vector<WealthVector> x_star;
    WealthVector y_star;
    SimplexVector price;
    double lambda;          // multiplier of the maker's utility constraint
    std::vector<double> mu; // per-state multipliers of the conservation constraint
    double kkt_residual;
};

// Nested scalar root-finding for separable expected-utility families:
// coordinates invert through marginal utilities, per-state multipliers clear
// conservation, and the outermost root makes the maker's constraint bind.
ParetoSolution solve_pareto(const std::vector<double>& omega, const UtilitySpec& maker, double W0,
                            const std::vector<UtilitySpec>& traders, const std::vector<double>& w0,
                            double root_eps = 1e-12);

// Risk-measure market limit (equal weights). penalties[0] is the maker's.
// The limiting price is unique; trader allocations are unique only up to
// shifts along e, pinned here by an equal split of the residual total.
ParetoSolution risk_measure_equilibrium(const std::vector<PenaltySpec>& penalties, double W0,
                                        const std::vector<double>& w0, double root_eps = 1e-12);

// Stationary point of sum_j alpha_j(q) on the simplex. Relative-entropy
// penalties go through the summed-marginal root in the simplex multiplier;
// power/log penalties return their closed aggregation forms directly.
SimplexVector aggregate_penalty_price(const std::vector<PenaltySpec>& penalties,
                                      double root_eps = 1e-12);

// Curvature of sum_j alpha_j at a stationary point, restricted to the
// simplex tangent space; settles whether the aggregation is a min or a max.
enum class StationaryKind { Minimum, Maximum, Saddle };
StationaryKind classify_penalty_stationary(const std::vector<PenaltySpec>& penalties,
                                           const SimplexVector& q);

// Limiting price of an all-exponential market: geometric mean of
// risk-adjusted beliefs with inverse-risk-aversion weights.
SimplexVector exp_limiting_price(const SimplexVector& theta, double beta,
                                 const std::vector<SimplexVector>& beliefs,
                                 const std::vector<double>& alphas);

// One exponential trade's price update as a weighted geometric mix of the
// current price and the trader's position-adjusted belief.
SimplexVector exp_price_update(const SimplexVector& p, const WealthVector& x_j,
                               const SimplexVector& pi_j, double alpha_j, double beta);

// Weighted power mean of beliefs, h[0] paired with theta. gamma < 1;
// gamma = 0 degenerates to the weighted arithmetic mean.
SimplexVector power_mean_price(const SimplexVector& theta,
                               const std::vector<SimplexVector>& beliefs,
                               const std::vector<double>& h, double gamma);

// Heuristic frontier weights from initial endowments and risk parameters.
std::vector<double> omega_dagger(const std::vector<double>& a, const std::vector<double>& b,
                                 const std::vector<double>& w0, double gamma);

// Approximate limiting price for same-gamma HARA markets from risk-adjusted
// endowments; renormalized (the raw formula does not guarantee unit sum).
SimplexVector hara_approx_price(const SimplexVector& theta,
                                const std::vector<SimplexVector>& beliefs, double w_hat0,
                                const std::vector<double>& w_hat, double gamma);

// CRRA limiting-price form; the weights are order-dependent inputs,
// typically fitted from a simulated limit.
SimplexVector crra_limiting_price(const SimplexVector& theta,
                                  const std::vector<SimplexVector>& beliefs, double c_M,
                                  const std::vector<double>& c, double gamma);

// Non-negative least-squares fit of power-mean weights (maker first) to a
// target price; a diagnostic, not a prediction.
std::vector<double> fit_power_mean_weights(const SimplexVector& theta,
                                           const std::vector<SimplexVector>& beliefs, double gamma,
                                           const SimplexVector& price);

// Kullback-Leibler divergence sum_i p_i ln(p_i / q_i).
double kld(const SimplexVector& p, const SimplexVector& q);

// Relative allocation distance: sum_j ||x_sim_j - x_ref_j|| / sum_j ||x_sim_j||.
double delta_x(const std::vector<WealthVector>& x_sim, const std::vector<WealthVector>& x_ref);

} // namespace mumarket
