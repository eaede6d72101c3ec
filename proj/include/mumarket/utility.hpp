#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "mumarket/penalty.hpp"
#include "mumarket/types.hpp"

namespace mumarket {

struct ExponentialUtility {
    SimplexVector belief;
    double beta;
};

// (1-gamma)/gamma * sum_i theta_i (a w_i/(1-gamma) + b)^gamma
struct HaraUtility {
    SimplexVector belief;
    double a;
    double b;
    double gamma;
};

// sum_i theta_i w_i^gamma, gamma in (0,1); kept distinct from the HARA
// parameterization (different normalization constant).
struct CrraUtility {
    SimplexVector belief;
    double gamma;
};

struct RiskMeasureUtility {
    PenaltySpec penalty;
};

// Entropic risk term plus a log-utility term with wealth floor -B;
// exercises the generic pricing path only (no trader solver support).
struct CompositeEntropicLogUtility {
    SimplexVector belief;
    double beta;
    double eta;
    double B;
};

// One agent's multivariate utility: value, gradient, domain membership and
// (for the separable expected-utility families) per-coordinate marginal
// machinery used by the KKT solvers.
class UtilitySpec {
public:
    enum class Family { Exponential, Hara, Crra, RiskMeasure, CompositeEntropicLog };

    static UtilitySpec exponential(SimplexVector belief, double beta);
    static UtilitySpec hara(SimplexVector belief, double a, double b, double gamma);
    static UtilitySpec crra(SimplexVector belief, double gamma);
    static UtilitySpec risk_measure(PenaltySpec penalty);
    static UtilitySpec composite_entropic_log(SimplexVector belief, double beta, double eta, double B);

    Family family() const;
    std::size_t securities() const;
    const SimplexVector& belief() const;
    bool separable() const; // Exponential / Hara / Crra

    double value(const WealthVector& w) const;
    double value_at_uniform(double c) const; // U(c * e)
    // U(w + dz) - U(w); evaluated per coordinate through expm1/log1p for the
    // separable families, so vanishing trades do not drown in cancellation.
    double value_delta(const WealthVector& w, const std::vector<double>& dz) const;
    std::vector<double> gradient(const WealthVector& w) const;
    bool domain_contains(const WealthVector& w) const;
    // dom = { w : w_i > coordinate_floor() for all i }; -inf when unbounded.
    double coordinate_floor() const;

    // Separable families only.
    double marginal(std::size_t i, double w_i) const;
    double log_marginal(std::size_t i, double w_i) const;
    double dlog_marginal(std::size_t i, double w_i) const; // d/dw ln marginal (< 0)
    double inverse_marginal(std::size_t i, double m) const;

    // Hara/Crra marginals share the shape marginal_i(w) = K_i (s w + c)^(gamma-1);
    // the trader solver exploits it for a closed-form coordinate step.
    struct PowerMarginal {
        double s;
        double c;
        double gamma;
        std::vector<double> K;
    };
    std::optional<PowerMarginal> power_marginal() const;

    // Risk-measure family: optimizing probability of the dual representation
    // at w, with its multiplier and the risk value rho(w).
    struct DualSolution {
        double lambda;
        std::vector<double> q;
        double rho;
    };
    DualSolution risk_dual(const WealthVector& w) const;
    const PenaltySpec* penalty() const;

    const ExponentialUtility* as_exponential() const;
    const HaraUtility* as_hara() const;
    const CrraUtility* as_crra() const;
    const RiskMeasureUtility* as_risk_measure() const;
    const CompositeEntropicLogUtility* as_composite() const;

private:
    using Variant = std::variant<ExponentialUtility, HaraUtility, CrraUtility, RiskMeasureUtility,
                                 CompositeEntropicLogUtility>;
    explicit UtilitySpec(Variant v) : spec_(std::move(v)) {}
    Variant spec_;
};

} // namespace mumarket
