#pragma once

// Multi-start quasi-Newton maximization of a Bell expression over the twelve
// spherical measurement angles.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tribell/bellcore.hpp"
#include "tribell/errors.hpp"

namespace tribell {

struct OptimizerConfig {
    int multistart_count = 64;
    int max_iterations = 2000;
    double value_tolerance = 1e-9;
    double angle_tolerance = 1e-8;
    std::uint64_t seed = 0;

    /// DomainError if any bound is non-positive or a tolerance is >= 1.
    void validate() const;
};

struct OptimizationReport {
    std::string inequality;
    double value = 0.0;
    MeasurementSettings settings;
    int starts_total = 0;
    int starts_converged = 0;
    int best_start_index = 0;
    long evaluations = 0;
};

class OptimizationError : public ConvergenceError {
public:
    OptimizationError(const std::string& what, OptimizationReport best)
        : ConvergenceError(what), best_(std::move(best)) {}
    const OptimizationReport& best() const { return best_; }

private:
    OptimizationReport best_;
};

/// Maximizes evaluate(rho, ineq, .) over all settings. Starts are the caller's
/// warm starts (indices 0..w-1) followed by cfg.multistart_count scrambled
/// Sobol points; start i depends only on (seed, i). Deterministic for a fixed
/// config. Throws OptimizationError if no start converges.
OptimizationReport maximize(const DensityMatrix3Q& rho, const BellInequality& ineq,
                            const OptimizerConfig& cfg,
                            std::span<const MeasurementSettings> warm_starts = {});

struct NumericPMin {
    double p = 1.0;
    std::string active;
    std::vector<OptimizationReport> reports;
};

/// 1 / max_i I_i^max(psi); ties go to the earliest inequality in the list.
NumericPMin p_min_numeric(const PureState3Q& psi, std::span<const BellInequality> ineqs,
                          const OptimizerConfig& cfg);

/// maximize() for I10, I96, I99, I185 in that order.
std::vector<OptimizationReport> maximize_on_reconstruction(const DensityMatrix3Q& rho,
                                                           const OptimizerConfig& cfg);

}  // namespace tribell
