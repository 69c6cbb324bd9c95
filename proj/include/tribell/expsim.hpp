#pragma once

// Synthetic coincidence counting: Born probabilities, Poisson counts, the
// parity estimators for 1-, 2- and 3-party correlators, and direct
// measurement of a Bell expression with statistical errors.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tribell/bellcore.hpp"
#include "tribell/errors.hpp"

namespace tribell {

/// One measurement direction per party.
struct SettingTriple {
    BlochVector a;
    BlochVector b;
    BlochVector c;
};

/// The triple (a_sa, b_sb, c_sc) of a settings set.
SettingTriple select(const MeasurementSettings& settings, int sa, int sb, int sc);

/// Outcome index 4a + 2b + c with bit value 1 meaning the "-" outcome:
/// 0 = +++, 1 = ++-, 2 = +-+, 3 = +--, 4 = -++, 5 = -+-, 6 = --+, 7 = ---.
inline constexpr int kOutcomes = 8;
using OutcomeArray = std::array<double, kOutcomes>;

/// +1 or -1: the product of the outcome signs of the parties whose bit is set
/// in `mask` (4 = A, 2 = B, 1 = C).
constexpr int parity_sign(int outcome, int mask) {
    int bits = outcome & mask;
    int ones = 0;
    for (; bits != 0; bits &= bits - 1) ++ones;
    return (ones % 2 == 0) ? 1 : -1;
}

/// Coincidence counts for one setting triple. Counts are stored as doubles so
/// that exact expected counts (non-integer) and sampled counts share a type;
/// sampled counts are always integral.
struct CountsRecord {
    OutcomeArray counts{};
    SettingTriple setting;
    /// Expected total count for the triple.
    double exposure = 1.0;

    /// Throws DomainError on a negative or non-finite count or exposure <= 0.
    void validate() const;
    double total() const;
};

/// Product eigenvector |a+-> (x) |b+-> (x) |c+-> of the given outcome index.
Amplitudes outcome_vector(const SettingTriple& s, int outcome);

OutcomeArray born_probabilities(const DensityMatrix3Q& rho, const SettingTriple& s);

/// Independent Poisson(exposure * probability) per outcome.
CountsRecord simulate_counts(const DensityMatrix3Q& rho, const SettingTriple& s, double exposure,
                             std::uint64_t seed);

/// exposure * probability per outcome, no sampling.
CountsRecord expected_counts(const DensityMatrix3Q& rho, const SettingTriple& s,
                             double exposure);

/// (S+ - S-) / (S+ + S-) over the parity of the parties in `mask`. Throws
/// EstimationError when the counts are all zero.
double parity_correlator(const CountsRecord& rec, int mask);

enum class PartyPair { AB, AC, BC };

double corr3(const CountsRecord& rec);
double corr2(const CountsRecord& rec, PartyPair pair);
double corr1(const CountsRecord& rec, Party party);

struct ThetaEstimate {
    double theta = 0.0;
    /// Set when f000 = 0 and the estimate is pinned to pi/2.
    bool boundary = false;
};

/// arctan sqrt(f111 / f000). EstimationError if both counts are zero.
ThetaEstimate estimate_theta(double f000, double f111);

using SettingIndex = std::array<int, 3>;

/// Counts for every setting triple an inequality needs.
struct ExperimentRun {
    std::string inequality;
    MeasurementSettings settings;
    double exposure = 1.0;
    std::uint64_t seed = 0;
    bool exact = false;
    std::map<SettingIndex, CountsRecord> records;
};

/// Setting triples an inequality needs, in ascending order. Full correlators
/// contribute their own triple; a marginal term reuses the lowest required
/// triple that agrees on its present parties, or fills absent parties with
/// setting 0 if none does.
std::vector<SettingIndex> required_triples(const BellInequality& ineq);

/// The record a term is estimated from (see required_triples).
SettingIndex source_triple(const CorrelatorTerm& term, const std::vector<SettingIndex>& required);

/// Correlator of `term` estimated from the run's counts.
double estimate_term(const ExperimentRun& run, const CorrelatorTerm& term);

/// Normalized inequality value assembled from the run's counts.
double value_from_run(const ExperimentRun& run, const BellInequality& ineq);

/// First-order Poisson error of value_from_run: each count's variance is taken
/// equal to the count itself.
double delta_method_stderr(const ExperimentRun& run, const BellInequality& ineq);

struct TermEstimate {
    CorrelatorTerm term;
    Rational coefficient;
    double value = 0.0;
    double stderr_value = 0.0;
};

/// Per-term correlators with their Poisson errors, in the inequality's term order.
std::vector<TermEstimate> term_estimates(const ExperimentRun& run, const BellInequality& ineq);

struct InequalityMeasurement {
    double value = 0.0;
    double stderr_value = 0.0;
    ExperimentRun run;
};

/// Simulates every required triple (triple k in ascending order uses
/// substream k of `seed`) and assembles the inequality. With `exact`, counts
/// are expected counts and the seed is unused.
InequalityMeasurement measure_inequality(const DensityMatrix3Q& rho, const BellInequality& ineq,
                                         const MeasurementSettings& settings, double exposure,
                                         std::uint64_t seed, bool exact = false);

struct MonteCarloSummary {
    double mean = 0.0;
    double stddev = 0.0;
};

/// Resamples each count as Poisson(observed) and recomputes the value.
/// DomainError if resamples < 2.
MonteCarloSummary monte_carlo_errors(const ExperimentRun& run, const BellInequality& ineq,
                                     int resamples, std::uint64_t seed);

}  // namespace tribell
