#pragma once

// Synthetic three-qubit state tomography with maximum-likelihood
// reconstruction.

#include <cstdint>
#include <vector>

#include "tribell/errors.hpp"
#include "tribell/expsim.hpp"
#include "tribell/qstate.hpp"

namespace tribell {

struct TomographySet {
    std::vector<SettingTriple> triples;

    /// All 27 combinations of x, y, z per party (216 projectors), A slowest.
    static TomographySet pauli();
};

/// One CountsRecord per triple; triple k samples with substream k of `seed`.
std::vector<CountsRecord> simulate_tomography(const DensityMatrix3Q& rho, const TomographySet& set,
                                              double exposure, std::uint64_t seed);

/// Expected counts per triple, no sampling.
std::vector<CountsRecord> expected_tomography(const DensityMatrix3Q& rho,
                                              const TomographySet& set, double exposure);

/// Rank of the linear map from Hermitian 8x8 matrices to the outcome
/// probabilities of the records with non-zero counts (64 when complete).
int tomographic_rank(const std::vector<CountsRecord>& data);

struct ReconstructionResult {
    DensityMatrix3Q rho = DensityMatrix3Q::maximally_mixed();
    int iterations = 0;
    double log_likelihood = 0.0;
    bool converged = false;
    /// Log-likelihood after each iteration.
    std::vector<double> log_likelihood_history;
};

inline constexpr int kDefaultMlIterations = 5000;
inline constexpr double kDefaultMlTolerance = 1e-8;

/// Diluted R rho R fixed-point iteration from the maximally mixed state. Each
/// step tries the undiluted update and halves the dilution step until the
/// log-likelihood does not decrease. Stops when the trace-distance step falls
/// below `tolerance` or after `max_iterations`; the result is flagged, not
/// thrown, when the cap is hit. IdentifiabilityError if the data are not
/// informationally complete.
ReconstructionResult reconstruct_ml(const std::vector<CountsRecord>& data,
                                    int max_iterations = kDefaultMlIterations,
                                    double tolerance = kDefaultMlTolerance);

/// The five characteristic quantities of a reconstructed state.
struct StateReport {
    double theta_opt = 0.0;
    double fidelity = 0.0;
    double purity = 0.0;
    double f_max = 0.0;
    double n_tri = 0.0;
};

StateReport state_report(const DensityMatrix3Q& rho);
inline StateReport state_report(const ReconstructionResult& result) {
    return state_report(result.rho);
}

}  // namespace tribell
