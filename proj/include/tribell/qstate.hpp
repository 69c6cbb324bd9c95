#pragma once

// Three-qubit states and their functionals.
//
// Basis ordering is |abc> with index 4*a + 2*b + c, party order A (x) B (x) C,
// and |0> = (1, 0). Every module in the library shares this convention.

#include <complex>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace tribell {

using Complex = std::complex<double>;
using Amplitudes = Eigen::Matrix<Complex, 8, 1>;
using Matrix8 = Eigen::Matrix<Complex, 8, 8>;
using Matrix2 = Eigen::Matrix<Complex, 2, 2>;

inline constexpr int kDim = 8;

class PureState3Q {
public:
    static constexpr double kNormTolerance = 1e-12;

    /// Throws DomainError unless the amplitudes have unit norm within kNormTolerance.
    explicit PureState3Q(const Amplitudes& amplitudes, std::string label = {});

    /// Rescales to unit norm; throws DomainError on a zero or non-finite vector.
    static PureState3Q normalized(const Amplitudes& amplitudes, std::string label = {});

    const Amplitudes& amplitudes() const { return amplitudes_; }
    Complex amplitude(int index) const { return amplitudes_(index); }
    const std::string& label() const { return label_; }

    /// |psi><psi|
    Matrix8 projector() const { return amplitudes_ * amplitudes_.adjoint(); }

private:
    Amplitudes amplitudes_;
    std::string label_;
};

class DensityMatrix3Q {
public:
    static constexpr double kHermitianTolerance = 1e-10;
    static constexpr double kTraceTolerance = 1e-10;
    static constexpr double kDefaultPsdTolerance = 1e-9;

    /// Validates Hermiticity, unit trace and positivity (min eigenvalue >= -tolerance).
    explicit DensityMatrix3Q(const Matrix8& entries, double tolerance = kDefaultPsdTolerance);

    static DensityMatrix3Q from_pure(const PureState3Q& psi);
    static DensityMatrix3Q maximally_mixed();

    const Matrix8& entries() const { return entries_; }
    Complex operator()(int row, int col) const { return entries_(row, col); }
    double tolerance() const { return tolerance_; }

private:
    Matrix8 entries_;
    double tolerance_;
};

enum class Bipartition { A_BC, B_AC, C_AB };

enum class StateFamily { GGHZ, MS };

/// Parses "gGHZ"/"MS" (case-insensitive); DomainError otherwise.
StateFamily parse_family(std::string_view tag);

/// cos(theta)|000> + sin(theta)|111>, theta in [0, pi/4].
PureState3Q make_gghz(double theta);

/// cos(theta)|000> + sin(theta)|1>(cos xi|0> + sin xi|1>)(cos omega|0> + sin omega|1>).
PureState3Q make_phi(double theta, double xi, double omega);

/// Maximal-slice state, omega in [0, pi/2].
PureState3Q make_ms(double omega);

/// p |psi><psi| + (1 - p) / 8 * identity.
DensityMatrix3Q depolarize(const PureState3Q& psi, double p);

/// Convex combination weight * first + (1 - weight) * second.
DensityMatrix3Q mix(double weight, const DensityMatrix3Q& first, const DensityMatrix3Q& second);

/// <psi|rho|psi>
double fidelity(const DensityMatrix3Q& rho, const PureState3Q& psi);

struct GghzFidelity {
    double theta = 0.0;
    double fidelity = 0.0;
};

/// Maximizes <G(theta)|rho|G(theta)> over theta in [0, pi/4]. Ties resolve to
/// the smallest maximizing angle.
GghzFidelity fidelity_opt_gghz(const DensityMatrix3Q& rho);

/// Tr(rho^2)
double purity(const DensityMatrix3Q& rho);

/// Largest fidelity to a pure target compatible with white noise at purity P:
/// (1 + sqrt(56 P - 7)) / 8.
double f_max_bound(double purity);

/// White-noise visibility implied by a purity, sqrt((8P - 1) / 7).
double visibility_from_purity(double purity);

/// Transposes the single-qubit factor named by the cut.
Matrix8 partial_transpose(const Matrix8& rho, Bipartition cut);
Matrix8 partial_transpose(const DensityMatrix3Q& rho, Bipartition cut);

/// ||rho^T_cut||_1 - 1, i.e. twice the sum of |negative eigenvalues|.
double bipartite_negativity(const DensityMatrix3Q& rho, Bipartition cut);

/// Geometric mean of the three single-qubit bipartite negativities.
double tri_negativity(const DensityMatrix3Q& rho);

/// Closed-form tripartite negativity of a white-noise gGHZ state with purity P.
double n_tri_model(double theta, double purity);

/// sin^2(2 theta) for gGHZ, sin^2(omega) for MS.
double three_tangle(StateFamily family, double angle);

/// Half the trace norm of the difference.
double trace_distance(const Matrix8& lhs, const Matrix8& rhs);

}  // namespace tribell
