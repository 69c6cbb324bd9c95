#pragma once

// Seeded random generators for property tests.

#include <cmath>
#include <numbers>
#include <random>

#include "tribell/bellcore.hpp"
#include "tribell/qstate.hpp"

namespace tribell::testing {

inline Amplitudes random_amplitudes(std::mt19937_64& gen) {
    std::normal_distribution<double> n(0.0, 1.0);
    Amplitudes v;
    for (int i = 0; i < kDim; ++i) v(i) = Complex(n(gen), n(gen));
    return v;
}

inline PureState3Q random_pure(std::mt19937_64& gen) {
    return PureState3Q::normalized(random_amplitudes(gen));
}

/// G G^dagger / Tr for a complex Gaussian G with `rank` columns.
inline DensityMatrix3Q random_density(std::mt19937_64& gen, int rank = kDim) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Matrix<Complex, kDim, Eigen::Dynamic> g(kDim, rank);
    for (int r = 0; r < kDim; ++r) {
        for (int c = 0; c < rank; ++c) g(r, c) = Complex(n(gen), n(gen));
    }
    Matrix8 m = g * g.adjoint();
    m /= m.trace().real();
    return DensityMatrix3Q(m);
}

inline BlochVector random_direction(std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return BlochVector::from_spherical(std::acos(1.0 - 2.0 * u(gen)),
                                       2.0 * std::numbers::pi * u(gen));
}

inline MeasurementSettings random_settings(std::mt19937_64& gen) {
    return MeasurementSettings(random_direction(gen), random_direction(gen), random_direction(gen),
                               random_direction(gen), random_direction(gen), random_direction(gen));
}

inline double max_abs(const Matrix8& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace tribell::testing
