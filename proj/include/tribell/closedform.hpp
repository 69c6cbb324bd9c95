#pragma once

// Analytic maxima of the four builtin inequalities on gGHZ and maximal-slice
// states, the settings that attain them, and the noise thresholds derived
// from them.

#include <utility>

#include "tribell/bellcore.hpp"
#include "tribell/errors.hpp"
#include "tribell/units.hpp"

namespace tribell {

/// (1 + 2 sqrt(1 + sin^2 2theta)) / 3, theta in [0, pi/4].
double i96_max_gghz(double theta);

/// a0 = b0 = -z, a1 = b1 = x, c_i = (-sin alpha, 0, (-1)^i cos alpha) with
/// alpha = arctan(sin 2theta).
MeasurementSettings i96_optimal_settings(double theta);

/// a0 = b0 = x, a1 = b1 = z, c_i = ((-1)^i sin alpha, 0, cos alpha). Attains the
/// same maximum as I96 on gGHZ.
MeasurementSettings i99_optimal_settings(double theta);

/// max{ cos 2theta, sqrt(2) sin 2theta }.
double i185_max_gghz(double theta);

/// Settings attaining i185_max_gghz: all along +-z on the cos 2theta branch,
/// equatorial on the sqrt(2) sin 2theta branch.
MeasurementSettings i185_optimal_settings(double theta);

/// Settings along +-z realizing a deterministic strategy that attains the
/// exact local bound; on |000> they attain it exactly.
MeasurementSettings saturating_z_settings(const BellInequality& ineq);

/// sqrt(1 + sin^2 omega), omega in [0, pi/2].
double i185_max_ms(double omega);

/// Quartic fit of the I10 maximum on gGHZ; theta in radians.
double i10_poly_approx(Radians theta);

/// Stationary angles of the reduced I10 expression.
struct AppendixBAngles {
    double vartheta0 = 0.0;
    double vartheta1 = 0.0;
    bool converged = false;
    /// max |partial derivative| at the returned point.
    double residual = 0.0;
};

/// The I10 expression on gGHZ(theta) restricted to the two-angle settings family.
double i10_reduced(double vartheta0, double vartheta1, double theta);
Eigen::Vector2d i10_reduced_gradient(double vartheta0, double vartheta1, double theta);
Eigen::Matrix2d i10_reduced_hessian(double vartheta0, double vartheta1, double theta);

/// The two-angle settings family: a0 = (pi/2, pi/3), a1 = (vartheta0, -2pi/3),
/// b0 = c0 = (vartheta1, pi/3), b1 = c1 = (vartheta1, 4pi/3) as (incl, azim).
MeasurementSettings i10_settings(double vartheta0, double vartheta1);

struct I10Maximum {
    double value = 0.0;
    AppendixBAngles angles;
};

/// Thrown when the stationarity solve does not reach its residual tolerance.
class I10ConvergenceError : public ConvergenceError {
public:
    I10ConvergenceError(const std::string& what, I10Maximum best)
        : ConvergenceError(what), best_(best) {}
    const I10Maximum& best() const { return best_; }

private:
    I10Maximum best_;
};

/// Global maximum of i10_reduced over (vartheta0, vartheta1): dense grid scan
/// followed by Newton refinement of the stationarity system. theta in (0, pi/4].
I10Maximum i10_max_exact(double theta);

/// Fitted stationary angles; theta and results in degrees, theta in (0, 45].
std::pair<Degrees, Degrees> appendix_b_angle_approx(Degrees theta);

/// Maximum of a builtin on gGHZ(theta), theta in [0, pi/4]; I10 uses the
/// exact solver, and every builtin equals 1 at theta = 0.
double i_max_gghz(BuiltinId id, double theta);

/// Settings attaining i_max_gghz.
MeasurementSettings optimal_settings_gghz(BuiltinId id, double theta);

struct PMin {
    double p = 1.0;
    BuiltinId active = BuiltinId::I10;
};

/// Region boundaries of the piecewise threshold visibility, recomputed by root
/// finding on the closed forms (radians).
double i10_i96_crossover();
double i96_i185_crossover();
/// Smallest theta at which the gGHZ I185 maximum exceeds 1.
double svetlichny_onset();

/// Threshold visibility of gGHZ(theta): 1 / I_max of whichever of I10
/// (quartic fit), I96 or I185 is active in theta's region.
PMin p_min_gghz(double theta);

/// 1 / sqrt(1 + sin^2 omega).
double p_min_ms(double omega);

/// Three-tangle tau* above which the maximal-slice state tolerates more white
/// noise than the gGHZ state with the same tangle.
double ms_vs_gghz_crossover();

}  // namespace tribell
