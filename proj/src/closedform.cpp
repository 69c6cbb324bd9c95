#include "tribell/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include <boost/math/tools/roots.hpp>

namespace tribell {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kQuarterPi = kPi / 4;

void require_gghz_theta(double theta, const char* who) {
    if (!(theta >= 0.0 && theta <= kQuarterPi + 1e-15)) {
        throw DomainError(std::string(who) + ": theta must lie in [0, pi/4]");
    }
}

double wrap_two_pi(double angle) {
    double out = std::fmod(angle, 2.0 * kPi);
    if (out < 0.0) out += 2.0 * kPi;
    return out;
}

/// Root of f on [lo, hi] to near machine precision; throws ConvergenceError
/// if f does not change sign.
template <class F>
double bracketed_root(F f, double lo, double hi, const char* who) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw ConvergenceError(std::string(who) + ": root not bracketed");
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), max_iter);
    return 0.5 * (a + b);
}

}  // namespace

double i96_max_gghz(double theta) {
    require_gghz_theta(theta, "i96_max_gghz");
    const double s = std::sin(2.0 * theta);
    return (1.0 + 2.0 * std::sqrt(1.0 + s * s)) / 3.0;
}

MeasurementSettings i96_optimal_settings(double theta) {
    require_gghz_theta(theta, "i96_optimal_settings");
    const double alpha = std::atan(std::sin(2.0 * theta));
    const BlochVector minus_z(0, 0, -1);
    const BlochVector x(1, 0, 0);
    return MeasurementSettings(minus_z, x, minus_z, x,
                               BlochVector(-std::sin(alpha), 0, std::cos(alpha)),
                               BlochVector(-std::sin(alpha), 0, -std::cos(alpha)));
}

MeasurementSettings i99_optimal_settings(double theta) {
    require_gghz_theta(theta, "i99_optimal_settings");
    const double alpha = std::atan(std::sin(2.0 * theta));
    const BlochVector x(1, 0, 0);
    const BlochVector z(0, 0, 1);
    return MeasurementSettings(x, z, x, z, BlochVector(std::sin(alpha), 0, std::cos(alpha)),
                               BlochVector(-std::sin(alpha), 0, std::cos(alpha)));
}

double i185_max_gghz(double theta) {
    require_gghz_theta(theta, "i185_max_gghz");
    const double s = std::sin(2.0 * theta);
    return std::max(std::sqrt(1.0 - s * s), std::sqrt(2.0 * s * s));
}

MeasurementSettings i185_optimal_settings(double theta) {
    require_gghz_theta(theta, "i185_optimal_settings");
    const double s = std::sin(2.0 * theta);
    if (std::sqrt(2.0) * s >= std::cos(2.0 * theta)) {
        // Equatorial: three-party correlators are sin 2theta cos(sum of azimuths).
        auto eq = [](double azimuth) { return BlochVector::from_spherical(kPi / 2, azimuth); };
        return MeasurementSettings(eq(0.0), eq(kPi / 2), eq(0.0), eq(3 * kPi / 2), eq(3 * kPi / 4),
                                   eq(5 * kPi / 4));
    }
    // Along +-z every correlator is +-cos 2theta.
    return saturating_z_settings(builtin(BuiltinId::I185));
}

MeasurementSettings saturating_z_settings(const BellInequality& ineq) {
    for (int strategy = 0; strategy < 64; ++strategy) {
        Rational total;
        for (const auto& [term, coeff] : ineq.terms()) {
            int sign = 1;
            for (int p = 0; p < 3; ++p) {
                if (auto st = term.setting(static_cast<Party>(p)); st && (strategy & (1 << (2 * p + *st)))) {
                    sign = -sign;
                }
            }
            total = total + (sign > 0 ? coeff : -coeff);
        }
        if (total * ineq.normalization() == lhv_bound_exact(ineq)) {
            auto v = [&](int bit) { return BlochVector(0, 0, (strategy & (1 << bit)) ? -1.0 : 1.0); };
            return MeasurementSettings(v(0), v(1), v(2), v(3), v(4), v(5));
        }
    }
    throw ConvergenceError("saturating_z_settings: no strategy attains the local bound");
}

double i185_max_ms(double omega) {
    if (!(omega >= 0.0 && omega <= kPi / 2 + 1e-15)) {
        throw DomainError("i185_max_ms: omega must lie in [0, pi/2]");
    }
    const double s = std::sin(omega);
    return std::sqrt(1.0 + s * s);
}

double i10_poly_approx(Radians theta) {
    require_gghz_theta(theta.value, "i10_poly_approx");
    const double t = theta.value;
    return 1.0 + t * (0.0622 + t * (1.697 + t * (-3.391 + t * 1.442)));
}

double i10_reduced(double u, double v, double theta) {
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    const double cu = std::cos(u), su = std::sin(u);
    const double cv = std::cos(v), sv = std::sin(v);
    return (2.0 * cv * (cv + 2.0 * cu) + c * (cu - 4.0 * cv + 3.0 * std::cos(2.0 * v) * cu) +
            2.0 * sv * sv * s * (2.0 + su)) /
           6.0;
}

Eigen::Vector2d i10_reduced_gradient(double u, double v, double theta) {
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    const double cu = std::cos(u), su = std::sin(u);
    const double cv = std::cos(v), sv = std::sin(v);
    const double c2v = std::cos(2.0 * v), s2v = std::sin(2.0 * v);
    const double du = -4.0 * cv * su + c * (-su - 3.0 * c2v * su) + 2.0 * s * sv * sv * cu;
    const double dv = -2.0 * s2v - 4.0 * sv * cu + c * (4.0 * sv - 6.0 * s2v * cu) +
                      2.0 * s * s2v * (2.0 + su);
    return Eigen::Vector2d(du, dv) / 6.0;
}

Eigen::Matrix2d i10_reduced_hessian(double u, double v, double theta) {
    const double c = std::cos(2.0 * theta);
    const double s = std::sin(2.0 * theta);
    const double cu = std::cos(u), su = std::sin(u);
    const double cv = std::cos(v), sv = std::sin(v);
    const double c2v = std::cos(2.0 * v), s2v = std::sin(2.0 * v);
    const double duu = -4.0 * cv * cu + c * (-cu - 3.0 * c2v * cu) - 2.0 * s * sv * sv * su;
    const double duv = 4.0 * sv * su + 6.0 * c * s2v * su + 2.0 * s * s2v * cu;
    const double dvv = -4.0 * c2v - 4.0 * cv * cu + c * (4.0 * cv - 12.0 * c2v * cu) +
                       4.0 * s * c2v * (2.0 + su);
    Eigen::Matrix2d h;
    h << duu, duv, duv, dvv;
    return h / 6.0;
}

MeasurementSettings i10_settings(double vartheta0, double vartheta1) {
    return MeasurementSettings::from_angles({kPi / 2, kPi / 3,                  //
                                             vartheta0, wrap_two_pi(-2 * kPi / 3),  //
                                             vartheta1, kPi / 3,                //
                                             vartheta1, 4 * kPi / 3,            //
                                             vartheta1, kPi / 3,                //
                                             vartheta1, 4 * kPi / 3});
}

I10Maximum i10_max_exact(double theta) {
    if (!(theta > 0.0 && theta <= kQuarterPi + 1e-15)) {
        throw DomainError("i10_max_exact: theta must lie in (0, pi/4]");
    }
    constexpr int kGrid = 360;
    constexpr double kStep = 2.0 * kPi / kGrid;
    constexpr double kResidualTolerance = 1e-9;
    constexpr int kCandidates = 8;
    constexpr int kNewtonIterations = 100;

    std::vector<double> grid(kGrid * kGrid);
    for (int i = 0; i < kGrid; ++i) {
        for (int j = 0; j < kGrid; ++j) grid[i * kGrid + j] = i10_reduced(i * kStep, j * kStep, theta);
    }
    // Periodic grid-local maxima, best first.
    struct Cell {
        double value;
        int i, j;
    };
    std::vector<Cell> peaks;
    for (int i = 0; i < kGrid; ++i) {
        for (int j = 0; j < kGrid; ++j) {
            const double value = grid[i * kGrid + j];
            bool peak = true;
            for (int di = -1; di <= 1 && peak; ++di) {
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const int ni = (i + di + kGrid) % kGrid;
                    const int nj = (j + dj + kGrid) % kGrid;
                    if (grid[ni * kGrid + nj] > value) {
                        peak = false;
                        break;
                    }
                }
            }
            if (peak) peaks.push_back({value, i, j});
        }
    }
    std::stable_sort(peaks.begin(), peaks.end(),
                     [](const Cell& a, const Cell& b) { return a.value > b.value; });
    if (peaks.size() > kCandidates) peaks.resize(kCandidates);

    I10Maximum best;
    best.value = -1e300;
    for (const auto& cell : peaks) {
        Eigen::Vector2d x(cell.i * kStep, cell.j * kStep);
        double value = i10_reduced(x(0), x(1), theta);
        Eigen::Vector2d g = i10_reduced_gradient(x(0), x(1), theta);
        for (int it = 0; it < kNewtonIterations && g.cwiseAbs().maxCoeff() > 1e-14; ++it) {
            const Eigen::Matrix2d h = i10_reduced_hessian(x(0), x(1), theta);
            Eigen::Vector2d step;
            // Newton step when the Hessian is negative definite, else ascend.
            if (h(0, 0) < 0.0 && h.determinant() > 0.0) {
                step = -h.ldlt().solve(g);
            } else {
                step = g;
            }
            double scale = 1.0;
            Eigen::Vector2d trial = x + step;
            double trial_value = i10_reduced(trial(0), trial(1), theta);
            while (trial_value < value - 1e-15 && scale > 1e-12) {
                scale *= 0.5;
                trial = x + scale * step;
                trial_value = i10_reduced(trial(0), trial(1), theta);
            }
            if (trial_value < value - 1e-15) break;
            x = trial;
            value = trial_value;
            g = i10_reduced_gradient(x(0), x(1), theta);
        }
        const double residual = g.cwiseAbs().maxCoeff();
        if (value > best.value) {
            best.value = value;
            best.angles = {wrap_two_pi(x(0)), wrap_two_pi(x(1)), residual < kResidualTolerance,
                           residual};
        }
    }
    if (!best.angles.converged) {
        throw I10ConvergenceError("i10_max_exact: stationarity residual above tolerance", best);
    }
    return best;
}

std::pair<Degrees, Degrees> appendix_b_angle_approx(Degrees theta) {
    const double t = theta.value;
    if (!(t > 0.0 && t <= 45.0 + 1e-12)) {
        throw DomainError("appendix_b_angle_approx: theta must lie in (0, 45] degrees");
    }
    const double v0 = 0.004 * t * t - 1.024 * t + 180.0;
    const double root = std::sqrt(t);
    const double v1 = std::max(std::cbrt(1.0 / (1.6992e-7 + 6.25e-8 * root)),
                               std::sqrt(1.0 / (3.1e-5 + 6.168e-6 * root)));
    return {Degrees{v0}, Degrees{v1}};
}

double i10_i96_crossover() {
    static const double root = bracketed_root(
        [](double t) { return i10_poly_approx(Radians{t}) - i96_max_gghz(t); }, deg2rad(5.0),
        deg2rad(25.0), "i10_i96_crossover");
    return root;
}

double i96_i185_crossover() {
    static const double root = bracketed_root(
        [](double t) { return i96_max_gghz(t) - i185_max_gghz(t); }, deg2rad(25.0), deg2rad(35.0),
        "i96_i185_crossover");
    return root;
}

double svetlichny_onset() {
    static const double root = bracketed_root(
        [](double t) { return std::sqrt(2.0) * std::sin(2.0 * t) - 1.0; }, 0.0, kQuarterPi,
        "svetlichny_onset");
    return root;
}

PMin p_min_gghz(double theta) {
    require_gghz_theta(theta, "p_min_gghz");
    if (theta < i10_i96_crossover()) return {1.0 / i10_poly_approx(Radians{theta}), BuiltinId::I10};
    if (theta < i96_i185_crossover()) return {1.0 / i96_max_gghz(theta), BuiltinId::I96};
    return {1.0 / i185_max_gghz(theta), BuiltinId::I185};
}

double p_min_ms(double omega) { return 1.0 / i185_max_ms(omega); }

double ms_vs_gghz_crossover() {
    // Both families parametrized by the three-tangle tau.
    const auto gap = [](double tau) {
        const double theta = 0.5 * std::asin(std::sqrt(tau));
        const double omega = std::asin(std::sqrt(tau));
        return p_min_ms(omega) - p_min_gghz(theta).p;
    };
    return bracketed_root(gap, 1e-3, 0.2, "ms_vs_gghz_crossover");
}

double i_max_gghz(BuiltinId id, double theta) {
    require_gghz_theta(theta, "i_max_gghz");
    switch (id) {
        case BuiltinId::I10: return theta > 0.0 ? i10_max_exact(theta).value : 1.0;
        case BuiltinId::I96:
        case BuiltinId::I99: return i96_max_gghz(theta);
        case BuiltinId::I185: return i185_max_gghz(theta);
    }
    throw DomainError("i_max_gghz: unknown inequality");
}

MeasurementSettings optimal_settings_gghz(BuiltinId id, double theta) {
    require_gghz_theta(theta, "optimal_settings_gghz");
    switch (id) {
        case BuiltinId::I10: {
            if (theta == 0.0) return saturating_z_settings(builtin(id));
            const auto m = i10_max_exact(theta);
            return i10_settings(m.angles.vartheta0, m.angles.vartheta1);
        }
        case BuiltinId::I96: return i96_optimal_settings(theta);
        case BuiltinId::I99: return i99_optimal_settings(theta);
        case BuiltinId::I185: return i185_optimal_settings(theta);
    }
    throw DomainError("optimal_settings_gghz: unknown inequality");
}

}  // namespace tribell
