#include "tribell/qstate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "tribell/errors.hpp"

namespace tribell {

namespace {

constexpr double kPi = std::numbers::pi;

bool all_finite(const Amplitudes& v) {
    for (int i = 0; i < kDim; ++i) {
        if (!std::isfinite(v(i).real()) || !std::isfinite(v(i).imag())) return false;
    }
    return true;
}

Eigen::Matrix<double, 8, 1> eigenvalues(const Matrix8& hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix8> solver(hermitian, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

int qubit_bit(Bipartition cut) {
    switch (cut) {
        case Bipartition::A_BC: return 2;
        case Bipartition::B_AC: return 1;
        case Bipartition::C_AB: return 0;
    }
    return 0;
}

}  // namespace

PureState3Q::PureState3Q(const Amplitudes& amplitudes, std::string label)
    : amplitudes_(amplitudes), label_(std::move(label)) {
    if (!all_finite(amplitudes_)) throw DomainError("PureState3Q: non-finite amplitude");
    const double norm2 = amplitudes_.squaredNorm();
    if (std::abs(norm2 - 1.0) > kNormTolerance) {
        throw DomainError("PureState3Q: squared norm " + std::to_string(norm2) + " is not 1");
    }
}

PureState3Q PureState3Q::normalized(const Amplitudes& amplitudes, std::string label) {
    if (!all_finite(amplitudes)) throw DomainError("PureState3Q: non-finite amplitude");
    const double norm = amplitudes.norm();
    if (norm == 0.0) throw DomainError("PureState3Q: zero vector");
    return PureState3Q(amplitudes / norm, std::move(label));
}

DensityMatrix3Q::DensityMatrix3Q(const Matrix8& entries, double tolerance)
    : entries_(entries), tolerance_(tolerance) {
    if (!(tolerance >= 0.0)) throw DomainError("DensityMatrix3Q: negative tolerance");
    for (int r = 0; r < kDim; ++r) {
        for (int c = 0; c < kDim; ++c) {
            const Complex z = entries_(r, c);
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                throw DomainError("DensityMatrix3Q: non-finite entry");
            }
            if (std::abs(z - std::conj(entries_(c, r))) > kHermitianTolerance) {
                throw DomainError("DensityMatrix3Q: not Hermitian");
            }
        }
    }
    const Complex tr = entries_.trace();
    if (std::abs(tr - 1.0) > kTraceTolerance) {
        throw DomainError("DensityMatrix3Q: trace " + std::to_string(tr.real()) + " is not 1");
    }
    // Symmetrize so downstream eigen-solvers see an exactly Hermitian matrix.
    entries_ = (0.5 * (entries_ + entries_.adjoint())).eval();
    const double min_eig = eigenvalues(entries_).minCoeff();
    if (min_eig < -tolerance_) {
        throw DomainError("DensityMatrix3Q: negative eigenvalue " + std::to_string(min_eig));
    }
}

DensityMatrix3Q DensityMatrix3Q::from_pure(const PureState3Q& psi) {
    return DensityMatrix3Q(psi.projector());
}

DensityMatrix3Q DensityMatrix3Q::maximally_mixed() {
    return DensityMatrix3Q(Matrix8::Identity() / 8.0);
}

StateFamily parse_family(std::string_view tag) {
    std::string lower(tag);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (lower == "gghz") return StateFamily::GGHZ;
    if (lower == "ms") return StateFamily::MS;
    throw DomainError("unknown state family '" + std::string(tag) + "'");
}

PureState3Q make_gghz(double theta) {
    if (!(theta >= 0.0 && theta <= kPi / 4 + 1e-15)) {
        throw DomainError("make_gghz: theta must lie in [0, pi/4]");
    }
    Amplitudes amps = Amplitudes::Zero();
    amps(0) = std::cos(theta);
    amps(7) = std::sin(theta);
    return PureState3Q(amps, "gGHZ");
}

PureState3Q make_phi(double theta, double xi, double omega) {
    if (!std::isfinite(theta) || !std::isfinite(xi) || !std::isfinite(omega)) {
        throw DomainError("make_phi: non-finite angle");
    }
    const double b[2] = {std::cos(xi), std::sin(xi)};
    const double c[2] = {std::cos(omega), std::sin(omega)};
    Amplitudes amps = Amplitudes::Zero();
    amps(0) = std::cos(theta);
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) amps(4 + 2 * j + k) += std::sin(theta) * b[j] * c[k];
    }
    return PureState3Q::normalized(amps, "Phi");
}

PureState3Q make_ms(double omega) {
    if (!(omega >= 0.0 && omega <= kPi / 2 + 1e-15)) {
        throw DomainError("make_ms: omega must lie in [0, pi/2]");
    }
    return PureState3Q(make_phi(kPi / 4, kPi / 2, omega).amplitudes(), "MS");
}

DensityMatrix3Q depolarize(const PureState3Q& psi, double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw DomainError("depolarize: p must lie in [0, 1]");
    const Matrix8 rho = p * psi.projector() + ((1.0 - p) / 8.0) * Matrix8::Identity();
    return DensityMatrix3Q(rho);
}

DensityMatrix3Q mix(double weight, const DensityMatrix3Q& first, const DensityMatrix3Q& second) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw DomainError("mix: weight must lie in [0, 1]");
    return DensityMatrix3Q(weight * first.entries() + (1.0 - weight) * second.entries(),
                           std::max(first.tolerance(), second.tolerance()));
}

double fidelity(const DensityMatrix3Q& rho, const PureState3Q& psi) {
    const Amplitudes& v = psi.amplitudes();
    return (v.adjoint() * rho.entries() * v)(0, 0).real();
}

GghzFidelity fidelity_opt_gghz(const DensityMatrix3Q& rho) {
    // <G|rho|G> only involves rho_00, rho_77 and Re rho_07.
    const double r00 = rho(0, 0).real();
    const double r77 = rho(7, 7).real();
    const double r07 = rho(0, 7).real();
    const auto objective = [&](double theta) {
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        return c * c * r00 + s * s * r77 + 2.0 * c * s * r07;
    };

    constexpr int kGrid = 1000;
    constexpr double kUpper = kPi / 4;
    const double step = kUpper / kGrid;
    int best_index = 0;
    double best_value = objective(0.0);
    double worst_value = best_value;
    for (int i = 1; i <= kGrid; ++i) {
        const double value = objective(i * step);
        worst_value = std::min(worst_value, value);
        if (value > best_value + 1e-15) {
            best_value = value;
            best_index = i;
        }
    }
    if (best_value - worst_value <= 1e-15) return {0.0, best_value};

    const double lo = std::max(0.0, (best_index - 1) * step);
    const double hi = std::min(kUpper, (best_index + 1) * step);
    // Brent resolves the argmax to ~sqrt(eps) relative, i.e. about 1e-8 rad.
    const auto [arg, neg] = boost::math::tools::brent_find_minima(
        [&](double theta) { return -objective(theta); }, lo, hi,
        std::numeric_limits<double>::digits / 2);
    if (-neg >= best_value) return {arg, -neg};
    return {best_index * step, best_value};
}

double purity(const DensityMatrix3Q& rho) {
    // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho.
    return rho.entries().squaredNorm();
}

double f_max_bound(double p) {
    if (!(p >= 0.125 - 1e-15 && p <= 1.0 + 1e-12)) {
        throw DomainError("f_max_bound: purity must lie in [1/8, 1]");
    }
    return (1.0 + std::sqrt(std::max(0.0, 56.0 * p - 7.0))) / 8.0;
}

double visibility_from_purity(double p) {
    if (!(p >= 0.125 - 1e-15 && p <= 1.0 + 1e-12)) {
        throw DomainError("visibility_from_purity: purity must lie in [1/8, 1]");
    }
    return std::sqrt(std::max(0.0, (8.0 * p - 1.0) / 7.0));
}

Matrix8 partial_transpose(const Matrix8& rho, Bipartition cut) {
    const int mask = 1 << qubit_bit(cut);
    Matrix8 out;
    for (int r = 0; r < kDim; ++r) {
        for (int c = 0; c < kDim; ++c) {
            // Swap the cut qubit's bit between row and column index.
            const int r2 = (r & ~mask) | (c & mask);
            const int c2 = (c & ~mask) | (r & mask);
            out(r2, c2) = rho(r, c);
        }
    }
    return out;
}

Matrix8 partial_transpose(const DensityMatrix3Q& rho, Bipartition cut) {
    return partial_transpose(rho.entries(), cut);
}

double bipartite_negativity(const DensityMatrix3Q& rho, Bipartition cut) {
    const auto eig = eigenvalues(partial_transpose(rho, cut));
    double negative = 0.0;
    for (int i = 0; i < kDim; ++i) {
        if (eig(i) < -rho.tolerance()) negative -= eig(i);
    }
    return 2.0 * negative;
}

double tri_negativity(const DensityMatrix3Q& rho) {
    const double product = bipartite_negativity(rho, Bipartition::A_BC) *
                           bipartite_negativity(rho, Bipartition::B_AC) *
                           bipartite_negativity(rho, Bipartition::C_AB);
    return std::cbrt(product);
}

double n_tri_model(double theta, double p) {
    if (!(theta >= 0.0 && theta <= kPi / 4 + 1e-15)) {
        throw DomainError("n_tri_model: theta must lie in [0, pi/4]");
    }
    const double vis = visibility_from_purity(p);
    const double x = vis * (1.0 + 4.0 * std::sin(2.0 * theta));
    return (-1.0 + x + std::abs(1.0 - x)) / 8.0;
}

double three_tangle(StateFamily family, double angle) {
    switch (family) {
        case StateFamily::GGHZ: {
            const double s = std::sin(2.0 * angle);
            return s * s;
        }
        case StateFamily::MS: {
            const double s = std::sin(angle);
            return s * s;
        }
    }
    throw DomainError("three_tangle: unknown family");
}

double trace_distance(const Matrix8& lhs, const Matrix8& rhs) {
    const Matrix8 diff = lhs - rhs;
    const auto eig = eigenvalues(0.5 * (diff + diff.adjoint()));
    return 0.5 * eig.cwiseAbs().sum();
}

}  // namespace tribell
