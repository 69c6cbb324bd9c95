#pragma once

// Two-setting, two-outcome tripartite Bell expressions and their quantum
// evaluation.

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tribell/qstate.hpp"

namespace tribell {

enum class Party { A = 0, B = 1, C = 2 };

/// Spherical angles of a unit vector: inclination from +z in [0, pi],
/// azimuth in the x-y plane in [0, 2 pi).
struct SphericalAngles {
    double inclination = 0.0;
    double azimuth = 0.0;
};

class BlochVector {
public:
    static constexpr double kUnitTolerance = 1e-10;

    /// +z
    BlochVector() : v_(0.0, 0.0, 1.0) {}
    /// Throws DomainError unless x^2 + y^2 + z^2 = 1 within kUnitTolerance.
    BlochVector(double x, double y, double z);

    static BlochVector from_spherical(double inclination, double azimuth);
    static BlochVector from_spherical(const SphericalAngles& angles) {
        return from_spherical(angles.inclination, angles.azimuth);
    }

    double x() const { return v_.x(); }
    double y() const { return v_.y(); }
    double z() const { return v_.z(); }
    const Eigen::Vector3d& vec() const { return v_; }

    SphericalAngles spherical() const;

    BlochVector operator-() const { return BlochVector(-x(), -y(), -z()); }

private:
    Eigen::Vector3d v_;
};

/// Six measurement directions: settings 0 and 1 for each of A, B, C.
class MeasurementSettings {
public:
    static constexpr double kSyncTolerance = 1e-10;

    /// All six along +z.
    MeasurementSettings() = default;

    MeasurementSettings(BlochVector a0, BlochVector a1, BlochVector b0, BlochVector b1,
                        BlochVector c0, BlochVector c1);

    /// Angles in the order (incl, azim) for a0, a1, b0, b1, c0, c1. The
    /// spherical form is retained alongside the Cartesian one.
    static MeasurementSettings from_angles(const std::array<double, 12>& angles);

    const BlochVector& at(Party party, int setting) const;
    const BlochVector& at(int flat_index) const { return vectors_.at(flat_index); }

    /// Stored spherical angles if constructed from angles, otherwise derived.
    std::array<double, 12> angles() const;
    bool has_spherical() const { return angles_.has_value(); }

private:
    std::array<BlochVector, 6> vectors_;
    std::optional<std::array<double, 12>> angles_;
};

/// Which setting (0/1) each party uses in a correlator; absent parties are
/// traced out.
class CorrelatorTerm {
public:
    CorrelatorTerm(std::optional<int> a, std::optional<int> b, std::optional<int> c);

    std::optional<int> setting(Party party) const { return settings_[static_cast<int>(party)]; }
    int order() const;

    /// Canonical text such as "A0B1C0" or "B1".
    std::string to_string() const;
    static CorrelatorTerm parse(std::string_view text);

    auto operator<=>(const CorrelatorTerm&) const = default;

private:
    std::array<std::optional<int>, 3> settings_;
};

/// Exact rational with positive denominator in lowest terms.
class Rational {
public:
    Rational(std::int64_t num = 0, std::int64_t den = 1);

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    Rational operator+(const Rational& rhs) const;
    Rational operator*(const Rational& rhs) const;
    Rational operator-() const { return Rational(-num_, den_); }

    bool operator==(const Rational&) const = default;
    std::strong_ordering operator<=>(const Rational& rhs) const;

private:
    std::int64_t num_;
    std::int64_t den_;
};

enum class BuiltinId { I10, I96, I99, I185 };

std::string to_string(BuiltinId id);
BuiltinId parse_builtin_id(std::string_view name);
inline constexpr std::array<BuiltinId, 4> kAllBuiltins = {BuiltinId::I10, BuiltinId::I96,
                                                         BuiltinId::I99, BuiltinId::I185};

class BellInequality {
public:
    using TermMap = std::map<CorrelatorTerm, Rational>;

    /// Repeated terms are summed; zero coefficients dropped. Throws DomainError
    /// on an empty table or non-positive normalization.
    BellInequality(std::string name, Rational normalization,
                   std::vector<std::pair<CorrelatorTerm, Rational>> terms);

    const std::string& name() const { return name_; }
    const Rational& normalization() const { return normalization_; }
    const TermMap& terms() const { return terms_; }
    /// The local bound every inequality in this library is normalized to.
    static constexpr double classical_bound() { return 1.0; }

private:
    std::string name_;
    Rational normalization_;
    TermMap terms_;
};

/// x sigma_x + y sigma_y + z sigma_z.
Matrix2 observable(const BlochVector& v);

/// Tr[rho (O_A (x) O_B (x) O_C)], identity for absent parties.
double correlator(const DensityMatrix3Q& rho, const MeasurementSettings& settings,
                  const CorrelatorTerm& term);

/// normalization * sum coefficient * correlator. Values above 1 violate the
/// inequality's local bound.
double evaluate(const DensityMatrix3Q& rho, const BellInequality& ineq,
                const MeasurementSettings& settings);

BellInequality builtin(BuiltinId id);
/// Lookup by name ("I10", "I96", "I99", "I185"); LookupError if unknown.
BellInequality builtin(std::string_view name);

/// Exact maximum of the normalized expression over the 64 deterministic
/// +-1 strategies.
Rational lhv_bound_exact(const BellInequality& ineq);
double lhv_bound(const BellInequality& ineq);

/// Pauli correlation tensor T[mu][nu][lambda] = Tr[rho s_mu (x) s_nu (x) s_lambda]
/// with s_0 = identity. Any correlator is a multilinear contraction of T, which
/// is the fast route used by the optimizer.
class CorrelationTensor {
public:
    explicit CorrelationTensor(const DensityMatrix3Q& rho);

    double operator()(int mu, int nu, int lambda) const { return t_[16 * mu + 4 * nu + lambda]; }

    /// Contract with three 4-vectors (1,0,0,0) for absent or (0,n) for present.
    double contract(const Eigen::Vector4d& a, const Eigen::Vector4d& b,
                    const Eigen::Vector4d& c) const;

    double correlator(const MeasurementSettings& settings, const CorrelatorTerm& term) const;
    double evaluate(const BellInequality& ineq, const MeasurementSettings& settings) const;

private:
    std::array<double, 64> t_{};
};

}  // namespace tribell
