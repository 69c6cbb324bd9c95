#include "tribell/bellcore.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <utility>

#include "tribell/errors.hpp"

namespace tribell {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const std::array<Matrix2, 4>& pauli() {
    static const std::array<Matrix2, 4> matrices = [] {
        std::array<Matrix2, 4> m;
        m[0] << 1, 0, 0, 1;
        m[1] << 0, 1, 1, 0;
        m[2] << 0, Complex(0, -1), Complex(0, 1), 0;
        m[3] << 1, 0, 0, -1;
        return m;
    }();
    return matrices;
}

Matrix8 kron3(const Matrix2& a, const Matrix2& b, const Matrix2& c) {
    Matrix8 out;
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            out(i, j) = a(i >> 2, j >> 2) * b((i >> 1) & 1, (j >> 1) & 1) * c(i & 1, j & 1);
        }
    }
    return out;
}

Eigen::Vector4d extended(const MeasurementSettings& settings, Party party,
                         std::optional<int> setting) {
    if (!setting) return Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    const auto& v = settings.at(party, *setting);
    return Eigen::Vector4d(0.0, v.x(), v.y(), v.z());
}

struct TermSpec {
    const char* term;
    int coeff;
};

BellInequality from_spec(const char* name, Rational norm, std::initializer_list<TermSpec> spec) {
    std::vector<std::pair<CorrelatorTerm, Rational>> terms;
    terms.reserve(spec.size());
    for (const auto& t : spec) terms.emplace_back(CorrelatorTerm::parse(t.term), Rational(t.coeff));
    return BellInequality(name, norm, std::move(terms));
}

}  // namespace

// ---------------------------------------------------------------------------
// BlochVector / MeasurementSettings

BlochVector::BlochVector(double x, double y, double z) : v_(x, y, z) {
    if (!v_.allFinite() || std::abs(v_.squaredNorm() - 1.0) > kUnitTolerance) {
        throw DomainError("BlochVector: not a unit vector");
    }
}

BlochVector BlochVector::from_spherical(double inclination, double azimuth) {
    const double s = std::sin(inclination);
    return BlochVector(s * std::cos(azimuth), s * std::sin(azimuth), std::cos(inclination));
}

SphericalAngles BlochVector::spherical() const {
    const double incl = std::acos(std::clamp(z(), -1.0, 1.0));
    double az = std::atan2(y(), x());
    if (az < 0.0) az += kTwoPi;
    return {incl, az};
}

MeasurementSettings::MeasurementSettings(BlochVector a0, BlochVector a1, BlochVector b0,
                                         BlochVector b1, BlochVector c0, BlochVector c1)
    : vectors_{a0, a1, b0, b1, c0, c1} {}

MeasurementSettings MeasurementSettings::from_angles(const std::array<double, 12>& angles) {
    auto v = [&](int i) { return BlochVector::from_spherical(angles[2 * i], angles[2 * i + 1]); };
    MeasurementSettings out(v(0), v(1), v(2), v(3), v(4), v(5));
    out.angles_ = angles;
    for (int i = 0; i < 6; ++i) {
        const auto back = BlochVector::from_spherical(angles[2 * i], angles[2 * i + 1]);
        if ((back.vec() - out.vectors_[i].vec()).norm() > kSyncTolerance) {
            throw DomainError("MeasurementSettings: spherical and Cartesian forms disagree");
        }
    }
    return out;
}

const BlochVector& MeasurementSettings::at(Party party, int setting) const {
    if (setting != 0 && setting != 1) throw DomainError("setting index must be 0 or 1");
    return vectors_[2 * static_cast<int>(party) + setting];
}

std::array<double, 12> MeasurementSettings::angles() const {
    if (angles_) return *angles_;
    std::array<double, 12> out{};
    for (int i = 0; i < 6; ++i) {
        const auto s = vectors_[i].spherical();
        out[2 * i] = s.inclination;
        out[2 * i + 1] = s.azimuth;
    }
    return out;
}

// ---------------------------------------------------------------------------
// CorrelatorTerm

CorrelatorTerm::CorrelatorTerm(std::optional<int> a, std::optional<int> b, std::optional<int> c)
    : settings_{a, b, c} {
    for (const auto& s : settings_) {
        if (s && *s != 0 && *s != 1) throw DomainError("CorrelatorTerm: setting must be 0 or 1");
    }
    if (!a && !b && !c) throw DomainError("CorrelatorTerm: at least one party required");
}

int CorrelatorTerm::order() const {
    int n = 0;
    for (const auto& s : settings_) n += s.has_value() ? 1 : 0;
    return n;
}

std::string CorrelatorTerm::to_string() const {
    static constexpr char kNames[3] = {'A', 'B', 'C'};
    std::string out;
    for (int p = 0; p < 3; ++p) {
        if (settings_[p]) {
            out += kNames[p];
            out += static_cast<char>('0' + *settings_[p]);
        }
    }
    return out;
}

CorrelatorTerm CorrelatorTerm::parse(std::string_view text) {
    std::array<std::optional<int>, 3> s;
    int last = -1;
    if (text.empty() || text.size() % 2 != 0) {
        throw DomainError("CorrelatorTerm: cannot parse '" + std::string(text) + "'");
    }
    for (std::size_t i = 0; i < text.size(); i += 2) {
        const int party = text[i] - 'A';
        const int setting = text[i + 1] - '0';
        if (party < 0 || party > 2 || party <= last || (setting != 0 && setting != 1)) {
            throw DomainError("CorrelatorTerm: cannot parse '" + std::string(text) + "'");
        }
        s[party] = setting;
        last = party;
    }
    return CorrelatorTerm(s[0], s[1], s[2]);
}

// ---------------------------------------------------------------------------
// Rational

Rational::Rational(std::int64_t num, std::int64_t den) {
    if (den == 0) throw DomainError("Rational: zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    const std::int64_t g = std::gcd(num, den);
    num_ = g == 0 ? 0 : num / g;
    den_ = g == 0 ? 1 : den / g;
}

Rational Rational::operator+(const Rational& rhs) const {
    return Rational(num_ * rhs.den_ + rhs.num_ * den_, den_ * rhs.den_);
}

Rational Rational::operator*(const Rational& rhs) const {
    return Rational(num_ * rhs.num_, den_ * rhs.den_);
}

std::strong_ordering Rational::operator<=>(const Rational& rhs) const {
    return num_ * rhs.den_ <=> rhs.num_ * den_;
}

// ---------------------------------------------------------------------------
// BellInequality

std::string to_string(BuiltinId id) {
    switch (id) {
        case BuiltinId::I10: return "I10";
        case BuiltinId::I96: return "I96";
        case BuiltinId::I99: return "I99";
        case BuiltinId::I185: return "I185";
    }
    return "?";
}

BuiltinId parse_builtin_id(std::string_view name) {
    for (auto id : kAllBuiltins) {
        if (to_string(id) == name) return id;
    }
    throw LookupError("unknown inequality '" + std::string(name) + "'");
}

BellInequality::BellInequality(std::string name, Rational normalization,
                               std::vector<std::pair<CorrelatorTerm, Rational>> terms)
    : name_(std::move(name)), normalization_(normalization) {
    if (normalization_.num() <= 0) throw DomainError("BellInequality: normalization must be positive");
    for (auto& [term, coeff] : terms) {
        auto [it, inserted] = terms_.try_emplace(term, coeff);
        if (!inserted) it->second = it->second + coeff;
    }
    std::erase_if(terms_, [](const auto& kv) { return kv.second.num() == 0; });
    if (terms_.empty()) throw DomainError("BellInequality: empty coefficient table");
}

BellInequality builtin(BuiltinId id) {
    switch (id) {
        case BuiltinId::I185:
            return from_spec("I185", Rational(1, 4),
                             {{"A0B0C0", -1}, {"A1B0C0", -1}, {"A0B1C0", 1}, {"A1B1C0", -1},
                              {"A0B0C1", -1}, {"A1B0C1", 1}, {"A0B1C1", -1}, {"A1B1C1", -1}});
        case BuiltinId::I96:
            return from_spec("I96", Rational(1, 6),
                             {{"A0B0", 2}, {"C0", -1}, {"A0C0", -1}, {"B0C0", -1},
                              {"A0B0C0", 1}, {"A1B1C0", -2}, {"C1", -1}, {"A0C1", 1},
                              {"B0C1", 1}, {"A0B0C1", 1}, {"A1B1C1", -2}});
        case BuiltinId::I99:
            return from_spec("I99", Rational(1, 3),
                             {{"A1B1", 1}, {"B1C0", 1}, {"A1C1", 1}, {"A0B0C0", 1},
                              {"A0B0C1", -1}});
        case BuiltinId::I10:
            return from_spec("I10", Rational(1, 6),
                             {{"A1", -2},    {"B0", -1},    {"A1B0", 1},   {"B1", -1},
                              {"A1B1", 1},   {"C0", -1},    {"A1C0", 1},   {"B0C0", 1},
                              {"A0B0C0", -1}, {"A1B0C0", 2}, {"A0B1C0", 1}, {"A1B1C0", 1},
                              {"C1", -1},    {"A1C1", 1},   {"A0B0C1", 1}, {"A1B0C1", 1},
                              {"B1C1", 1},   {"A0B1C1", -1}, {"A1B1C1", 2}});
    }
    throw LookupError("unknown builtin inequality");
}

BellInequality builtin(std::string_view name) { return builtin(parse_builtin_id(name)); }

Rational lhv_bound_exact(const BellInequality& ineq) {
    std::optional<Rational> best;
    // Bit 2*party + setting of `strategy` set means outcome -1.
    for (int strategy = 0; strategy < 64; ++strategy) {
        Rational total;
        for (const auto& [term, coeff] : ineq.terms()) {
            int sign = 1;
            for (int p = 0; p < 3; ++p) {
                if (auto s = term.setting(static_cast<Party>(p))) {
                    if (strategy & (1 << (2 * p + *s))) sign = -sign;
                }
            }
            total = total + (sign > 0 ? coeff : -coeff);
        }
        const Rational normalized = total * ineq.normalization();
        if (!best || normalized > *best) best = normalized;
    }
    return *best;
}

double lhv_bound(const BellInequality& ineq) { return lhv_bound_exact(ineq).value(); }

// ---------------------------------------------------------------------------
// Quantum evaluation

Matrix2 observable(const BlochVector& v) {
    const auto& s = pauli();
    return v.x() * s[1] + v.y() * s[2] + v.z() * s[3];
}

double correlator(const DensityMatrix3Q& rho, const MeasurementSettings& settings,
                  const CorrelatorTerm& term) {
    auto op = [&](Party p) -> Matrix2 {
        const auto s = term.setting(p);
        return s ? observable(settings.at(p, *s)) : pauli()[0];
    };
    const Matrix8 o = kron3(op(Party::A), op(Party::B), op(Party::C));
    // Residual imaginary part is rounding noise for Hermitian rho and O.
    return (rho.entries() * o).trace().real();
}

double evaluate(const DensityMatrix3Q& rho, const BellInequality& ineq,
                const MeasurementSettings& settings) {
    double sum = 0.0;
    for (const auto& [term, coeff] : ineq.terms()) {
        sum += coeff.value() * correlator(rho, settings, term);
    }
    return ineq.normalization().value() * sum;
}

CorrelationTensor::CorrelationTensor(const DensityMatrix3Q& rho) {
    const auto& s = pauli();
    for (int mu = 0; mu < 4; ++mu) {
        for (int nu = 0; nu < 4; ++nu) {
            for (int la = 0; la < 4; ++la) {
                t_[16 * mu + 4 * nu + la] =
                    (rho.entries() * kron3(s[mu], s[nu], s[la])).trace().real();
            }
        }
    }
}

double CorrelationTensor::contract(const Eigen::Vector4d& a, const Eigen::Vector4d& b,
                                   const Eigen::Vector4d& c) const {
    double sum = 0.0;
    for (int mu = 0; mu < 4; ++mu) {
        if (a(mu) == 0.0) continue;
        double inner = 0.0;
        for (int nu = 0; nu < 4; ++nu) {
            if (b(nu) == 0.0) continue;
            const double* row = &t_[16 * mu + 4 * nu];
            inner += b(nu) * (row[0] * c(0) + row[1] * c(1) + row[2] * c(2) + row[3] * c(3));
        }
        sum += a(mu) * inner;
    }
    return sum;
}

double CorrelationTensor::correlator(const MeasurementSettings& settings,
                                     const CorrelatorTerm& term) const {
    return contract(extended(settings, Party::A, term.setting(Party::A)),
                    extended(settings, Party::B, term.setting(Party::B)),
                    extended(settings, Party::C, term.setting(Party::C)));
}

double CorrelationTensor::evaluate(const BellInequality& ineq,
                                   const MeasurementSettings& settings) const {
    double sum = 0.0;
    for (const auto& [term, coeff] : ineq.terms()) sum += coeff.value() * correlator(settings, term);
    return ineq.normalization().value() * sum;
}

}  // namespace tribell
