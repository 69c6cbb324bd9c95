#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "../support.hpp"
#include "tribell/bellcore.hpp"
#include "tribell/closedform.hpp"
#include "tribell/errors.hpp"
#include "tribell/io.hpp"

using namespace tribell;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

/// Maximum over deterministic strategies by brute force in floating point,
/// written independently of lhv_bound_exact.
double lhv_oracle(const BellInequality& ineq) {
    double best = -1e300;
    for (int a0 = -1; a0 <= 1; a0 += 2)
        for (int a1 = -1; a1 <= 1; a1 += 2)
            for (int b0 = -1; b0 <= 1; b0 += 2)
                for (int b1 = -1; b1 <= 1; b1 += 2)
                    for (int c0 = -1; c0 <= 1; c0 += 2)
                        for (int c1 = -1; c1 <= 1; c1 += 2) {
                            const int a[2] = {a0, a1};
                            const int b[2] = {b0, b1};
                            const int c[2] = {c0, c1};
                            double sum = 0.0;
                            for (const auto& [t, coeff] : ineq.terms()) {
                                double v = coeff.value();
                                if (auto s = t.setting(Party::A)) v *= a[*s];
                                if (auto s = t.setting(Party::B)) v *= b[*s];
                                if (auto s = t.setting(Party::C)) v *= c[*s];
                                sum += v;
                            }
                            best = std::max(best, sum * ineq.normalization().value());
                        }
    return best;
}

BellInequality swap_ab(const BellInequality& ineq) {
    std::vector<std::pair<CorrelatorTerm, Rational>> terms;
    for (const auto& [t, c] : ineq.terms()) {
        terms.emplace_back(CorrelatorTerm(t.setting(Party::B), t.setting(Party::A), t.setting(Party::C)), c);
    }
    return BellInequality(ineq.name() + "_swapped", ineq.normalization(), terms);
}

}  // namespace

TEST_CASE("Bloch vectors") {
    CHECK_THROWS_AS(BlochVector(1, 1, 0), DomainError);
    const auto v = BlochVector::from_spherical(kPi / 2, kPi / 2);
    CHECK(v.y() == Approx(1.0));
    const auto s = BlochVector(0, 0, -1).spherical();
    CHECK(s.inclination == Approx(kPi));
    std::mt19937_64 gen(1);
    for (int i = 0; i < 100; ++i) {
        const auto d = testing::random_direction(gen);
        const auto back = BlochVector::from_spherical(d.spherical());
        CHECK((back.vec() - d.vec()).norm() < 1e-12);
    }
}

TEST_CASE("observables") {
    const Matrix2 z = observable(BlochVector(0, 0, 1));
    CHECK(z(0, 0) == Complex(1.0));
    CHECK(z(1, 1) == Complex(-1.0));
    const Matrix2 x = observable(BlochVector(1, 0, 0));
    CHECK(x(0, 1) == Complex(1.0));
    CHECK(x(1, 0) == Complex(1.0));
    const double a = std::atan(1.0);
    const Matrix2 m = observable(BlochVector(-std::sin(a), 0, std::cos(a)));
    const Matrix2 expected = std::cos(a) * z - std::sin(a) * x;
    CHECK((m - expected).norm() < 1e-15);
    Eigen::SelfAdjointEigenSolver<Matrix2> es(m);
    CHECK(es.eigenvalues()(0) == Approx(-1.0));
    CHECK(es.eigenvalues()(1) == Approx(1.0));
}

TEST_CASE("settings keep spherical and Cartesian forms in sync") {
    std::array<double, 12> angles{};
    for (int i = 0; i < 12; ++i) angles[i] = 0.1 * (i + 1);
    const auto s = MeasurementSettings::from_angles(angles);
    CHECK(s.has_spherical());
    CHECK(s.angles() == angles);
    CHECK((s.at(Party::B, 1).vec() - BlochVector::from_spherical(0.7, 0.8).vec()).norm() < 1e-15);
    CHECK_THROWS_AS(s.at(Party::A, 2), DomainError);
}

TEST_CASE("correlator terms") {
    const CorrelatorTerm t(0, std::nullopt, 1);
    CHECK(t.order() == 2);
    CHECK(t.to_string() == "A0C1");
    CHECK(CorrelatorTerm::parse("A0C1") == t);
    CHECK(CorrelatorTerm::parse("B1").order() == 1);
    CHECK_THROWS_AS(CorrelatorTerm(std::nullopt, std::nullopt, std::nullopt), DomainError);
    CHECK_THROWS_AS(CorrelatorTerm(2, 0, 0), DomainError);
    CHECK_THROWS_AS(CorrelatorTerm::parse("A0A1"), DomainError);
    CHECK_THROWS_AS(CorrelatorTerm::parse("D0"), DomainError);
}

TEST_CASE("rationals") {
    CHECK(Rational(2, 4) == Rational(1, 2));
    CHECK(Rational(1, -3) == Rational(-1, 3));
    CHECK(Rational(1, 2) + Rational(1, 3) == Rational(5, 6));
    CHECK(Rational(2, 3) * Rational(3, 4) == Rational(1, 2));
    CHECK(Rational(1, 3) < Rational(1, 2));
    CHECK_THROWS_AS(Rational(1, 0), DomainError);
}

TEST_CASE("builtin tables") {
    const auto i185 = builtin(BuiltinId::I185);
    CHECK(i185.terms().size() == 8);
    CHECK(i185.normalization() == Rational(1, 4));
    for (const auto& [t, c] : i185.terms()) {
        CHECK(t.order() == 3);
        CHECK((c == Rational(1) || c == Rational(-1)));
    }

    const auto i99 = builtin("I99");
    CHECK(i99.normalization() == Rational(1, 3));
    CHECK(i99.terms().size() == 5);
    CHECK(i99.terms().at(CorrelatorTerm::parse("A1B1")) == Rational(1));
    CHECK(i99.terms().at(CorrelatorTerm::parse("B1C0")) == Rational(1));
    CHECK(i99.terms().at(CorrelatorTerm::parse("A1C1")) == Rational(1));
    CHECK(i99.terms().at(CorrelatorTerm::parse("A0B0C0")) == Rational(1));
    CHECK(i99.terms().at(CorrelatorTerm::parse("A0B0C1")) == Rational(-1));

    const auto i10 = builtin(BuiltinId::I10);
    CHECK(i10.normalization() == Rational(1, 6));
    CHECK(i10.terms().size() == 19);
    CHECK(i10.terms().at(CorrelatorTerm::parse("A1")) == Rational(-2));
    CHECK(i10.terms().at(CorrelatorTerm::parse("A1B0C0")) == Rational(2));

    CHECK(builtin(BuiltinId::I96).normalization() == Rational(1, 6));
    CHECK_THROWS_AS(builtin("I11"), LookupError);
}

TEST_CASE("local bounds of the builtins") {
    for (auto id : kAllBuiltins) {
        const auto ineq = builtin(id);
        CHECK(lhv_bound_exact(ineq) == Rational(1));
        CHECK(std::abs(lhv_bound(ineq) - 1.0) < 1e-12);
        CHECK(std::abs(lhv_oracle(ineq) - 1.0) < 1e-12);
    }
}

TEST_CASE("inequality construction") {
    CHECK_THROWS_AS(BellInequality("empty", Rational(1), {}), DomainError);
    CHECK_THROWS_AS(BellInequality("neg", Rational(-1), {{CorrelatorTerm::parse("A0"), Rational(1)}}),
                    DomainError);
    const BellInequality merged("m", Rational(1),
                                {{CorrelatorTerm::parse("A0"), Rational(1)},
                                 {CorrelatorTerm::parse("A0"), Rational(-1)},
                                 {CorrelatorTerm::parse("B0"), Rational(1)}});
    CHECK(merged.terms().size() == 1);
}

TEST_CASE("correlator examples") {
    const auto ghz = DensityMatrix3Q::from_pure(make_gghz(kPi / 4));
    const auto z = BlochVector(0, 0, 1);
    const auto x = BlochVector(1, 0, 0);
    const MeasurementSettings zs(z, z, z, z, z, z);
    CHECK(std::abs(correlator(ghz, zs, CorrelatorTerm::parse("C0"))) < 1e-15);
    for (double th : {0.0, 0.3, kPi / 4}) {
        const auto g = DensityMatrix3Q::from_pure(make_gghz(th));
        CHECK(correlator(g, zs, CorrelatorTerm::parse("A0B0")) == Approx(1.0));
        CHECK(correlator(g, zs, CorrelatorTerm::parse("A0B0C0")) == Approx(std::cos(2 * th)));
    }
    const MeasurementSettings xs(x, x, x, x, x, x);
    CHECK(correlator(ghz, xs, CorrelatorTerm::parse("A0B0C0")) == Approx(1.0));
}

TEST_CASE("evaluate examples") {
    const auto ghz = DensityMatrix3Q::from_pure(make_gghz(kPi / 4));
    CHECK(evaluate(ghz, builtin(BuiltinId::I185), i185_optimal_settings(kPi / 4)) ==
          Approx(std::sqrt(2.0)));
    CHECK(evaluate(ghz, builtin(BuiltinId::I96), i96_optimal_settings(kPi / 4)) ==
          Approx(i96_max_gghz(kPi / 4)));
    std::mt19937_64 gen(3);
    for (auto id : kAllBuiltins) {
        const auto s = testing::random_settings(gen);
        CHECK(std::abs(evaluate(DensityMatrix3Q::maximally_mixed(), builtin(id), s)) < 1e-15);
    }
}

TEST_CASE("correlation tensor agrees with the Kronecker trace") {
    std::mt19937_64 gen(17);
    for (int n = 0; n < 50; ++n) {
        const auto rho = testing::random_density(gen, 1 + n % 4);
        const auto s = testing::random_settings(gen);
        const CorrelationTensor t(rho);
        for (auto id : kAllBuiltins) {
            const auto ineq = builtin(id);
            CHECK(std::abs(t.evaluate(ineq, s) - evaluate(rho, ineq, s)) < 1e-12);
            for (const auto& [term, _] : ineq.terms()) {
                const double c = correlator(rho, s, term);
                CHECK(std::abs(c) <= 1.0 + 1e-10);
                CHECK(std::abs(t.correlator(s, term) - c) < 1e-12);
            }
        }
    }
}

TEST_CASE("evaluate is linear and scales with visibility") {
    std::mt19937_64 gen(23);
    for (int n = 0; n < 30; ++n) {
        const auto r1 = testing::random_density(gen);
        const auto r2 = testing::random_density(gen, 1);
        const auto psi = testing::random_pure(gen);
        const auto s = testing::random_settings(gen);
        const double p = (n + 0.5) / 30.0;
        for (auto id : kAllBuiltins) {
            const auto ineq = builtin(id);
            const double mixed = evaluate(mix(p, r1, r2), ineq, s);
            CHECK(std::abs(mixed - (p * evaluate(r1, ineq, s) + (1 - p) * evaluate(r2, ineq, s))) < 1e-12);
            const double pure = evaluate(DensityMatrix3Q::from_pure(psi), ineq, s);
            CHECK(std::abs(evaluate(depolarize(psi, p), ineq, s) - p * pure) < 1e-12);
        }
    }
}

TEST_CASE("I96 is symmetric under exchanging A and B") {
    const auto i96 = builtin(BuiltinId::I96);
    CHECK(swap_ab(i96).terms() == i96.terms());
    std::mt19937_64 gen(29);
    for (int n = 0; n < 20; ++n) {
        const auto rho = DensityMatrix3Q::from_pure(make_gghz(n * (kPi / 4) / 19));
        const auto s = testing::random_settings(gen);
        const MeasurementSettings swapped(s.at(Party::B, 0), s.at(Party::B, 1), s.at(Party::A, 0),
                                          s.at(Party::A, 1), s.at(Party::C, 0), s.at(Party::C, 1));
        CHECK(std::abs(evaluate(rho, i96, s) - evaluate(rho, i96, swapped)) < 1e-12);
    }
}

TEST_CASE("bundled JSON fixtures match the builtins") {
    for (auto id : kAllBuiltins) {
        const auto path = std::string(TRIBELL_DATA_DIR) + "/inequalities/" + to_string(id) + ".json";
        const auto loaded = inequality_from_json(read_json_file(path));
        const auto ref = builtin(id);
        CHECK(loaded.name() == ref.name());
        CHECK(loaded.normalization() == ref.normalization());
        CHECK(loaded.terms() == ref.terms());
    }
}

TEST_CASE("loading revalidates the local bound") {
    Json j = to_json(builtin(BuiltinId::I185));
    j["normalization"] = Json::array({1, 2});
    CHECK_THROWS_AS(inequality_from_json(j), DomainError);
    CHECK(lhv_bound_exact(inequality_from_json(j, false)) == Rational(2));
    Json bad = {{"name", "x"}, {"normalization", {1, 1}}, {"terms", {{{"a", 3}, {"coeff", {1, 1}}}}}};
    CHECK_THROWS_AS(inequality_from_json(bad), DomainError);
}
