#include "tribell/expsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tribell/rng.hpp"

namespace tribell {

namespace {

using Vector2c = Eigen::Matrix<Complex, 2, 1>;

/// Eigenvectors of n.sigma for eigenvalues +1 and -1.
std::array<Vector2c, 2> eigenbasis(const BlochVector& n) {
    const auto [incl, azim] = n.spherical();
    const Complex phase = std::polar(1.0, azim);
    const double c = std::cos(incl / 2.0);
    const double s = std::sin(incl / 2.0);
    Vector2c plus;
    plus << c, phase * s;
    Vector2c minus;
    minus << s, -phase * c;
    return {plus, minus};
}

double poisson_draw(std::mt19937_64& gen, double mean) {
    if (mean <= 0.0) return 0.0;
    std::poisson_distribution<long long> dist(mean);
    return static_cast<double>(dist(gen));
}

int party_mask(const CorrelatorTerm& term) {
    int mask = 0;
    if (term.setting(Party::A)) mask |= 4;
    if (term.setting(Party::B)) mask |= 2;
    if (term.setting(Party::C)) mask |= 1;
    return mask;
}

bool agrees(const CorrelatorTerm& term, const SettingIndex& idx) {
    for (int p = 0; p < 3; ++p) {
        const auto s = term.setting(static_cast<Party>(p));
        if (s && *s != idx[p]) return false;
    }
    return true;
}

const CountsRecord& record_for(const ExperimentRun& run, const CorrelatorTerm& term) {
    std::vector<SettingIndex> keys;
    keys.reserve(run.records.size());
    for (const auto& [k, _] : run.records) keys.push_back(k);
    const auto it = run.records.find(source_triple(term, keys));
    if (it == run.records.end()) {
        throw EstimationError("no counts record covers term " + term.to_string());
    }
    return it->second;
}

}  // namespace

SettingTriple select(const MeasurementSettings& settings, int sa, int sb, int sc) {
    return {settings.at(Party::A, sa), settings.at(Party::B, sb), settings.at(Party::C, sc)};
}

void CountsRecord::validate() const {
    if (!(exposure > 0.0) || !std::isfinite(exposure)) {
        throw DomainError("CountsRecord: exposure must be positive");
    }
    for (double c : counts) {
        if (!(c >= 0.0) || !std::isfinite(c)) {
            throw DomainError("CountsRecord: counts must be finite and non-negative");
        }
    }
}

double CountsRecord::total() const {
    double sum = 0.0;
    for (double c : counts) sum += c;
    return sum;
}

Amplitudes outcome_vector(const SettingTriple& s, int outcome) {
    const Vector2c va = eigenbasis(s.a)[(outcome >> 2) & 1];
    const Vector2c vb = eigenbasis(s.b)[(outcome >> 1) & 1];
    const Vector2c vc = eigenbasis(s.c)[outcome & 1];
    Amplitudes v;
    for (int k = 0; k < kDim; ++k) v(k) = va((k >> 2) & 1) * vb((k >> 1) & 1) * vc(k & 1);
    return v;
}

OutcomeArray born_probabilities(const DensityMatrix3Q& rho, const SettingTriple& s) {
    OutcomeArray probs{};
    for (int i = 0; i < kOutcomes; ++i) {
        const Amplitudes v = outcome_vector(s, i);
        const double p = (v.adjoint() * rho.entries() * v)(0, 0).real();
        probs[i] = p < 0.0 ? 0.0 : p;
    }
    return probs;
}

CountsRecord simulate_counts(const DensityMatrix3Q& rho, const SettingTriple& s, double exposure,
                             std::uint64_t seed) {
    if (!(exposure > 0.0)) throw DomainError("simulate_counts: exposure must be positive");
    const auto probs = born_probabilities(rho, s);
    std::mt19937_64 gen(seed);
    CountsRecord rec;
    rec.setting = s;
    rec.exposure = exposure;
    for (int i = 0; i < kOutcomes; ++i) rec.counts[i] = poisson_draw(gen, exposure * probs[i]);
    return rec;
}

CountsRecord expected_counts(const DensityMatrix3Q& rho, const SettingTriple& s,
                             double exposure) {
    if (!(exposure > 0.0)) throw DomainError("expected_counts: exposure must be positive");
    const auto probs = born_probabilities(rho, s);
    CountsRecord rec;
    rec.setting = s;
    rec.exposure = exposure;
    for (int i = 0; i < kOutcomes; ++i) rec.counts[i] = exposure * probs[i];
    return rec;
}

double parity_correlator(const CountsRecord& rec, int mask) {
    double plus = 0.0;
    double minus = 0.0;
    for (int i = 0; i < kOutcomes; ++i) {
        (parity_sign(i, mask) > 0 ? plus : minus) += rec.counts[i];
    }
    if (plus + minus <= 0.0) throw EstimationError("correlator undefined: all counts are zero");
    return (plus - minus) / (plus + minus);
}

double corr3(const CountsRecord& rec) { return parity_correlator(rec, 7); }

double corr2(const CountsRecord& rec, PartyPair pair) {
    switch (pair) {
        case PartyPair::AB: return parity_correlator(rec, 6);
        case PartyPair::AC: return parity_correlator(rec, 5);
        case PartyPair::BC: return parity_correlator(rec, 3);
    }
    throw DomainError("corr2: unknown pair");
}

double corr1(const CountsRecord& rec, Party party) {
    return parity_correlator(rec, 4 >> static_cast<int>(party));
}

ThetaEstimate estimate_theta(double f000, double f111) {
    if (f000 < 0.0 || f111 < 0.0) throw DomainError("estimate_theta: counts must be non-negative");
    if (f000 == 0.0 && f111 == 0.0) {
        throw EstimationError("estimate_theta: both populations are zero");
    }
    if (f000 == 0.0) return {std::acos(0.0), true};
    return {std::atan(std::sqrt(f111 / f000)), false};
}

std::vector<SettingIndex> required_triples(const BellInequality& ineq) {
    std::vector<SettingIndex> full;
    for (const auto& [term, _] : ineq.terms()) {
        if (term.order() == 3) {
            full.push_back({*term.setting(Party::A), *term.setting(Party::B),
                            *term.setting(Party::C)});
        }
    }
    std::sort(full.begin(), full.end());
    full.erase(std::unique(full.begin(), full.end()), full.end());
    std::vector<SettingIndex> out = full;
    for (const auto& [term, _] : ineq.terms()) {
        if (term.order() < 3) out.push_back(source_triple(term, full));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SettingIndex source_triple(const CorrelatorTerm& term, const std::vector<SettingIndex>& required) {
    SettingIndex best{2, 2, 2};
    bool found = false;
    for (const auto& idx : required) {
        if (agrees(term, idx) && (!found || idx < best)) {
            best = idx;
            found = true;
        }
    }
    if (found) return best;
    SettingIndex fill{0, 0, 0};
    for (int p = 0; p < 3; ++p) {
        if (const auto s = term.setting(static_cast<Party>(p))) fill[p] = *s;
    }
    return fill;
}

double estimate_term(const ExperimentRun& run, const CorrelatorTerm& term) {
    const int mask = party_mask(term);
    if (mask == 0) return 1.0;
    return parity_correlator(record_for(run, term), mask);
}

double value_from_run(const ExperimentRun& run, const BellInequality& ineq) {
    double sum = 0.0;
    for (const auto& [term, coeff] : ineq.terms()) sum += coeff.value() * estimate_term(run, term);
    return ineq.normalization().value() * sum;
}

double delta_method_stderr(const ExperimentRun& run, const BellInequality& ineq) {
    // dE/df_i = (s_i - E) / S for E = sum s_i f_i / S; the value's gradient
    // accumulates per record.
    std::map<SettingIndex, OutcomeArray> grads;
    std::vector<SettingIndex> keys;
    for (const auto& [k, _] : run.records) keys.push_back(k);
    const double norm = ineq.normalization().value();
    for (const auto& [term, coeff] : ineq.terms()) {
        const int mask = party_mask(term);
        if (mask == 0) continue;
        const SettingIndex key = source_triple(term, keys);
        const auto it = run.records.find(key);
        if (it == run.records.end()) {
            throw EstimationError("no counts record covers term " + term.to_string());
        }
        const CountsRecord& rec = it->second;
        const double e = parity_correlator(rec, mask);
        const double total = rec.total();
        auto& g = grads[key];
        for (int i = 0; i < kOutcomes; ++i) {
            g[i] += norm * coeff.value() * (parity_sign(i, mask) - e) / total;
        }
    }
    double var = 0.0;
    for (const auto& [key, g] : grads) {
        const CountsRecord& rec = run.records.at(key);
        for (int i = 0; i < kOutcomes; ++i) var += g[i] * g[i] * rec.counts[i];
    }
    return std::sqrt(var);
}

std::vector<TermEstimate> term_estimates(const ExperimentRun& run, const BellInequality& ineq) {
    std::vector<TermEstimate> out;
    for (const auto& [term, coeff] : ineq.terms()) {
        TermEstimate t{term, coeff, 1.0, 0.0};
        const int mask = party_mask(term);
        if (mask != 0) {
            const CountsRecord& rec = record_for(run, term);
            double plus = 0.0;
            double minus = 0.0;
            for (int i = 0; i < kOutcomes; ++i) {
                (parity_sign(i, mask) > 0 ? plus : minus) += rec.counts[i];
            }
            t.value = parity_correlator(rec, mask);
            const double total = plus + minus;
            t.stderr_value = 2.0 * std::sqrt(plus * minus / total) / total;
        }
        out.push_back(t);
    }
    return out;
}

InequalityMeasurement measure_inequality(const DensityMatrix3Q& rho, const BellInequality& ineq,
                                         const MeasurementSettings& settings, double exposure,
                                         std::uint64_t seed, bool exact) {
    if (!(exposure > 0.0)) throw DomainError("measure_inequality: exposure must be positive");
    InequalityMeasurement m;
    m.run.inequality = ineq.name();
    m.run.settings = settings;
    m.run.exposure = exposure;
    m.run.seed = seed;
    m.run.exact = exact;
    std::uint64_t stream = 0;
    for (const auto& idx : required_triples(ineq)) {
        const SettingTriple s = select(settings, idx[0], idx[1], idx[2]);
        m.run.records[idx] = exact ? expected_counts(rho, s, exposure)
                                   : simulate_counts(rho, s, exposure, substream_seed(seed, stream));
        ++stream;
    }
    m.value = value_from_run(m.run, ineq);
    m.stderr_value = delta_method_stderr(m.run, ineq);
    return m;
}

MonteCarloSummary monte_carlo_errors(const ExperimentRun& run, const BellInequality& ineq,
                                     int resamples, std::uint64_t seed) {
    if (resamples < 2) throw DomainError("monte_carlo_errors: resamples must be at least 2");
    std::vector<double> values;
    values.reserve(resamples);
    for (int r = 0; r < resamples; ++r) {
        auto gen = substream(seed, static_cast<std::uint64_t>(r));
        ExperimentRun sample = run;
        for (auto& [_, rec] : sample.records) {
            for (double& c : rec.counts) c = poisson_draw(gen, c);
        }
        values.push_back(value_from_run(sample, ineq));
    }
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= resamples;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (resamples - 1))};
}

}  // namespace tribell
