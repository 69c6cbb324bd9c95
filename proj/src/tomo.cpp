#include "tribell/tomo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tribell/rng.hpp"

namespace tribell {

namespace {

/// Projector vector for each outcome of each record with positive total.
struct Design {
    std::vector<Amplitudes> vectors;
    std::vector<double> counts;
    /// Per-projector weight 1 / (N_record * records).
    std::vector<double> scale;
};

Design build_design(const std::vector<CountsRecord>& data) {
    Design d;
    int used = 0;
    for (const auto& rec : data) {
        if (rec.total() > 0.0) ++used;
    }
    for (const auto& rec : data) {
        rec.validate();
        const double total = rec.total();
        if (total <= 0.0) continue;
        for (int i = 0; i < kOutcomes; ++i) {
            d.vectors.push_back(outcome_vector(rec.setting, i));
            d.counts.push_back(rec.counts[i]);
            d.scale.push_back(1.0 / (total * used));
        }
    }
    return d;
}

double log_likelihood(const Design& d, const Matrix8& rho) {
    double ll = 0.0;
    for (std::size_t j = 0; j < d.vectors.size(); ++j) {
        if (d.counts[j] <= 0.0) continue;
        const double p = (d.vectors[j].adjoint() * rho * d.vectors[j])(0, 0).real();
        ll += d.counts[j] * std::log(std::max(p, std::numeric_limits<double>::min()));
    }
    return ll;
}

Matrix8 r_operator(const Design& d, const Matrix8& rho) {
    Matrix8 r = Matrix8::Zero();
    for (std::size_t j = 0; j < d.vectors.size(); ++j) {
        if (d.counts[j] <= 0.0) continue;
        const double p = (d.vectors[j].adjoint() * rho * d.vectors[j])(0, 0).real();
        const double w = d.counts[j] * d.scale[j] / std::max(p, std::numeric_limits<double>::min());
        r += w * d.vectors[j] * d.vectors[j].adjoint();
    }
    return r;
}

Matrix8 sandwich(const Matrix8& m, const Matrix8& rho) {
    Matrix8 out = m * rho * m.adjoint();
    out = 0.5 * (out + out.adjoint()).eval();
    return out / out.trace().real();
}

Matrix8 pauli_product(int index) {
    static const std::array<Matrix2, 4> sigma = [] {
        std::array<Matrix2, 4> s;
        s[0] << 1, 0, 0, 1;
        s[1] << 0, 1, 1, 0;
        s[2] << 0, Complex(0, -1), Complex(0, 1), 0;
        s[3] << 1, 0, 0, -1;
        return s;
    }();
    const Matrix2& a = sigma[index / 16];
    const Matrix2& b = sigma[(index / 4) % 4];
    const Matrix2& c = sigma[index % 4];
    Matrix8 out;
    for (int r = 0; r < kDim; ++r) {
        for (int col = 0; col < kDim; ++col) {
            out(r, col) = a(r >> 2, col >> 2) * b((r >> 1) & 1, (col >> 1) & 1) * c(r & 1, col & 1);
        }
    }
    return out;
}

}  // namespace

TomographySet TomographySet::pauli() {
    const std::array<BlochVector, 3> axes = {BlochVector(1, 0, 0), BlochVector(0, 1, 0),
                                             BlochVector(0, 0, 1)};
    TomographySet set;
    for (const auto& a : axes) {
        for (const auto& b : axes) {
            for (const auto& c : axes) set.triples.push_back({a, b, c});
        }
    }
    return set;
}

std::vector<CountsRecord> simulate_tomography(const DensityMatrix3Q& rho, const TomographySet& set,
                                              double exposure, std::uint64_t seed) {
    std::vector<CountsRecord> out;
    out.reserve(set.triples.size());
    for (std::size_t k = 0; k < set.triples.size(); ++k) {
        out.push_back(simulate_counts(rho, set.triples[k], exposure, substream_seed(seed, k)));
    }
    return out;
}

std::vector<CountsRecord> expected_tomography(const DensityMatrix3Q& rho,
                                              const TomographySet& set, double exposure) {
    std::vector<CountsRecord> out;
    out.reserve(set.triples.size());
    for (const auto& t : set.triples) out.push_back(expected_counts(rho, t, exposure));
    return out;
}

int tomographic_rank(const std::vector<CountsRecord>& data) {
    const Design d = build_design(data);
    if (d.vectors.empty()) return 0;
    std::array<Matrix8, 64> paulis;
    for (int m = 0; m < 64; ++m) paulis[m] = pauli_product(m);
    Eigen::MatrixXd map(d.vectors.size(), 64);
    for (std::size_t j = 0; j < d.vectors.size(); ++j) {
        for (int m = 0; m < 64; ++m) {
            map(j, m) = (d.vectors[j].adjoint() * paulis[m] * d.vectors[j])(0, 0).real();
        }
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(map);
    qr.setThreshold(1e-9);
    return static_cast<int>(qr.rank());
}

ReconstructionResult reconstruct_ml(const std::vector<CountsRecord>& data, int max_iterations,
                                    double tolerance) {
    if (max_iterations <= 0) throw DomainError("reconstruct_ml: max_iterations must be positive");
    if (!(tolerance > 0.0)) throw DomainError("reconstruct_ml: tolerance must be positive");
    const int rank = tomographic_rank(data);
    if (rank < 64) {
        throw IdentifiabilityError("reconstruct_ml: data determine only " + std::to_string(rank) +
                                   " of 64 state parameters");
    }
    const Design d = build_design(data);
    const Matrix8 eye = Matrix8::Identity();

    Matrix8 rho = DensityMatrix3Q::maximally_mixed().entries();
    double ll = log_likelihood(d, rho);
    ReconstructionResult result;
    for (int iter = 1; iter <= max_iterations; ++iter) {
        const Matrix8 r = r_operator(d, rho);
        Matrix8 next = sandwich(r, rho);
        double next_ll = log_likelihood(d, next);
        const double slack = 1e-12 * std::max(1.0, std::abs(ll));
        for (double eps = 1.0; next_ll < ll - slack; eps *= 0.5) {
            if (eps < 1e-12) {
                next = rho;
                next_ll = ll;
                break;
            }
            next = sandwich(eye + eps * r, rho);
            next_ll = log_likelihood(d, next);
        }
        const double step = trace_distance(next, rho);
        rho = next;
        ll = next_ll;
        result.log_likelihood_history.push_back(ll);
        result.iterations = iter;
        if (step < tolerance) {
            result.converged = true;
            break;
        }
    }
    result.rho = DensityMatrix3Q(rho);
    result.log_likelihood = ll;
    return result;
}

StateReport state_report(const DensityMatrix3Q& rho) {
    const auto opt = fidelity_opt_gghz(rho);
    StateReport rep;
    rep.theta_opt = opt.theta;
    rep.fidelity = opt.fidelity;
    rep.purity = purity(rho);
    rep.f_max = f_max_bound(rep.purity);
    rep.n_tri = tri_negativity(rho);
    return rep;
}

}  // namespace tribell
