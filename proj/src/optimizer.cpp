#include "tribell/optimizer.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <boost/random/sobol.hpp>

#include "tribell/rng.hpp"

namespace tribell {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kAngles = 12;
constexpr double kDegenerateGradient = 1e-14;
constexpr int kPoleRetries = 3;

using AngleVector = Eigen::Matrix<double, kAngles, 1>;

/// A Bell expression compiled against a fixed state's correlation tensor:
/// value and gradient as functions of the 12 spherical angles.
class Objective {
public:
    Objective(const DensityMatrix3Q& rho, const BellInequality& ineq) : tensor_(rho) {
        const double norm = ineq.normalization().value();
        for (const auto& [term, coeff] : ineq.terms()) {
            Term t;
            for (int p = 0; p < 3; ++p) {
                const auto s = term.setting(static_cast<Party>(p));
                t.slot[p] = s ? 1 + *s : 0;
            }
            t.coeff = norm * coeff.value();
            terms_.push_back(t);
        }
    }

    long evaluations() const { return evaluations_; }

    /// Value at x; writes the gradient when requested.
    double operator()(const AngleVector& x, AngleVector* grad) {
        ++evaluations_;
        // vec[p][0] is the absent-party vector, vec[p][1+s] setting s.
        Eigen::Vector4d vec[3][3];
        Eigen::Vector3d d_incl[3][2];
        Eigen::Vector3d d_azim[3][2];
        for (int p = 0; p < 3; ++p) {
            vec[p][0] = Eigen::Vector4d(1, 0, 0, 0);
            for (int s = 0; s < 2; ++s) {
                const double th = x(4 * p + 2 * s);
                const double ph = x(4 * p + 2 * s + 1);
                const double st = std::sin(th), ct = std::cos(th);
                const double sp = std::sin(ph), cp = std::cos(ph);
                vec[p][1 + s] = Eigen::Vector4d(0, st * cp, st * sp, ct);
                d_incl[p][s] = Eigen::Vector3d(ct * cp, ct * sp, -st);
                d_azim[p][s] = Eigen::Vector3d(-st * sp, st * cp, 0);
            }
        }
        Eigen::Vector4d dvec[3][3];
        if (grad) {
            for (auto& row : dvec) {
                for (auto& v : row) v.setZero();
            }
        }
        double value = 0.0;
        for (const auto& t : terms_) {
            const Eigen::Vector4d& a = vec[0][t.slot[0]];
            const Eigen::Vector4d& b = vec[1][t.slot[1]];
            const Eigen::Vector4d& c = vec[2][t.slot[2]];
            // w_a[mu] = sum T[mu nu la] b[nu] c[la]; similarly for b and c.
            Eigen::Vector4d wa = Eigen::Vector4d::Zero();
            Eigen::Vector4d wb = Eigen::Vector4d::Zero();
            Eigen::Vector4d wc = Eigen::Vector4d::Zero();
            for (int mu = 0; mu < 4; ++mu) {
                for (int nu = 0; nu < 4; ++nu) {
                    for (int la = 0; la < 4; ++la) {
                        const double tv = tensor_(mu, nu, la);
                        wa(mu) += tv * b(nu) * c(la);
                        wb(nu) += tv * a(mu) * c(la);
                        wc(la) += tv * a(mu) * b(nu);
                    }
                }
            }
            value += t.coeff * a.dot(wa);
            if (grad) {
                dvec[0][t.slot[0]] += t.coeff * wa;
                dvec[1][t.slot[1]] += t.coeff * wb;
                dvec[2][t.slot[2]] += t.coeff * wc;
            }
        }
        if (grad) {
            for (int p = 0; p < 3; ++p) {
                for (int s = 0; s < 2; ++s) {
                    const Eigen::Vector3d g = dvec[p][1 + s].tail<3>();
                    (*grad)(4 * p + 2 * s) = g.dot(d_incl[p][s]);
                    (*grad)(4 * p + 2 * s + 1) = g.dot(d_azim[p][s]);
                }
            }
        }
        return value;
    }

private:
    struct Term {
        int slot[3];
        double coeff;
    };
    CorrelationTensor tensor_;
    std::vector<Term> terms_;
    long evaluations_ = 0;
};

struct AscentResult {
    AngleVector x;
    double value;
    bool converged;
};

/// BFGS ascent with Armijo backtracking.
AscentResult ascend(Objective& f, AngleVector x, const OptimizerConfig& cfg) {
    AngleVector g;
    double value = f(x, &g);
    Eigen::Matrix<double, kAngles, kAngles> h = Eigen::Matrix<double, kAngles, kAngles>::Identity();
    for (int iter = 0; iter < cfg.max_iterations; ++iter) {
        if (g.cwiseAbs().maxCoeff() < kDegenerateGradient) return {x, value, true};
        AngleVector dir = h * g;
        double slope = g.dot(dir);
        if (!(slope > 0.0)) {
            h.setIdentity();
            dir = g;
            slope = g.squaredNorm();
        }
        double step = 1.0;
        AngleVector trial;
        AngleVector trial_g;
        double trial_value = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            trial = x + step * dir;
            trial_value = f(trial, &trial_g);
            if (trial_value >= value + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            // No ascent possible along any scaled direction: at a maximum to
            // working precision.
            return {x, value, g.cwiseAbs().maxCoeff() < 1e-6};
        }
        const AngleVector s = trial - x;
        const AngleVector y = g - trial_g;  // gradient change of -f
        const double delta = trial_value - value;
        x = trial;
        value = trial_value;
        g = trial_g;
        if (s.cwiseAbs().maxCoeff() < cfg.angle_tolerance && delta < cfg.value_tolerance) {
            return {x, value, true};
        }
        const double sy = s.dot(y);
        if (sy > 1e-300) {
            // Inverse-Hessian BFGS update for minimizing -f.
            const double rho = 1.0 / sy;
            const auto eye = Eigen::Matrix<double, kAngles, kAngles>::Identity();
            h = (eye - rho * s * y.transpose()) * h * (eye - rho * y * s.transpose()) +
                rho * s * s.transpose();
        }
    }
    return {x, value, false};
}

std::array<double, 12> canonical_angles(const AngleVector& x) {
    std::array<double, 12> out{};
    for (int i = 0; i < 6; ++i) {
        double incl = std::fmod(x(2 * i), 2.0 * kPi);
        double azim = x(2 * i + 1);
        if (incl < 0.0) incl += 2.0 * kPi;
        if (incl > kPi) {
            incl = 2.0 * kPi - incl;
            azim += kPi;
        }
        azim = std::fmod(azim, 2.0 * kPi);
        if (azim < 0.0) azim += 2.0 * kPi;
        out[2 * i] = incl;
        out[2 * i + 1] = azim;
    }
    return out;
}

AngleVector to_vector(const std::array<double, 12>& angles) {
    AngleVector x;
    for (int i = 0; i < kAngles; ++i) x(i) = angles[i];
    return x;
}

}  // namespace

void OptimizerConfig::validate() const {
    if (multistart_count <= 0) throw DomainError("OptimizerConfig: multistart_count must be positive");
    if (max_iterations <= 0) throw DomainError("OptimizerConfig: max_iterations must be positive");
    if (!(value_tolerance > 0.0 && value_tolerance < 1.0)) {
        throw DomainError("OptimizerConfig: value_tolerance must lie in (0, 1)");
    }
    if (!(angle_tolerance > 0.0 && angle_tolerance < 1.0)) {
        throw DomainError("OptimizerConfig: angle_tolerance must lie in (0, 1)");
    }
}

OptimizationReport maximize(const DensityMatrix3Q& rho, const BellInequality& ineq,
                            const OptimizerConfig& cfg,
                            std::span<const MeasurementSettings> warm_starts) {
    cfg.validate();
    Objective objective(rho, ineq);

    // Cranley-Patterson rotation of the Sobol sequence, fixed by the seed.
    std::array<double, kAngles> shift{};
    {
        auto gen = substream(cfg.seed, 0);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (auto& s : shift) s = unit(gen);
    }
    boost::random::sobol sobol(kAngles);
    const double scale = std::ldexp(1.0, -64);

    const int total = static_cast<int>(warm_starts.size()) + cfg.multistart_count;
    OptimizationReport report;
    report.inequality = ineq.name();
    report.starts_total = total;
    report.value = -std::numeric_limits<double>::infinity();

    AngleVector best_x = AngleVector::Zero();
    for (int start = 0; start < total; ++start) {
        AngleVector x0;
        if (start < static_cast<int>(warm_starts.size())) {
            x0 = to_vector(warm_starts[start].angles());
        } else {
            for (int k = 0; k < kAngles; ++k) {
                double u = static_cast<double>(sobol()) * scale + shift[k];
                u -= std::floor(u);
                // Uniform on the sphere: inclination = acos(1 - 2u).
                x0(k) = (k % 2 == 0) ? std::acos(1.0 - 2.0 * u) : 2.0 * kPi * u;
            }
        }
        // Perturb away from stationary starting points (e.g. exact poles).
        auto jitter = substream(cfg.seed, 1 + static_cast<std::uint64_t>(start));
        std::normal_distribution<double> noise(0.0, 1e-3);
        for (int retry = 0; retry < kPoleRetries; ++retry) {
            AngleVector g;
            objective(x0, &g);
            if (g.cwiseAbs().maxCoeff() >= kDegenerateGradient) break;
            for (int k = 0; k < kAngles; ++k) x0(k) += noise(jitter);
        }

        const AscentResult r = ascend(objective, x0, cfg);
        if (r.converged) ++report.starts_converged;
        if (r.value > report.value) {
            report.value = r.value;
            report.best_start_index = start;
            best_x = r.x;
        }
    }
    report.settings = MeasurementSettings::from_angles(canonical_angles(best_x));
    report.evaluations = objective.evaluations();
    if (report.starts_converged == 0) {
        throw OptimizationError("maximize: no start converged for " + ineq.name(), report);
    }
    return report;
}

NumericPMin p_min_numeric(const PureState3Q& psi, std::span<const BellInequality> ineqs,
                          const OptimizerConfig& cfg) {
    if (ineqs.empty()) throw DomainError("p_min_numeric: at least one inequality required");
    const auto rho = DensityMatrix3Q::from_pure(psi);
    NumericPMin out;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& ineq : ineqs) {
        out.reports.push_back(maximize(rho, ineq, cfg));
        if (out.reports.back().value > best) {
            best = out.reports.back().value;
            out.active = ineq.name();
        }
    }
    // Without a violation no amount of visibility helps; report p = 1.
    out.p = best > 1.0 ? 1.0 / best : 1.0;
    return out;
}

std::vector<OptimizationReport> maximize_on_reconstruction(const DensityMatrix3Q& rho,
                                                           const OptimizerConfig& cfg) {
    std::vector<OptimizationReport> out;
    for (auto id : kAllBuiltins) out.push_back(maximize(rho, builtin(id), cfg));
    return out;
}

}  // namespace tribell
