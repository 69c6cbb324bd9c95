#include "tribell/io.hpp"

#include <fstream>
#include <sstream>

namespace tribell {

namespace {

Json complex_pair(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex parse_pair(const Json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw DomainError("expected a [re, im] pair");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

Json setting_value(const std::optional<int>& s) { return s ? Json(*s) : Json(nullptr); }

std::optional<int> parse_setting(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    const Json& v = j.at(key);
    if (!v.is_number_integer()) throw DomainError(std::string("term field '") + key + "' must be null, 0 or 1");
    return v.get<int>();
}

Json rational(const Rational& r) { return Json::array({r.num(), r.den()}); }

Rational parse_rational(const Json& j) {
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>(), 1);
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
        throw DomainError("expected an integer or [num, den] pair");
    }
    const auto den = j[1].get<std::int64_t>();
    if (den == 0) throw DomainError("zero denominator");
    return Rational(j[0].get<std::int64_t>(), den);
}

Json vector3(const BlochVector& v) { return Json::array({v.x(), v.y(), v.z()}); }

BlochVector parse_vector3(const Json& j) {
    if (!j.is_array() || j.size() != 3) throw DomainError("expected an [x, y, z] vector");
    return BlochVector(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json triple_json(const SettingTriple& s) {
    return {{"a", vector3(s.a)}, {"b", vector3(s.b)}, {"c", vector3(s.c)}};
}

/// Wraps nlohmann type errors so callers see the library's error types.
template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const Json::exception& e) {
        throw DomainError(std::string(what) + ": " + e.what());
    }
}

}  // namespace

Json to_json(const PureState3Q& psi) {
    Json amps = Json::array();
    for (int i = 0; i < kDim; ++i) amps.push_back(complex_pair(psi.amplitude(i)));
    return {{"kind", "pure"}, {"label", psi.label()}, {"amplitudes", amps}};
}

Json to_json(const DensityMatrix3Q& rho) {
    Json entries = Json::array();
    for (int r = 0; r < kDim; ++r) {
        for (int c = 0; c < kDim; ++c) entries.push_back(complex_pair(rho(r, c)));
    }
    return {{"kind", "density"}, {"entries", entries}};
}

DensityMatrix3Q state_from_json(const Json& j) {
    return guarded("state", [&] {
        const Json& data = j.is_object() ? (j.contains("amplitudes") ? j.at("amplitudes")
                                                                     : j.at("entries"))
                                         : j;
        if (!data.is_array()) throw DomainError("state: expected an array of [re, im] pairs");
        if (data.size() == static_cast<std::size_t>(kDim)) {
            Amplitudes amps;
            for (int i = 0; i < kDim; ++i) amps(i) = parse_pair(data[i]);
            return DensityMatrix3Q::from_pure(PureState3Q(amps));
        }
        if (data.size() == static_cast<std::size_t>(kDim * kDim)) {
            Matrix8 m;
            for (int r = 0; r < kDim; ++r) {
                for (int c = 0; c < kDim; ++c) m(r, c) = parse_pair(data[kDim * r + c]);
            }
            return DensityMatrix3Q(m);
        }
        throw DomainError("state: expected 8 amplitudes or 64 matrix entries, got " +
                          std::to_string(data.size()));
    });
}

Json to_json(const BellInequality& ineq) {
    Json terms = Json::array();
    for (const auto& [term, coeff] : ineq.terms()) {
        terms.push_back({{"a", setting_value(term.setting(Party::A))},
                         {"b", setting_value(term.setting(Party::B))},
                         {"c", setting_value(term.setting(Party::C))},
                         {"coeff", rational(coeff)}});
    }
    return {{"name", ineq.name()}, {"normalization", rational(ineq.normalization())},
            {"terms", terms}};
}

BellInequality inequality_from_json(const Json& j, bool check_bound) {
    return guarded("inequality", [&] {
        std::vector<std::pair<CorrelatorTerm, Rational>> terms;
        for (const Json& t : j.at("terms")) {
            terms.emplace_back(
                CorrelatorTerm(parse_setting(t, "a"), parse_setting(t, "b"), parse_setting(t, "c")),
                parse_rational(t.at("coeff")));
        }
        BellInequality ineq(j.at("name").get<std::string>(), parse_rational(j.at("normalization")),
                            std::move(terms));
        if (!check_bound) return ineq;
        const Rational bound = lhv_bound_exact(ineq);
        if (bound != Rational(1)) {
            throw DomainError("inequality '" + ineq.name() + "': local bound is " +
                              std::to_string(bound.num()) + "/" + std::to_string(bound.den()) +
                              ", expected 1 after normalization");
        }
        return ineq;
    });
}

Json to_json(const MeasurementSettings& settings) {
    Json out;
    if (settings.has_spherical()) out["angles"] = settings.angles();
    Json vectors = Json::array();
    for (int i = 0; i < 6; ++i) vectors.push_back(vector3(settings.at(i)));
    out["vectors"] = vectors;
    return out;
}

MeasurementSettings settings_from_json(const Json& j) {
    return guarded("settings", [&] {
        if (j.contains("angles")) {
            const Json& a = j.at("angles");
            if (!a.is_array() || a.size() != 12) throw DomainError("settings: expected 12 angles");
            std::array<double, 12> angles{};
            for (int i = 0; i < 12; ++i) angles[i] = a[i].get<double>();
            return MeasurementSettings::from_angles(angles);
        }
        const Json& v = j.at("vectors");
        if (!v.is_array() || v.size() != 6) throw DomainError("settings: expected 6 vectors");
        return MeasurementSettings(parse_vector3(v[0]), parse_vector3(v[1]), parse_vector3(v[2]),
                                   parse_vector3(v[3]), parse_vector3(v[4]), parse_vector3(v[5]));
    });
}

Json to_json(const OptimizerConfig& cfg) {
    return {{"multistart_count", cfg.multistart_count},
            {"max_iterations", cfg.max_iterations},
            {"value_tolerance", cfg.value_tolerance},
            {"angle_tolerance", cfg.angle_tolerance},
            {"seed", cfg.seed}};
}

OptimizerConfig optimizer_config_from_json(const Json& j) {
    return guarded("optimizer config", [&] {
        OptimizerConfig cfg;
        cfg.multistart_count = j.value("multistart_count", cfg.multistart_count);
        cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
        cfg.value_tolerance = j.value("value_tolerance", cfg.value_tolerance);
        cfg.angle_tolerance = j.value("angle_tolerance", cfg.angle_tolerance);
        cfg.seed = j.value("seed", cfg.seed);
        cfg.validate();
        return cfg;
    });
}

Json to_json(const OptimizationReport& report) {
    return {{"inequality", report.inequality},
            {"value", report.value},
            {"settings", to_json(report.settings)},
            {"starts_total", report.starts_total},
            {"starts_converged", report.starts_converged},
            {"best_start_index", report.best_start_index},
            {"evaluations", report.evaluations}};
}

Json to_json(const CountsRecord& rec) {
    return {{"setting", triple_json(rec.setting)},
            {"exposure", rec.exposure},
            {"counts", rec.counts}};
}

CountsRecord counts_from_json(const Json& j) {
    return guarded("counts record", [&] {
        CountsRecord rec;
        const Json& s = j.at("setting");
        rec.setting = {parse_vector3(s.at("a")), parse_vector3(s.at("b")), parse_vector3(s.at("c"))};
        rec.exposure = j.at("exposure").get<double>();
        const Json& c = j.at("counts");
        if (!c.is_array() || c.size() != static_cast<std::size_t>(kOutcomes)) {
            throw DomainError("counts record: expected 8 counts");
        }
        for (int i = 0; i < kOutcomes; ++i) rec.counts[i] = c[i].get<double>();
        rec.validate();
        return rec;
    });
}

Json to_json(const ExperimentRun& run) {
    Json records = Json::array();
    for (const auto& [idx, rec] : run.records) {
        records.push_back({{"index", idx}, {"exposure", rec.exposure}, {"counts", rec.counts}});
    }
    return {{"inequality", run.inequality}, {"settings", to_json(run.settings)},
            {"exposure", run.exposure},     {"seed", run.seed},
            {"exact", run.exact},           {"records", records}};
}

ExperimentRun run_from_json(const Json& j) {
    return guarded("experiment run", [&] {
        ExperimentRun run;
        run.inequality = j.at("inequality").get<std::string>();
        run.settings = settings_from_json(j.at("settings"));
        run.exposure = j.at("exposure").get<double>();
        run.seed = j.at("seed").get<std::uint64_t>();
        run.exact = j.value("exact", false);
        for (const Json& r : j.at("records")) {
            const auto idx = r.at("index").get<SettingIndex>();
            for (int s : idx) {
                if (s != 0 && s != 1) throw DomainError("experiment run: setting index must be 0 or 1");
            }
            CountsRecord rec;
            rec.setting = select(run.settings, idx[0], idx[1], idx[2]);
            rec.exposure = r.at("exposure").get<double>();
            rec.counts = r.at("counts").get<OutcomeArray>();
            rec.validate();
            run.records[idx] = rec;
        }
        return run;
    });
}

Json to_json(const StateReport& report) {
    return {{"theta_opt_deg", rad2deg(report.theta_opt)},
            {"fidelity", report.fidelity},
            {"purity", report.purity},
            {"f_max", report.f_max},
            {"n_tri", report.n_tri}};
}

Json to_json(const ReconstructionResult& result) {
    return {{"rho", to_json(result.rho)},
            {"iterations", result.iterations},
            {"log_likelihood", result.log_likelihood},
            {"converged", result.converged}};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return buf.str();
}

Json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw IoError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + path.parent_path().string() + "': " + ec.message());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("error writing '" + path.string() + "'");
}

}  // namespace tribell
