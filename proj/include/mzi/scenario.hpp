#pragma once

// Scenario files, presets and sweeps behind the mzi_opt command line tool.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mzi/optimize.hpp"

namespace mzi {

using json = nlohmann::json;

enum class SweepVar { Phi, Tau1, Tau2, Alpha };

inline std::string_view to_string(SweepVar v) {
    switch (v) {
        case SweepVar::Phi: return "phi";
        case SweepVar::Tau1: return "tau1";
        case SweepVar::Tau2: return "tau2";
        case SweepVar::Alpha: return "alpha";
    }
    return "?";
}

inline std::string_view to_string(Reference r) { return r == Reference::External ? "external" : "none"; }

struct SweepSpec {
    SweepVar variable = SweepVar::Phi;
    double from = 0, to = 0;
    int points = 2;
    friend bool operator==(const SweepSpec&, const SweepSpec&) = default;
};

// nullopt stands for "auto" in bs1, bs2, working_point and local_oscillator.
// bs1 and bs2 are intensity transmittances.
struct Scenario {
    InputState input;
    std::optional<PmcId> pmc;
    Scheme scheme = Scheme::DifferenceIntensity;
    Reference reference = Reference::None;
    std::optional<double> bs1, bs2, working_point, local_oscillator;
    std::optional<SweepSpec> sweep;
    std::string output_path;
    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct ScenarioInvalid : std::runtime_error {
    std::vector<std::string> violations;
    explicit ScenarioInvalid(std::vector<std::string> v)
        : std::runtime_error(v.empty() ? "invalid scenario" : v.front()), violations(std::move(v)) {}
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------- JSON

namespace detail {

template <class E, size_t N>
std::optional<E> enum_from(const std::string& s, const std::array<E, N>& all) {
    for (E e : all)
        if (to_string(e) == s) return e;
    return std::nullopt;
}

constexpr std::array kModeKinds = {ModeKind::Vacuum, ModeKind::Coherent, ModeKind::SqueezedVacuum,
                                   ModeKind::SqueezedCoherent, ModeKind::Fock};
constexpr std::array kPmcs = {PmcId::CohSqzVac, PmcId::SqzCohSqzVac, PmcId::PMC1, PmcId::PMC2, PmcId::PMC3};
constexpr std::array kSchemes = {Scheme::DifferenceIntensity, Scheme::SingleModeIntensity, Scheme::BalancedHomodyne};
constexpr std::array kReferences = {Reference::None, Reference::External};
constexpr std::array kSweepVars = {SweepVar::Phi, SweepVar::Tau1, SweepVar::Tau2, SweepVar::Alpha};

template <class A>
std::string choices(const A& all) {
    std::string s;
    for (auto e : all) s += (s.empty() ? "" : ", ") + std::string(to_string(e));
    return s;
}

class Reader {
public:
    explicit Reader(std::vector<std::string>& errs) : errs_(errs) {}

    void keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; }))
                fail(path + "." + it.key(), "unknown key");
        }
    }

    bool object(const json& j, const std::string& path) {
        if (j.is_object()) return true;
        fail(path, "expected an object");
        return false;
    }

    double number(const json& j, const std::string& path, double dflt = 0) {
        if (j.is_number()) return j.get<double>();
        fail(path, "expected a number");
        return dflt;
    }

    int integer(const json& j, const std::string& path) {
        if (j.is_number_integer()) return j.get<int>();
        fail(path, "expected an integer");
        return 0;
    }

    std::optional<double> auto_or_number(const json& j, const std::string& path) {
        if (j.is_string() && j.get<std::string>() == "auto") return std::nullopt;
        if (j.is_number()) return j.get<double>();
        fail(path, "expected \"auto\" or a number");
        return std::nullopt;
    }

    template <class E, size_t N>
    E enumeration(const json& j, const std::string& path, const std::array<E, N>& all) {
        if (j.is_string())
            if (auto e = enum_from(j.get<std::string>(), all)) return *e;
        fail(path, "expected one of " + choices(all));
        return all[0];
    }

    void fail(const std::string& path, const std::string& what) { errs_.push_back(path + ": " + what); }

private:
    std::vector<std::string>& errs_;
};

inline ModeSpec mode_from_json(const json& j, const std::string& path, Reader& rd) {
    ModeSpec m;
    if (!rd.object(j, path)) return m;
    rd.keys(j, path, {"kind", "amplitude_mag", "amplitude_phase", "squeeze_mag", "squeeze_phase", "fock_n"});
    if (j.contains("kind"))
        m.kind = rd.enumeration(j["kind"], path + ".kind", kModeKinds);
    else
        rd.fail(path + ".kind", "missing");
    if (j.contains("amplitude_mag")) m.amplitude_mag = rd.number(j["amplitude_mag"], path + ".amplitude_mag");
    if (j.contains("amplitude_phase")) m.amplitude_phase = rd.number(j["amplitude_phase"], path + ".amplitude_phase");
    if (j.contains("squeeze_mag")) m.squeeze_mag = rd.number(j["squeeze_mag"], path + ".squeeze_mag");
    if (j.contains("squeeze_phase")) m.squeeze_phase = rd.number(j["squeeze_phase"], path + ".squeeze_phase");
    if (j.contains("fock_n")) m.fock_n = rd.integer(j["fock_n"], path + ".fock_n");
    return m;
}

inline json mode_to_json(const ModeSpec& m) {
    return {{"kind", to_string(m.kind)},           {"amplitude_mag", m.amplitude_mag},
            {"amplitude_phase", m.amplitude_phase}, {"squeeze_mag", m.squeeze_mag},
            {"squeeze_phase", m.squeeze_phase},     {"fock_n", m.fock_n}};
}

inline json auto_json(const std::optional<double>& v) { return v ? json(*v) : json("auto"); }

}  // namespace detail

// Parses without semantic checks; structural problems are collected in errs.
inline Scenario scenario_from_json(const json& j, std::vector<std::string>& errs) {
    detail::Reader rd(errs);
    Scenario s;
    if (!rd.object(j, "scenario")) return s;
    rd.keys(j, "scenario", {"input", "pmc", "scheme", "reference", "bs1", "bs2", "working_point",
                            "local_oscillator", "sweep", "output_path"});
    if (!j.contains("input")) {
        rd.fail("input", "missing");
    } else if (rd.object(j["input"], "input")) {
        rd.keys(j["input"], "input", {"port0", "port1"});
        for (const char* p : {"port0", "port1"}) {
            const std::string path = std::string("input.") + p;
            ModeSpec& m = std::string(p) == "port0" ? s.input.port0 : s.input.port1;
            if (j["input"].contains(p))
                m = detail::mode_from_json(j["input"][p], path, rd);
            else
                rd.fail(path, "missing");
        }
    }
    if (j.contains("pmc") && !j["pmc"].is_null()) s.pmc = rd.enumeration(j["pmc"], "pmc", detail::kPmcs);
    if (j.contains("scheme"))
        s.scheme = rd.enumeration(j["scheme"], "scheme", detail::kSchemes);
    else
        rd.fail("scheme", "missing");
    if (j.contains("reference")) s.reference = rd.enumeration(j["reference"], "reference", detail::kReferences);
    if (j.contains("bs1")) s.bs1 = rd.auto_or_number(j["bs1"], "bs1");
    if (j.contains("bs2")) s.bs2 = rd.auto_or_number(j["bs2"], "bs2");
    if (j.contains("working_point")) s.working_point = rd.auto_or_number(j["working_point"], "working_point");
    if (j.contains("local_oscillator"))
        s.local_oscillator = rd.auto_or_number(j["local_oscillator"], "local_oscillator");
    if (j.contains("sweep") && !j["sweep"].is_null() && rd.object(j["sweep"], "sweep")) {
        const json& w = j["sweep"];
        rd.keys(w, "sweep", {"variable", "from", "to", "points"});
        SweepSpec sw;
        for (const char* k : {"variable", "from", "to", "points"})
            if (!w.contains(k)) rd.fail(std::string("sweep.") + k, "missing");
        if (w.contains("variable")) sw.variable = rd.enumeration(w["variable"], "sweep.variable", detail::kSweepVars);
        if (w.contains("from")) sw.from = rd.number(w["from"], "sweep.from");
        if (w.contains("to")) sw.to = rd.number(w["to"], "sweep.to");
        if (w.contains("points")) sw.points = rd.integer(w["points"], "sweep.points");
        s.sweep = sw;
    }
    if (j.contains("output_path")) {
        if (j["output_path"].is_string())
            s.output_path = j["output_path"].get<std::string>();
        else
            rd.fail("output_path", "expected a string");
    }
    return s;
}

inline json scenario_to_json(const Scenario& s) {
    json j;
    j["input"] = {{"port0", detail::mode_to_json(s.input.port0)}, {"port1", detail::mode_to_json(s.input.port1)}};
    j["pmc"] = s.pmc ? json(to_string(*s.pmc)) : json(nullptr);
    j["scheme"] = to_string(s.scheme);
    j["reference"] = to_string(s.reference);
    j["bs1"] = detail::auto_json(s.bs1);
    j["bs2"] = detail::auto_json(s.bs2);
    j["working_point"] = detail::auto_json(s.working_point);
    j["local_oscillator"] = detail::auto_json(s.local_oscillator);
    if (s.sweep)
        j["sweep"] = {{"variable", to_string(s.sweep->variable)},
                      {"from", s.sweep->from},
                      {"to", s.sweep->to},
                      {"points", s.sweep->points}};
    else
        j["sweep"] = nullptr;
    j["output_path"] = s.output_path;
    return j;
}

// ---------------------------------------------------------------- validation

inline std::vector<std::string> validate(const Scenario& s) {
    std::vector<std::string> v;
    bool ports_ok = true;
    for (auto [name, m] : {std::pair{"input.port0", &s.input.port0}, {"input.port1", &s.input.port1}}) {
        if (auto e = mode_violation(*m); !e.empty()) {
            v.push_back(std::string(name) + ": " + e);
            ports_ok = false;
        }
    }
    InputState state = s.input;
    if (ports_ok && s.pmc) {
        try {
            state = apply_pmc(s.input, *s.pmc);
        } catch (const IncompatiblePmc& e) {
            v.push_back(std::string("pmc: ") + e.what());
        }
    }
    if (ports_ok && !(mean_total_photons(state) > 0)) v.push_back("input: state carries no photons");
    if (s.scheme == Scheme::BalancedHomodyne && s.reference != Reference::External)
        v.push_back("reference: BalancedHomodyne requires an external phase reference");
    auto unit = [&](const std::optional<double>& x, const char* name) {
        if (x && !(*x >= 0 && *x <= 1)) v.push_back(std::string(name) + ": " + name + " transmittance out of [0,1]");
    };
    unit(s.bs1, "bs1");
    unit(s.bs2, "bs2");
    if (s.working_point && !std::isfinite(*s.working_point)) v.push_back("working_point: not finite");
    if (s.local_oscillator) {
        if (!std::isfinite(*s.local_oscillator)) v.push_back("local_oscillator: not finite");
        if (s.scheme != Scheme::BalancedHomodyne)
            v.push_back("local_oscillator: only used by BalancedHomodyne");
    }
    if (s.sweep) {
        const auto& w = *s.sweep;
        if (w.points < 2) v.push_back("sweep.points: must be >= 2");
        if (w.points > 10000000) v.push_back("sweep.points: more than 1e7");
        if (!std::isfinite(w.from) || !std::isfinite(w.to)) v.push_back("sweep: bounds not finite");
        const double lo = std::min(w.from, w.to), hi = std::max(w.from, w.to);
        if ((w.variable == SweepVar::Tau1 || w.variable == SweepVar::Tau2) && !(lo >= 0 && hi <= 1))
            v.push_back("sweep: transmittance bounds out of [0,1]");
        if (w.variable == SweepVar::Alpha) {
            if (!(lo >= 0)) v.push_back("sweep: alpha bounds must be >= 0");
            if (!s.input.port1.has_amplitude()) v.push_back("sweep: alpha needs a coherent amplitude on port1");
        }
    }
    return v;
}

inline Scenario parse_scenario(const json& j) {
    std::vector<std::string> errs;
    Scenario s = scenario_from_json(j, errs);
    if (errs.empty()) errs = validate(s);
    if (!errs.empty()) throw ScenarioInvalid(std::move(errs));
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw IoError("cannot read " + p.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ScenarioInvalid({std::string("json: ") + e.what()});
    }
    return parse_scenario(j);
}

// ---------------------------------------------------------------- evaluation

struct OperatingPoint {
    double theta = 0, theta_prime = 0, phi = 0, phi_local = 0;
    double delta_phi = std::numeric_limits<double>::quiet_NaN();
    bool hessian_verified = false;
    bool degenerate = false;
    bool grid_fallback = false;
};

struct Quantities {
    double delta_phi = std::numeric_limits<double>::quiet_NaN();
    double qcrb_2p = std::numeric_limits<double>::quiet_NaN();
    double qcrb_i = std::numeric_limits<double>::quiet_NaN();
    double extinction_rate = std::numeric_limits<double>::quiet_NaN();
    double mean_n4 = std::numeric_limits<double>::quiet_NaN();
};

inline InputState resolved_input(const Scenario& s) { return s.pmc ? apply_pmc(s.input, *s.pmc) : s.input; }

// Delta phi at a point, continued through removable 0/0 points; NaN when
// there is no signal.
inline double delta_phi_at(Scheme scheme, const SchwingerMoments& m, const FieldMoments& fm, const BsAngles& ang,
                           double phi, double phi_local) {
    try {
        return scheme_delta_phi(scheme, m, fm, ang, phi, phi_local);
    } catch (const ZeroDerivative&) {
        const double v = detail::coefficient_value(scheme_coefficients(scheme, m, fm, ang, phi_local), phi);
        return std::isfinite(v) ? v : std::numeric_limits<double>::quiet_NaN();
    }
}

// Resolves every "auto" of the scenario on the given state.
inline OperatingPoint operating_point(const Scenario& s, const InputState& state) {
    OperatingPoint p;
    p.theta = s.bs1 ? tau_to_theta(*s.bs1) : optimize_bs1(state, s.reference);
    p.phi_local = s.local_oscillator.value_or(default_local_oscillator(state));
    const auto m = schwinger_moments(state);
    const auto fm = field_moments(state);
    if (s.working_point) {
        p.phi = *s.working_point;
        p.theta_prime = s.bs2 ? tau_to_theta(*s.bs2)
                              : bs2_step(s.scheme, m, fm, p.theta, p.phi, p.phi_local).theta_prime;
        p.delta_phi = delta_phi_at(s.scheme, m, fm, {p.theta, p.theta_prime}, p.phi, p.phi_local);
        return p;
    }
    JointOptions o;
    o.theta = p.theta;
    o.phi_local = p.phi_local;
    if (s.bs2) o.theta_prime = tau_to_theta(*s.bs2);
    const auto r = joint_optimize(state, s.scheme, s.reference, o);
    p.theta_prime = r.theta_prime_opt;
    p.phi = r.phi_opt;
    p.delta_phi = r.delta_phi_opt;
    p.hessian_verified = r.hessian_verified;
    p.degenerate = r.degenerate;
    p.grid_fallback = r.grid_fallback;
    return p;
}

inline Quantities quantities_at(Scheme scheme, const InputState& state, const OperatingPoint& p) {
    Quantities q;
    const auto m = schwinger_moments(state);
    const auto fm = field_moments(state);
    const BsAngles ang{p.theta, p.theta_prime};
    q.delta_phi = delta_phi_at(scheme, m, fm, ang, p.phi, p.phi_local);
    try {
        const auto r = qfi_report(fisher_matrix(m, p.theta));
        q.qcrb_2p = r.qcrb_2p;
        q.qcrb_i = r.qcrb_i;
    } catch (const DegenerateFisher&) {
    }
    q.mean_n4 = mean_n4(m, ang, p.phi);
    if (m.mean_n > 0) q.extinction_rate = q.mean_n4 / m.mean_n;
    return q;
}

struct SweepRow {
    double value = 0;
    Quantities q;
};

inline std::vector<double> sweep_values(const SweepSpec& w) {
    if (w.from == w.to) return {w.from};
    std::vector<double> v(w.points);
    for (int i = 0; i < w.points; ++i) v[i] = w.from + (w.to - w.from) * i / (w.points - 1);
    v.back() = w.to;
    return v;
}

// Worker count: MZI_OPT_THREADS when set and positive, else the hardware.
inline unsigned worker_count(size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* e = std::getenv("MZI_OPT_THREADS")) {
        char* end = nullptr;
        const long c = std::strtol(e, &end, 10);
        if (end != e && c > 0) n = static_cast<unsigned>(std::min<long>(c, 1024));
    }
    return static_cast<unsigned>(std::min<size_t>(n, std::max<size_t>(jobs, 1)));
}

// Runs fn(i) for i in [0, n) on a small pool; the first exception wins.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (size_t i; (i = next.fetch_add(1)) < n;) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!err) err = std::current_exception();
                    next = n;
                }
            }
        });
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

inline std::vector<SweepRow> run_sweep(const Scenario& s) {
    if (!s.sweep) throw ScenarioInvalid({"sweep: missing"});
    const auto values = sweep_values(*s.sweep);
    const InputState state = resolved_input(s);
    std::vector<SweepRow> rows(values.size());
    std::optional<OperatingPoint> base;
    const SweepVar var = s.sweep->variable;
    if (var == SweepVar::Phi || var == SweepVar::Tau2) base = operating_point(s, state);
    parallel_for(values.size(), [&](size_t i) {
        const double x = values[i];
        OperatingPoint p;
        InputState st = state;
        switch (var) {
            case SweepVar::Phi:
                p = *base;
                p.phi = x;
                break;
            case SweepVar::Tau2: {
                p = *base;
                p.theta_prime = tau_to_theta(x);
                if (!s.working_point) {
                    try {
                        const auto m = schwinger_moments(st);
                        const auto fm = field_moments(st);
                        p.phi = optimal_working_point(
                                    scheme_coefficients(s.scheme, m, fm, {p.theta, p.theta_prime}, p.phi_local))
                                    .chosen;
                    } catch (const ZeroDerivativeEverywhere&) {
                    }
                }
                break;
            }
            case SweepVar::Tau1: {
                Scenario t = s;
                t.bs1 = x;
                try {
                    p = operating_point(t, st);
                } catch (const Error&) {
                    p.theta = tau_to_theta(x);
                    p.theta_prime = s.bs2 ? tau_to_theta(*s.bs2) : kPi / 2;
                    p.phi = s.working_point.value_or(0.0);
                    p.phi_local = s.local_oscillator.value_or(default_local_oscillator(st));
                }
                break;
            }
            case SweepVar::Alpha: {
                Scenario t = s;
                t.input.port1.amplitude_mag = x;
                st = resolved_input(t);
                try {
                    p = operating_point(t, st);
                } catch (const Error&) {
                    p.theta = s.bs1 ? tau_to_theta(*s.bs1) : kPi / 2;
                    p.theta_prime = s.bs2 ? tau_to_theta(*s.bs2) : kPi / 2;
                    p.phi = s.working_point.value_or(0.0);
                    p.phi_local = s.local_oscillator.value_or(default_local_oscillator(st));
                }
                break;
            }
        }
        rows[i] = {x, quantities_at(s.scheme, st, p)};
    });
    return rows;
}

// ---------------------------------------------------------------- output

inline std::string csv_number(double x) {
    if (!std::isfinite(x)) return {};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_text(SweepVar var, const std::vector<SweepRow>& rows) {
    std::string out = "sweep_var,value,delta_phi,qcrb_2p,qcrb_i,extinction_rate,mean_n4\n";
    const std::string name(to_string(var));
    for (const auto& r : rows) {
        out += name + "," + csv_number(r.value) + "," + csv_number(r.q.delta_phi) + "," + csv_number(r.q.qcrb_2p) +
               "," + csv_number(r.q.qcrb_i) + "," + csv_number(r.q.extinction_rate) + "," +
               csv_number(r.q.mean_n4) + "\n";
    }
    return out;
}

// Writes through a sibling temporary and renames it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& text) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError("cannot rename into " + path.string());
    }
}

inline json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

struct RunResult {
    OperatingPoint point;
    Quantities at_optimum;
    std::vector<SweepRow> rows;
};

inline RunResult run_scenario(const Scenario& s) {
    RunResult r;
    const InputState state = resolved_input(s);
    r.point = operating_point(s, state);
    r.at_optimum = quantities_at(s.scheme, state, r.point);
    if (s.sweep) r.rows = run_sweep(s);
    return r;
}

inline json summary_json(const Scenario& s, const RunResult& r) {
    return {{"scheme", to_string(s.scheme)},
            {"pmc", s.pmc ? json(to_string(*s.pmc)) : json(nullptr)},
            {"tau", theta_to_tau(r.point.theta)},
            {"tau_prime", theta_to_tau(r.point.theta_prime)},
            {"phi", r.point.phi},
            {"phi_over_pi", r.point.phi / kPi},
            {"phi_local", nullable(s.scheme == Scheme::BalancedHomodyne ? r.point.phi_local : NAN)},
            {"delta_phi", nullable(r.at_optimum.delta_phi)},
            {"qcrb_2p", nullable(r.at_optimum.qcrb_2p)},
            {"qcrb_i", nullable(r.at_optimum.qcrb_i)},
            {"extinction_rate", nullable(r.at_optimum.extinction_rate)},
            {"mean_n4", nullable(r.at_optimum.mean_n4)},
            {"hessian_verified", r.point.hessian_verified},
            {"degenerate", r.point.degenerate},
            {"grid_fallback", r.point.grid_fallback},
            {"rows", r.rows.size()},
            {"output", s.sweep ? json(s.output_path) : json(nullptr)}};
}

// ---------------------------------------------------------------- presets

struct NamedScenario {
    std::string name;
    Scenario scenario;
};

inline const std::vector<std::string>& preset_ids() {
    static const std::vector<std::string> ids = {"fig3", "fig4", "fig5", "fig6", "fig7",
                                                 "fig8", "fig9", "fig10", "fig11", "fig12"};
    return ids;
}

namespace detail {

inline Scenario coh_sqz_vac(Scheme scheme) {
    Scenario s;
    s.input = {ModeSpec::squeezed_vacuum(1.2), ModeSpec::coherent(100.0)};
    s.pmc = PmcId::CohSqzVac;
    s.scheme = scheme;
    s.reference = scheme == Scheme::BalancedHomodyne ? Reference::External : Reference::None;
    return s;
}

inline Scenario dual_sqz_coh(double a, double b, PmcId pmc, Scheme scheme) {
    Scenario s;
    s.input = {ModeSpec::squeezed_coherent(b, 0, 1.2, 0), ModeSpec::squeezed_coherent(a, 0, 0.6, 0)};
    s.pmc = pmc;
    s.scheme = scheme;
    s.reference = scheme == Scheme::BalancedHomodyne ? Reference::External : Reference::None;
    return s;
}

inline NamedScenario with_sweep(std::string name, Scenario s, SweepVar v, double from, double to, int points) {
    s.sweep = SweepSpec{v, from, to, points};
    s.output_path = name + ".csv";
    return {std::move(name), std::move(s)};
}

inline Scenario balanced(Scenario s, bool both) {
    s.bs1 = 0.5;
    if (both) s.bs2 = 0.5;
    return s;
}

}  // namespace detail

// Curves of each figure; "balanced" homodyne curves fix BS1 only.
inline std::vector<NamedScenario> preset(const std::string& id) {
    using detail::with_sweep;
    const double two_pi = 2 * kPi;
    std::vector<NamedScenario> out;
    auto pmc_name = [](PmcId p) { return std::string(to_string(p)); };
    if (id == "fig3" || id == "fig4" || id == "fig5") {
        const Scheme sc = id == "fig3"   ? Scheme::DifferenceIntensity
                          : id == "fig4" ? Scheme::SingleModeIntensity
                                         : Scheme::BalancedHomodyne;
        const auto s = detail::coh_sqz_vac(sc);
        if (id == "fig5")
            out.push_back(with_sweep(id + "_phi", s, SweepVar::Phi, 0.9 * kPi, 1.1 * kPi, 1001));
        else
            out.push_back(with_sweep(id + "_phi", s, SweepVar::Phi, 0, two_pi, 1001));
        out.push_back(with_sweep(id + "_tau2", s, SweepVar::Tau2, 0, 1, 1001));
    } else if (id == "fig6") {
        Scenario s;
        s.input = {ModeSpec::squeezed_vacuum(1.2), ModeSpec::squeezed_coherent(50, 0, 0.6, 0)};
        s.pmc = PmcId::SqzCohSqzVac;
        s.scheme = Scheme::BalancedHomodyne;
        s.reference = Reference::External;
        out.push_back(with_sweep(id + "_unbalanced", s, SweepVar::Phi, 0.9 * kPi, 1.1 * kPi, 1001));
        out.push_back(with_sweep(id + "_balanced", detail::balanced(s, false), SweepVar::Phi, 0.9 * kPi, 1.1 * kPi,
                                 1001));
    } else if (id == "fig7" || id == "fig9") {
        const double a = id == "fig7" ? 2.2 : 1000, b = id == "fig7" ? 1.4 : 50;
        for (PmcId p : {PmcId::PMC1, PmcId::PMC2, PmcId::PMC3})
            out.push_back(with_sweep(id + "_" + pmc_name(p), detail::dual_sqz_coh(a, b, p, Scheme::DifferenceIntensity),
                                     SweepVar::Tau1, 0, 1, 1001));
    } else if (id == "fig8") {
        for (PmcId p : {PmcId::PMC1, PmcId::PMC2, PmcId::PMC3}) {
            auto s = detail::dual_sqz_coh(2.2, 1.4, p, Scheme::DifferenceIntensity);
            if (p != PmcId::PMC3) s = detail::balanced(s, true);
            out.push_back(with_sweep(id + "_" + pmc_name(p), s, SweepVar::Phi, 0, two_pi, 1001));
        }
    } else if (id == "fig10") {
        for (PmcId p : {PmcId::PMC1, PmcId::PMC2, PmcId::PMC3})
            out.push_back(with_sweep(id + "_" + pmc_name(p),
                                     detail::dual_sqz_coh(1000, 50, p, Scheme::SingleModeIntensity), SweepVar::Phi,
                                     0, two_pi, 1001));
    } else if (id == "fig11") {
        out.push_back(with_sweep(id + "_PMC3_unbalanced",
                                 detail::dual_sqz_coh(1000, 50, PmcId::PMC3, Scheme::SingleModeIntensity),
                                 SweepVar::Phi, 0, two_pi, 1001));
        for (PmcId p : {PmcId::PMC1, PmcId::PMC2})
            out.push_back(with_sweep(id + "_" + pmc_name(p) + "_balanced",
                                     detail::balanced(detail::dual_sqz_coh(1000, 50, p, Scheme::SingleModeIntensity),
                                                      true),
                                     SweepVar::Phi, 0, two_pi, 1001));
    } else if (id == "fig12") {
        for (PmcId p : {PmcId::PMC3, PmcId::PMC1}) {
            const auto s = detail::dual_sqz_coh(1000, 50, p, Scheme::BalancedHomodyne);
            out.push_back(with_sweep(id + "_" + pmc_name(p) + "_unbalanced", s, SweepVar::Phi, 0.9 * kPi, 1.1 * kPi,
                                     1001));
            out.push_back(with_sweep(id + "_" + pmc_name(p) + "_balanced", detail::balanced(s, false), SweepVar::Phi,
                                     0.9 * kPi, 1.1 * kPi, 1001));
        }
    } else {
        throw ScenarioInvalid({"preset: unknown id " + id});
    }
    return out;
}

}  // namespace mzi
