#include "harness.hpp"

#include "qndi/analytic.hpp"
#include "qndi/bell.hpp"
#include "qndi/coherence.hpp"
#include "qndi/fock.hpp"
#include "qndi/interferometer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#ifndef QNDI_VERSION
#define QNDI_VERSION "0.0.0"
#endif

namespace qndi::harness {
namespace {

using nlohmann::json;
constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Schema

enum class Kind { real, integer, grid, text, lineshape, angles };

// Returns an error message for a bad value, or empty.
using Check = std::function<std::string(double)>;

struct KeySpec {
    Kind kind;
    bool required = false;
    json fallback = nullptr; // default; null means "absent unless given"
    Check check = nullptr;
};

using Schema = std::map<std::string, KeySpec>;

Check at_least(std::string name, double lo) {
    return [name, lo](double v) {
        return v >= lo ? std::string{} : name + " must be >= " + format_real(lo);
    };
}
Check above(std::string name, double lo) {
    return [name, lo](double v) {
        return v > lo ? std::string{} : name + " must be > " + format_real(lo);
    };
}
Check open_unit(std::string name) {
    return [name](double v) {
        return (v > 0.0 && v < 1.0) ? std::string{} : name + " must lie in (0, 1)";
    };
}
Check closed_range(std::string name, double lo, double hi) {
    return [=](double v) {
        return (v >= lo && v <= hi)
                   ? std::string{}
                   : name + " must lie in [" + format_real(lo) + ", " + format_real(hi) + "]";
    };
}

json default_theta_grid() {
    return {{"start", 0.0}, {"stop", 2.0 * kPi}, {"count", 720}, {"endpoint", false}};
}

void add_probe_keys(Schema& s) {
    s["nu_re"] = {Kind::real, false, 0.0};
    s["nu_im"] = {Kind::real, false, 0.0};
    s["truncation_tolerance"] = {Kind::real, false, kDefaultTruncationTolerance, open_unit("truncation_tolerance")};
    s["n_max"] = {Kind::integer, false, nullptr, at_least("n_max", 0)};
}

void add_cell_keys(Schema& s) {
    s["chi_t"] = {Kind::real, true};
    s["chi_s_t"] = {Kind::real, false, 0.0};
    s["chi_p_t"] = {Kind::real, false, 0.0};
}

void add_interferometer_keys(Schema& s) {
    add_probe_keys(s);
    add_cell_keys(s);
    s["phi0"] = {Kind::real, false, 0.0};
    s["bs1_reflectivity"] = {Kind::real, false, 0.5, open_unit("bs1_reflectivity")};
    s["bs2_reflectivity"] = {Kind::real, false, 0.5, open_unit("bs2_reflectivity")};
    s["theta_grid"] = {Kind::grid, false, default_theta_grid()};
}

const Schema& schema_for(Mode mode) {
    static const std::map<Mode, Schema> schemas = [] {
        std::map<Mode, Schema> m;

        Schema fringe;
        add_interferometer_keys(fringe);
        fringe["theta_grid"].required = true;
        fringe["theta_grid"].fallback = nullptr;
        m[Mode::fringe] = fringe;

        Schema duality;
        add_cell_keys(duality);
        duality["nu_abs_grid"] = {Kind::grid, true, nullptr, at_least("nu_abs", 0.0)};
        duality["theta_grid"] = {Kind::grid, false, default_theta_grid()};
        duality["phi0"] = {Kind::real, false, 0.0};
        duality["truncation_tolerance"] = {Kind::real, false, kDefaultTruncationTolerance,
                                           open_unit("truncation_tolerance")};
        m[Mode::duality] = duality;

        Schema dbl;
        add_interferometer_keys(dbl);
        dbl["t_prime_ratio_grid"] = {Kind::grid, true, nullptr, at_least("t_prime_ratio", 0.0)};
        dbl["delta_x"] = {Kind::real, false, 0.0, at_least("delta_x", 0.0)};
        dbl["l_coh"] = {Kind::real, false, 1.0, above("l_coh", 0.0)};
        dbl["lineshape"] = {Kind::lineshape, false, "lorentzian"};
        m[Mode::double_cell] = dbl;

        Schema coh;
        add_interferometer_keys(coh);
        coh["delta_x"] = {Kind::real, true, nullptr, at_least("delta_x", 0.0)};
        coh["l_coh_grid"] = {Kind::grid, false, nullptr, above("l_coh", 0.0)};
        coh["l_coh"] = {Kind::real, false, nullptr, above("l_coh", 0.0)};
        coh["lineshape"] = {Kind::lineshape, false, "lorentzian"};
        coh["t_prime_ratio"] = {Kind::real, false, 1.0, at_least("t_prime_ratio", 0.0)};
        m[Mode::coherence_sweep] = coh;

        Schema bell;
        add_probe_keys(bell);
        add_cell_keys(bell);
        bell["phi"] = {Kind::real, false, 0.0};
        bell["angles"] = {Kind::angles, false, nullptr};
        bell["grid_points"] = {Kind::integer, false, 32, at_least("grid_points", 2)};
        m[Mode::bell] = bell;

        Schema chs;
        chs["phi_grid"] = {Kind::grid, false, nullptr, closed_range("phi", -1.0, 1.0)};
        chs["gamma_grid"] = {Kind::grid, false, nullptr, closed_range("gamma", 0.0, 1.0)};
        chs["phi_base"] = {Kind::real, false, nullptr, closed_range("phi_base", -1.0, 1.0)};
        chs["grid_points"] = {Kind::integer, false, 32, at_least("grid_points", 2)};
        m[Mode::chs_sweep] = chs;

        for (auto& [mode, schema] : m)
            schema["mode"] = {Kind::text, false, nullptr};
        return m;
    }();
    return schemas.at(mode);
}

// ---------------------------------------------------------------------------
// Value helpers

bool is_real(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

void check_number(const std::string& key, const json& v, const Check& check,
                  std::vector<Diagnostic>& out) {
    if (!is_real(v)) {
        out.push_back({key, "expected a finite number"});
        return;
    }
    if (check) {
        if (auto msg = check(v.get<double>()); !msg.empty())
            out.push_back({key, msg});
    }
}

void check_grid(const std::string& key, const json& v, const Check& check,
                std::vector<Diagnostic>& out) {
    if (v.is_number()) {
        check_number(key, v, check, out);
        return;
    }
    if (v.is_array()) {
        if (v.empty())
            out.push_back({key, "grid must not be empty"});
        for (const auto& e : v)
            check_number(key, e, check, out);
        return;
    }
    if (v.is_object()) {
        for (const auto& [k, _] : v.items()) {
            if (k != "start" && k != "stop" && k != "count" && k != "endpoint")
                out.push_back({key + "." + k, "unknown grid key (expected start, stop, count, endpoint)"});
        }
        for (const char* part : {"start", "stop"}) {
            if (!v.contains(part))
                out.push_back({key + "." + part, "missing grid bound"});
            else
                check_number(key + "." + part, v[part], check, out);
        }
        if (!v.contains("count") || !v["count"].is_number_integer() || v["count"].get<long long>() < 1)
            out.push_back({key + ".count", "count must be an integer >= 1"});
        if (v.contains("endpoint") && !v["endpoint"].is_boolean())
            out.push_back({key + ".endpoint", "endpoint must be true or false"});
        return;
    }
    out.push_back({key, "expected a number, a list of numbers, or {start, stop, count}"});
}

bool default_endpoint(const std::string& key) { return key != "theta_grid"; }

std::vector<double> expand_grid(const std::string& key, const json& v) {
    if (v.is_number())
        return {v.get<double>()};
    if (v.is_array())
        return v.get<std::vector<double>>();
    const double start = v.at("start").get<double>();
    const double stop = v.at("stop").get<double>();
    const auto count = v.at("count").get<std::size_t>();
    const bool endpoint = v.value("endpoint", default_endpoint(key));
    std::vector<double> out(count);
    if (count == 1) {
        out[0] = start;
        return out;
    }
    const double denom = static_cast<double>(endpoint ? count - 1 : count);
    for (std::size_t k = 0; k < count; ++k)
        out[k] = start + (stop - start) * static_cast<double>(k) / denom;
    return out;
}

std::size_t grid_size(const json& v) {
    if (v.is_number())
        return 1;
    if (v.is_array())
        return v.size();
    return v.value("count", std::size_t{0});
}

// ---------------------------------------------------------------------------
// Parallel sweep; rows land at their sweep index whatever the completion order.

template <class Row, class Fn>
std::vector<Row> parallel_map(std::size_t n, unsigned threads, Fn fn) {
    std::vector<Row> out(n);
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = n;
    std::exception_ptr error;

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (error)
        std::rethrow_exception(error);
    return out;
}

// ---------------------------------------------------------------------------
// Parameter extraction (post-validation)

Complex nu_of(const json& p) { return {p.value("nu_re", 0.0), p.value("nu_im", 0.0)}; }

KerrCellSpec cell_of(const json& p) {
    return {p.at("chi_t").get<double>(), p.value("chi_s_t", 0.0), p.value("chi_p_t", 0.0)};
}

ProbeSpec probe_of(const json& p, Complex nu) {
    ProbeSpec probe = make_probe(nu);
    if (p.contains("n_max"))
        probe.n_max = p["n_max"].get<int>();
    probe.tolerance = p.value("truncation_tolerance", kDefaultTruncationTolerance);
    return probe;
}

ArmConfig arms_of(const json& p) {
    ArmConfig c;
    c.cell_arm3 = cell_of(p);
    c.bs1_reflectivity = p.value("bs1_reflectivity", 0.5);
    c.bs2_reflectivity = p.value("bs2_reflectivity", 0.5);
    return c;
}

CoherenceSpec coherence_of(const json& p, double l_coh) {
    return {p.value("delta_x", 0.0), l_coh, parse_lineshape(p.value("lineshape", "lorentzian"))};
}

std::vector<double> shifted(std::vector<double> grid, double offset) {
    for (auto& t : grid)
        t += offset;
    return grid;
}

// Fringe scan on `grid`, samples reported against the unshifted theta.
FringeFit fit_scan(const ArmConfig& config, const ProbeSpec& probe, std::span<const double> grid,
                   const PhaseDistribution& dist = PhaseDistribution::none()) {
    return extract_fringe(fringe_scan(config, probe, grid, dist));
}

// ---------------------------------------------------------------------------
// Modes

OutputTable run_fringe(const json& p, unsigned threads) {
    const Complex nu = nu_of(p);
    const ProbeSpec probe = probe_of(p, nu);
    ArmConfig config = arms_of(p);
    const double phi0 = p.value("phi0", 0.0);
    const auto thetas = expand_grid("theta_grid", p.at("theta_grid"));

    FringeParams analytic{nu, *config.cell_arm3, 0.0, phi0 + equivalent_phi0(config)};
    const bool balanced = config.bs1_reflectivity == 0.5 && config.bs2_reflectivity == 0.5;

    struct Row { double n4, n5, n4a; };
    const auto rows = parallel_map<Row>(thetas.size(), threads, [&](std::size_t i) {
        ArmConfig c = config;
        c.theta = thetas[i] + phi0;
        const SimResult r = run_single_cell(c, probe);
        FringeParams a = analytic;
        a.theta = thetas[i];
        return Row{r.n4_expectation, r.n5_expectation, n4_single_cell(a)};
    });

    OutputTable t;
    t.headers = {"theta", "n4_sim", "n5_sim", "n4_analytic", "abs_diff"};
    std::vector<FringePoint> samples;
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        const auto& r = rows[i];
        t.rows.push_back({thetas[i], r.n4, r.n5, r.n4a, balanced ? std::abs(r.n4 - r.n4a) : 0.0});
        samples.push_back({thetas[i], r.n4});
    }
    t.metadata.emplace_back("n_max", std::to_string(probe.n_max));
    if (samples.size() >= 3) {
        const FringeFit fit = extract_fringe(samples);
        t.metadata.emplace_back("visibility_sim", format_real(fit.visibility));
        t.metadata.emplace_back("phase_offset_sim", format_real(fit.phase_offset));
        t.metadata.emplace_back("raw_contrast_sim", format_real(fit.raw_contrast));
    }
    t.metadata.emplace_back("visibility_analytic", format_real(visibility(nu, *config.cell_arm3)));
    t.metadata.emplace_back("homodyne_snr", format_real(homodyne_snr(nu, *config.cell_arm3)));
    return t;
}

OutputTable run_duality(const json& p, unsigned threads) {
    const KerrCellSpec cell = cell_of(p);
    const auto nus = expand_grid("nu_abs_grid", p.at("nu_abs_grid"));
    const auto thetas = shifted(expand_grid("theta_grid", p.at("theta_grid")), p.value("phi0", 0.0));
    const double tol = p.value("truncation_tolerance", kDefaultTruncationTolerance);

    struct Row { double v, d, va, r; int n_max; };
    const auto rows = parallel_map<Row>(nus.size(), threads, [&](std::size_t i) {
        ProbeSpec probe = make_probe(nus[i]);
        probe.tolerance = tol;
        ArmConfig config;
        config.cell_arm3 = cell;
        const FringeFit fit = fit_scan(config, probe, thetas);
        return Row{fit.visibility, simulated_distinguishability(config, probe),
                   visibility(nus[i], cell), homodyne_snr(nus[i], cell), probe.n_max};
    });

    OutputTable t;
    t.headers = {"nu_abs", "visibility", "distinguishability", "d2_plus_v2", "visibility_analytic", "snr"};
    int n_max = 0;
    for (std::size_t i = 0; i < nus.size(); ++i) {
        const auto& r = rows[i];
        t.rows.push_back({nus[i], r.v, r.d, r.d * r.d + r.v * r.v, r.va, r.r});
        n_max = std::max(n_max, r.n_max);
    }
    t.metadata.emplace_back("n_max", std::to_string(n_max));
    return t;
}

OutputTable run_double_cell_mode(const json& p, unsigned threads) {
    const Complex nu = nu_of(p);
    const ProbeSpec probe = probe_of(p, nu);
    const ArmConfig base = arms_of(p);
    const auto ratios = expand_grid("t_prime_ratio_grid", p.at("t_prime_ratio_grid"));
    const auto thetas = shifted(expand_grid("theta_grid", p.at("theta_grid")), p.value("phi0", 0.0));
    const CoherenceSpec coh = coherence_of(p, p.value("l_coh", 1.0));
    const double gamma = coherence_factor(coh);
    const PhaseDistribution dist = phase_distribution(coh);

    struct Row { double vs, va, offset; };
    const auto rows = parallel_map<Row>(ratios.size(), threads, [&](std::size_t i) {
        ArmConfig c = base;
        const KerrCellSpec& k = *base.cell_arm3;
        c.cell_arm2 = KerrCellSpec{k.chi_t * ratios[i], k.chi_s_t * ratios[i], k.chi_p_t * ratios[i]};
        const FringeFit fit = fit_scan(c, probe, thetas, dist);
        KerrCellSpec eff = k;
        eff.chi_t *= 1.0 - ratios[i];
        return Row{fit.visibility, gamma * visibility(nu, eff), fit.phase_offset};
    });

    OutputTable t;
    t.headers = {"t_prime_ratio", "visibility_sim", "visibility_analytic", "gamma", "phase_offset_sim"};
    for (std::size_t i = 0; i < ratios.size(); ++i)
        t.rows.push_back({ratios[i], rows[i].vs, rows[i].va, gamma, rows[i].offset});
    t.metadata.emplace_back("n_max", std::to_string(probe.n_max));
    return t;
}

OutputTable run_coherence_sweep(const json& p, unsigned threads) {
    const Complex nu = nu_of(p);
    const ProbeSpec probe = probe_of(p, nu);
    ArmConfig config = arms_of(p);
    const double ratio = p.value("t_prime_ratio", 1.0);
    const KerrCellSpec k = *config.cell_arm3;
    config.cell_arm2 = KerrCellSpec{k.chi_t * ratio, k.chi_s_t * ratio, k.chi_p_t * ratio};
    const auto lengths = p.contains("l_coh_grid") ? expand_grid("l_coh_grid", p["l_coh_grid"])
                                                  : std::vector<double>{p.at("l_coh").get<double>()};
    const auto thetas = shifted(expand_grid("theta_grid", p.at("theta_grid")), p.value("phi0", 0.0));
    KerrCellSpec eff = k;
    eff.chi_t *= 1.0 - ratio;
    const double v_double = visibility(nu, eff);

    struct Row { double gamma, vs; };
    const auto rows = parallel_map<Row>(lengths.size(), threads, [&](std::size_t i) {
        const CoherenceSpec coh = coherence_of(p, lengths[i]);
        const FringeFit fit = fit_scan(config, probe, thetas, phase_distribution(coh));
        return Row{coherence_factor(coh), fit.visibility};
    });

    OutputTable t;
    t.headers = {"l_coh", "gamma", "visibility_sim", "visibility_expected"};
    for (std::size_t i = 0; i < lengths.size(); ++i)
        t.rows.push_back({lengths[i], rows[i].gamma, rows[i].vs, rows[i].gamma * v_double});
    t.metadata.emplace_back("n_max", std::to_string(probe.n_max));
    return t;
}

void push_angles(std::vector<double>& row, const PolarizerAngles& a) {
    row.insert(row.end(), {a.theta1, a.theta1p, a.theta2, a.theta2p});
}

OutputTable run_bell(const json& p) {
    const Complex nu = nu_of(p);
    const KerrCellSpec cell = cell_of(p);
    const ProbeSpec probe = probe_of(p, nu);
    const double phi_extra = p.value("phi", 0.0);
    const double phi = phi_factor(nu, cell, phi_extra + signal_self_phase(cell));

    ChsSearchOptions opt;
    opt.grid_points = p.value("grid_points", 32);
    CHSReport report;
    if (p.contains("angles")) {
        const auto& a = p["angles"];
        report = chs_sum(PolarizerAngles{a.at("theta1").get<double>(), a.at("theta1p").get<double>(),
                                         a.at("theta2").get<double>(), a.at("theta2p").get<double>()},
                         phi);
    } else {
        report = maximize_chs(phi, opt);
    }
    const QuantumState state =
        tag_with_kerr(entangled_state(coherent_state(nu, probe.n_max, probe.tolerance)), cell, phi_extra);
    const CHSReport simulated = chs_sum(state, report.angles);

    OutputTable t;
    t.headers = {"phi_factor", "chs", "chs_state_vector", "chs_closed_form_max", "chs_fixed_angles",
                 "theta1", "theta1p", "theta2", "theta2p",
                 "p11", "p12p", "p1p2", "p1p2p", "s1p", "s2"};
    std::vector<double> row{phi, report.chs, simulated.chs, chs_optimum(phi),
                            chs_sum(fixed_reference_angles(), phi).chs};
    push_angles(row, report.angles);
    row.insert(row.end(), {report.p11, report.p12p, report.p1p2, report.p1p2p, report.s1p, report.s2});
    t.rows.push_back(std::move(row));
    t.metadata.emplace_back("n_max", std::to_string(probe.n_max));
    t.metadata.emplace_back("angles_source", p.contains("angles") ? "given" : "maximized");
    return t;
}

OutputTable run_chs_sweep(const json& p, unsigned threads) {
    ChsSearchOptions opt;
    opt.grid_points = p.value("grid_points", 32);
    opt.threads = 1; // the sweep itself is parallel

    const bool by_gamma = p.contains("gamma_grid");
    const auto values = by_gamma ? expand_grid("gamma_grid", p["gamma_grid"])
                                 : expand_grid("phi_grid", p.at("phi_grid"));
    const double phi_base = p.value("phi_base", 1.0);

    const auto reports = parallel_map<CHSReport>(values.size(), threads, [&](std::size_t i) {
        return maximize_chs(by_gamma ? values[i] * phi_base : values[i], opt);
    });

    OutputTable t;
    if (by_gamma)
        t.headers.push_back("gamma");
    for (const char* h : {"phi", "chs_max", "chs_closed_form", "chs_fixed_angles",
                          "theta1", "theta1p", "theta2", "theta2p"})
        t.headers.push_back(h);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const CHSReport& r = reports[i];
        std::vector<double> row;
        if (by_gamma)
            row.push_back(values[i]);
        row.insert(row.end(), {r.phi_used, r.chs, chs_optimum(r.phi_used),
                               chs_sum(fixed_reference_angles(), r.phi_used).chs});
        push_angles(row, r.angles);
        t.rows.push_back(std::move(row));
    }
    const PolarizerAngles fixed = fixed_reference_angles();
    t.metadata.emplace_back("fixed_angles", format_real(fixed.theta1) + " " + format_real(fixed.theta1p) +
                                                " " + format_real(fixed.theta2) + " " +
                                                format_real(fixed.theta2p));
    return t;
}

} // namespace

// ---------------------------------------------------------------------------

ValidationError::ValidationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error([&] {
          std::string msg = "invalid run spec";
          for (const auto& d : diagnostics)
              msg += "\n  " + d.str();
          return msg;
      }()),
      diagnostics_(std::move(diagnostics)) {}

const std::vector<Mode>& all_modes() {
    static const std::vector<Mode> modes{Mode::fringe, Mode::duality, Mode::double_cell,
                                         Mode::coherence_sweep, Mode::bell, Mode::chs_sweep};
    return modes;
}

std::optional<Mode> parse_mode(std::string_view name) {
    for (Mode m : all_modes())
        if (to_string(m) == name)
            return m;
    return std::nullopt;
}

std::string_view to_string(Mode mode) {
    switch (mode) {
    case Mode::fringe: return "fringe";
    case Mode::duality: return "duality";
    case Mode::double_cell: return "double-cell";
    case Mode::coherence_sweep: return "coherence-sweep";
    case Mode::bell: return "bell";
    case Mode::chs_sweep: return "chs-sweep";
    }
    return "?";
}

std::string format_real(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::vector<Diagnostic> validate(const RunSpec& spec) {
    std::vector<Diagnostic> out;
    const json& p = spec.params;
    if (!p.is_object()) {
        out.push_back({"<config>", "expected a key/value object"});
        return out;
    }
    const Schema& schema = schema_for(spec.mode);

    for (const auto& [key, value] : p.items()) {
        const auto it = schema.find(key);
        if (it == schema.end()) {
            out.push_back({key, "unknown key for mode " + std::string(to_string(spec.mode))});
            continue;
        }
        if (key == "mode") {
            if (!value.is_string() || value.get<std::string>() != to_string(spec.mode))
                out.push_back({key, "config mode does not match subcommand " +
                                        std::string(to_string(spec.mode))});
            continue;
        }
        const KeySpec& ks = it->second;
        switch (ks.kind) {
        case Kind::real:
            check_number(key, value, ks.check, out);
            break;
        case Kind::integer:
            if (!value.is_number_integer())
                out.push_back({key, "expected an integer"});
            else
                check_number(key, value, ks.check, out);
            break;
        case Kind::grid:
            check_grid(key, value, ks.check, out);
            break;
        case Kind::text:
            break;
        case Kind::lineshape:
            if (!value.is_string() || (value != "lorentzian" && value != "gaussian"))
                out.push_back({key, "expected \"lorentzian\" or \"gaussian\""});
            break;
        case Kind::angles:
            if (!value.is_object()) {
                out.push_back({key, "expected {theta1, theta1p, theta2, theta2p}"});
                break;
            }
            for (const char* a : {"theta1", "theta1p", "theta2", "theta2p"}) {
                if (!value.contains(a))
                    out.push_back({key + "." + a, "missing polarizer angle"});
                else
                    check_number(key + "." + a, value[a], nullptr, out);
            }
            for (const auto& [k, _] : value.items())
                if (k != "theta1" && k != "theta1p" && k != "theta2" && k != "theta2p")
                    out.push_back({key + "." + k, "unknown angle key"});
            break;
        }
    }
    for (const auto& [key, ks] : schema) {
        if (ks.required && !p.contains(key))
            out.push_back({key, "required for mode " + std::string(to_string(spec.mode))});
    }

    // Cross-key rules.
    switch (spec.mode) {
    case Mode::fringe:
        if (p.contains("theta_grid") && grid_size(p["theta_grid"]) < 3)
            out.push_back({"theta_grid", "fringe fit needs at least 3 theta values"});
        break;
    case Mode::duality:
    case Mode::double_cell:
        if (p.contains("theta_grid") && grid_size(p["theta_grid"]) < 3)
            out.push_back({"theta_grid", "fringe fit needs at least 3 theta values"});
        break;
    case Mode::coherence_sweep:
        if (p.contains("theta_grid") && grid_size(p["theta_grid"]) < 3)
            out.push_back({"theta_grid", "fringe fit needs at least 3 theta values"});
        if (p.contains("l_coh_grid") == p.contains("l_coh"))
            out.push_back({"l_coh_grid", "give exactly one of l_coh_grid or l_coh"});
        break;
    case Mode::chs_sweep:
        if (p.contains("phi_grid") == p.contains("gamma_grid"))
            out.push_back({"phi_grid", "give exactly one of phi_grid or gamma_grid"});
        if (p.contains("phi_base") && !p.contains("gamma_grid"))
            out.push_back({"phi_base", "only meaningful with gamma_grid"});
        break;
    case Mode::bell:
        break;
    }
    return out;
}

json resolve(const RunSpec& spec) {
    json out = spec.params;
    out["mode"] = std::string(to_string(spec.mode));
    for (const auto& [key, ks] : schema_for(spec.mode)) {
        if (!out.contains(key) && !ks.fallback.is_null())
            out[key] = ks.fallback;
        if (ks.kind == Kind::grid && out.contains(key) && out[key].is_object() &&
            !out[key].contains("endpoint"))
            out[key]["endpoint"] = default_endpoint(key);
    }
    if (spec.mode == Mode::chs_sweep && out.contains("gamma_grid") && !out.contains("phi_base"))
        out["phi_base"] = 1.0;
    return out;
}

OutputTable run(const RunSpec& spec, unsigned threads) {
    if (auto diags = validate(spec); !diags.empty())
        throw ValidationError(std::move(diags));
    const json p = resolve(spec);

    OutputTable t;
    switch (spec.mode) {
    case Mode::fringe: t = run_fringe(p, threads); break;
    case Mode::duality: t = run_duality(p, threads); break;
    case Mode::double_cell: t = run_double_cell_mode(p, threads); break;
    case Mode::coherence_sweep: t = run_coherence_sweep(p, threads); break;
    case Mode::bell: t = run_bell(p); break;
    case Mode::chs_sweep: t = run_chs_sweep(p, threads); break;
    }
    t.metadata.insert(t.metadata.begin(), {"mode", std::string(to_string(spec.mode))});
    t.metadata.insert(t.metadata.begin(), {"qndi", QNDI_VERSION});
    t.config = p;
    return t;
}

std::string render_csv(const OutputTable& table) {
    std::ostringstream os;
    for (const auto& [key, value] : table.metadata)
        os << "# " << key << ": " << value << '\n';
    os << "#@config " << table.config.dump() << '\n';
    for (std::size_t i = 0; i < table.headers.size(); ++i)
        os << (i ? "," : "") << table.headers[i];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << format_real(row[i]);
        os << '\n';
    }
    return os.str();
}

json load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '#') {
        std::istringstream lines(text);
        std::string line;
        const std::string tag = "#@config ";
        while (std::getline(lines, line)) {
            if (line.rfind(tag, 0) == 0)
                return json::parse(line.substr(tag.size()));
            if (line.empty() || line[0] != '#')
                break;
        }
        throw std::runtime_error(path.string() + " has no #@config line");
    }
    return json::parse(text, nullptr, true, /*ignore_comments=*/true);
}

} // namespace qndi::harness
