// qndi: batch runner for the which-path / Kerr-tagging experiment models.
//
//   qndi <mode> [--config FILE] [--out FILE] [--quiet] [overrides...]
//
// Exit codes: 0 success, 2 validation error, 3 numeric failure (Fock cutoff
// too small for the requested probe amplitude).

#include "harness.hpp"

#include "qndi/fock.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

namespace {

using nlohmann::json;
using namespace qndi::harness;

constexpr int kExitValidation = 2;
constexpr int kExitNumeric = 3;

// "start:stop:count" or "a,b,c" or a single number.
json parse_grid_flag(const std::string& text) {
    if (text.find(':') != std::string::npos) {
        std::stringstream ss(text);
        std::string a, b, c;
        std::getline(ss, a, ':');
        std::getline(ss, b, ':');
        std::getline(ss, c, ':');
        return {{"start", std::stod(a)}, {"stop", std::stod(b)}, {"count", std::stoll(c)}};
    }
    json arr = json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        arr.push_back(std::stod(item));
    return arr.size() == 1 ? arr[0] : arr;
}

struct Overrides {
    std::map<std::string, double> reals;
    std::map<std::string, std::string> grids;
    std::optional<int> n_max;
    std::optional<std::string> lineshape;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    const std::pair<const char*, const char*> reals[] = {
        {"--nu-abs", "nu_abs"}, {"--nu-re", "nu_re"}, {"--nu-im", "nu_im"},
        {"--chi-t", "chi_t"}, {"--chi-s-t", "chi_s_t"}, {"--chi-p-t", "chi_p_t"},
        {"--phi0", "phi0"}, {"--phi", "phi"}, {"--delta-x", "delta_x"}, {"--l-coh", "l_coh"},
        {"--t-prime-ratio", "t_prime_ratio"}, {"--phi-base", "phi_base"},
        {"--bs1-reflectivity", "bs1_reflectivity"}, {"--bs2-reflectivity", "bs2_reflectivity"},
        {"--truncation-tolerance", "truncation_tolerance"},
    };
    for (const auto& [flag, key] : reals) {
        cmd->add_option_function<double>(
            flag, [&o, k = std::string(key)](double v) { o.reals[k] = v; },
            std::string("override ") + key);
    }
    const std::pair<const char*, const char*> grids[] = {
        {"--theta-grid", "theta_grid"}, {"--nu-abs-grid", "nu_abs_grid"},
        {"--t-prime-ratio-grid", "t_prime_ratio_grid"}, {"--l-coh-grid", "l_coh_grid"},
        {"--phi-grid", "phi_grid"}, {"--gamma-grid", "gamma_grid"},
    };
    for (const auto& [flag, key] : grids) {
        cmd->add_option_function<std::string>(
            flag, [&o, k = std::string(key)](const std::string& v) { o.grids[k] = v; },
            std::string("override ") + key + " (start:stop:count or a,b,c)");
    }
    cmd->add_option_function<int>("--n-max", [&o](int v) { o.n_max = v; }, "Fock cutoff override");
    cmd->add_option_function<std::string>(
        "--lineshape", [&o](const std::string& v) { o.lineshape = v; }, "lorentzian | gaussian");
}

void apply_overrides(json& params, const Overrides& o) {
    for (const auto& [key, value] : o.reals) {
        if (key == "nu_abs") {
            params["nu_re"] = value;
            params["nu_im"] = 0.0;
        } else {
            params[key] = value;
        }
    }
    for (const auto& [key, text] : o.grids)
        params[key] = parse_grid_flag(text);
    if (o.n_max)
        params["n_max"] = *o.n_max;
    if (o.lineshape)
        params["lineshape"] = *o.lineshape;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Which-path modulation of single-photon interference and Bell correlations"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    bool quiet = false;
    Overrides overrides;

    std::map<CLI::App*, Mode> commands;
    for (Mode m : all_modes()) {
        CLI::App* cmd = app.add_subcommand(std::string(to_string(m)));
        cmd->add_option("--config", config_path, "JSON config, or a CSV previously written by qndi");
        cmd->add_option("--out", out_path, "output CSV (default: stdout)");
        cmd->add_flag("--quiet", quiet, "suppress the summary on stderr");
        add_override_flags(cmd, overrides);
        commands[cmd] = m;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    RunSpec spec;
    for (const auto& [cmd, mode] : commands)
        if (cmd->parsed())
            spec.mode = mode;

    try {
        qndi::verify_truncation_rule();
        if (!config_path.empty())
            spec.params = load_config(config_path);
        apply_overrides(spec.params, overrides);

        const OutputTable table = run(spec);
        const std::string csv = render_csv(table);
        if (out_path.empty()) {
            std::cout << csv;
        } else {
            std::ofstream out(out_path, std::ios::binary);
            if (!out) {
                std::cerr << "qndi: cannot write " << out_path << "\n";
                return kExitValidation;
            }
            out << csv;
        }
        if (!quiet)
            std::cerr << "qndi " << to_string(spec.mode) << ": " << table.rows.size() << " rows\n";
        return 0;
    } catch (const ValidationError& e) {
        for (const auto& d : e.diagnostics())
            std::cerr << "qndi: " << d.str() << "\n";
        return kExitValidation;
    } catch (const qndi::TruncationError& e) {
        std::cerr << "qndi: numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "qndi: config: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "qndi: " << e.what() << "\n";
        return kExitValidation;
    }
}
