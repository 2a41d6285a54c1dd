#pragma once

// Batch runner behind the qndi command line: config loading and validation,
// sweep dispatch over the core library, CSV rendering.

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qndi::harness {

enum class Mode { fringe, duality, double_cell, coherence_sweep, bell, chs_sweep };

std::optional<Mode> parse_mode(std::string_view name);
std::string_view to_string(Mode mode);
const std::vector<Mode>& all_modes();

struct RunSpec {
    Mode mode = Mode::fringe;
    nlohmann::json params = nlohmann::json::object();
};

struct Diagnostic {
    std::string key;
    std::string message;

    std::string str() const { return key + ": " + message; }
};

class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<Diagnostic> diagnostics);
    const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

private:
    std::vector<Diagnostic> diagnostics_;
};

struct OutputTable {
    std::vector<std::string> headers;
    std::vector<std::vector<double>> rows;
    /// Rendered as "# key: value" lines, in order.
    std::vector<std::pair<std::string, std::string>> metadata;
    /// Fully resolved parameters; rendered as the "#@config" line.
    nlohmann::json config;
};

/// Every problem with `spec`; empty iff run() accepts it. Never throws.
std::vector<Diagnostic> validate(const RunSpec& spec);

/// `spec.params` with every default filled in. Assumes validate() passed.
nlohmann::json resolve(const RunSpec& spec);

/// Runs the spec. Throws ValidationError, or qndi::TruncationError when a
/// Fock cutoff is too small.
OutputTable run(const RunSpec& spec, unsigned threads = 0);

/// UTF-8 CSV: metadata comments, header row, floats with 17 significant digits.
std::string render_csv(const OutputTable& table);

/// Reads a JSON config, or the "#@config" line of a CSV this tool wrote.
nlohmann::json load_config(const std::filesystem::path& path);

/// "%.17g".
std::string format_real(double value);

} // namespace qndi::harness
