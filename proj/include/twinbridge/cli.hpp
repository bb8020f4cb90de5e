#pragma once

// Experiment configuration files and the three command implementations
// behind the `twinbridge` tool. Commands return process exit codes:
// 0 success, 1 runtime failure, 2 configuration or input error.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twinbridge/l2b.hpp"

namespace twinbridge {

enum class EnvKind { Synthetic, Dataset };

struct ExperimentSpec {
    EnvKind env = EnvKind::Synthetic;
    std::filesystem::path dataset_path;
    SyntheticEnvConfig synthetic;  // role is ignored; both roles are built from it
    RunConfig run;
    std::vector<Method> methods{Method::L2B, Method::L2BLite, Method::GridSearch,
                                Method::RandomBaseline};
    std::filesystem::path out = "results";

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

struct SpecKey {
    std::string key;
    std::string default_value;
    std::string help;
};

/// Every accepted key with its default, in documentation order.
[[nodiscard]] const std::vector<SpecKey>& spec_keys();

/// Sets one key from its textual value. Throws ConfigError for unknown keys
/// or unparsable values.
void apply_setting(ExperimentSpec& spec, std::string_view key, std::string_view value);

/// Parses `key = value` lines with `#` comments on top of the defaults.
/// Malformed lines raise ParseError; bad keys or values raise ConfigError.
[[nodiscard]] ExperimentSpec parse_spec(std::string_view text);
[[nodiscard]] ExperimentSpec load_spec(const std::filesystem::path& path);

struct RunOptions {
    std::optional<std::filesystem::path> spec;
    std::optional<std::filesystem::path> out;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> methods;  // comma separated
    std::optional<double> budget;
    std::vector<std::string> overrides;  // key=value
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_report(const std::filesystem::path& results_dir, std::ostream& out, std::ostream& err);
int cmd_gen_dataset(const std::optional<std::filesystem::path>& spec,
                    const std::filesystem::path& out_path, const std::vector<std::string>& overrides,
                    std::ostream& out, std::ostream& err);

// Output files. Column orders are fixed.
void write_iterations_csv(const std::filesystem::path& path, const std::vector<RunResult>& results);
void write_summary_csv(const std::filesystem::path& path, const std::vector<RunResult>& results);
void write_per_traffic_csv(const std::filesystem::path& path, const std::vector<RunResult>& results);
void write_per_state_csv(const std::filesystem::path& path, const std::vector<RunResult>& results);

/// Minimal comma-separated table: header names plus string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index by name; throws ParseError(1, ...) when absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// Every row must have as many cells as the header (ParseError otherwise).
[[nodiscard]] CsvTable read_csv(const std::filesystem::path& path);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// 800x500 SVG line chart, one polyline per series, axes covering the data.
[[nodiscard]] std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                         const std::string& y_label,
                                         const std::vector<Series>& series);

struct HeatCell {
    double x;
    double y;
    double value;
};

/// 800x500 SVG heatmap; cells on the distinct x and y values, coloured by value.
[[nodiscard]] std::string svg_heatmap(const std::string& title, const std::string& x_label,
                                      const std::string& y_label, const std::vector<HeatCell>& cells);

}  // namespace twinbridge
