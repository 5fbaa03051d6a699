#pragma once

// JSON experiment configuration and result emission (CSV, SVG, manifest).

#include "rydmimo/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace rydmimo {

/// Configuration problem; the message starts with the offending field path.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

ExperimentSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// Reads, parses and fully validates a configuration file.
ExperimentSpec parse_config(const std::filesystem::path& path);

void write_csv(const ResultTable& table, std::ostream& out);
void write_svg(const ResultTable& table, std::ostream& out, const std::string& title = {});

/// Writes results.csv, results.svg and manifest.json into `output_dir`.
void emit_results(const ResultTable& table, const ExperimentSpec& spec, const std::filesystem::path& output_dir);

} // namespace rydmimo
