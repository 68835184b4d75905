#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "horizon/errors.hpp"
#include "horizon/market_model.hpp"
#include "horizon/mc_validator.hpp"

namespace horizon::cli {

/// Malformed command line or configuration file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct YGridSpec {
  std::optional<double> max;  // defaults to 1.5 b_star of the matching perpetual problem
  int n = 101;
};

struct RunConfig {
  std::string command;
  ModelParams params;
  int grid_n = 100;
  YGridSpec y_grid;
  mc::McConfig mc{20000, 1000, 20240607, 1};
  std::filesystem::path output_dir = ".";
  std::optional<double> t, y;
};

inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitNumerical = 4;

/// Reads model, grid and Monte Carlo settings. T may be a number, "inf" or absent.
RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

std::vector<double> make_y_grid(double max, int n);

/// Executes cfg.command, writes files into cfg.output_dir and a JSON summary to out.
void run(const RunConfig& cfg, std::ostream& out);

/// Full entry point: parses argv, runs, maps exceptions to exit codes and
/// writes {"error": kind, "message": text} to err on failure.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace horizon::cli
