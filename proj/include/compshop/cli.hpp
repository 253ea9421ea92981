#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace compshop::cli {

// Bad flags, config values or paths. Maps to exit status 1.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kSchemaVersion = 1;
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitVerification = 2;

// Environment variable consulted for the output directory when --out-dir is not given.
inline constexpr const char* kOutDirEnv = "COMPSHOP_OUT_DIR";

struct RunConfig {
  std::string subcommand;
  std::string kernel = "entropy";
  std::optional<double> kappa;
  std::vector<double> kappa_grid;
  double omega = 0.25;
  double mu = 0.5;
  std::optional<double> lambda;  // pricing
  std::optional<double> q;       // pricing; selects the three-point game
  int resolution = 24;
  std::size_t grid = 1000;
  std::size_t draws = 1000000;
  std::optional<std::uint64_t> seed;
  std::string out_dir;  // empty: $COMPSHOP_OUT_DIR, then "."
  std::string stem;     // file stem; empty: the subcommand name
  bool serial = false;
};

const std::vector<std::string>& subcommands();

// "log:a:b:n" (n log-spaced points from a to b), "lin:a:b:n", or a comma-separated list.
// The result must be strictly monotone.
std::vector<double> parse_grid(const std::string& text);

// Fills the fields present in a JSON object. Keys use the long flag names with '-' or '_'.
void apply_config_file(const std::filesystem::path& path, RunConfig& cfg);

void validate(const RunConfig& cfg);

// Fixed 12-significant-digit rendering used for every CSV cell.
std::string format_number(double v);

// Writes to a sibling temporary file, then renames over the target.
void write_atomic(const std::filesystem::path& path, const std::string& content);

// Runs one subcommand; returns the exit status.
int run(const RunConfig& cfg, std::ostream& out);

// Parses argv (flags override --config), runs, and reports errors on stderr.
int main(int argc, char** argv);

}  // namespace compshop::cli
