#pragma once

#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nhft/continuum.hpp"
#include "nhft/hft.hpp"

namespace nhft::cli {

enum class Command { Sweep, Check, Continuum, Virial, EpScan, Figure };
enum class Format { Csv, Json };
enum class Figure { Fig1, Fig2, Fig3 };

/// Exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exit code 3.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  Command command = Command::Sweep;

  // discrete models
  std::string model = "two-level";
  int sites = 0;  // 0 = model default
  int r = 2;
  bool force_fd = false;

  // continuum
  double omega_x = 1.0;
  double omega_y = 3.0;
  unsigned n1 = 0, n2 = 0;

  // 1-d oscillator
  unsigned n = 0;
  cplx omega{1.0, 0.0};

  // grid
  double lambda_min = 0.05;
  double lambda_max = 0.95;
  std::size_t lambda_steps = 19;

  // tolerances
  double tol = 1e-12;
  double residual_tol = 1e-6;
  double exclusion = 1e-4;

  // figure
  Figure figure = Figure::Fig1;
  std::vector<int> sizes{2, 8, 32};
  std::vector<std::pair<unsigned, unsigned>> states{{0, 0}, {1, 0}, {1, 1}, {2, 0}};

  std::string output;  // empty = stdout
  Format format = Format::Csv;

  /// ConfigError on inconsistent values.
  void validate() const;
  ModelInstance model_instance() const;
  std::vector<double> grid() const;
};

/// Parses a command line (without the program name). A `--config FILE` of
/// key=value lines is spliced in ahead of the command-line flags, so flags
/// win. ConfigError for bad input, IoError for an unreadable config file.
RunConfig parse_args(const std::vector<std::string>& args);

/// Executes the command and writes to `out` (or the configured file).
/// IoError when the output cannot be written.
void run(const RunConfig& config, std::ostream& out);

/// Full front end: parse, run, map errors to exit codes 0/2/3.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// --- output -------------------------------------------------------------------

using Cell = std::variant<double, long long, std::string>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

/// %.17g; "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double v);
/// "re,im" (or a bare real).
cplx parse_complex(std::string_view text);

void write_csv(const Table& t, std::ostream& out);
/// Array of row objects; non-finite numbers become null.
void write_json(const Table& t, std::ostream& out);

/// lambda,state,re_E,im_E,re_lhs,im_lhs,re_rhs,im_rhs,abs_residual,phase,flags
const std::vector<std::string>& sample_header();
Table sweep_table(const SweepResult& sweep);
Table continuum_table(unsigned n1, unsigned n2, std::span<const ContinuumSample> samples);

/// Lossless JSON form of a sweep (17 significant digits, NaN as null).
std::string sweep_to_json(const SweepResult& sweep);
SweepResult sweep_from_json(std::string_view json);

struct ContinuumSeries {
  unsigned n1 = 0, n2 = 0;
  std::vector<ContinuumSample> samples;
};

/// fig1: one series per lattice size, the branch with the largest |f| at the
/// end of the grid. fig2: every state of a staggered sweep plus Im E.
/// DomainMismatch when the sweeps do not match the figure.
Table figure_table(std::span<const SweepResult> series, Figure which);
/// fig3: continuum series; excluded points appear as rows of NaN (gaps).
Table figure_table(std::span<const ContinuumSeries> series);

}  // namespace nhft::cli
