#include "nhft_cli/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "nhft/errors.hpp"
#include "nhft/parallel.hpp"

namespace nhft::cli {

namespace {

class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

unsigned parse_unsigned(const std::string& s) {
  try {
    std::size_t used = 0;
    const long v = std::stol(s, &used);
    if (used != s.size() || v < 0) throw ConfigError("expected a non-negative integer, got '" + s + "'");
    return static_cast<unsigned>(v);
  } catch (const std::logic_error&) {
    throw ConfigError("expected a non-negative integer, got '" + s + "'");
  }
}

std::pair<unsigned, unsigned> parse_state(const std::string& s) {
  const auto parts = split(s, ',');
  if (parts.size() != 2) throw ConfigError("state must be 'n1,n2', got '" + s + "'");
  return {parse_unsigned(parts[0]), parse_unsigned(parts[1])};
}

// key=value lines -> "--key=value" tokens
std::vector<std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    tokens.push_back("--" + trim(t.substr(0, eq)) + "=" + trim(t.substr(eq + 1)));
  }
  return tokens;
}

}  // namespace

// --- RunConfig ----------------------------------------------------------------

void RunConfig::validate() const {
  if (!(lambda_min < lambda_max)) throw ConfigError("--lmin must be below --lmax");
  if (lambda_steps < 2) throw ConfigError("--steps must be at least 2");
  if (!(tol > 0.0) || !(residual_tol > 0.0) || !(exclusion >= 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (command == Command::Sweep || command == Command::Check || command == Command::EpScan) {
    (void)model_instance();
  }
  if (command == Command::Continuum || (command == Command::Figure && figure == Figure::Fig3)) {
    if (!(omega_x > 0.0) || !(omega_y > 0.0) || omega_x == omega_y) {
      throw ConfigError("--omega-x and --omega-y must be positive and distinct");
    }
  }
  if (command == Command::Virial && !(omega.real() > 0.0)) {
    throw ConfigError("--omega must have a positive real part");
  }
}

ModelInstance RunConfig::model_instance() const {
  ModelKind kind;
  try {
    kind = parse_model_kind(model);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  try {
    switch (kind) {
      case ModelKind::TwoLevel:
        if (sites != 0 && sites != 2) throw ConfigError("two-level model has L=2");
        return ModelInstance::two_level(lambda_min);
      case ModelKind::FourLevel:
        if (sites != 0 && sites != 4) throw ConfigError("four-level model has L=4");
        return ModelInstance::four_level(lambda_min);
      case ModelKind::LatticePT:
        return ModelInstance::lattice_pt(sites == 0 ? 8 : sites, lambda_min);
      case ModelKind::LatticeStaggered:
        return ModelInstance::lattice_staggered(sites == 0 ? 64 : sites, r, lambda_min);
    }
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  throw ConfigError("unknown model");
}

std::vector<double> RunConfig::grid() const {
  return linear_grid(lambda_min, lambda_max, lambda_steps);
}

// --- parsing --------------------------------------------------------------------

RunConfig parse_args(const std::vector<std::string>& raw) {
  // pull out --config and splice its contents right after the subcommand
  std::vector<std::string> args;
  std::vector<std::string> from_file;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const std::string& a = raw[i];
    if (a == "--config") {
      if (i + 1 >= raw.size()) throw ConfigError("--config needs a file name");
      from_file = read_config_file(raw[++i]);
    } else if (a.rfind("--config=", 0) == 0) {
      from_file = read_config_file(a.substr(9));
    } else {
      args.push_back(a);
    }
  }
  if (!args.empty() && !args[0].empty() && args[0][0] != '-') {
    args.insert(args.begin() + 1, from_file.begin(), from_file.end());
  } else if (!from_file.empty()) {
    throw ConfigError("a subcommand must come first when --config is used");
  }

  RunConfig cfg;
  CLI::App app{"Modified Hellmann-Feynman checks for non-Hermitian Hamiltonians", "nhft"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::string format = "csv";
  std::string omega_text = "1,0";
  std::string state_text = "0,0";
  std::string figure_text = "fig1";
  std::string sizes_text = "2,8,32";
  std::string states_text = "0,0;1,0;1,1;2,0";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-o,--output", cfg.output, "Output file (default: stdout)");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--tol", cfg.tol, "Eigensolver / pairing tolerance");
    sub->add_option("--residual-tol", cfg.residual_tol, "Residual above which samples are flagged");
    sub->add_option("--exclusion", cfg.exclusion, "Exclusion radius around critical couplings");
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--lmin", cfg.lambda_min, "Smallest lambda");
    sub->add_option("--lmax", cfg.lambda_max, "Largest lambda");
    sub->add_option("--steps", cfg.lambda_steps, "Number of grid points (>= 2)");
  };
  auto add_model = [&](CLI::App* sub) {
    sub->add_option("--model", cfg.model,
                    "two-level, four-level, lattice-pt or lattice-staggered");
    sub->add_option("--L", cfg.sites, "Lattice size (even)");
    sub->add_option("--r", cfg.r, "Staggered half-width r (1 <= r <= L/2)");
    sub->add_flag("--force-fd", cfg.force_fd, "Use finite differences even with a closed form");
  };

  auto* sweep_cmd = app.add_subcommand("sweep", "HFT sweep over a lambda grid, one row per (lambda, state)");
  add_common(sweep_cmd);
  add_grid(sweep_cmd);
  add_model(sweep_cmd);

  auto* check_cmd = app.add_subcommand("check", "Per-state summary: residuals, transitions, divergence fit");
  add_common(check_cmd);
  add_grid(check_cmd);
  add_model(check_cmd);

  auto* ep_cmd = app.add_subcommand("ep-scan", "Phase label and spectral diagnostics per lambda");
  add_common(ep_cmd);
  add_grid(ep_cmd);
  add_model(ep_cmd);

  auto* cont_cmd = app.add_subcommand("continuum", "2-d oscillator: quadrature LHS against closed-form dE/dlambda");
  add_common(cont_cmd);
  add_grid(cont_cmd);
  cont_cmd->add_option("--state", state_text, "Quantum numbers 'n1,n2'");
  cont_cmd->add_option("--omega-x", cfg.omega_x, "x frequency");
  cont_cmd->add_option("--omega-y", cfg.omega_y, "y frequency");

  auto* vir_cmd = app.add_subcommand("virial", "Trapping energy of the complex-frequency oscillator");
  add_common(vir_cmd);
  vir_cmd->add_option("--n", cfg.n, "Level n");
  vir_cmd->add_option("--omega", omega_text, "Complex frequency 're,im'");

  auto* fig_cmd = app.add_subcommand("figure", "Plot-ready series for fig1, fig2 or fig3");
  add_common(fig_cmd);
  add_grid(fig_cmd);
  fig_cmd->add_option("--which", figure_text, "fig1, fig2 or fig3")
      ->check(CLI::IsMember({"fig1", "fig2", "fig3"}));
  fig_cmd->add_option("--sizes", sizes_text, "fig1 lattice sizes, comma separated");
  fig_cmd->add_option("--L", cfg.sites, "fig2 lattice size");
  fig_cmd->add_option("--r", cfg.r, "fig2 staggered half-width");
  fig_cmd->add_option("--states", states_text, "fig3 states 'n1,n2;n1,n2;...'");
  fig_cmd->add_option("--omega-x", cfg.omega_x, "fig3 x frequency");
  fig_cmd->add_option("--omega-y", cfg.omega_y, "fig3 y frequency");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::CallForAllHelp&) {
    throw HelpRequested(app.help("", CLI::AppFormatMode::All));
  } catch (const CLI::ParseError& e) {
    throw ConfigError(e.what());
  }

  CLI::App* chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  auto given = [&](const std::string& opt) {
    const CLI::Option* o = chosen->get_option_no_throw(opt);
    return o != nullptr && o->count() > 0;
  };
  const bool excl_given = given("--exclusion");
  cfg.format = format == "json" ? Format::Json : Format::Csv;

  if (name == "sweep") cfg.command = Command::Sweep;
  if (name == "check") cfg.command = Command::Check;
  if (name == "ep-scan") cfg.command = Command::EpScan;
  if (name == "continuum") {
    cfg.command = Command::Continuum;
    const auto st = parse_state(state_text);
    cfg.n1 = st.first;
    cfg.n2 = st.second;
  }
  if (name == "virial") {
    cfg.command = Command::Virial;
    try {
      cfg.omega = parse_complex(omega_text);
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what());
    }
  }
  if (name == "figure") {
    cfg.command = Command::Figure;
    cfg.figure = figure_text == "fig1" ? Figure::Fig1 : figure_text == "fig2" ? Figure::Fig2 : Figure::Fig3;
    cfg.sizes.clear();
    for (const auto& s : split(sizes_text, ',')) cfg.sizes.push_back(static_cast<int>(parse_unsigned(s)));
    cfg.states.clear();
    for (const auto& s : split(states_text, ';')) cfg.states.push_back(parse_state(s));
    if (cfg.figure == Figure::Fig2) cfg.model = "lattice-staggered";
  }

  // command-specific defaults for anything not set explicitly
  const bool continuum_like =
      cfg.command == Command::Continuum || (cfg.command == Command::Figure && cfg.figure == Figure::Fig3);
  auto fill_grid = [&](double lo, double hi, std::size_t steps) {
    if (!given("--lmin")) cfg.lambda_min = lo;
    if (!given("--lmax")) cfg.lambda_max = hi;
    if (!given("--steps")) cfg.lambda_steps = steps;
  };
  if (continuum_like) {
    fill_grid(0.0, 8.0, 33);
  } else if (cfg.command == Command::Figure && cfg.figure == Figure::Fig2) {
    fill_grid(0.05, 0.8, 76);
  }
  if (!excl_given && continuum_like) cfg.exclusion = 1e-3;

  if (cfg.command != Command::Virial) cfg.validate();
  else if (!(cfg.omega.real() > 0.0)) throw ConfigError("--omega must have a positive real part");
  return cfg;
}

// --- running ------------------------------------------------------------------

namespace {

SweepOptions sweep_options(const RunConfig& cfg) {
  SweepOptions o;
  o.biortho.tol = cfg.tol;
  o.exclusion_radius = cfg.exclusion;
  o.residual_tol = cfg.residual_tol;
  o.force_fd = cfg.force_fd;
  return o;
}

ContinuumSweepOptions continuum_options(const RunConfig& cfg) {
  ContinuumSweepOptions o;
  o.omega_x = cfg.omega_x;
  o.omega_y = cfg.omega_y;
  o.exclusion_radius = cfg.exclusion;
  o.residual_tol = cfg.residual_tol;
  return o;
}

Table check_table(const SweepResult& sw) {
  std::vector<DivergenceEntry> div;
  try {
    div = divergence_report(sw);
  } catch (const InsufficientPoints&) {
    div.resize(sw.dim());
    for (std::size_t s = 0; s < sw.dim(); ++s) {
      div[s].state = s;
      div[s].status = DivergenceStatus::InsufficientPoints;
      div[s].lambda_star = sw.transitions[s];
    }
  }
  Table t;
  t.header = {"state",       "lambda_star", "status",       "exponent",       "fit_residual",
              "max_abs_f",   "max_residual", "flagged_samples"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t s = 0; s < sw.dim(); ++s) {
    double max_res = 0.0;
    long long flagged = 0;
    for (std::size_t g = 0; g < sw.grid.size(); ++g) {
      const HftSample& smp = sw.at(g, s);
      if (std::isfinite(smp.residual)) max_res = std::max(max_res, smp.residual);
      if (smp.flags != 0) ++flagged;
    }
    t.rows.push_back({static_cast<long long>(s), div[s].lambda_star.value_or(nan),
                      std::string(to_string(div[s].status)), div[s].exponent,
                      div[s].fit_residual, div[s].max_abs_f, max_res, flagged});
  }
  return t;
}

Table ep_scan_table(const RunConfig& cfg) {
  const ModelInstance model = cfg.model_instance();
  const auto grid = cfg.grid();
  Table t;
  t.header = {"lambda", "phase", "max_imag", "min_gap", "complex_count", "min_self_overlap"};
  t.rows.resize(grid.size());
  BiorthoOptions bo;
  bo.tol = cfg.tol;
  parallel_for(grid.size(), [&](std::size_t g) {
    const ComplexMatrix h = build(model.at(grid[g]));
    const double nan = std::numeric_limits<double>::quiet_NaN();
    try {
      const BiorthoSpectrum spec = pair_left_right(h, bo);
      const PhaseLabel ph = phase_classify(spec, default_reality_tol(h));
      t.rows[g] = {grid[g], std::string(to_string(ph.phase)), ph.max_imag, ph.min_gap,
                   static_cast<long long>(ph.complex_count), spec.min_self_overlap()};
    } catch (const Error&) {
      t.rows[g] = {grid[g], std::string("non-convergence"), nan, nan, 0LL, nan};
    }
  });
  return t;
}

Table virial_table(const RunConfig& cfg) {
  const VirialResult v = virial_check(cfg.n, cfg.omega);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const cplx q = v.quadrature_trapping_energy.value_or(cplx(nan, nan));
  Table t;
  t.header = {"n",        "re_omega", "im_omega", "re_E_tr",      "im_E_tr",     "re_E",
              "im_E",     "re_ratio", "im_ratio", "re_E_tr_quad", "im_E_tr_quad"};
  t.rows.push_back({static_cast<long long>(cfg.n), cfg.omega.real(), cfg.omega.imag(),
                    v.trapping_energy.real(), v.trapping_energy.imag(), v.energy.real(),
                    v.energy.imag(), v.ratio.real(), v.ratio.imag(), q.real(), q.imag()});
  return t;
}

void emit(const Table& t, Format f, std::ostream& out) {
  if (f == Format::Json) {
    write_json(t, out);
  } else {
    write_csv(t, out);
  }
}

void produce(const RunConfig& cfg, std::ostream& out) {
  switch (cfg.command) {
    case Command::Sweep: {
      const SweepResult sw = sweep(cfg.model_instance(), cfg.grid(), sweep_options(cfg));
      if (cfg.format == Format::Json) {
        out << sweep_to_json(sw) << '\n';
      } else {
        write_csv(sweep_table(sw), out);
      }
      return;
    }
    case Command::Check: {
      const SweepResult sw = sweep(cfg.model_instance(), cfg.grid(), sweep_options(cfg));
      emit(check_table(sw), cfg.format, out);
      return;
    }
    case Command::EpScan:
      emit(ep_scan_table(cfg), cfg.format, out);
      return;
    case Command::Continuum: {
      const auto rows = continuum_sweep(cfg.n1, cfg.n2, cfg.grid(), continuum_options(cfg));
      emit(continuum_table(cfg.n1, cfg.n2, rows), cfg.format, out);
      return;
    }
    case Command::Virial:
      emit(virial_table(cfg), cfg.format, out);
      return;
    case Command::Figure: {
      if (cfg.figure == Figure::Fig3) {
        std::vector<ContinuumSeries> series;
        for (const auto& [a, b] : cfg.states) {
          series.push_back({a, b, continuum_sweep(a, b, cfg.grid(), continuum_options(cfg))});
        }
        emit(figure_table(series), cfg.format, out);
        return;
      }
      std::vector<SweepResult> series;
      if (cfg.figure == Figure::Fig1) {
        for (int L : cfg.sizes) {
          ModelInstance m;
          try {
            m = ModelInstance::lattice_pt(L, cfg.lambda_min);
          } catch (const InvalidInput& e) {
            throw ConfigError(e.what());
          }
          series.push_back(sweep(m, cfg.grid(), sweep_options(cfg)));
        }
      } else {
        RunConfig c2 = cfg;
        c2.model = "lattice-staggered";
        series.push_back(sweep(c2.model_instance(), cfg.grid(), sweep_options(cfg)));
      }
      emit(figure_table(series, cfg.figure), cfg.format, out);
      return;
    }
  }
}

}  // namespace

void run(const RunConfig& cfg, std::ostream& out) {
  if (cfg.output.empty()) {
    produce(cfg, out);
    out.flush();
    if (!out) throw IoError("failed writing output");
    return;
  }
  std::ostringstream buffer;
  produce(cfg, buffer);
  std::ofstream file(cfg.output, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open output file '" + cfg.output + "'");
  file << buffer.str();
  file.flush();
  if (!file) throw IoError("failed writing output file '" + cfg.output + "'");
}

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = parse_args(args);
    run(cfg, out);
    return 0;
  } catch (const HelpRequested& h) {
    out << h.what();
    return 0;
  } catch (const ConfigError& e) {
    err << "nhft: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    err << "nhft: I/O error: " << e.what() << '\n';
    return 3;
  } catch (const DomainMismatch& e) {
    err << "nhft: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const InvalidInput& e) {
    err << "nhft: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const AtCriticalPoint& e) {
    err << "nhft: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const Error& e) {
    err << "nhft: error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace nhft::cli
