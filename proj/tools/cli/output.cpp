#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "nhft/errors.hpp"
#include "nhft_cli/cli.hpp"

namespace nhft::cli {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string state_label(unsigned n1, unsigned n2) {
  return std::to_string(n1) + ":" + std::to_string(n2);
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }
double number_from(const json& j) { return j.is_null() ? kNaN : j.get<double>(); }
json complex_pair(cplx z) { return json::array({number(z.real()), number(z.imag())}); }
cplx complex_from(const json& j) { return {number_from(j.at(0)), number_from(j.at(1))}; }

Phase phase_from(const std::string& s) {
  if (s == "unbroken") return Phase::Unbroken;
  if (s == "broken") return Phase::Broken;
  if (s == "near-ep") return Phase::NearEP;
  throw InvalidInput("unknown phase '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

cplx parse_complex(std::string_view text) {
  const std::string s(text);
  const auto comma = s.find(',');
  try {
    std::size_t used = 0;
    if (comma == std::string::npos) {
      const double re = std::stod(s, &used);
      if (used != s.size()) throw InvalidInput("");
      return {re, 0.0};
    }
    const std::string a = s.substr(0, comma), b = s.substr(comma + 1);
    const double re = std::stod(a, &used);
    if (used != a.size()) throw InvalidInput("");
    const double im = std::stod(b, &used);
    if (used != b.size()) throw InvalidInput("");
    return {re, im};
  } catch (const std::exception&) {
    throw InvalidInput("expected a complex number 're,im', got '" + s + "'");
  }
}

void write_csv(const Table& t, std::ostream& out) {
  for (std::size_t c = 0; c < t.header.size(); ++c) out << (c ? "," : "") << t.header[c];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out << ',';
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              out << format_double(v);
            } else {
              out << v;
            }
          },
          row[c]);
    }
    out << '\n';
  }
}

void write_json(const Table& t, std::ostream& out) {
  json arr = json::array();
  for (const auto& row : t.rows) {
    json obj = json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
              obj[t.header[c]] = number(v);
            } else {
              obj[t.header[c]] = v;
            }
          },
          row[c]);
    }
    arr.push_back(std::move(obj));
  }
  out << arr.dump(2) << '\n';
}

const std::vector<std::string>& sample_header() {
  static const std::vector<std::string> h = {"lambda", "state",  "re_E",   "im_E",
                                             "re_lhs", "im_lhs", "re_rhs", "im_rhs",
                                             "abs_residual", "phase", "flags"};
  return h;
}

Table sweep_table(const SweepResult& sw) {
  Table t;
  t.header = sample_header();
  for (const HftSample& s : sw.samples) {
    t.rows.push_back({s.lambda, static_cast<long long>(s.state), s.energy.real(), s.energy.imag(),
                      s.lhs.real(), s.lhs.imag(), s.rhs.real(), s.rhs.imag(), s.residual,
                      std::string(to_string(s.phase.phase)), flags_to_string(s.flags)});
  }
  return t;
}

Table continuum_table(unsigned n1, unsigned n2, std::span<const ContinuumSample> samples) {
  Table t;
  t.header = sample_header();
  for (const ContinuumSample& s : samples) {
    t.rows.push_back({s.lambda, state_label(n1, n2), s.energy.real(), s.energy.imag(),
                      s.lhs.real(), s.lhs.imag(), s.rhs.real(), s.rhs.imag(), s.residual,
                      std::string(to_string(s.phase)), flags_to_string(s.flags)});
  }
  return t;
}

std::string sweep_to_json(const SweepResult& sw) {
  json j;
  j["model"] = {{"kind", std::string(to_string(sw.model.kind))},
                {"sites", sw.model.sites},
                {"r", sw.model.r},
                {"lambda", sw.model.lambda}};
  j["grid"] = sw.grid;
  json tr = json::array();
  for (const auto& t : sw.transitions) tr.push_back(t ? json(*t) : json(nullptr));
  j["transitions"] = tr;
  j["tracking_permutations"] = sw.tracking_permutations;
  j["branch"] = sw.branch;
  json samples = json::array();
  for (const HftSample& s : sw.samples) {
    samples.push_back({{"lambda", s.lambda},
                       {"state", s.state},
                       {"energy", complex_pair(s.energy)},
                       {"lhs", complex_pair(s.lhs)},
                       {"rhs", complex_pair(s.rhs)},
                       {"residual", number(s.residual)},
                       {"rhs_error", number(s.rhs_error)},
                       {"phase",
                        {{"label", to_string(s.phase.phase)},
                         {"max_imag", number(s.phase.max_imag)},
                         {"min_gap", number(s.phase.min_gap)},
                         {"complex_count", s.phase.complex_count}}},
                       {"imag_E", number(s.imag_E)},
                       {"flags", flags_to_string(s.flags)}});
  }
  j["samples"] = std::move(samples);
  return j.dump();
}

SweepResult sweep_from_json(std::string_view text) {
  const json j = json::parse(text);
  SweepResult sw;
  const json& m = j.at("model");
  sw.model.kind = parse_model_kind(m.at("kind").get<std::string>());
  sw.model.sites = m.at("sites").get<int>();
  sw.model.r = m.at("r").get<int>();
  sw.model.lambda = m.at("lambda").get<double>();
  sw.grid = j.at("grid").get<std::vector<double>>();
  for (const json& t : j.at("transitions")) {
    sw.transitions.push_back(t.is_null() ? std::nullopt : std::optional<double>(t.get<double>()));
  }
  sw.tracking_permutations = j.at("tracking_permutations").get<std::vector<std::vector<std::size_t>>>();
  sw.branch = j.at("branch").get<std::vector<std::vector<std::size_t>>>();
  for (const json& s : j.at("samples")) {
    HftSample h;
    h.lambda = s.at("lambda").get<double>();
    h.state = s.at("state").get<std::size_t>();
    h.energy = complex_from(s.at("energy"));
    h.lhs = complex_from(s.at("lhs"));
    h.rhs = complex_from(s.at("rhs"));
    h.residual = number_from(s.at("residual"));
    h.rhs_error = number_from(s.at("rhs_error"));
    const json& p = s.at("phase");
    h.phase.phase = phase_from(p.at("label").get<std::string>());
    h.phase.max_imag = number_from(p.at("max_imag"));
    h.phase.min_gap = number_from(p.at("min_gap"));
    h.phase.complex_count = p.at("complex_count").get<std::size_t>();
    h.imag_E = number_from(s.at("imag_E"));
    h.flags = flags_from_string(s.at("flags").get<std::string>());
    sw.samples.push_back(h);
  }
  return sw;
}

Table figure_table(std::span<const SweepResult> series, Figure which) {
  if (which == Figure::Fig3) throw DomainMismatch("fig3 is built from continuum series");
  Table t;
  if (which == Figure::Fig1) {
    t.header = {"series", "lambda", "state", "abs_lhs", "abs_rhs", "im_E", "flags"};
    for (const SweepResult& sw : series) {
      if (sw.model.kind != ModelKind::LatticePT && sw.model.kind != ModelKind::TwoLevel)
        throw DomainMismatch("fig1 needs gain/loss lattice sweeps");
      if (sw.grid.empty() || sw.grid.front() < 0.0 || sw.grid.back() >= 1.0)
        throw DomainMismatch("fig1 covers 0 <= lambda < 1");
      // the branch that grows fastest toward the exceptional point
      const std::size_t last = sw.grid.size() - 1;
      std::size_t pick = 0;
      for (std::size_t s = 1; s < sw.dim(); ++s)
        if (sw.at(last, s).f() > sw.at(last, pick).f()) pick = s;
      const std::string label = "L=" + std::to_string(sw.model.sites);
      for (std::size_t g = 0; g < sw.grid.size(); ++g) {
        const HftSample& s = sw.at(g, pick);
        t.rows.push_back({label, s.lambda, static_cast<long long>(pick), std::abs(s.lhs),
                          std::abs(s.rhs), s.imag_E, flags_to_string(s.flags)});
      }
    }
    return t;
  }
  t.header = {"series", "lambda", "state", "abs_lhs", "abs_rhs", "im_E", "flags"};
  for (const SweepResult& sw : series) {
    if (sw.model.kind != ModelKind::LatticeStaggered)
      throw DomainMismatch("fig2 needs a staggered lattice sweep");
    if (sw.grid.empty() || sw.grid.front() < 0.0 || sw.grid.back() > 0.8 + 1e-12)
      throw DomainMismatch("fig2 covers 0 <= lambda <= 0.8");
    for (std::size_t s = 0; s < sw.dim(); ++s) {
      const std::string label = "state=" + std::to_string(s);
      for (std::size_t g = 0; g < sw.grid.size(); ++g) {
        const HftSample& smp = sw.at(g, s);
        t.rows.push_back({label, smp.lambda, static_cast<long long>(s), std::abs(smp.lhs),
                          std::abs(smp.rhs), smp.imag_E, flags_to_string(smp.flags)});
      }
    }
  }
  return t;
}

Table figure_table(std::span<const ContinuumSeries> series) {
  Table t;
  t.header = {"series", "lambda", "abs_lhs", "abs_rhs", "re_lhs", "im_lhs",
              "re_rhs", "im_rhs", "flags"};
  for (const ContinuumSeries& cs : series) {
    const std::string label = state_label(cs.n1, cs.n2);
    for (const ContinuumSample& s : cs.samples) {
      t.rows.push_back({label, s.lambda, std::abs(s.lhs), std::abs(s.rhs), s.lhs.real(),
                        s.lhs.imag(), s.rhs.real(), s.rhs.imag(), flags_to_string(s.flags)});
    }
  }
  return t;
}

}  // namespace nhft::cli
