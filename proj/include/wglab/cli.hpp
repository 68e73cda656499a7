#pragma once

// Batch driver: every subcommand maps a flat key=value configuration onto
// library calls and returns one envelope per logical result.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "wglab/analytic.hpp"
#include "wglab/enumeration.hpp"
#include "wglab/local.hpp"
#include "wglab/sieve.hpp"

namespace wglab::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum class Format { Jsonl, Csv };

struct RunConfig {
  std::string cmd;
  std::map<std::string, std::string> values;     // flag name -> text as given
  std::map<std::string, long double> overrides;  // ScaleParams keys
  u64 seed = 1;
  Format format = Format::Jsonl;
  std::string out;
  bool timing = true;
};

struct ResultEnvelope {
  std::string cmd;
  json inputs = json::object();
  json outputs = json::object();
  u64 seed = 1;
  std::string version = kVersion;
  double ms = 0;

  bool operator==(const ResultEnvelope&) const = default;
};

inline json to_json(const ResultEnvelope& e) {
  return json{{"cmd", e.cmd},
              {"inputs", e.inputs},
              {"outputs", e.outputs},
              {"seed", e.seed},
              {"version", e.version},
              {"ms", e.ms}};
}

inline ResultEnvelope from_json(const json& j) {
  ResultEnvelope e;
  e.cmd = j.at("cmd").get<std::string>();
  e.inputs = j.at("inputs");
  e.outputs = j.at("outputs");
  e.seed = j.at("seed").get<u64>();
  e.version = j.at("version").get<std::string>();
  e.ms = j.at("ms").get<double>();
  return e;
}

inline ResultEnvelope parse_line(const std::string& line) { return from_json(json::parse(line)); }

// ---------------------------------------------------------------------------
// Configuration

inline const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> k{"N",     "lo",     "hi",      "r",    "p",    "d",   "D",
                                          "z",     "cutoff", "method",  "step", "samples", "seed",
                                          "mode",  "format", "out",     "paper-constants",
                                          "kind",  "q",      "a",       "beta", "no-timing"};
  return k;
}

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> c{"reps",   "verify-range", "local",   "sseries", "omega", "crconst",
                                          "sieve-check", "margin",  "moments", "jint",    "arcs",  "residuals"};
  return c;
}

/// Flat key=value text; '#' starts a comment, blank lines are skipped.
inline std::map<std::string, std::string> read_param_text(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ValidationError("param file line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    kv[key] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline std::map<std::string, std::string> read_param_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open param file " + path);
  return read_param_text(in);
}

/// Sorts a flat map into flags, ScaleParams overrides, seed, format and output.
inline RunConfig make_config(const std::string& cmd, const std::map<std::string, std::string>& kv) {
  RunConfig c;
  c.cmd = cmd;
  if (std::find(subcommands().begin(), subcommands().end(), cmd) == subcommands().end()) {
    throw ValidationError("unknown subcommand '" + cmd + "'");
  }
  const auto& flags = known_keys();
  const auto& pkeys = ScaleParams::keys();
  for (const auto& [k, v] : kv) {
    const bool is_flag = std::find(flags.begin(), flags.end(), k) != flags.end();
    const bool is_param = std::find(pkeys.begin(), pkeys.end(), k) != pkeys.end();
    if (!is_flag && !is_param) throw ValidationError("unknown key '" + k + "'");
    if (k == "seed") {
      try {
        std::size_t pos = 0;
        if (v.empty() || v[0] == '-') throw std::invalid_argument(v);
        c.seed = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw ValidationError("seed must be a non-negative integer");
      }
    } else if (k == "format") {
      if (v == "jsonl") c.format = Format::Jsonl;
      else if (v == "csv") c.format = Format::Csv;
      else throw ValidationError("format must be jsonl or csv");
    } else if (k == "out") {
      c.out = v;
    } else if (k == "no-timing") {
      c.timing = v == "false" || v == "0";
    } else if (is_flag) {
      c.values[k] = v;
    } else {
      try {
        c.overrides[k] = std::stold(v);
      } catch (const std::exception&) {
        throw ValidationError("parameter " + k + " must be numeric");
      }
    }
  }
  // D and z double as sieve arguments and as ScaleParams cutoffs.
  for (const char* k : {"D", "z"}) {
    if (auto it = c.values.find(k); it != c.values.end() && !c.overrides.count(k)) {
      try {
        c.overrides[k] = std::stold(it->second);
      } catch (const std::exception&) {
        throw ValidationError(std::string(k) + " must be numeric");
      }
    }
  }
  return c;
}

namespace detail {

class Args {
 public:
  explicit Args(const RunConfig& c) : c_(c) {}

  bool has(const std::string& k) const { return c_.values.count(k) != 0; }

  u64 u(const std::string& k) const {
    const std::string& v = get(k);
    try {
      std::size_t pos = 0;
      // 1e8 style input is accepted when it is an exact integer
      if (v.find_first_of(".eE") != std::string::npos) {
        const long double x = std::stold(v, &pos);
        if (pos != v.size() || x < 0 || x != std::floor(x) || x > 1.8e19L) throw std::invalid_argument(v);
        return static_cast<u64>(x);
      }
      if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
      const u64 x = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ValidationError("--" + k + " must be a non-negative integer, got '" + v + "'");
    }
  }
  u64 u(const std::string& k, u64 fallback) const { return has(k) ? u(k) : fallback; }

  i64 i(const std::string& k, i64 fallback) const {
    if (!has(k)) return fallback;
    const std::string& v = get(k);
    try {
      std::size_t pos = 0;
      const i64 x = std::stoll(v, &pos);
      if (pos != v.size()) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ValidationError("--" + k + " must be an integer, got '" + v + "'");
    }
  }

  long double real(const std::string& k) const {
    const std::string& v = get(k);
    try {
      std::size_t pos = 0;
      // a/b is accepted so steps like 1/400 are exact in intent
      if (const auto slash = v.find('/'); slash != std::string::npos) {
        const long double a = std::stold(v.substr(0, slash), &pos);
        std::size_t pos2 = 0;
        const long double b = std::stold(v.substr(slash + 1), &pos2);
        if (pos != slash || pos2 != v.size() - slash - 1 || b == 0) throw std::invalid_argument(v);
        return a / b;
      }
      const long double x = std::stold(v, &pos);
      if (pos != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
      return x;
    } catch (const std::exception&) {
      throw ValidationError("--" + k + " must be a number, got '" + v + "'");
    }
  }
  long double real(const std::string& k, long double fallback) const { return has(k) ? real(k) : fallback; }

  std::string str(const std::string& k, const std::string& fallback) const { return has(k) ? get(k) : fallback; }

  bool flag(const std::string& k) const { return has(k) && get(k) != "false" && get(k) != "0"; }

  const std::string& get(const std::string& k) const {
    const auto it = c_.values.find(k);
    if (it == c_.values.end()) throw ValidationError("--" + k + " is required for " + c_.cmd);
    return it->second;
  }

 private:
  const RunConfig& c_;
};

inline json num(long double v) {
  if (!std::isfinite(v)) return nullptr;
  return static_cast<double>(v);
}

inline json big(const BigInt& v) {
  if (v >= 0 && v <= std::numeric_limits<u64>::max()) return static_cast<u64>(v);
  return v.str();
}

inline std::string rational_text(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

inline json inputs_echo(const RunConfig& c) {
  json in = json::object();
  for (const auto& [k, v] : c.values) {
    // echo numbers as numbers when the text is one
    try {
      std::size_t pos = 0;
      if (v.find_first_not_of("0123456789") == std::string::npos && !v.empty()) {
        const u64 x = std::stoull(v, &pos);
        if (pos == v.size()) {
          in[k] = x;
          continue;
        }
      }
    } catch (const std::exception&) {
    }
    in[k] = v;
  }
  for (const auto& [k, v] : c.overrides) in["param." + k] = static_cast<double>(v);
  return in;
}

inline ScaleParams params_for(const RunConfig& c, u64 N) {
  ScaleParams p = ScaleParams::desk(N);
  for (const auto& [k, v] : c.overrides) p.set(k, v);
  p.validate();
  return p;
}

inline RepMode rep_mode(const Args& a) {
  const std::string m = a.str("mode", "unrestricted");
  if (m == "unrestricted") return RepMode::Unrestricted;
  if (m == "paper-range") return RepMode::PaperRange;
  throw ValidationError("--mode must be unrestricted or paper-range");
}

inline int r_value(const Args& a, int fallback) {
  const i64 r = a.i("r", fallback);
  if (r < 0 || r > 64) throw ValidationError("--r must lie in [0, 64]");
  return static_cast<int>(r);
}

using Emit = std::function<void(json outputs)>;

// ---------------------------------------------------------------------------
// Subcommands

inline void cmd_reps(const RunConfig& c, const Args& a, const Emit& emit) {
  const u64 N = a.u("N");
  const RepMode mode = rep_mode(a);
  const int r = r_value(a, 64);
  const auto recs = mode == RepMode::PaperRange ? find_representations(params_for(c, N), r)
                                                : find_representations(N, mode, r);
  json list = json::array();
  u64 ordered = 0;
  for (const auto& rec : recs) {
    list.push_back({{"x", rec.x}, {"primes", rec.primes}, {"omega_x", rec.omega_x}});
    ordered += ordered_multiplicity(rec);
  }
  emit({{"N", N},
        {"mode", mode == RepMode::PaperRange ? "paper-range" : "unrestricted"},
        {"count", recs.size()},
        {"ordered_count", ordered},
        {"records", list}});
}

inline void cmd_verify_range(const RunConfig&, const Args& a, const Emit& emit) {
  const u64 lo = a.u("lo"), hi = a.u("hi");
  const int r = r_value(a, 6);
  json failures = json::array();
  u64 checked = 0;
  if (lo <= hi) {
    if (lo % 2 != 0 || hi % 2 != 0) throw ValidationError("verify-range: lo and hi must be even");
    if (hi > kMaxRepresentationN) throw CapacityError("verify-range: hi above 1e10");
    const RepresentationSearch search(hi);
    for (u64 N = lo; N <= hi; N += 2) {
      const u64 x = search.first_x(N, r);
      ++checked;
      if (x == 0) failures.push_back(N);
      emit({{"N", N}, {"r", r}, {"represented", x != 0}, {"x", x}});
    }
  }
  emit({{"summary", true}, {"lo", lo}, {"hi", hi}, {"r", r}, {"checked", checked}, {"failures", failures}});
}

inline void cmd_local(const RunConfig&, const Args& a, const Emit& emit) {
  const u64 p = a.u("p");
  const i64 N = a.i("N", 0);
  const u64 d = a.u("d", 1);
  if (p < 2) throw ValidationError("--p must be >= 2");
  const bool prime = is_prime(p);
  const u64 q = p == 3 ? 9 : p;
  const CongruenceCounts cc = prime && d == 1 && p != 3 ? prime_congruence_counts(p, N) : congruence_counts(q, N, d);
  json out{{"p", p}, {"q", q}, {"N", N}, {"N_mod_q", cc.N_mod}, {"d", d}, {"K", big(cc.K)}, {"L", big(cc.L)}};
  if (prime && d == 1 && cc.L != 0) {
    const BigInt scaled = BigInt(q) * cc.K;
    out["omega"] = scaled.str() + "/" + cc.L.str();
    const Rational w(scaled, cc.L);
    out["omega_reduced"] = rational_text(w);
    out["omega_value"] = num(to_long_double(w));
    out["L_exceeds_K"] = p == 3 ? cc.L > 3 * cc.K : cc.L > cc.K;
  }
  if (prime && p >= 5 && d == 1) {
    // B(p, N) = p L - p (p-1)^5 and B_p(p, N) = p^2 K - p (p-1)^5
    const BigInt base = BigInt(p) * boost::multiprecision::pow(BigInt(p - 1), 5);
    const LocalData B = local_factor(p, N);
    const LocalData Bp = local_factor(p, N, p);
    const BigInt want = BigInt(p) * cc.L - base;
    const BigInt want_p = BigInt(p) * BigInt(p) * cc.K - base;
    const long double gap = std::fabs(B.B_real - static_cast<long double>(want));
    const long double gap_p = std::fabs(Bp.B_real - static_cast<long double>(want_p));
    out["B"] = big(B.B);
    out["B_p"] = big(Bp.B);
    out["identity_gap"] = num(gap);
    out["identity_gap_p"] = num(gap_p);
    if (B.B != want || Bp.B != want_p || !(gap < 1e-6L) || !(gap_p < 1e-6L)) {
      emit(out);
      throw PropertyFailure("local: complete-sum identity failed at p=" + std::to_string(p));
    }
  }
  emit(out);
}

inline void cmd_sseries(const RunConfig&, const Args& a, const Emit& emit) {
  const i64 N = a.i("N", 0);
  if (!a.has("N")) throw ValidationError("--N is required for sseries");
  const u64 d = a.u("d", 1);
  const u64 cutoff = a.u("cutoff", 1000);
  const SingularSeriesValue s = singular_series(N, d, cutoff);
  emit({{"N", N},
        {"d", d},
        {"cutoff", cutoff},
        {"value", num(s.value)},
        {"tail_estimate", num(s.tail_estimate)},
        {"dual_cutoff", s.dual_cutoff},
        {"product_at_dual", num(s.product_at_dual)},
        {"direct_sum", num(s.direct_sum)},
        {"relative_gap", num(s.relative_gap)},
        {"direct_terms", s.direct_terms}});
}

inline void cmd_omega(const RunConfig&, const Args& a, const Emit& emit) {
  const i64 N = a.i("N", 0);
  if (!a.has("N")) throw ValidationError("--N is required for omega");
  if (a.has("p") == a.has("d")) throw ValidationError("omega: give exactly one of --p or --d");
  json out{{"N", N}};
  Rational w;
  if (a.has("p")) {
    const u64 p = a.u("p");
    w = omega_density(p, N).value;
    const long double v = to_long_double(w);
    out["p"] = p;
    out["scaled_deviation"] = num(std::fabs(v - 1) * static_cast<long double>(p));
    out["in_range"] = w >= 0 && w < Rational(p);
  } else {
    const u64 d = a.u("d");
    w = omega_density_squarefree(d, N).value;
    out["d"] = d;
  }
  out["omega"] = rational_text(w);
  out["omega_value"] = num(to_long_double(w));
  emit(out);
}

inline CrMethod cr_method(const Args& a) {
  const std::string m = a.str("method", "grid");
  if (m == "grid") return CrMethod::Grid;
  if (m == "mc") return CrMethod::MonteCarlo;
  throw ValidationError("--method must be grid or mc");
}

inline json cr_row(const CrConstant& c) {
  const long double cap = paper_cr_bound(c.r) * 1.01L;
  return {{"r", c.r},
          {"method", to_string(c.method)},
          {"value", num(c.value)},
          {"error_estimate", num(c.error_estimate)},
          {"grid_step", num(c.grid_step)},
          {"samples", c.samples},
          {"outer_limit", num(c.outer_limit)},
          {"printed_bound", num(paper_cr_bound(c.r))},
          {"within_cap", c.value <= cap}};
}

inline void cmd_crconst(const RunConfig& c, const Args& a, const Emit& emit) {
  const CrMethod method = cr_method(a);
  const long double step = a.real("step", 1.0L / 400);
  const u64 samples = a.u("samples", 20'000'000);
  std::vector<int> rs;
  if (a.has("r")) {
    const int r = r_value(a, kCrMin);
    if (r < kCrMin || r > kCrMax) throw ValidationError("--r must lie in [7, 36]");
    rs.push_back(r);
  } else {
    for (int r = kCrMin; r <= kCrMax; ++r) rs.push_back(r);
  }
  if (method == CrMethod::Grid) {
    CrGridOptions opt;
    opt.step = step;
    const auto table = cr_table_grid(opt);
    for (int r : rs) emit(cr_row(table[r - kCrMin]));
    return;
  }
  for (int r : rs) {
    CrMonteCarloOptions opt;
    opt.samples = samples;
    opt.seed = c.seed;
    emit(cr_row(c_r_monte_carlo(r, opt)));
  }
}

inline void cmd_sieve_check(const RunConfig&, const Args& a, const Emit& emit) {
  const long double z = a.real("z", 30);
  const long double D = a.real("D", 1000);
  const u64 m_max = a.u("hi", 100'000);
  const SandwichReport rep = sandwich_verify(m_max, z, D, false);
  json bad = json::array();
  for (std::size_t i = 0; i < rep.violations.size() && i < 20; ++i) {
    const auto& v = rep.violations[i];
    bad.push_back({{"m", v.m}, {"lower", v.lower}, {"indicator", v.indicator}, {"upper", v.upper}});
  }
  emit({{"check", "sandwich"},
        {"z", num(z)},
        {"D", num(D)},
        {"m_max", m_max},
        {"checked", rep.checked},
        {"violations", rep.violations.size()},
        {"first_violations", bad}});
  const SieveComparison cmp = sieve_compare(D, z, [](u64) { return Rational(1); });
  emit({{"check", "lower-sieve"},
        {"z", num(z)},
        {"D", num(D)},
        {"s", num(cmp.s)},
        {"V", num(cmp.V)},
        {"lower", num(cmp.lower.value)},
        {"upper", num(cmp.upper.value)},
        {"lower_support", cmp.lower.support_size},
        {"upper_support", cmp.upper.support_size},
        {"lower_ratio", num(cmp.lower_ratio)},
        {"upper_ratio", num(cmp.upper_ratio)}});
  if (!rep.violations.empty()) {
    throw PropertyFailure("sieve-check: " + std::to_string(rep.violations.size()) + " sandwich violations");
  }
}

inline void cmd_margin(const RunConfig&, const Args& a, const Emit& emit) {
  if (a.flag("paper-constants")) {
    const Margin m = theorem_margin(paper_cr_constants());
    emit({{"source", "printed"}, {"raw_margin", num(m.raw)}, {"scaled_margin", num(m.scaled)}});
    return;
  }
  CrGridOptions opt;
  opt.step = a.real("step", 1.0L / 400);
  const auto table = cr_table_grid(opt);
  const Margin m = theorem_margin(table);
  CompensatedSum s;
  for (const auto& c : table) s.add(c.value);
  emit({{"source", "computed"},
        {"sum_c", num(s.value())},
        {"raw_margin", num(m.raw)},
        {"scaled_margin", num(m.scaled)}});
  if (!(m.raw > 0)) throw PropertyFailure("margin: computed raw margin is not positive");
}

inline MomentKind moment_kind(const Args& a) {
  const std::string k = a.str("kind", "i");
  if (k == "i") return MomentKind::I;
  if (k == "ii") return MomentKind::II;
  if (k == "iii") return MomentKind::III;
  if (k == "iv") return MomentKind::IV;
  throw ValidationError("--kind must be one of i, ii, iii, iv");
}

inline void cmd_moments(const RunConfig&, const Args& a, const Emit& emit) {
  const u64 X = a.u("N");
  const MomentCount m = moment_count(moment_kind(a), X);
  const bool ok = m.count >= m.diagonal * (1 - 1e-12L);
  emit({{"X", X},
        {"kind", to_string(m.kind)},
        {"count", num(m.count)},
        {"diagonal", num(m.diagonal)},
        {"solutions", m.solutions},
        {"table_size", m.table_size},
        {"max_weight", num(m.max_weight)},
        {"count_ge_diagonal", ok}});
  if (!ok) throw PropertyFailure("moments: count below the diagonal");
}

inline void cmd_jint(const RunConfig& c, const Args& a, const Emit& emit) {
  const u64 N = a.u("N");
  const ScaleParams p = params_for(c, N);
  SingularIntegralOptions opt;
  opt.samples = a.u("samples", opt.samples);
  opt.seed = c.seed;
  const std::string method = a.str("method", "both");
  const long double scale = std::pow(static_cast<long double>(N), 19.0L / 18.0L);
  auto row = [&](const SingularIntegralValue& v) {
    return json{{"method", v.method == JMethod::Grid ? "grid" : "mc"},
                {"value", num(v.value)},
                {"error_estimate", num(v.error_estimate)},
                {"evaluations", v.evaluations},
                {"scaled", num(v.value / scale)}};
  };
  if (method == "grid" || method == "mc") {
    json out = row(singular_integral_J(p, method == "grid" ? JMethod::Grid : JMethod::MonteCarlo, opt));
    out["N"] = N;
    emit(out);
    return;
  }
  if (method != "both") throw ValidationError("--method must be grid, mc or both");
  const SingularIntegralValue g = singular_integral_J(p, JMethod::Grid, opt);
  const SingularIntegralValue m = singular_integral_J(p, JMethod::MonteCarlo, opt);
  const long double gap = std::fabs(g.value - m.value) / std::fabs(g.value);
  emit({{"N", N}, {"grid", row(g)}, {"mc", row(m)}, {"relative_gap", num(gap)}, {"agreement", num(opt.agreement)}});
  if (!(gap < opt.agreement)) throw PropertyFailure("jint: grid and Monte Carlo disagree");
}

inline void cmd_arcs(const RunConfig& c, const Args& a, const Emit& emit) {
  const u64 N = a.u("N");
  const ArcDissection d = farey_dissection(params_for(c, N));
  json labels = json::object();
  for (ArcLabel l : {ArcLabel::Major0, ArcLabel::Minor0, ArcLabel::Minor1, ArcLabel::Minor2}) {
    u64 n = 0;
    for (const auto& arc : d.arcs) n += arc.label == l;
    const Rational m = d.measure(l);
    labels[to_string(l)] = {{"pieces", n}, {"measure", rational_text(m)}, {"measure_value", num(to_long_double(m))}};
  }
  const Rational total = d.total_measure();
  const bool partition = d.is_partition();
  emit({{"N", N},
        {"q_major", d.bounds.q_major},
        {"q_minor", d.bounds.q_minor},
        {"pieces", d.arcs.size()},
        {"labels", labels},
        {"total_measure", rational_text(total)},
        {"is_partition", partition}});
  if (!partition || total != 1) throw PropertyFailure("arcs: labelled arcs do not partition the unit interval");
}

inline void cmd_residuals(const RunConfig& c, const Args& a, const Emit& emit) {
  const u64 N = a.u("N");
  const u64 q = a.u("q", 1);
  const i64 av = a.i("a", q == 1 ? 0 : 1);
  const long double beta = a.real("beta", 0);
  const ScaleParams p = params_for(c, N);
  const MajorArcForms m = major_arc_forms(q, av, beta, p);
  const long double f3 = std::abs(m.f3);
  emit({{"N", N},
        {"q", q},
        {"a", av},
        {"beta", num(beta)},
        {"abs_f3", num(f3)},
        {"abs_V2", num(std::abs(m.V2))},
        {"abs_V3", num(std::abs(m.V3))},
        {"abs_W3", num(std::abs(m.W3))},
        {"abs_W", num(std::abs(m.W))},
        {"abs_Delta3", num(std::abs(m.Delta3))},
        {"Delta3_over_f3", num(f3 > 0 ? std::abs(m.Delta3) / f3 : std::numeric_limits<long double>::quiet_NaN())},
        {"abs_f3_minus_V3", num(std::abs(m.f3 - m.V3))},
        {"U3", num(p.U3)}});
}

}  // namespace detail

/// Runs one subcommand, calling sink once per envelope as results appear.
/// Library errors propagate; exit_code() maps them.
inline void run(const RunConfig& c, const std::function<void(const ResultEnvelope&)>& sink) {
  using namespace detail;
  const Args args(c);
  const json inputs = inputs_echo(c);
  auto start = std::chrono::steady_clock::now();
  const Emit emit = [&](json outputs) {
    ResultEnvelope e;
    e.cmd = c.cmd;
    e.inputs = inputs;
    e.outputs = std::move(outputs);
    e.seed = c.seed;
    if (c.timing) {
      const auto now = std::chrono::steady_clock::now();
      e.ms = std::chrono::duration<double, std::milli>(now - start).count();
      start = now;
    }
    sink(e);
  };
  static const std::map<std::string, void (*)(const RunConfig&, const Args&, const Emit&)> table{
      {"reps", cmd_reps},       {"verify-range", cmd_verify_range}, {"local", cmd_local},
      {"sseries", cmd_sseries}, {"omega", cmd_omega},               {"crconst", cmd_crconst},
      {"sieve-check", cmd_sieve_check}, {"margin", cmd_margin},     {"moments", cmd_moments},
      {"jint", cmd_jint},       {"arcs", cmd_arcs},                 {"residuals", cmd_residuals}};
  const auto it = table.find(c.cmd);
  if (it == table.end()) throw ValidationError("unknown subcommand '" + c.cmd + "'");
  it->second(c, args, emit);
}

inline std::vector<ResultEnvelope> run(const RunConfig& c) {
  std::vector<ResultEnvelope> out;
  run(c, [&](const ResultEnvelope& e) { out.push_back(e); });
  return out;
}

/// 2 for a failed property, 1 for bad input or anything else.
inline int exit_code(const std::exception& e) {
  if (dynamic_cast<const PropertyFailure*>(&e)) return 2;
  if (dynamic_cast<const PrecisionError*>(&e)) return 2;
  if (dynamic_cast<const ConsistencyError*>(&e)) return 2;
  return 1;
}

// ---------------------------------------------------------------------------
// Writers

class Writer {
 public:
  Writer(std::ostream& os, Format f) : os_(os), format_(f) {}

  void write(const ResultEnvelope& e) {
    if (format_ == Format::Jsonl) {
      os_ << to_json(e).dump() << '\n';
    } else {
      write_csv(e);
    }
    os_.flush();
  }

 private:
  static std::string cell(const json& v) {
    std::string s = v.is_string() ? v.get<std::string>() : v.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }

  void write_csv(const ResultEnvelope& e) {
    std::vector<std::string> header{"cmd", "seed", "version", "ms"};
    std::vector<std::string> row{cell(e.cmd), std::to_string(e.seed), e.version, cell(e.ms)};
    for (const auto& [k, v] : e.inputs.items()) header.push_back("in." + k), row.push_back(cell(v));
    for (const auto& [k, v] : e.outputs.items()) header.push_back("out." + k), row.push_back(cell(v));
    // a new header line whenever the column set changes
    if (header != last_header_) {
      for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
      os_ << '\n';
      last_header_ = header;
    }
    for (std::size_t i = 0; i < row.size(); ++i) os_ << (i ? "," : "") << row[i];
    os_ << '\n';
  }

  std::ostream& os_;
  Format format_;
  std::vector<std::string> last_header_;
};

}  // namespace wglab::cli
