// kvar: virtual classes of constructible sets, TQFT matrices and
// representation-variety classes from the command line.
//
// Exit codes: 0 success, 1 verification failure, 2 parse error,
// 3 calculator error, 4 basis closure error, 5 non-polynomial result.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "kvar/acceptance.hpp"
#include "kvar/parse.hpp"
#include "kvar/tqft.hpp"

using nlohmann::json;
using namespace kvar;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kParseFailed = 2, kCalcFailed = 3, kBasisFailed = 4, kNonPolynomial = 5 };

// ---- rendering ----

std::string latex(const std::string& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '^') {
      std::size_t j = i + 1;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out += "^{" + s.substr(i + 1, j - i - 1) + "}";
      i = j - 1;
    } else if (s[i] == '*') {
      out += ' ';
    } else {
      out += s[i];
    }
  }
  return out;
}

std::string latex_label(const std::string& label) {
  std::size_t k = label.size();
  while (k > 0 && std::isdigit(static_cast<unsigned char>(label[k - 1]))) --k;
  if (k == label.size() || k == 0) return label;
  return label.substr(0, k) + "_{" + label.substr(k) + "}";
}

std::string factored(const RatFunc& f) {
  if (f.is_polynomial()) return f.num().factored_str();
  std::string n = f.num().factored_str();
  if (n.find_first_of("+-*", 1) != std::string::npos) n = "(" + n + ")";
  return n + "/(" + f.den().factored_str() + ")";
}

std::string latex_entry(const RatFunc& f) {
  if (f.is_polynomial()) return latex(f.num().factored_str());
  return "\\frac{" + latex(f.num().factored_str()) + "}{" + latex(f.den().factored_str()) + "}";
}

// ---- session: registry, memo cache and its file ----

class Session {
 public:
  SymbolRegistry registry;
  MemoCache cache;

  explicit Session(std::string cache_path) : path_(std::move(cache_path)) {
    if (path_.empty()) return;
    std::ifstream in(path_);
    if (!in) return;  // cold start
    json j;
    try {
      in >> j;
    } catch (const json::exception&) {
      std::cerr << "kvar: ignoring unreadable cache " << path_ << "\n";
      return;
    }
    if (j.value("revision", "") != kAlgorithmRevision) {
      std::cerr << "kvar: ignoring cache with stale revision\n";
      return;
    }
    for (const auto& [key, terms] : j.at("entries").items()) {
      VirtualClass c;
      for (const auto& [sym, coeff] : terms.items()) {
        const Chart chart = set_from_key(sym).chart;
        const SymbolId id = sym == unit_key(chart) ? registry.unit(chart) : registry.intern(sym, chart.label);
        c += VirtualClass(id, parse_qpoly(coeff.get<std::string>()));
      }
      cache.store(key, c);
    }
  }

  void save() const {
    if (path_.empty()) return;
    json entries = json::object();
    for (const auto& [key, c] : cache.snapshot()) {
      json terms = json::object();
      for (const auto& [sym, coeff] : c.terms()) terms[sym] = coeff.str();
      entries[key] = terms;
    }
    std::ofstream out(path_);
    out << json{{"revision", kAlgorithmRevision}, {"entries", entries}}.dump(1) << "\n";
  }

 private:
  std::string path_;
};

std::unique_ptr<TqftContext> context(Session& s, const std::string& group, bool fiber_split) {
  TqftOptions opt;
  // The direct u3t entry sets are out of reach; the fiber-split form is used there.
  opt.fiber_split = fiber_split || group == "u3t";
  return std::make_unique<TqftContext>(builtin_stratification(group), s.registry, s.cache, opt);
}

struct Common {
  std::string format = "text";
  std::string cache;
  bool timings = false;
  bool fiber_split = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json", "latex"}));
  app->add_option("--cache", c.cache, "Persistent memo cache file (JSON)");
  app->add_flag("--timings", c.timings, "Report elapsed time");
}

// ---- class ----

struct ClassArgs {
  std::string path;
  std::uint64_t count_p = 0;
  std::vector<std::string> strat{"u2t", "u3t", "gm"};
};

int cmd_class(const ClassArgs& a, const Common& common) {
  std::ifstream in(a.path);
  if (!in) throw ParseError("cannot read " + a.path);
  std::stringstream text;
  text << in.rdbuf();
  const ConstructibleSet x = parse_vset(text.str());

  Session session(common.cache);
  std::vector<std::unique_ptr<TqftContext>> preload;
  for (const auto& s : a.strat) {
    Stratification strat;
    if (s.find('/') != std::string::npos || s.find(".strat") != std::string::npos) {
      std::ifstream f(s);
      if (!f) throw ParseError("cannot read " + s);
      std::stringstream ss;
      ss << f.rdbuf();
      strat = parse_strat(ss.str());
    } else {
      strat = builtin_stratification(s);
    }
    preload.push_back(std::make_unique<TqftContext>(std::move(strat), session.registry, session.cache));
  }
  Calculator calc(session.registry, session.cache);
  const VirtualClass c = calc.class_of(x);
  session.save();

  int rc = kOk;
  std::string oracle;
  std::uint64_t count = 0;
  Integer value;
  if (a.count_p) {
    count = count_points(x, a.count_p);
    value = count_class(c, a.count_p);
    const bool agree = Integer(static_cast<unsigned long>(count)) == value;
    if (!agree) rc = kVerifyFailed;
    oracle = "F_" + std::to_string(a.count_p) + ": " + std::to_string(count) + " points, class gives " +
             value.get_str() + (agree ? ", agree" : ", DISAGREE");
  }

  if (common.format == "json") {
    json terms = json::array();
    std::vector<std::pair<std::string, SymbolId>> order;
    for (const auto& [sym, k] : c.terms()) {
      const std::string label = session.registry.label(sym);
      order.emplace_back(label.empty() ? "1" : label, sym);
    }
    std::sort(order.begin(), order.end());
    for (const auto& [label, sym] : order)
      terms.push_back({{"symbol", label}, {"key", sym}, {"coeff", c.coeff(sym).str()}});
    json out{{"class", calc.print(c)}, {"terms", terms}};
    if (a.count_p)
      out["countPoints"] = {{"p", a.count_p}, {"count", count}, {"value", value.get_str()}, {"agree", rc == kOk}};
    std::cout << out.dump(1) << "\n";
  } else if (common.format == "latex") {
    std::string s = calc.print(c);
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
      // S@C3 -> \mathrm{S}_{C3}
      if (std::isalpha(static_cast<unsigned char>(s[i])) && s[i] != 'q') {
        std::size_t j = i;
        while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '@')) ++j;
        std::string sym = s.substr(i, j - i);
        auto at = sym.find('@');
        out += at == std::string::npos ? "\\mathrm{" + sym + "}"
                                       : "\\mathrm{" + sym.substr(0, at) + "}_{" + sym.substr(at + 1) + "}";
        i = j - 1;
      } else {
        out += s[i];
      }
    }
    std::cout << "$" << latex(out) << "$\n";
    if (a.count_p) std::cout << "% " << oracle << "\n";
  } else {
    std::cout << calc.print(c) << "\n";
    if (a.count_p) std::cout << oracle << "\n";
  }
  return rc;
}

// ---- matrix ----

struct MatrixArgs {
  std::string group;
  std::string bordism = "N";
  bool reduced = false;
  bool check_fixture = false;
};

void print_matrix(const TqftMatrix& m, const std::string& title, const std::string& format, const std::string& name,
                  const std::string& group) {
  if (format == "json") {
    json entries = json::array();
    for (const auto& row : m.m) {
      json r = json::array();
      for (const auto& e : row) r.push_back(e.str());
      entries.push_back(r);
    }
    json out{{"group", group},
             {"labels", m.labels},
             {"matrices", {{name, {{"gFactor", m.g_factor}, {"entries", entries}}}}}};
    std::cout << out.dump(1) << "\n";
    return;
  }
  if (format == "latex") {
    std::cout << "% " << title << "\n";
    std::cout << (m.g_factor ? "[G] \\cdot " : "") << "\\left[\\begin{array}{c|" << std::string(m.size(), 'c') << "}\n  ";
    for (const auto& l : m.labels) std::cout << " & " << latex_label(l);
    std::cout << " \\\\ \\hline\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
      std::cout << "  " << latex_label(m.labels[i]);
      for (const auto& e : m.m[i]) std::cout << " & " << latex_entry(e);
      std::cout << " \\\\\n";
    }
    std::cout << "\\end{array}\\right]\n";
    return;
  }
  std::vector<std::vector<std::string>> cells(m.size() + 1);
  cells[0].push_back("");
  for (const auto& l : m.labels) cells[0].push_back(l);
  for (std::size_t i = 0; i < m.size(); ++i) {
    cells[i + 1].push_back(m.labels[i]);
    for (const auto& e : m.m[i]) cells[i + 1].push_back(factored(e));
  }
  std::vector<std::size_t> width(m.size() + 1, 0);
  for (const auto& row : cells)
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  std::cout << title << "\n";
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t j = 0; j < row.size(); ++j) {
      line += row[j] + std::string(width[j] - row[j].size(), ' ');
      line += j == 0 ? " | " : "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    std::cout << line << "\n";
  }
}

int cmd_matrix(const MatrixArgs& a, const Common& common) {
  Session session(common.cache);
  auto ctx = context(session, a.group, common.fiber_split);
  const Bordism b = a.bordism == "N" ? Bordism::kN : Bordism::kL;
  TqftMatrix m = ctx->compute_Zpi(b);
  if (a.reduced) m = reduce(m, ctx->compute_eta());
  session.save();
  const std::string name = std::string(a.reduced ? "Zred_" : "Zpi_") + a.bordism;

  if (a.check_fixture) {
    const Fixture fx = builtin_fixture(a.group);
    auto it = fx.matrices.find(name);
    if (it == fx.matrices.end()) {
      std::cout << "no fixture matrix " << name << " for " << a.group << "\n";
      return kVerifyFailed;
    }
    const auto diffs = compare_matrices(m, it->second);
    if (common.format == "json") {
      std::cout << json{{"group", a.group}, {"matrix", name}, {"match", diffs.empty()}, {"differences", diffs}}.dump(1)
                << "\n";
    } else {
      if (diffs.empty()) std::cout << "match\n";
      for (const auto& d : diffs) std::cout << "differs " << d << "\n";
    }
    return diffs.empty() ? kOk : kVerifyFailed;
  }
  std::string title = std::string(a.reduced ? "reduced " : "") + a.bordism + " matrix of " + a.group +
                      " (columns: source, rows: target)";
  if (m.g_factor) title += ", entries times [G]";
  print_matrix(m, title, common.format, name, a.group);
  return kOk;
}

// ---- repvar ----

struct RepvarArgs {
  std::string group;
  std::string range;
  bool closed = false;
  std::uint64_t oracle_p = 0;
};

std::pair<unsigned, unsigned> parse_range(const std::string& s) {
  auto dots = s.find("..");
  try {
    std::size_t used = 0;
    if (dots == std::string::npos) {
      unsigned long r = std::stoul(s, &used);
      if (used != s.size() || r == 0) throw std::invalid_argument(s);
      return {static_cast<unsigned>(r), static_cast<unsigned>(r)};
    }
    unsigned long a = std::stoul(s.substr(0, dots), &used);
    if (used != dots) throw std::invalid_argument(s);
    unsigned long b = std::stoul(s.substr(dots + 2), &used);
    if (used != s.size() - dots - 2 || a == 0 || b < a) throw std::invalid_argument(s);
    return {static_cast<unsigned>(a), static_cast<unsigned>(b)};
  } catch (const std::logic_error&) {
    throw ParseError("range must be r or a..b with 1 <= a <= b, got '" + s + "'");
  }
}

int cmd_repvar(const RepvarArgs& a, const Common& common) {
  const auto [lo, hi] = parse_range(a.range);
  Session session(common.cache);
  // u2 and u3 split as the unipotent-corner group times gm.
  const bool product = a.group == "u2" || a.group == "u3";
  const std::string base = product ? a.group + "t" : a.group;
  auto reduced_n = [&](const std::string& g) {
    auto ctx = context(session, g, common.fiber_split);
    return reduce(ctx->compute_Zpi(Bordism::kN), ctx->compute_eta());
  };
  const TqftMatrix m = reduced_n(base);
  std::optional<TqftMatrix> gm;
  if (product) gm = reduced_n("gm");
  session.save();

  int rc = kOk;
  json results = json::array();
  std::vector<std::string> lines, latex_lines;
  for (unsigned r = lo; r <= hi; ++r) {
    QPoly v = rep_variety_class(m, r);
    if (gm) v = v * rep_variety_class(*gm, r);
    std::string line = (lo == hi ? "" : "r=" + std::to_string(r) + ": ") + v.factored_str();
    json item{{"r", r}, {"class", v.str()}, {"factored", v.factored_str()}};
    if (a.closed) {
      const QPoly cf = closed_form(a.group, r);
      const bool ok = cf == v;
      if (!ok) rc = kVerifyFailed;
      line += ok ? "  [closed form: match]" : "  [closed form: " + cf.factored_str() + ", MISMATCH]";
      item["closedForm"] = cf.str();
      item["closedFormMatch"] = ok;
    }
    if (a.oracle_p) {
      const std::uint64_t count = oracle_rep_count(rep_group(a.group), r, a.oracle_p);
      const Rational value = v.evaluate(Rational(static_cast<unsigned long>(a.oracle_p)));
      const bool ok = value == Rational(static_cast<unsigned long>(count));
      if (!ok) rc = kVerifyFailed;
      line += "  [F_" + std::to_string(a.oracle_p) + " count " + std::to_string(count) + (ok ? " = " : " != ") +
              "value " + value.get_str() + " at q = " + std::to_string(a.oracle_p) + "]";
      item["oracle"] = {{"p", a.oracle_p}, {"count", count}, {"value", value.get_str()}, {"agree", ok}};
    }
    lines.push_back(line);
    latex_lines.push_back("[\\mathfrak{X}(N_{" + std::to_string(r) + "})] &= " + latex(v.factored_str()));
    results.push_back(item);
  }
  if (common.format == "json") {
    std::cout << json{{"group", a.group}, {"results", results}}.dump(1) << "\n";
  } else if (common.format == "latex") {
    std::cout << "% " << a.group << "\n\\begin{align*}\n";
    for (std::size_t i = 0; i < latex_lines.size(); ++i)
      std::cout << "  " << latex_lines[i] << (i + 1 < latex_lines.size() ? " \\\\" : "") << "\n";
    std::cout << "\\end{align*}\n";
  } else {
    for (const auto& l : lines) std::cout << l << "\n";
  }
  return rc;
}

// ---- verify ----

struct VerifyArgs {
  std::string suite = "all";
  std::string report;
};

int cmd_verify(const VerifyArgs& a, const Common& common) {
  const std::vector<int> ids = suite_criteria(a.suite);
  AcceptanceRunner runner;
  json checks = json::array();
  bool all = true;
  for (int id : ids) {
    CheckOutcome c = runner.run(id);
    all = all && c.passed;
    if (common.format == "text") {
      // Run times only with --timings, so repeated runs print identical text.
      std::printf("criterion %2d %s  %s: %s", c.id, c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
      if (common.timings) std::printf(" (%.2f s)", c.seconds);
      std::printf("\n");
      std::fflush(stdout);
    } else if (common.format == "latex") {
      std::printf("%% criterion %d %s: %s\n", c.id, c.passed ? "PASS" : "FAIL", c.name.c_str());
    }
    checks.push_back({{"id", c.id},
                      {"name", c.name},
                      {"passed", c.passed},
                      {"detail", c.detail},
                      {"provenance", c.provenance},
                      {"seconds", c.seconds}});
  }
  const json report{{"suite", a.suite}, {"passed", all}, {"checks", checks}};
  if (common.format == "json") std::cout << report.dump(1) << "\n";
  if (!a.report.empty()) std::ofstream(a.report) << report.dump(1) << "\n";
  return all ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Virtual classes in the Grothendieck ring of varieties and TQFT transfer matrices"};
  app.require_subcommand(1);
  Common common;

  ClassArgs class_args;
  auto* cls = app.add_subcommand("class", "Virtual class of a constructible set (.vset file)");
  cls->add_option("file", class_args.path, "Path to a .vset file")->required();
  cls->add_option("--count-points", class_args.count_p, "Also count points over F_p and compare");
  cls->add_option("--strat", class_args.strat, "Stratifications whose generators are preloaded (names or files)");
  add_common(cls, common);

  MatrixArgs matrix_args;
  auto* mat = app.add_subcommand("matrix", "Transfer matrix of a bordism");
  mat->add_option("--group", matrix_args.group, "Group")->required()->check(CLI::IsMember({"u2t", "u3t", "gm"}));
  mat->add_option("--bordism", matrix_args.bordism, "Bordism")->check(CLI::IsMember({"N", "L"}));
  mat->add_flag("--reduced", matrix_args.reduced, "Reduced matrix Z_pi * eta^-1");
  mat->add_flag("--check-fixture", matrix_args.check_fixture, "Compare with the shipped fixture");
  mat->add_flag("--opt-fiber-split", common.fiber_split, "Compute N entries in fiber-split form");
  add_common(mat, common);

  RepvarArgs rep_args;
  auto* rep = app.add_subcommand("repvar", "Class of the representation variety of N_r");
  rep->add_option("--group", rep_args.group, "Group")
      ->required()
      ->check(CLI::IsMember({"u2t", "u3t", "gm", "u2", "u3"}));
  rep->add_option("-r", rep_args.range, "r or a range a..b")->required();
  rep->add_flag("--closed-form", rep_args.closed, "Compare with the closed form");
  rep->add_option("--oracle", rep_args.oracle_p, "Count representations over F_p and compare");
  rep->add_flag("--opt-fiber-split", common.fiber_split, "Compute N entries in fiber-split form");
  add_common(rep, common);

  VerifyArgs verify_args;
  auto* ver = app.add_subcommand("verify", "Run acceptance checks");
  ver->add_option("--suite", verify_args.suite, "Suite")->check(CLI::IsMember({"u2", "u3", "appendix", "all"}));
  ver->add_option("--report", verify_args.report, "Write a JSON report to this file");
  add_common(ver, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kParseFailed;
  }

  const auto start = std::chrono::steady_clock::now();
  int rc = kOk;
  try {
    if (*cls) rc = cmd_class(class_args, common);
    if (*mat) rc = cmd_matrix(matrix_args, common);
    if (*rep) rc = cmd_repvar(rep_args, common);
    if (*ver) rc = cmd_verify(verify_args, common);
  } catch (const ParseError& e) {
    std::cerr << "kvar: parse error: " << e.what() << "\n";
    return kParseFailed;
  } catch (const StratError& e) {
    std::cerr << "kvar: stratification error: " << e.what() << "\n";
    return kParseFailed;
  } catch (const BasisClosureError& e) {
    std::cerr << "kvar: basis closure error: " << e.what() << "\n";
    return kBasisFailed;
  } catch (const NonPolynomialResult& e) {
    std::cerr << "kvar: non-polynomial result: " << e.what() << "\n";
    return kNonPolynomial;
  } catch (const std::exception& e) {
    std::cerr << "kvar: calculator error: " << e.what() << "\n";
    return kCalcFailed;
  }
  if (common.timings)
    std::cerr << "time: " << std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()
              << " s\n";
  return rc;
}
