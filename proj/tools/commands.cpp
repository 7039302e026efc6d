#include "commands.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mframe/ledger.hpp"

namespace mf::cli {

namespace {

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

InvariantOptions options(const RunConfig& cfg) {
  InvariantOptions o;
  o.points = cfg.points;
  o.seed = cfg.seed;
  o.order = cfg.order;
  return o;
}

OdeInput ode_from_flag(const std::string& text, std::size_t index) {
  try {
    return {"ode" + std::to_string(index + 1), parse_expr(text), text};
  } catch (const ParseError& e) {
    throw InputError("--ode \"" + text + "\": " + e.what());
  }
}

std::vector<OdeInput> corpus_inputs(const RunConfig& cfg) {
  std::vector<OdeInput> out;
  if (!cfg.corpus.empty()) {
    std::ifstream in(cfg.corpus, std::ios::binary);
    if (!in) throw InputError("cannot open corpus file " + cfg.corpus);
    out = parse_corpus(in);
  }
  for (std::size_t i = 0; i < cfg.odes.size(); ++i) out.push_back(ode_from_flag(cfg.odes[i], i));
  return out;
}

InvariantReport compute(const RunConfig& cfg, const Expr& F) {
  if (cfg.mode == "symbolic") return symbolic_report(F, cfg.budget, options(cfg));
  return invariants(F, options(cfg));
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

int cmd_invariants(const RunConfig& cfg, std::ostream& out) {
  if (cfg.odes.empty()) throw InputError("invariants needs at least one --ode");
  std::vector<OdeInput> odes;
  for (std::size_t i = 0; i < cfg.odes.size(); ++i) odes.push_back(ode_from_flag(cfg.odes[i], i));
  Json results = Json::array();
  for (const auto& ode : odes) {
    InvariantReport rep = compute(cfg, ode.rhs);
    switch (cfg.format) {
      case Format::machine: results.push_back(invariant_json(ode, rep)); break;
      case Format::latex: out << invariant_latex(ode, rep); break;
      case Format::text: out << invariant_text(ode, rep); break;
    }
  }
  if (cfg.format == Format::machine) emit(out, envelope(cfg, std::move(results), Json::array()));
  return ok;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out) {
  std::vector<ClassifyRow> rows;
  for (auto& ode : corpus_inputs(cfg)) {
    InvariantReport rep = compute(cfg, ode.rhs);
    rows.push_back({std::move(ode), std::move(rep)});
  }
  switch (cfg.format) {
    case Format::machine: {
      Json results = Json::array();
      for (const auto& r : rows) results.push_back(classify_json(r));
      emit(out, envelope(cfg, std::move(results), Json::array()));
      break;
    }
    case Format::latex: out << classify_latex(rows); break;
    case Format::text: out << classify_text(rows); break;
  }
  return ok;
}

int cmd_equivalent(const RunConfig& cfg, std::ostream& out) {
  if (cfg.odes.size() != 2) throw InputError("equivalent needs exactly two --ode flags");
  if (cfg.hint_x.empty() != cfg.hint_u.empty())
    throw InputError("--map-x and --map-u must be given together");
  const OdeInput a = ode_from_flag(cfg.odes[0], 0);
  const OdeInput b = ode_from_flag(cfg.odes[1], 1);
  std::optional<MapHint> hint;
  if (!cfg.hint_x.empty()) hint = MapHint{parse_expr(cfg.hint_x), parse_expr(cfg.hint_u)};
  const EquivalenceResult r = equivalence_signature(a.rhs, b.rhs, hint, options(cfg));
  if (cfg.format == Format::machine) {
    Json results = Json::array();
    results.push_back(equivalence_json(a, b, r));
    emit(out, envelope(cfg, std::move(results), Json::array()));
  } else {
    out << equivalence_text(a, b, r);
  }
  return ok;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  if (!valid_suite(cfg.suite)) throw InputError("unknown suite " + cfg.suite);
  const auto suites = run_suites(cfg.suite, cfg.seed);
  bool pass = true;
  Json sj = Json::array();
  for (const auto& s : suites) {
    pass = pass && s.ok();
    if (cfg.format == Format::machine)
      sj.push_back(suite_json(s));
    else
      out << suite_text(s);
  }
  if (cfg.format == Format::machine) emit(out, envelope(cfg, Json::array(), std::move(sj)));
  return pass ? ok : verification_failure;
}

}  // namespace

int execute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.mode != "pointwise" && cfg.mode != "symbolic")
      throw InputError("mode must be pointwise or symbolic");
    if (cfg.command == "invariants") return cmd_invariants(cfg, out);
    if (cfg.command == "classify") return cmd_classify(cfg, out);
    if (cfg.command == "equivalent") return cmd_equivalent(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    throw InputError("unknown command " + cfg.command);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return input_error;
  } catch (const CorpusError& e) {
    for (const auto& le : e.errors) err << "line " << le.line << ": " << le.message << "\n";
    return input_error;
  } catch (const BudgetExceeded& e) {
    err << e.what() << "\n";
    return budget_exceeded;
  } catch (const InputError& e) {
    err << e.what() << "\n";
    return input_error;
  } catch (const ActionError& e) {
    err << "invalid map: " << e.what() << "\n";
    return input_error;
  } catch (const DivisionByZero& e) {
    err << "division by zero: " << e.what() << "\n";
    return input_error;
  } catch (const FrameError& e) {
    err << "frame error: " << e.what() << "\n";
    return verification_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return verification_failure;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Equivariant moving frames for u''' = F(x, u, p, q) under fiber-preserving maps"};
  app.set_version_flag("--version", tool_version() + " (typo ledger " + typo_ledger_version() + ")");
  app.require_subcommand(1);

  RunConfig cfg;
  std::string format = "text";
  const std::map<std::string, Format> formats{
      {"text", Format::text}, {"machine", Format::machine}, {"json", Format::machine},
      {"latex", Format::latex}};

  auto common = [&](CLI::App* sub) {
    sub->add_option("--points", cfg.points, "sample points")->check(CLI::Range(1, 1000));
    sub->add_option("--seed", cfg.seed, "sampling seed");
    sub->add_option("--order", cfg.order, "invariant order")->check(CLI::Range(3, 4));
    sub->add_option("--mode", cfg.mode, "pointwise or symbolic")
        ->check(CLI::IsMember({"pointwise", "symbolic"}));
    sub->add_option("--format", format, "text, machine (json) or latex")
        ->check(CLI::IsMember({"text", "machine", "json", "latex"}));
    sub->add_option("--budget", cfg.budget, "term cap for symbolic closed forms (0: none)");
  };

  CLI::App* inv = app.add_subcommand("invariants", "fundamental invariants of one or more equations");
  inv->add_option("--ode", cfg.odes, "right-hand side F")->required();
  common(inv);

  CLI::App* cls = app.add_subcommand("classify", "classify every equation of a corpus");
  cls->add_option("corpus,--corpus", cfg.corpus, "corpus file (name: expression per line)");
  cls->add_option("--ode", cfg.odes, "extra right-hand sides");
  common(cls);

  CLI::App* eq = app.add_subcommand("equivalent", "invariant signature of two equations");
  eq->add_option("--ode", cfg.odes, "the two right-hand sides")->required()->allow_extra_args(false);
  eq->add_option("--map-x", cfg.hint_x, "X(x) of a candidate map");
  eq->add_option("--map-u", cfg.hint_u, "U(x, u) of a candidate map");
  common(eq);

  CLI::App* ver = app.add_subcommand("verify", "run verification suites");
  ver->add_option("--suite", cfg.suite, "determining, group-law, structure, recurrence or all")
      ->check(CLI::IsMember(suite_names()));
  common(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return ok;
    }
    app.exit(e, out, err);
    return input_error;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  cfg.format = formats.at(format);
  return execute(cfg, out, err);
}

}  // namespace mf::cli
