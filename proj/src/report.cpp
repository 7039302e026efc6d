#include "mframe/report.hpp"

#include <sstream>

#include "mframe/ledger.hpp"

namespace mf {

namespace {

const char* const kWords[4] = {"QQ", "XPQ", "XXQ", "PP"};
const char* const kBase[4] = {"x", "u", "p", "q"};

Json point_json(const JetPoint& pt) {
  Json j = Json::object();
  for (int k = 0; k < 4; ++k) j[kBase[k]] = q_to_json(pt.base[k]);
  return j;
}

Json stage_json(const StageRecord& s) {
  Json j = Json::object();
  j["stage"] = s.stage;
  j["equation"] = "R_" + s.word + " = " + std::to_string(s.value);
  j["eliminates"] = s.target;
  j["leading"] = render_text(s.leading);
  j["residual"] = render_text(s.residual);
  return j;
}

Json cubic_json(const CubicValue& v) {
  Json j = Json::object();
  j["value"] = v.str();
  j["cube"] = q_to_json(v.cube());
  return j;
}

Json frame_json(std::size_t index, const FrameSolution& f) {
  Json j = Json::object();
  j["index"] = index;
  j["point"] = point_json(f.point);
  Json inv = Json::object();
  for (const char* w : kWords) inv[std::string("R_") + w] = q_to_json(f.reference(w));
  j["invariants"] = inv;
  j["branch"] = f.branch.str();
  Json solved = Json::object();
  for (const auto& [s, e] : f.solved) solved[sym_name(s)] = render_text(e);
  j["solved"] = solved;
  Json stages = Json::array();
  for (const auto& s : f.stages) stages.push_back(stage_json(s));
  j["stages"] = stages;
  if (f.generic) {
    Json g = Json::object();
    g["radicand"] = q_to_json(f.generic->radicand);
    Json extras = Json::object();
    for (const auto& [w, v] : f.generic->extras) extras["R_" + w] = cubic_json(v);
    g["extras"] = extras;
    Json gs = Json::array();
    for (const auto& s : f.generic->stages) gs.push_back(stage_json(s));
    g["stages"] = gs;
    j["generic"] = g;
  }
  return j;
}

std::string values_line(const FrameSolution& f) {
  std::ostringstream os;
  os << "(R_QQ, R_XPQ, R_XXQ) = (" << q_to_string(f.reference("QQ")) << ", "
     << q_to_string(f.reference("XPQ")) << ", " << q_to_string(f.reference("XXQ")) << ")";
  return os.str();
}

std::string pad(std::string s, std::size_t w) {
  if (s.size() < w) s.append(w - s.size(), ' ');
  return s;
}

}  // namespace

std::string tool_version() { return MFRAME_VERSION; }

std::string format_str(Format f) {
  switch (f) {
    case Format::text: return "text";
    case Format::latex: return "latex";
    case Format::machine: return "machine";
  }
  return "?";
}

Json config_json(const RunConfig& cfg) {
  Json j = Json::object();
  j["command"] = cfg.command;
  j["odes"] = cfg.odes;
  if (!cfg.corpus.empty()) j["corpus"] = cfg.corpus;
  j["points"] = cfg.points;
  j["seed"] = cfg.seed;
  j["order"] = cfg.order;
  j["mode"] = cfg.mode;
  j["format"] = format_str(cfg.format);
  j["budget"] = cfg.budget;
  if (cfg.command == "verify") j["suite"] = cfg.suite;
  if (!cfg.hint_x.empty() || !cfg.hint_u.empty()) {
    j["map-x"] = cfg.hint_x;
    j["map-u"] = cfg.hint_u;
  }
  return j;
}

Json envelope(const RunConfig& cfg, Json results, Json suites) {
  Json j = Json::object();
  j["tool-version"] = tool_version();
  j["typo-ledger-version"] = typo_ledger_version();
  j["config"] = config_json(cfg);
  j["results"] = std::move(results);
  j["suite-residuals"] = std::move(suites);
  return j;
}

Json invariant_json(const OdeInput& ode, const InvariantReport& rep) {
  Json j = Json::object();
  j["name"] = ode.name;
  j["source"] = ode.source;
  j["rhs"] = render_text(ode.rhs);
  j["rhs-machine"] = to_machine(ode.rhs);
  j["mode"] = rep.mode;
  j["branch"] = rep.branch.str();
  j["verdict"] = verdict_str(rep.verdict);
  j["points-used"] = rep.frames.size();
  j["failures"] = rep.failures;
  j["stage-order"] = rep.stage_order;
  Json frames = Json::array();
  for (std::size_t i = 0; i < rep.frames.size(); ++i) frames.push_back(frame_json(i, rep.frames[i]));
  j["frames"] = frames;
  if (!rep.closed_forms.empty()) {
    Json cf = Json::object();
    for (const auto& [w, e] : rep.closed_forms) cf["R_" + w] = render_text(e);
    j["closed-forms"] = cf;
  }
  return j;
}

std::string invariant_text(const OdeInput& ode, const InvariantReport& rep) {
  std::ostringstream os;
  os << "ode " << (ode.name.empty() ? "-" : ode.name) << ": u''' = " << render_text(ode.rhs) << "\n";
  os << "mode " << rep.mode << ", points " << rep.frames.size();
  if (!rep.failures.empty()) os << " (" << rep.failures.size() << " slots failed)";
  os << "\n";
  os << "branch " << rep.branch.str() << "\nverdict " << verdict_str(rep.verdict) << "\n";
  os << "stage order:";
  for (const auto& s : rep.stage_order) os << " " << s;
  os << "\n";
  for (std::size_t i = 0; i < rep.frames.size(); ++i) {
    const auto& f = rep.frames[i];
    os << "point " << i << " (x, u, p, q) = (" << q_to_string(f.point.base[0]) << ", "
       << q_to_string(f.point.base[1]) << ", " << q_to_string(f.point.base[2]) << ", "
       << q_to_string(f.point.base[3]) << "): " << values_line(f)
       << ", R_PP = " << q_to_string(f.reference("PP")) << "\n";
    if (f.generic)
      for (const auto& [w, v] : f.generic->extras) os << "  R_" << w << " = " << v.str() << "\n";
  }
  for (const auto& fail : rep.failures) os << "failed slot: " << fail << "\n";
  for (const auto& [w, e] : rep.closed_forms) os << "closed form R_" << w << " = " << render_text(e) << "\n";
  return os.str();
}

std::string invariant_latex(const OdeInput& ode, const InvariantReport& rep) {
  std::ostringstream os;
  os << "% " << verdict_str(rep.verdict) << ", branch " << rep.branch.str() << "\n";
  os << "u''' = " << render_latex(ode.rhs) << "\n";
  os << "\\begin{array}{llll}\n";
  os << "\\text{point} & R_{QQ} & R_{XPQ} & R_{XXQ} \\\\\n";
  for (std::size_t i = 0; i < rep.frames.size(); ++i) {
    const auto& f = rep.frames[i];
    os << i;
    for (const char* w : {"QQ", "XPQ", "XXQ"}) os << " & " << render_latex(Expr(f.reference(w)));
    os << " \\\\\n";
  }
  os << "\\end{array}\n";
  for (const auto& [w, e] : rep.closed_forms) os << "R_{" << w << "} = " << render_latex(e) << "\n";
  return os.str();
}

Json classify_json(const ClassifyRow& row) {
  Json j = Json::object();
  j["name"] = row.ode.name;
  j["rhs"] = render_text(row.ode.rhs);
  j["branch"] = row.report.branch.str();
  j["verdict"] = verdict_str(row.report.verdict);
  j["points-used"] = row.report.frames.size();
  if (!row.report.frames.empty()) {
    const auto& f = row.report.frames.front();
    j["first-point"] = point_json(f.point);
    Json inv = Json::object();
    for (const char* w : kWords) inv[std::string("R_") + w] = q_to_json(f.reference(w));
    j["invariants"] = inv;
  }
  return j;
}

std::string classify_text(const std::vector<ClassifyRow>& rows) {
  std::ostringstream os;
  os << pad("name", 16) << pad("branch", 28) << pad("verdict", 22) << "first point invariants\n";
  int lin = 0, non = 0, part = 0;
  for (const auto& r : rows) {
    os << pad(r.ode.name, 16) << pad(r.report.branch.str(), 28)
       << pad(verdict_str(r.report.verdict), 22)
       << (r.report.frames.empty() ? "-" : values_line(r.report.frames.front())) << "\n";
    switch (r.report.verdict) {
      case Verdict::linearizable: ++lin; break;
      case Verdict::not_linearizable: ++non; break;
      case Verdict::non_generic_partial: ++part; break;
    }
  }
  os << rows.size() << " equations: " << lin << " linearizable, " << non << " not-linearizable, "
     << part << " non-generic-partial\n";
  return os.str();
}

std::string classify_latex(const std::vector<ClassifyRow>& rows) {
  std::ostringstream os;
  os << "\\begin{array}{llllll}\n";
  os << "\\text{name} & F & \\text{verdict} & R_{QQ} & R_{XPQ} & R_{XXQ} \\\\\n";
  for (const auto& r : rows) {
    os << "\\text{" << r.ode.name << "} & " << render_latex(r.ode.rhs) << " & \\text{"
       << verdict_str(r.report.verdict) << "}";
    if (r.report.frames.empty()) {
      os << " & & &";
    } else {
      for (const char* w : {"QQ", "XPQ", "XXQ"})
        os << " & " << render_latex(Expr(r.report.frames.front().reference(w)));
    }
    os << " \\\\\n";
  }
  os << "\\end{array}\n";
  return os.str();
}

Json equivalence_json(const OdeInput& a, const OdeInput& b, const EquivalenceResult& r) {
  Json j = Json::object();
  j["first"] = render_text(a.rhs);
  j["second"] = render_text(b.rhs);
  j["signature"] = equivalence_str(r.verdict);
  j["note"] = r.note;
  j["matched-points"] = r.matched_points;
  return j;
}

std::string equivalence_text(const OdeInput& a, const OdeInput& b, const EquivalenceResult& r) {
  std::ostringstream os;
  os << "u''' = " << render_text(a.rhs) << "  vs  u''' = " << render_text(b.rhs) << "\n";
  os << "signature " << equivalence_str(r.verdict) << "\n" << r.note << "\n";
  if (r.matched_points > 0) os << "matched points " << r.matched_points << "\n";
  return os.str();
}

Json check_json(const Check& c) {
  Json j = Json::object();
  j["name"] = c.name;
  j["ok"] = c.ok;
  j["residual"] = c.residual;
  j["absorbed"] = c.absorbed;
  j["display"] = c.display;
  return j;
}

Json suite_json(const SuiteResult& s) {
  Json j = Json::object();
  j["suite"] = s.suite;
  j["ok"] = s.ok();
  Json reps = Json::array();
  for (const auto& r : s.reports) {
    Json rj = Json::object();
    rj["level"] = r.level;
    rj["ok"] = r.ok();
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(check_json(c));
    rj["checks"] = checks;
    reps.push_back(rj);
  }
  j["reports"] = reps;
  return j;
}

std::string suite_text(const SuiteResult& s) {
  std::ostringstream os;
  os << "suite " << s.suite << ": " << (s.ok() ? "ok" : "FAILED") << "\n";
  for (const auto& r : s.reports) {
    int passed = 0;
    for (const auto& c : r.checks) passed += c.ok;
    os << "  " << r.level << ": " << passed << "/" << r.checks.size() << " checks\n";
    for (const auto& c : r.checks) {
      os << "    [" << (c.ok ? "ok" : "FAIL") << "] " << c.name << "  residual " << c.residual << "\n";
      for (const auto& a : c.absorbed) os << "      absorbed " << a << "\n";
      for (const auto& d : c.display) os << "      display " << d << "\n";
    }
  }
  return os.str();
}

}  // namespace mf
