#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mframe/action.hpp"
#include "mframe/forms.hpp"
#include "mframe/frame.hpp"
#include "mframe/ledger.hpp"
#include "mframe/parse.hpp"
#include "mframe/suites.hpp"
#include "mframe/vfield.hpp"
#include "oracle.hpp"

using namespace mf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const Expr X_(base::x()), U_(base::u()), P_(base::p()), Q_(base::q()), R_(base::r());

Expr E(const char* s) { return parse_expr(s); }

// Every bracketed ledger id in the display notes must exist.
bool ledger_ids_known(const std::vector<StructureReport>& reps, std::string& missing) {
  for (const auto& r : reps)
    for (const auto& c : r.checks)
      for (const auto& d : c.display) {
        auto open = d.rfind('[');
        auto close = d.rfind(']');
        if (open == std::string::npos || close == std::string::npos) continue;
        std::stringstream ids(d.substr(open + 1, close - open - 1));
        std::string id;
        while (std::getline(ids, id, ',')) {
          id.erase(0, id.find_first_not_of(' '));
          if (id == "none") continue;
          try {
            ledger_entry(id);
          } catch (const std::out_of_range&) {
            missing = id;
            return false;
          }
        }
      }
  return true;
}

Outcome criterion1() {
  const GroupJet id = GroupJet::identity(3);
  const Prolonged a = evaluate_action(id, 1, 2, 3, 4, 5);
  bool ok = a.X == Expr(1L) && a.U == Expr(2L) && a.P == Expr(3L) && a.Q == Expr(4L) && a.R == Expr(5L);
  const GroupJet sc = GroupJet::of_map(Expr(2L) * X_, U_, 3);
  const Prolonged s = prolonged_action(sc);
  ok = ok && s.X == Expr(2L) * X_ && s.U == U_ && s.P == P_ / Expr(2L) && s.Q == Q_ / Expr(4L) &&
       s.R == R_ / Expr(8L);
  const GroupJet sh = GroupJet::of_map(X_, U_ + X_, 3);
  const Prolonged h = prolonged_action(sh);
  ok = ok && h.X == X_ && h.U == U_ + X_ && h.P == P_ + Expr(1L) && h.Q == Q_ && h.R == R_;
  const Helpers hs = helpers(sc);
  ok = ok && hs.delta == P_ && hs.epsilon.is_zero() && hs.psi == Expr(2L) * Q_ &&
       hs.chi == Expr(-4L) * R_;
  for (const GroupJet* g : {&id, &sc, &sh}) {
    const Prolonged c = chain_rule_action(*g);
    const Prolonged d = prolonged_action(*g);
    ok = ok && c.X == d.X && c.U == d.U && c.P == d.P && c.Q == d.Q && c.R == d.R;
  }
  return {ok, "identity, scaling and shear closed forms, chain-rule agreement"};
}

Outcome criterion2() {
  const SuiteResult r = run_group_law(0, 25);
  int good = 0;
  for (const auto& c : r.reports.front().checks) good += c.ok;
  return {good == 25, std::to_string(good) + "/25 compositions exact"};
}

Outcome criterion3() {
  const SuiteResult r = run_determining();
  std::string missing;
  const bool ids = ledger_ids_known(r.reports, missing);
  const ProlongedField v = prolong(VectorField{X_ * X_, Expr()});
  const bool ex = v.gamma == E("-2*x*p") && v.tau == E("-2*p - 4*x*q") &&
                  v.varsigma == Expr(-6L) * Q_ - Expr(6L) * X_ * R_;
  std::string d = r.ok() ? "formal prolongation residuals are zero" : "nonzero residual";
  if (!ids) d += "; unknown ledger id " + missing;
  return {r.ok() && ids && ex, d + "; display deviations logged"};
}

Outcome criterion4() {
  const StructureReport mc = verify_mc_relations();
  const StructureReport rec = verify_recurrence();
  std::string missing;
  const bool ids = ledger_ids_known({mc, rec}, missing);
  const auto rel = mc_relations();
  const Expr mp = rel.relations.at("mu^p");
  const Expr want = Expr(lifted_coordinate(2)) * (Expr(mu_u(1, 0)) - Expr(mu_x(1))) + Expr(mu_u(0, 1));
  const bool ok = mc.ok() && rec.ok() && ids && mp == want;
  return {ok, std::to_string(mc.checks.size()) + " relation checks, " +
                  std::to_string(rec.checks.size()) + " recurrence checks"};
}

Outcome criterion5() {
  const SuiteResult r = run_structure();
  std::ostringstream os;
  std::vector<std::string> failed;
  for (const auto& rep : r.reports) {
    int good = 0;
    for (const auto& c : rep.checks) {
      good += c.ok;
      if (!c.ok) failed.push_back(rep.level + ": " + c.name);
    }
    os << rep.level << " " << good << "/" << rep.checks.size() << "; ";
  }
  if (!failed.empty()) {
    os << "failing lines:";
    for (const auto& f : failed) os << " [" << f << "]";
    os << "; the printed prolonged-coframe d(mu) lines and the generic-branch normalized forms "
          "are not consequences of the recurrence formulae (see README)";
  }
  return {r.ok(), os.str()};
}

struct Image {
  std::string label;
  Expr F;
};

// Image of u''' = 0 under X = a x + b, U = c(x) u + d(x).
Expr push_flat(const Expr& a, const Expr& b, const Expr& c, const Expr& d) {
  const Expr xi = (X_ - b) / a;
  const Expr ui = (U_ - substitute(d, {{base::x(), xi}})) / substitute(c, {{base::x(), xi}});
  return pullback(Expr(), xi, ui);
}

std::vector<Image> flat_images() {
  std::vector<Image> out{{"F = 0", Expr()}, {"F = 6", Expr(6L)}};
  out.push_back({"X = 2x + 1, U = (x^2 + 1) u + x^3",
                 push_flat(Expr(2L), Expr(1L), E("x^2 + 1"), E("x^3"))});
  out.push_back({"X = -x/3, U = (x + 3) u - x^2 + 2",
                 push_flat(E("-1/3"), Expr(), E("x + 3"), E("-x^2 + 2"))});
  out.push_back({"X = 5x - 2, U = 2 u + x^3 - 7 x", push_flat(Expr(5L), Expr(-2L), Expr(2L), E("x^3 - 7*x"))});
  // Equations sent to u''' = 0 by maps nonlinear in u.
  out.push_back({"preimage under X = x^2, U = x u^2 + u", pullback(Expr(), E("x^2"), E("x*u^2 + u"))});
  out.push_back({"preimage under X = x^3, U = u^3 + x", pullback(Expr(), E("x^3"), E("u^3 + x"))});
  out.push_back({"preimage under X = 2x + 1, U = u^3 + x u",
                 pullback(Expr(), E("2*x + 1"), E("u^3 + x*u"))});
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Expr> corpus_equations() {
  std::vector<Expr> out;
  for (const auto& o : parse_corpus_text(
           "flat: 0\nshift: 6\nscaled: -3*q/x\nw: q^2\nlinear_xq: x*q\nquad_u: u^2\ncubic_p: p^3\n"
           "mixed: u*p*q/x\n"))
    out.push_back(o.rhs);
  return out;
}

Outcome criterion6() {
  InvariantOptions opt;
  double worst = 0;
  for (const auto& img : flat_images()) {
    const auto t0 = std::chrono::steady_clock::now();
    const InvariantReport rep = invariants(img.F, opt);
    const double dt = seconds_since(t0);
    worst = std::max(worst, dt);
    bool zeros = rep.frames.size() == 10;
    for (const auto& f : rep.frames)
      for (const char* w : {"QQ", "XPQ", "XXQ"}) zeros = zeros && f.fundamental.at(w).is_zero();
    if (!zeros || rep.verdict != Verdict::linearizable || dt > 60)
      return {false, img.label + ": F = " + render_text(img.F) + " is not (0,0,0) at 10 points"};
    if (!oracle::flat_equivalence(img.F).flat)
      return {false, img.label + ": the closed-form oracle rejects the image"};
  }
  std::ostringstream os;
  os << flat_images().size() << " equations, (0,0,0) at 10 points each, slowest "
     << static_cast<int>(worst * 1000) << " ms";
  return {true, os.str()};
}

Outcome criterion7() {
  std::ostringstream os;
  bool ok = true;
  for (const char* src : {"q^2", "x*q", "u*q"}) {
    const Expr F = E(src);
    const InvariantReport rep = invariants(F, InvariantOptions{});
    int nonzero = 0;
    for (const auto& f : rep.frames) {
      bool some = false;
      for (const char* w : {"QQ", "XPQ", "XXQ"}) some = some || sgn(f.reference(w)) != 0;
      nonzero += some;
    }
    const bool every = nonzero == 10 && rep.frames.size() == 10;
    const bool oracle_flat = oracle::flat_equivalence(F).flat;
    const bool agree = oracle_flat == (rep.verdict == Verdict::linearizable);
    ok = ok && every && agree && rep.verdict == Verdict::not_linearizable;
    os << src << ": " << verdict_str(rep.verdict) << ", nonzero at " << nonzero << "/10" << (agree ? " (oracle agrees)" : " (ORACLE DISAGREES)")
       << "; ";
  }
  // The oracle must agree on every corpus and linearizable equation as well.
  for (const auto& F : corpus_equations()) {
    const InvariantReport rep = invariants(F, InvariantOptions{});
    if (oracle::flat_equivalence(F).flat != (rep.verdict == Verdict::linearizable)) {
      ok = false;
      os << "oracle disagrees on F = " << render_text(F) << "; ";
    }
  }
  return {ok, os.str()};
}

Outcome criterion8() {
  const Expr FB = E("q^2");
  RationalSampler s(2026);
  const Expr X = Expr(s.next_nonzero()) * X_ + Expr(s.next());
  const Expr U = Expr(s.next_nonzero()) * U_ + Expr(s.next()) * X_ * U_ + Expr(s.next()) * X_ * X_ +
                 Expr(s.next()) * U_ * U_;
  const Expr FA = pullback(FB, X, U);
  const GroupJet g = GroupJet::of_map(X, U, 3);
  const FJet fa = build_fjet(FA, 4), fb = build_fjet(FB, 4);
  int matched = 0;
  std::string problem;
  for (std::uint64_t slot = 0; slot < 400 && matched < 10 && problem.empty(); ++slot) {
    JetPoint ja, jb;
    try {
      ja = sample_point(fa, {}, 1000 + slot);
      const Point pt{{base::x(), ja.base[0]}, {base::u(), ja.base[1]}};
      if (sgn(evaluate(g.xi_at(1), pt)) == 0 || sgn(evaluate(g.phi_at(0, 1), pt)) == 0) continue;
      jb = jet_at(fb, map_point(g, ja.base));
    } catch (const DivisionByZero&) {
      continue;
    }
    std::optional<FrameSolution> sa, sb;
    try {
      sa = solve_at_jet(ja, 4);
      sb = solve_at_jet(jb, 4);
    } catch (const DegeneratePoint&) {
      continue;
    }
    if (!(sa->branch == sb->branch)) problem = "branch tags differ";
    if (sa->branch.kind != Branch::generic) continue;
    for (const auto& [w, v] : sa->generic->extras)
      if (!(sb->generic->extras.at(w) == v)) problem = "R_" + w + " differs";
    if (problem.empty()) ++matched;
  }
  if (!problem.empty()) return {false, problem};
  return {matched >= 10, "X = " + render_text(X) + ", U = " + render_text(U) + ": " + std::to_string(matched) +
                             " generic point pairs with equal branch tags and fourth-order invariants"};
}

Outcome criterion9(const std::string& corpus) {
  RunConfig cfg;
  cfg.command = "classify";
  cfg.corpus = corpus;
  cfg.format = Format::machine;
  std::ostringstream a, b, err;
  const int ea = cli::execute(cfg, a, err);
  const int eb = cli::execute(cfg, b, err);
  const bool ok = ea == 0 && eb == 0 && a.str() == b.str() && !a.str().empty();
  return {ok, std::to_string(a.str().size()) + " bytes, identical: " + (a.str() == b.str() ? "yes" : "no") +
                  (err.str().empty() ? "" : "; " + err.str())};
}

Outcome criterion10() {
  std::vector<Expr> eqs = corpus_equations();
  for (const auto& img : flat_images()) eqs.push_back(img.F);
  int frames = 0, stages = 0;
  for (const auto& F : eqs) {
    const InvariantReport rep = invariants(F, InvariantOptions{});
    for (const auto& f : rep.frames) {
      ++frames;
      for (const auto& s : f.stages) {
        ++stages;
        if (!s.residual.is_zero())
          return {false, "R_" + s.word + " residual " + render_text(s.residual)};
      }
      if (f.generic) {
        for (const auto& s : f.generic->stages) {
          ++stages;
          if (!s.residual.is_zero()) return {false, "R_" + s.word + " residual " + render_text(s.residual)};
        }
        for (const auto& r : f.generic->residuals_in_extension) {
          ++stages;
          if (!r.ends_with(": [0, 0, 0]")) return {false, "generic residual " + r};
        }
      }
    }
  }
  return {true, std::to_string(eqs.size()) + " equations, " + std::to_string(frames) + " frames, " +
                    std::to_string(stages) + " stage equations exact"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string corpus = MFRAME_DATA_DIR "/corpus.ode";
  std::vector<int> allow_red;
  app.add_option("--corpus", corpus, "corpus for the determinism run");
  app.add_option("--allow-red", allow_red, "criteria known to fail; still printed as FAIL");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"action exactness", criterion1},
      {"group law", criterion2},
      {"determining system", criterion3},
      {"Maurer-Cartan relations and recurrence", criterion4},
      {"structure equations", criterion5},
      {"linearizable corpus", criterion6},
      {"non-linearizable detection", criterion7},
      {"invariance", criterion8},
      {"determinism", [&] { return criterion9(corpus); }},
      {"cross-section residuals", criterion10},
  };
  const double limits[10] = {1, 30, 60, 60, 120, 600, 600, 600, 600, 600};
  const std::set<int> red(allow_red.begin(), allow_red.end());
  int unexpected = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = seconds_since(t0);
    if (dt > limits[i]) {
      o.pass = false;
      o.detail += "; runtime over the limit";
    }
    std::cout << "criterion " << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << " ["
              << criteria[i].first << ", " << static_cast<long>(dt * 1000) << " ms] " << o.detail << std::endl;
    if (!o.pass && !red.count(static_cast<int>(i + 1))) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
