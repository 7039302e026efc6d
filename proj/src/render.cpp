#include "mframe/parse.hpp"

namespace mf {

namespace {

std::string latex_symbol(Sym s) {
  const std::string& n = sym_name(s);
  auto us = n.find('_');
  std::string head = us == std::string::npos ? n : n.substr(0, us);
  if (head == "xi") head = "\\xi";
  else if (head == "phi") head = "\\varphi";
  else if (head == "alpha") head = "\\alpha";
  else if (head == "beta") head = "\\beta";
  if (us == std::string::npos) return head;
  return head + "_{" + n.substr(us + 1) + "}";
}

std::string monomial_text(const Monomial& m, bool latex) {
  std::string s;
  for (const auto& [id, e] : m.entries()) {
    if (!s.empty()) s += latex ? " \\cdot " : "*";
    s += latex ? latex_symbol(Sym{id}) : sym_name(Sym{id});
    if (e != 1) s += latex ? "^{" + std::to_string(e) + "}" : "^" + std::to_string(e);
  }
  return s;
}

std::string coefficient_text(const Q& c, bool latex) {
  if (!latex || c.get_den() == 1) return q_to_string(c);
  return "\\frac{" + c.get_num().get_str() + "}{" + c.get_den().get_str() + "}";
}

std::string poly_text(const Poly& p, bool latex) {
  if (p.is_zero()) return "0";
  std::string s;
  bool first = true;
  for (const auto& t : p.terms()) {
    bool neg = sgn(t.c) < 0;
    Q a = abs(t.c);
    if (first)
      s += neg ? "-" : "";
    else
      s += neg ? " - " : " + ";
    first = false;
    if (t.m.is_one()) {
      s += coefficient_text(a, latex);
    } else if (a == 1) {
      s += monomial_text(t.m, latex);
    } else {
      s += coefficient_text(a, latex) + (latex ? " \\cdot " : "*") + monomial_text(t.m, latex);
    }
  }
  return s;
}

Json poly_json(const Poly& p) {
  Json arr = Json::array();
  for (const auto& t : p.terms()) {
    Json mono = Json::object();
    for (const auto& [id, e] : t.m.entries()) mono[sym_name(Sym{id})] = e;
    arr.push_back(Json::array({q_to_string(t.c), std::move(mono)}));
  }
  return arr;
}

}  // namespace

std::string render_text(const Expr& e) {
  if (e.is_polynomial()) return poly_text(e.num(), false);
  return "(" + poly_text(e.num(), false) + ")/(" + poly_text(e.den(), false) + ")";
}

std::string render_latex(const Expr& e) {
  if (e.is_polynomial()) return poly_text(e.num(), true);
  return "\\frac{" + poly_text(e.num(), true) + "}{" + poly_text(e.den(), true) + "}";
}

Json to_machine(const Expr& e) {
  Json j = Json::object();
  j["num"] = poly_json(e.num());
  j["den"] = poly_json(e.den());
  return j;
}

Json q_to_json(const Q& q) { return q_to_string(q); }

std::string render(const Expr& e, Format f) {
  switch (f) {
    case Format::text: return render_text(e);
    case Format::latex: return render_latex(e);
    case Format::machine: return to_machine(e).dump();
  }
  return {};
}

}  // namespace mf
