#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mframe/expr.hpp"

namespace mf {

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t offset);
  std::size_t offset;
};

// Grammar over x, u, p, q (aliases y, y1, y2). `*` is mandatory, `^` takes an
// integer exponent and binds tighter than unary minus. The LaTeX forms
// \frac{a}{b}, \cdot, braces and \left( \right) are accepted as well.
Expr parse_expr(std::string_view text);

struct OdeInput {
  std::string name;
  Expr rhs;
  std::string source;
};

struct CorpusLineError {
  std::size_t line;
  std::string message;
};

struct CorpusError : std::runtime_error {
  explicit CorpusError(std::vector<CorpusLineError> errs);
  std::vector<CorpusLineError> errors;
};

std::vector<OdeInput> parse_corpus(std::istream& in);
std::vector<OdeInput> parse_corpus_text(std::string_view text);

enum class Format { text, latex, machine };

std::string render(const Expr& e, Format f);
std::string render_text(const Expr& e);
std::string render_latex(const Expr& e);

using Json = nlohmann::ordered_json;

// Machine encoding: {"num": [[coefficient, {symbol: exponent}], ...], "den": [...]}
Json to_machine(const Expr& e);
Json q_to_json(const Q& q);

}  // namespace mf
