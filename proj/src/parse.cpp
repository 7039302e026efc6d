#include <algorithm>
#include <array>
#include <cctype>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "mframe/parse.hpp"

namespace mf {

ParseError::ParseError(const std::string& msg, std::size_t off)
    : std::runtime_error(msg + " at byte " + std::to_string(off)), offset(off) {}

CorpusError::CorpusError(std::vector<CorpusLineError> errs)
    : std::runtime_error([&] {
        std::string s;
        for (const auto& e : errs) {
          if (!s.empty()) s += "\n";
          s += "line " + std::to_string(e.line) + ": " + e.message;
        }
        return s;
      }()),
      errors(std::move(errs)) {}

namespace {

constexpr int kMaxExponent = 256;

const std::set<std::string, std::less<>>& transcendental_names() {
  static const std::set<std::string, std::less<>> names = {
      "sin",  "cos",  "tan",  "cot",  "sec",  "csc",    "exp",    "log",  "ln",
      "sqrt", "sinh", "cosh", "tanh", "asin", "acos",   "atan",   "arcsin",
      "arccos", "arctan", "abs", "pi", "erf", "gamma", "lg", "log10", "cbrt"};
  return names;
}

std::optional<Sym> variable(std::string_view id) {
  if (id == "x") return base::x();
  if (id == "u" || id == "y") return base::u();
  if (id == "p" || id == "y1") return base::p();
  if (id == "q" || id == "y2") return base::q();
  return std::nullopt;
}

enum class Tok { num, ident, plus, minus, star, slash, caret, lparen, rparen, lbrace, rbrace, frac, end };

struct Token {
  Tok kind;
  std::size_t pos;
  std::string text;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    while (true) {
      skip_space();
      if (i_ >= s_.size()) {
        out.push_back({Tok::end, i_, ""});
        return out;
      }
      std::size_t start = i_;
      char c = s_[i_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (i_ < s_.size() && (s_[i_] == '.' || s_[i_] == 'e' || s_[i_] == 'E'))
          throw ParseError("decimal literals are not allowed, use a fraction", start);
        out.push_back({Tok::num, start, std::string(s_.substr(start, i_ - start))});
        continue;
      }
      if (c == '.') throw ParseError("decimal literals are not allowed, use a fraction", start);
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (i_ < s_.size() &&
               (std::isalnum(static_cast<unsigned char>(s_[i_])) || s_[i_] == '_'))
          ++i_;
        out.push_back({Tok::ident, start, std::string(s_.substr(start, i_ - start))});
        continue;
      }
      if (c == '\\') {
        ++i_;
        while (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) ++i_;
        std::string_view cmd = s_.substr(start + 1, i_ - start - 1);
        if (cmd == "cdot" || cmd == "times") {
          out.push_back({Tok::star, start, "*"});
        } else if (cmd == "frac" || cmd == "dfrac") {
          out.push_back({Tok::frac, start, "\\frac"});
        } else if (cmd == "left" || cmd == "right") {
          skip_space();
          if (i_ < s_.size() && (s_[i_] == '(' || s_[i_] == ')')) {
            out.push_back({s_[i_] == '(' ? Tok::lparen : Tok::rparen, i_, std::string(1, s_[i_])});
            ++i_;
          } else {
            throw ParseError("expected a parenthesis after \\" + std::string(cmd), i_);
          }
        } else if (cmd.empty() && i_ < s_.size() && (s_[i_] == ',' || s_[i_] == ';' || s_[i_] == '!')) {
          ++i_;  // LaTeX spacing commands
        } else {
          throw ParseError("unsupported LaTeX command \\" + std::string(cmd), start);
        }
        continue;
      }
      Tok k;
      switch (c) {
        case '+': k = Tok::plus; break;
        case '-': k = Tok::minus; break;
        case '*': k = Tok::star; break;
        case '/': k = Tok::slash; break;
        case '^': k = Tok::caret; break;
        case '(': k = Tok::lparen; break;
        case ')': k = Tok::rparen; break;
        case '{': k = Tok::lbrace; break;
        case '}': k = Tok::rbrace; break;
        default:
          throw ParseError(std::string("unexpected character '") + c + "'", start);
      }
      ++i_;
      out.push_back({k, start, std::string(1, c)});
    }
  }

 private:
  void skip_space() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  std::string_view s_;
  std::size_t i_ = 0;
};

class Parser {
 public:
  explicit Parser(std::vector<Token> toks) : t_(std::move(toks)) {}

  Expr parse() {
    Expr e = sum();
    if (peek().kind != Tok::end) {
      if (starts_factor(peek().kind))
        throw ParseError("missing '*' between factors", peek().pos);
      throw ParseError("unexpected '" + peek().text + "'", peek().pos);
    }
    return e;
  }

 private:
  const Token& peek() const { return t_[k_]; }
  const Token& next() { return t_[k_++]; }

  static bool starts_factor(Tok k) {
    return k == Tok::num || k == Tok::ident || k == Tok::lparen || k == Tok::lbrace || k == Tok::frac;
  }

  void expect(Tok k, const char* what) {
    if (peek().kind != k) throw ParseError(std::string("expected ") + what, peek().pos);
    ++k_;
  }

  Expr sum() {
    Expr acc = product();
    while (peek().kind == Tok::plus || peek().kind == Tok::minus) {
      bool minus = next().kind == Tok::minus;
      Expr rhs = product();
      acc = minus ? acc - rhs : acc + rhs;
    }
    return acc;
  }

  Expr product() {
    Expr acc = unary();
    while (true) {
      Tok k = peek().kind;
      if (k == Tok::star || k == Tok::slash) {
        std::size_t pos = next().pos;
        Expr rhs = unary();
        if (k == Tok::star) {
          acc = acc * rhs;
        } else {
          if (rhs.is_zero()) throw ParseError("division by zero", pos);
          acc = acc / rhs;
        }
      } else if (starts_factor(k)) {
        throw ParseError("missing '*' between factors", peek().pos);
      } else {
        return acc;
      }
    }
  }

  Expr unary() {
    if (peek().kind == Tok::minus) {
      next();
      return -unary();
    }
    if (peek().kind == Tok::plus) {
      next();
      return unary();
    }
    return power();
  }

  Expr power() {
    Expr b = primary();
    if (peek().kind != Tok::caret) return b;
    next();
    std::size_t pos = peek().pos;
    Expr ex = unary();
    auto c = ex.constant();
    if (!c || c->get_den() != 1) throw ParseError("exponent must be an integer", pos);
    if (abs(c->get_num()) > kMaxExponent) throw ParseError("exponent is too large", pos);
    int n = static_cast<int>(c->get_num().get_si());
    if (n < 0 && b.is_zero()) throw ParseError("division by zero", pos);
    return b.pow(n);
  }

  Expr primary() {
    const Token& tk = peek();
    switch (tk.kind) {
      case Tok::num: {
        next();
        mpz_class z(tk.text);
        return Expr(Q(z));
      }
      case Tok::ident: {
        next();
        if (auto s = variable(tk.text)) return Expr(*s);
        if (transcendental_names().count(tk.text))
          throw ParseError("transcendental function '" + tk.text + "' is not supported", tk.pos);
        throw ParseError("unknown identifier '" + tk.text + "'", tk.pos);
      }
      case Tok::lparen: {
        next();
        Expr e = sum();
        expect(Tok::rparen, "')'");
        return e;
      }
      case Tok::lbrace: {
        next();
        Expr e = sum();
        expect(Tok::rbrace, "'}'");
        return e;
      }
      case Tok::frac: {
        next();
        expect(Tok::lbrace, "'{' after \\frac");
        Expr n = sum();
        expect(Tok::rbrace, "'}'");
        std::size_t pos = peek().pos;
        expect(Tok::lbrace, "'{' for the denominator");
        Expr d = sum();
        expect(Tok::rbrace, "'}'");
        if (d.is_zero()) throw ParseError("division by zero", pos);
        return n / d;
      }
      case Tok::end:
        throw ParseError("unexpected end of input", tk.pos);
      default:
        throw ParseError("unexpected '" + tk.text + "'", tk.pos);
    }
  }

  std::vector<Token> t_;
  std::size_t k_ = 0;
};

bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Expr parse_expr(std::string_view text) {
  Lexer lx(text);
  Parser ps(lx.run());
  return ps.parse();
}

std::vector<OdeInput> parse_corpus(std::istream& in) {
  std::vector<OdeInput> out;
  std::vector<CorpusLineError> errs;
  std::map<std::string, std::size_t> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view body = line;
    if (auto h = body.find('#'); h != std::string_view::npos) body = body.substr(0, h);
    if (trim(body).empty()) continue;
    auto colon = body.find(':');
    if (colon == std::string_view::npos) {
      errs.push_back({lineno, "expected 'name: expression'"});
      continue;
    }
    std::string name(trim(body.substr(0, colon)));
    std::string_view rhs_text = body.substr(colon + 1);
    if (!valid_name(name)) {
      errs.push_back({lineno, "invalid name '" + name + "'"});
      continue;
    }
    if (auto it = seen.find(name); it != seen.end()) {
      errs.push_back({lineno, "duplicate name \"" + name + "\" (first defined on line " +
                                  std::to_string(it->second) + ")"});
      continue;
    }
    try {
      Expr e = parse_expr(rhs_text);
      seen.emplace(name, lineno);
      out.push_back({name, std::move(e), std::string(trim(rhs_text))});
    } catch (const ParseError& pe) {
      std::size_t col = colon + 1 + pe.offset;
      std::string msg = pe.what();
      msg = msg.substr(0, msg.rfind(" at byte "));
      errs.push_back({lineno, msg + " at byte " + std::to_string(col)});
    } catch (const ExprError& ee) {
      errs.push_back({lineno, ee.what()});
    }
  }
  if (!errs.empty()) throw CorpusError(std::move(errs));
  return out;
}

std::vector<OdeInput> parse_corpus_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

}  // namespace mf
