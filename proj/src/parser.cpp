#include "loopbound/parser.hpp"

#include <cctype>
#include <map>

namespace loopbound {

namespace {

enum class Tok { LParen, RParen, Comma, Arrow, GuardSep, And, Rel, Plus, Minus, Star, Ident, Number, End };

struct Token {
  Tok kind;
  std::string text;
  int line, col;
};

struct Lexer {
  const std::string& s;
  size_t pos = 0;
  int line = 1, col = 1;
  Token cur;

  explicit Lexer(const std::string& text) : s(text) { advance(); }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(cur.line, cur.col, msg); }

  void bump(size_t n) {
    for (size_t i = 0; i < n && pos < s.size(); ++i, ++pos) {
      if (s[pos] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  }

  void skipWs() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) bump(1);
  }

  bool startsWith(const char* lit) const { return s.compare(pos, std::char_traits<char>::length(lit), lit) == 0; }

  void advance() {
    skipWs();
    cur.line = line;
    cur.col = col;
    if (pos >= s.size()) {
      cur = {Tok::End, "", line, col};
      return;
    }
    char c = s[pos];
    auto take = [&](Tok k, size_t n) {
      cur.kind = k;
      cur.text = s.substr(pos, n);
      bump(n);
    };
    if (startsWith("->")) return take(Tok::Arrow, 2);
    if (startsWith(":|:")) return take(Tok::GuardSep, 3);
    if (startsWith("&&")) return take(Tok::And, 2);
    if (startsWith("<=") || startsWith(">=")) return take(Tok::Rel, 2);
    if (c == '<' || c == '>' || c == '=') return take(Tok::Rel, 1);
    switch (c) {
      case '(': return take(Tok::LParen, 1);
      case ')': return take(Tok::RParen, 1);
      case ',': return take(Tok::Comma, 1);
      case '+': return take(Tok::Plus, 1);
      case '-': return take(Tok::Minus, 1);
      case '*': return take(Tok::Star, 1);
      default: break;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t n = 0;
      while (pos + n < s.size() && std::isdigit(static_cast<unsigned char>(s[pos + n]))) ++n;
      return take(Tok::Number, n);
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t n = 0;
      while (pos + n < s.size()) {
        char d = s[pos + n];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '\'') {
          ++n;
        } else {
          break;
        }
      }
      return take(Tok::Ident, n);
    }
    throw ParseError(line, col, std::string("unexpected character '") + c + "'");
  }
};

struct Parser {
  Lexer lex;
  std::vector<VarId> pvars;
  std::map<std::string, VarId> lhsBinding;  // per rule

  explicit Parser(const std::string& text) : lex(text) {}

  void expect(Tok k, const char* what) {
    if (lex.cur.kind != k) lex.fail(std::string("expected ") + what + ", got '" + lex.cur.text + "'");
    lex.advance();
  }

  std::string expectIdent(const char* what) {
    if (lex.cur.kind != Tok::Ident) lex.fail(std::string("expected ") + what + ", got '" + lex.cur.text + "'");
    std::string t = lex.cur.text;
    lex.advance();
    return t;
  }

  void expectKeyword(const char* kw) {
    if (lex.cur.kind != Tok::Ident || lex.cur.text != kw) lex.fail(std::string("expected keyword ") + kw);
    lex.advance();
  }

  VarId resolveVar(const std::string& name) {
    auto it = lhsBinding.find(name);
    if (it != lhsBinding.end()) return it->second;
    VarId v = symbols::var(name);
    for (VarId pv : pvars) {
      if (pv == v)
        lex.fail("variable " + name + " is a declared program variable but is not bound by the rule's left-hand side");
    }
    return v;  // temporary variable
  }

  Polynomial parseFactor() {
    if (lex.cur.kind == Tok::Minus) {
      lex.advance();
      return -parseFactor();
    }
    if (lex.cur.kind == Tok::Number) {
      Int c(lex.cur.text);
      lex.advance();
      return Polynomial::constant(c);
    }
    if (lex.cur.kind == Tok::Ident) {
      std::string name = lex.cur.text;
      lex.advance();
      return Polynomial::variable(resolveVar(name));
    }
    if (lex.cur.kind == Tok::LParen) {
      lex.advance();
      Polynomial e = parseExpr();
      expect(Tok::RParen, "')'");
      return e;
    }
    lex.fail("expected expression");
  }

  Polynomial parseTerm() {
    Polynomial e = parseFactor();
    while (lex.cur.kind == Tok::Star) {
      lex.advance();
      e = e * parseFactor();
    }
    return e;
  }

  Polynomial parseExpr() {
    Polynomial e = parseTerm();
    while (lex.cur.kind == Tok::Plus || lex.cur.kind == Tok::Minus) {
      bool plus = lex.cur.kind == Tok::Plus;
      lex.advance();
      Polynomial rhs = parseTerm();
      e = plus ? e + rhs : e - rhs;
    }
    return e;
  }

  void parseAtom(Constraint& c) {
    Polynomial a = parseExpr();
    if (lex.cur.kind != Tok::Rel) lex.fail("expected relation in guard");
    std::string rel = lex.cur.text;
    lex.advance();
    Polynomial b = parseExpr();
    if (rel == "<=") {
      c.addLeq(a, b);
    } else if (rel == "<") {
      c.addLt(a, b);
    } else if (rel == ">=") {
      c.addGeq(a, b);
    } else if (rel == ">") {
      c.addGt(a, b);
    } else {
      c.addEq(a, b);
    }
  }

  IntegerProgram parse() {
    // (GOAL COMPLEXITY)
    expect(Tok::LParen, "'('");
    expectKeyword("GOAL");
    expectKeyword("COMPLEXITY");
    expect(Tok::RParen, "')'");
    // (STARTTERM (FUNCTIONSYMBOLS loc))
    expect(Tok::LParen, "'('");
    expectKeyword("STARTTERM");
    expect(Tok::LParen, "'('");
    expectKeyword("FUNCTIONSYMBOLS");
    std::string startName = expectIdent("start location");
    expect(Tok::RParen, "')'");
    expect(Tok::RParen, "')'");
    // (VAR v1 v2 ...)
    expect(Tok::LParen, "'('");
    expectKeyword("VAR");
    while (lex.cur.kind == Tok::Ident) {
      VarId v = symbols::var(lex.cur.text);
      for (VarId seen : pvars)
        if (seen == v) lex.fail("duplicate program variable " + lex.cur.text);
      pvars.push_back(v);
      lex.advance();
    }
    expect(Tok::RParen, "')'");
    // (RULES rule*)
    expect(Tok::LParen, "'('");
    expectKeyword("RULES");
    LocId start = symbols::loc(startName);
    std::vector<Transition> transitions;
    std::set<LocId> locs{start};
    int nextId = 0;
    while (lex.cur.kind == Tok::Ident) {
      Transition t;
      t.id = nextId++;
      int ruleLine = lex.cur.line, ruleCol = lex.cur.col;
      t.src = symbols::loc(expectIdent("location"));
      locs.insert(t.src);
      // lhs argument list establishes the positional binding to PV
      lhsBinding.clear();
      expect(Tok::LParen, "'('");
      size_t argIdx = 0;
      if (lex.cur.kind != Tok::RParen) {
        while (true) {
          std::string arg = expectIdent("argument variable");
          if (argIdx >= pvars.size()) lex.fail("left-hand side has more arguments than declared variables");
          if (!lhsBinding.emplace(arg, pvars[argIdx]).second) lex.fail("duplicate left-hand argument " + arg);
          ++argIdx;
          if (lex.cur.kind != Tok::Comma) break;
          lex.advance();
        }
      }
      if (argIdx != pvars.size())
        throw ParseError(ruleLine, ruleCol, "left-hand side arity does not match the VAR declaration");
      expect(Tok::RParen, "')'");
      expect(Tok::Arrow, "'->'");
      t.tgt = symbols::loc(expectIdent("location"));
      locs.insert(t.tgt);
      expect(Tok::LParen, "'('");
      size_t exprIdx = 0;
      if (lex.cur.kind != Tok::RParen) {
        while (true) {
          if (exprIdx >= pvars.size())
            lex.fail("right-hand side has more arguments than declared variables");
          t.update[pvars[exprIdx]] = parseExpr();
          ++exprIdx;
          if (lex.cur.kind != Tok::Comma) break;
          lex.advance();
        }
      }
      if (exprIdx != pvars.size())
        throw ParseError(ruleLine, ruleCol, "right-hand side arity does not match the VAR declaration");
      expect(Tok::RParen, "')'");
      if (lex.cur.kind == Tok::GuardSep) {
        lex.advance();
        parseAtom(t.guard);
        while (lex.cur.kind == Tok::And) {
          lex.advance();
          parseAtom(t.guard);
        }
      }
      transitions.push_back(std::move(t));
    }
    expect(Tok::RParen, "')'");
    if (lex.cur.kind != Tok::End) lex.fail("trailing input after (RULES ...)");

    for (auto& t : transitions)
      if (t.tgt == start)
        throw SemanticError("rule " + t.name() + " targets the initial location " + startName);

    std::vector<LocId> locList(locs.begin(), locs.end());
    return IntegerProgram(pvars, locList, start, std::move(transitions));
  }
};

}  // namespace

IntegerProgram parseProgram(const std::string& text) { return Parser(text).parse(); }

}  // namespace loopbound
