#include "lmr/surface.hpp"

#include <cstring>
#include <map>

namespace lmr {

// ---------------------------------------------------------------------------
// Lexer

namespace {

struct Tok {
  enum K { Ident, Num, Sym, End } k = End;
  std::string text;
  Span span;
};

struct Lexer {
  const std::string& src;
  size_t pos = 0;
  int line = 1, col = 1;
  std::vector<Tok> toks;

  explicit Lexer(const std::string& s) : src(s) {}

  void advance(size_t n) {
    for (size_t i = 0; i < n && pos < src.size(); i++, pos++) {
      if (src[pos] == '\n') {
        line++;
        col = 1;
      } else {
        col++;
      }
    }
  }

  Span here(size_t len) const {
    Span sp;
    sp.begin = static_cast<int32_t>(pos);
    sp.end = static_cast<int32_t>(pos + len);
    sp.line = line;
    sp.col = col;
    return sp;
  }

  void push(Tok::K k, std::string text, size_t rawLen) {
    Tok t;
    t.k = k;
    t.span = here(rawLen);
    t.text = std::move(text);
    toks.push_back(std::move(t));
    advance(rawLen);
  }

  // Decode the UTF-8 codepoint at pos; returns byte length (0 if ASCII).
  uint32_t codepoint(size_t at, int& len) const {
    unsigned char c = static_cast<unsigned char>(src[at]);
    if (c < 0x80) {
      len = 1;
      return c;
    }
    uint32_t cp = 0;
    int n = 0;
    if ((c & 0xE0) == 0xC0) {
      cp = c & 0x1F;
      n = 2;
    } else if ((c & 0xF0) == 0xE0) {
      cp = c & 0x0F;
      n = 3;
    } else if ((c & 0xF8) == 0xF0) {
      cp = c & 0x07;
      n = 4;
    } else {
      len = 1;
      return c;
    }
    if (at + n > src.size()) {
      len = 1;
      return c;
    }
    for (int i = 1; i < n; i++) cp = (cp << 6) | (static_cast<unsigned char>(src[at + i]) & 0x3F);
    len = n;
    return cp;
  }

  static bool identStart(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool identCont(char c) {
    return identStart(c) || (c >= '0' && c <= '9') || c == '\'';
  }

  void run() {
    static const char* syms[] = {":=", "|->", "|-", "|>", "->", "-*", "=>", "<-", "/\\",
                                 "\\/", "\\\\", "(", ")", "{", "}", "[", "]", ",", ".",
                                 ";", ":", "|", "*", "+", "=", "\\", "~"};
    while (pos < src.size()) {
      char c = src[pos];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance(1);
        continue;
      }
      if (c == '-' && pos + 1 < src.size() && src[pos + 1] == '-') {
        while (pos < src.size() && src[pos] != '\n') advance(1);
        continue;
      }
      if (identStart(c)) {
        size_t j = pos;
        while (j < src.size()) {
          if (identCont(src[j])) {
            j++;
            continue;
          }
          int len;
          uint32_t cp = codepoint(j, len);
          if (cp >= 0x80 && isIdentCp(cp)) {
            j += static_cast<size_t>(len);
            continue;
          }
          break;
        }
        push(Tok::Ident, src.substr(pos, j - pos), j - pos);
        continue;
      }
      if (c >= '0' && c <= '9') {
        size_t j = pos;
        while (j < src.size() && src[j] >= '0' && src[j] <= '9') j++;
        push(Tok::Num, src.substr(pos, j - pos), j - pos);
        continue;
      }
      if (static_cast<unsigned char>(c) >= 0x80) {
        int len;
        uint32_t cp = codepoint(pos, len);
        if (lexUnicode(cp, static_cast<size_t>(len))) continue;
        // unknown multibyte: start of an identifier
        size_t j = pos + static_cast<size_t>(len);
        while (j < src.size()) {
          if (identCont(src[j])) {
            j++;
            continue;
          }
          int l2;
          uint32_t cp2 = codepoint(j, l2);
          if (cp2 >= 0x80 && isIdentCp(cp2)) {
            j += static_cast<size_t>(l2);
            continue;
          }
          break;
        }
        push(Tok::Ident, src.substr(pos, j - pos), j - pos);
        continue;
      }
      bool matched = false;
      for (const char* s : syms) {
        size_t n = std::strlen(s);
        if (src.compare(pos, n, s) == 0) {
          push(Tok::Sym, s, n);
          matched = true;
          break;
        }
      }
      if (!matched) push(Tok::Sym, std::string(1, c), 1);
    }
    Tok end;
    end.k = Tok::End;
    end.span = here(0);
    toks.push_back(end);
  }

  // Unicode aliases for the ASCII notation.
  bool lexUnicode(uint32_t cp, size_t len) {
    switch (cp) {
      case 0x2200: push(Tok::Ident, "forall", len); return true;   // ∀
      case 0x2203: push(Tok::Ident, "exists", len); return true;   // ∃
      case 0x03BB: push(Tok::Sym, "\\", len); return true;         // λ
      case 0x039B: push(Tok::Sym, "\\\\", len); return true;       // Λ
      case 0x03BC: push(Tok::Ident, "mu", len); return true;       // μ
      case 0x25B7: push(Tok::Sym, "|>", len); return true;         // ▷
      case 0x25A1: push(Tok::Ident, "box", len); return true;      // □
      case 0x21A6: push(Tok::Sym, "|->", len); return true;        // ↦
      case 0x2217: push(Tok::Sym, "*", len); return true;          // ∗
      case 0x22A4: push(Tok::Ident, "top", len); return true;      // ⊤
      case 0x22A5: push(Tok::Ident, "bot", len); return true;      // ⊥
      case 0x2192: push(Tok::Sym, "->", len); return true;         // →
      case 0x21D2: push(Tok::Sym, "=>", len); return true;         // ⇒
      case 0x2227: push(Tok::Sym, "/\\", len); return true;        // ∧
      case 0x2228: push(Tok::Sym, "\\/", len); return true;        // ∨
      case 0x22A2: push(Tok::Sym, "|-", len); return true;         // ⊢
      case 0x22B8: push(Tok::Sym, "-*", len); return true;         // ⊸
      case 0x2014: {                                               // — (em dash), as in —∗
        int l2;
        uint32_t nxt = pos + len < src.size() ? codepoint(pos + len, l2) : 0;
        if (nxt == 0x2217 || (pos + len < src.size() && src[pos + len] == '*')) {
          size_t total = len + (nxt == 0x2217 ? static_cast<size_t>(l2) : 1);
          push(Tok::Sym, "-*", total);
          return true;
        }
        return false;
      }
      default:
        return false;
    }
  }

  static bool isIdentCp(uint32_t cp) {
    // Greek letters and subscripts commonly pasted from papers.
    return (cp >= 0x0391 && cp <= 0x03C9 && cp != 0x039B && cp != 0x03BB && cp != 0x03BC) ||
           (cp >= 0x2080 && cp <= 0x2089) || cp == 0x2248;
  }
};

// ---------------------------------------------------------------------------
// Parser

struct ParseFailure {
  ParseError err;
};

struct Parser {
  std::vector<Tok> toks;
  size_t at = 0;
  std::string file;
  std::vector<ParseError>* errors;

  const Tok& peek(size_t ahead = 0) const {
    size_t i = at + ahead;
    return i < toks.size() ? toks[i] : toks.back();
  }
  const Tok& cur() const { return peek(0); }
  bool isSym(const char* s, size_t ahead = 0) const {
    return peek(ahead).k == Tok::Sym && peek(ahead).text == s;
  }
  bool isIdent(const char* s, size_t ahead = 0) const {
    return peek(ahead).k == Tok::Ident && peek(ahead).text == s;
  }
  Tok take() { return toks[at < toks.size() - 1 ? at++ : at]; }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected = {}) {
    throw ParseFailure{ParseError{cur().span, msg, std::move(expected)}};
  }

  void expectSym(const char* s) {
    if (!isSym(s)) fail(std::string("expected '") + s + "', got '" + cur().text + "'", {s});
    take();
  }
  std::string expectIdent(const char* what) {
    if (cur().k != Tok::Ident) fail(std::string("expected ") + what, {"<identifier>"});
    return take().text;
  }
  uint64_t expectNum() {
    if (cur().k != Tok::Num) fail("expected a number", {"<number>"});
    return std::stoull(take().text);
  }

  bool isKeyword(const std::string& s) const {
    static const std::map<std::string, bool>& kw = *new std::map<std::string, bool>{
        {"def", 1},     {"theorem", 1}, {"law", 1},     {"fuel", 1},    {"mu", 1},
        {"forall", 1},  {"exists", 1},  {"nat", 1},     {"prop", 1},    {"list", 1},
        {"ref", 1},     {"T", 1},       {"ret", 1},     {"bind", 1},    {"in", 1},
        {"get", 1},     {"set", 1},     {"new", 1},     {"step", 1},    {"fold", 1},
        {"unfold", 1},  {"pack", 1},    {"unpack", 1},  {"rec", 1},     {"match", 1},
        {"inl", 1},     {"inr", 1},     {"fst", 1},     {"snd", 1},     {"succ", 1},
        {"natrec", 1},  {"listrec", 1}, {"nil", 1},     {"cons", 1},    {"zero", 1},
        {"top", 1},     {"bot", 1},     {"box", 1},     {"wp", 1},      {"loc", 1},
        {"qed", 1},     {"of", 1},      {"as", 1},      {"at", 1},      {"with", 1},
        {"by", 1},      {"back", 1},    {"goal", 1},    {"hyp", 1},     {"occ", 1},
        {"type", 1},    {"rule", 1},    {"normalize", 1}, {"conv", 1},  {"rewrite", 1},
        {"reflect", 1}, {"exact", 1},   {"l", 0},       {"r", 0},
    };
    auto it = kw.find(s);
    return it != kw.end() && it->second;
  }

  // ------------------------------------------------------------------ types

  static SrcTyP mkTy(SrcTy::K k, Span sp) {
    auto t = std::make_shared<SrcTy>();
    t->k = k;
    t->span = sp;
    return std::const_pointer_cast<const SrcTy>(std::static_pointer_cast<SrcTy>(t));
  }
  static std::shared_ptr<SrcTy> newTy(SrcTy::K k, Span sp) {
    auto t = std::make_shared<SrcTy>();
    t->k = k;
    t->span = sp;
    return t;
  }

  SrcTyP type() {
    Span sp = cur().span;
    if (isIdent("mu") || isIdent("forall") || isIdent("exists")) {
      std::string kw = take().text;
      std::string n = expectIdent("a type variable");
      expectSym(".");
      auto t = newTy(kw == "mu" ? SrcTy::Mu : kw == "forall" ? SrcTy::Forall : SrcTy::Exists, sp);
      t->name = n;
      t->a = type();
      return t;
    }
    return arrowTy();
  }

  SrcTyP arrowTy() {
    Span sp = cur().span;
    SrcTyP lhs = sumTy();
    if (isSym("->")) {
      take();
      auto t = newTy(SrcTy::Arrow, sp);
      t->a = lhs;
      t->b = type();
      return t;
    }
    return lhs;
  }

  SrcTyP sumTy() {
    Span sp = cur().span;
    SrcTyP lhs = prodTy();
    if (isSym("+")) {
      take();
      auto t = newTy(SrcTy::Sum, sp);
      t->a = lhs;
      t->b = sumTy();
      return t;
    }
    return lhs;
  }

  SrcTyP prodTy() {
    Span sp = cur().span;
    SrcTyP lhs = appTy();
    if (isSym("*")) {
      take();
      auto t = newTy(SrcTy::Prod, sp);
      t->a = lhs;
      t->b = prodTy();
      return t;
    }
    return lhs;
  }

  SrcTyP appTy() {
    Span sp = cur().span;
    if (isIdent("list") || isIdent("ref") || isIdent("T")) {
      std::string kw = take().text;
      auto t = newTy(kw == "list" ? SrcTy::List : kw == "ref" ? SrcTy::Ref : SrcTy::Monad, sp);
      t->a = atomTy();
      return t;
    }
    if (cur().k == Tok::Ident && !isKeyword(cur().text)) {
      std::string n = take().text;
      std::vector<SrcTyP> args;
      while (canStartAtomTy()) args.push_back(atomTy());
      if (args.empty()) {
        auto t = newTy(SrcTy::Var, sp);
        t->name = n;
        return t;
      }
      auto t = newTy(SrcTy::DefApp, sp);
      t->name = n;
      t->args = std::move(args);
      return t;
    }
    return atomTy();
  }

  bool canStartAtomTy() const {
    if (cur().k == Tok::Ident) return !isKeyword(cur().text) || isIdent("nat") || isIdent("prop");
    if (cur().k == Tok::Num) return cur().text == "1" || cur().text == "0";
    return isSym("(");
  }

  SrcTyP atomTy() {
    Span sp = cur().span;
    if (cur().k == Tok::Num) {
      std::string n = take().text;
      if (n == "1") return newTy(SrcTy::Unit, sp);
      if (n == "0") return newTy(SrcTy::Empty, sp);
      fail("expected a type");
    }
    if (isIdent("nat")) {
      take();
      return newTy(SrcTy::Nat, sp);
    }
    if (isIdent("prop")) {
      take();
      return newTy(SrcTy::Prop, sp);
    }
    if (isSym("(")) {
      take();
      SrcTyP t = type();
      expectSym(")");
      return t;
    }
    if (cur().k == Tok::Ident && !isKeyword(cur().text)) {
      auto t = newTy(SrcTy::Var, sp);
      t->name = take().text;
      return t;
    }
    fail("expected a type");
  }

  // ------------------------------------------------------------------ terms

  static std::shared_ptr<SrcTm> newTm(SrcTm::K k, Span sp) {
    auto t = std::make_shared<SrcTm>();
    t->k = k;
    t->span = sp;
    return t;
  }

  SrcTmP term() { return bindExpr(); }

  SrcTmP bindExpr() {
    Span sp = cur().span;
    // x <- e1; e2
    if (cur().k == Tok::Ident && !isKeyword(cur().text) && isSym("<-", 1)) {
      std::string n = take().text;
      take();  // <-
      SrcTmP head = opExpr();
      expectSym(";");
      auto t = newTm(SrcTm::Bind, sp);
      t->name = n;
      t->kids = {head, bindExpr()};
      return t;
    }
    if (isIdent("bind")) {
      take();
      std::string n = expectIdent("a binder");
      expectSym("=");
      SrcTmP head = term();
      if (!isIdent("in")) fail("expected 'in'", {"in"});
      take();
      auto t = newTm(SrcTm::Bind, sp);
      t->name = n;
      t->kids = {head, bindExpr()};
      return t;
    }
    if (isSym("\\")) {
      take();
      auto t = newTm(SrcTm::Lam, sp);
      if (isSym("(")) {
        take();
        t->name = expectIdent("a binder");
        expectSym(":");
        t->tyAnn = type();
        expectSym(")");
      } else {
        t->name = expectIdent("a binder");
      }
      expectSym(".");
      t->kids = {bindExpr()};
      return t;
    }
    if (isSym("\\\\")) {
      take();
      auto t = newTm(SrcTm::TyLam, sp);
      t->name = expectIdent("a type binder");
      expectSym(".");
      t->kids = {bindExpr()};
      return t;
    }
    if (isIdent("forall") || isIdent("exists")) {
      std::string kw = take().text;
      expectSym("(");
      auto t = newTm(kw == "forall" ? SrcTm::ForallP : SrcTm::ExistsP, sp);
      t->name = expectIdent("a binder");
      expectSym(":");
      t->tyAnn = type();
      expectSym(")");
      expectSym(".");
      t->kids = {bindExpr()};
      return t;
    }
    if (isIdent("rec")) {
      take();
      auto t = newTm(SrcTm::Rec, sp);
      t->name = expectIdent("the recursive function name");
      t->binders = {expectIdent("the argument name")};
      expectSym(".");
      t->kids = {bindExpr()};
      return t;
    }
    if (isIdent("unpack")) {
      take();
      expectSym("(");
      auto t = newTm(SrcTm::Unpack, sp);
      t->name = expectIdent("a type binder");
      expectSym(",");
      t->binders = {expectIdent("a binder")};
      expectSym(")");
      expectSym("=");
      SrcTmP scrut = opExpr();
      if (!isIdent("in")) fail("expected 'in'", {"in"});
      take();
      t->kids = {scrut, bindExpr()};
      return t;
    }
    SrcTmP head = opExpr();
    if (isSym(";")) {
      take();
      auto t = newTm(SrcTm::Bind, sp);
      t->name = "_";
      t->kids = {head, bindExpr()};
      return t;
    }
    return head;
  }

  SrcTmP opExpr() { return impExpr(); }

  SrcTmP impExpr() {
    Span sp = cur().span;
    SrcTmP lhs = orExpr();
    if (isSym("=>")) {
      take();
      auto t = newTm(SrcTm::Imp, sp);
      t->kids = {lhs, impOrBinder()};
      return t;
    }
    return lhs;
  }

  // binders may appear to the right of a connective
  SrcTmP impOrBinder() {
    if (startsBinder()) return bindExpr();
    return impExpr();
  }

  bool startsBinder() const {
    return isSym("\\") || isSym("\\\\") || isIdent("forall") || isIdent("exists") ||
           isIdent("rec") || isIdent("unpack") || isIdent("bind") ||
           (cur().k == Tok::Ident && !isKeyword(cur().text) && isSym("<-", 1));
  }

  SrcTmP orExpr() {
    Span sp = cur().span;
    SrcTmP lhs = andExpr();
    if (isSym("\\/")) {
      take();
      auto t = newTm(SrcTm::Or, sp);
      t->kids = {lhs, startsBinder() ? bindExpr() : orExpr()};
      return t;
    }
    return lhs;
  }

  SrcTmP andExpr() {
    Span sp = cur().span;
    SrcTmP lhs = wandExpr();
    if (isSym("/\\")) {
      take();
      auto t = newTm(SrcTm::And, sp);
      t->kids = {lhs, startsBinder() ? bindExpr() : andExpr()};
      return t;
    }
    return lhs;
  }

  SrcTmP wandExpr() {
    Span sp = cur().span;
    SrcTmP lhs = sepExpr();
    if (isSym("-*")) {
      take();
      auto t = newTm(SrcTm::Wand, sp);
      t->kids = {lhs, startsBinder() ? bindExpr() : wandExpr()};
      return t;
    }
    return lhs;
  }

  SrcTmP sepExpr() {
    Span sp = cur().span;
    SrcTmP lhs = eqExpr();
    if (isSym("*")) {
      take();
      auto t = newTm(SrcTm::Sep, sp);
      t->kids = {lhs, startsBinder() ? bindExpr() : sepExpr()};
      return t;
    }
    return lhs;
  }

  SrcTmP eqExpr() {
    Span sp = cur().span;
    SrcTmP lhs = prefixExpr();
    if (isSym("=") && isSym("{", 1)) {
      take();
      take();
      SrcTyP at = type();
      expectSym("}");
      auto t = newTm(SrcTm::Eq, sp);
      t->tyAnn = at;
      t->kids = {lhs, prefixExpr()};
      return t;
    }
    if (isSym("|->")) {
      take();
      auto t = newTm(SrcTm::PointsTo, sp);
      t->kids = {lhs, prefixExpr()};
      return t;
    }
    return lhs;
  }

  SrcTmP prefixExpr() {
    Span sp = cur().span;
    if (isIdent("box")) {
      take();
      auto t = newTm(SrcTm::Box, sp);
      t->kids = {prefixExpr()};
      return t;
    }
    if (isSym("|>")) {
      take();
      auto t = newTm(SrcTm::Later, sp);
      t->kids = {prefixExpr()};
      return t;
    }
    return appExpr();
  }

  struct KwOp {
    SrcTm::K k;
    int args;
  };

  std::optional<KwOp> kwOp() const {
    if (cur().k != Tok::Ident) return std::nullopt;
    const std::string& s = cur().text;
    if (s == "ret") return KwOp{SrcTm::Ret, 1};
    if (s == "fst") return KwOp{SrcTm::Fst, 1};
    if (s == "snd") return KwOp{SrcTm::Snd, 1};
    if (s == "inl") return KwOp{SrcTm::Inl, 1};
    if (s == "inr") return KwOp{SrcTm::Inr, 1};
    if (s == "fold") return KwOp{SrcTm::Fold, 1};
    if (s == "unfold") return KwOp{SrcTm::Unfold, 1};
    if (s == "get") return KwOp{SrcTm::Get, 1};
    if (s == "new") return KwOp{SrcTm::New, 1};
    if (s == "succ") return KwOp{SrcTm::Succ, 1};
    if (s == "set") return KwOp{SrcTm::Set, 2};
    if (s == "cons") return KwOp{SrcTm::Cons, 2};
    return std::nullopt;
  }

  SrcTmP appExpr() {
    Span sp = cur().span;
    SrcTmP head;
    if (auto op = kwOp()) {
      take();
      auto t = newTm(op->k, sp);
      for (int i = 0; i < op->args; i++) t->kids.push_back(atom());
      head = t;
    } else if (isIdent("pack")) {
      take();
      expectSym("(");
      auto t = newTm(SrcTm::Pack, sp);
      t->tyArgs = {type()};
      expectSym(",");
      t->kids = {term()};
      expectSym(")");
      head = t;
    } else if (isIdent("wp")) {
      take();
      auto t = newTm(SrcTm::Wp, sp);
      t->kids = {atom()};
      expectSym("{");
      t->name = expectIdent("a binder");
      expectSym(".");
      t->kids.push_back(term());
      expectSym("}");
      head = t;
    } else {
      head = atom();
    }
    for (;;) {
      if (canStartAtom()) {
        auto t = newTm(SrcTm::App, cur().span);
        t->kids = {head, atom()};
        head = t;
      } else {
        break;
      }
    }
    return head;
  }

  bool canStartAtom() const {
    if (cur().k == Tok::Num) return true;
    if (isSym("(")) return true;
    if (cur().k == Tok::Ident) {
      const std::string& s = cur().text;
      if (!isKeyword(s)) return true;
      return s == "nil" || s == "top" || s == "bot" || s == "step" || s == "zero" ||
             s == "match" || s == "natrec" || s == "listrec" || s == "loc";
    }
    return false;
  }

  SrcTmP atom() {
    Span sp = cur().span;
    if (cur().k == Tok::Num) {
      auto t = newTm(SrcTm::NatLit, sp);
      t->num = std::stoull(take().text);
      return withTyApps(t);
    }
    if (isIdent("zero")) {
      take();
      auto t = newTm(SrcTm::NatLit, sp);
      t->num = 0;
      return t;
    }
    if (isIdent("nil")) {
      take();
      return withTyApps(newTm(SrcTm::Nil, sp));
    }
    if (isIdent("top")) {
      take();
      return newTm(SrcTm::Top, sp);
    }
    if (isIdent("bot")) {
      take();
      return newTm(SrcTm::Bot, sp);
    }
    if (isIdent("step")) {
      take();
      return newTm(SrcTm::Step, sp);
    }
    if (isIdent("loc")) {
      take();
      auto t = newTm(SrcTm::LocLit, sp);
      t->num = expectNum();
      return t;
    }
    if (isIdent("match")) {
      take();
      auto t = newTm(SrcTm::Match, sp);
      t->kids.push_back(atom());
      expectSym("{");
      if (!isIdent("inl")) fail("expected 'inl' branch", {"inl"});
      take();
      t->name = expectIdent("a binder");
      expectSym("=>");
      t->kids.push_back(term());
      expectSym("|");
      if (!isIdent("inr")) fail("expected 'inr' branch", {"inr"});
      take();
      t->binders = {expectIdent("a binder")};
      expectSym("=>");
      t->kids.push_back(term());
      expectSym("}");
      return t;
    }
    if (isIdent("natrec")) {
      take();
      auto t = newTm(SrcTm::NatRec, sp);
      t->kids.push_back(atom());
      expectSym("{");
      if (!isIdent("zero")) fail("expected 'zero' branch", {"zero"});
      take();
      expectSym("=>");
      t->kids.push_back(term());
      expectSym("|");
      if (!isIdent("succ")) fail("expected 'succ' branch", {"succ"});
      take();
      t->name = expectIdent("the predecessor binder");
      expectSym(",");
      t->binders = {expectIdent("the recursive-result binder")};
      expectSym("=>");
      t->kids.push_back(term());
      expectSym("}");
      return t;
    }
    if (isIdent("listrec")) {
      take();
      auto t = newTm(SrcTm::ListRec, sp);
      t->kids.push_back(atom());
      expectSym("{");
      if (!isIdent("nil")) fail("expected 'nil' branch", {"nil"});
      take();
      expectSym("=>");
      t->kids.push_back(term());
      expectSym("|");
      if (!isIdent("cons")) fail("expected 'cons' branch", {"cons"});
      take();
      t->name = expectIdent("the head binder");
      t->binders = {expectIdent("the tail binder")};
      expectSym(",");
      t->binders.push_back(expectIdent("the recursive-result binder"));
      expectSym("=>");
      t->kids.push_back(term());
      expectSym("}");
      return t;
    }
    if (isSym("(")) {
      take();
      if (isSym(")")) {
        take();
        return withTyApps(newTm(SrcTm::Unit, sp));
      }
      SrcTmP inner = term();
      if (isSym(",")) {
        take();
        auto t = newTm(SrcTm::Pair, sp);
        t->kids = {inner, term()};
        expectSym(")");
        return withTyApps(t);
      }
      if (isSym(":")) {
        take();
        auto t = newTm(SrcTm::Ascribe, sp);
        t->tyAnn = type();
        t->kids = {inner};
        expectSym(")");
        return withTyApps(t);
      }
      expectSym(")");
      return withTyApps(inner);
    }
    if (cur().k == Tok::Ident && !isKeyword(cur().text)) {
      auto t = newTm(SrcTm::Var, sp);
      t->name = take().text;
      return withTyApps(t);
    }
    fail("expected a term");
  }

  // Postfix [A, B, ...]: definition instantiation or type application.
  SrcTmP withTyApps(SrcTmP base) {
    while (isSym("[")) {
      take();
      std::vector<SrcTyP> args;
      args.push_back(type());
      while (isSym(",")) {
        take();
        args.push_back(type());
      }
      expectSym("]");
      if (base->k == SrcTm::Var && base->tyArgs.empty()) {
        auto t = std::make_shared<SrcTm>(*base);
        t->tyArgs = args;
        base = t;
      } else {
        for (const auto& a : args) {
          auto t = newTm(SrcTm::TyApp, base->span);
          t->kids = {base};
          t->tyArgs = {a};
          base = t;
        }
      }
    }
    return base;
  }

  // ------------------------------------------------------------------ paths

  PathSpec pathSpec() {
    PathSpec ps;
    if (isSym("[")) {
      take();
      ps.k = PathSpec::Numeric;
      ps.path.push_back(static_cast<int>(expectNum()));
      while (isSym(".")) {
        take();
        ps.path.push_back(static_cast<int>(expectNum()));
      }
      expectSym("]");
      return ps;
    }
    if (isIdent("occ")) {
      take();
      ps.k = PathSpec::Occurrence;
      ps.occIndex = static_cast<int>(expectNum());
      if (!isIdent("of")) fail("expected 'of'", {"of"});
      take();
      expectSym("(");
      ps.pattern = term();
      expectSym(")");
      return ps;
    }
    fail("expected a path: [0.1.2] or occ N of (term)");
  }

  // ---------------------------------------------------------------- scripts

  std::vector<ScriptCmd> script() {
    std::vector<ScriptCmd> cmds;
    for (;;) {
      if (isSym("}")) break;
      ScriptCmd c = command();
      bool done = c.k == ScriptCmd::Qed;
      cmds.push_back(std::move(c));
      if (isSym(";")) take();
      if (done) break;
    }
    return cmds;
  }

  ScriptCmd command() {
    ScriptCmd c;
    c.span = cur().span;
    if (isIdent("qed")) {
      take();
      c.k = ScriptCmd::Qed;
      return c;
    }
    if (isIdent("normalize")) {
      take();
      c.k = ScriptCmd::Normalize;
      c.inHyp = takeGoalHyp();
      return c;
    }
    if (isIdent("conv")) {
      take();
      c.inHyp = takeGoalHyp();
      if (isIdent("by")) {
        take();
        c.k = ScriptCmd::ConvByEq;
        c.name = expectIdent("an equation name");
        if (isIdent("back")) {
          take();
          c.backward = true;
        }
        if (isIdent("with")) {
          take();
          parseInstArgs(c);
        }
        if (isIdent("at")) {
          take();
          c.at = pathSpec();
        }
        return c;
      }
      c.k = ScriptCmd::ConvTo;
      expectSym("(");
      c.tmArgs = {term()};
      expectSym(")");
      return c;
    }
    if (isIdent("rewrite")) {
      take();
      c.k = ScriptCmd::Rewrite;
      c.name = expectIdent("a rewrite rule name");
      if (isIdent("back")) {
        take();
        c.backward = true;
      }
      if (isIdent("in")) {
        take();
        c.inHyp = takeGoalHyp();
      }
      if (isIdent("at")) {
        take();
        c.at = pathSpec();
      }
      if (isIdent("with")) {
        take();
        if (!isIdent("type")) fail("expected 'type'", {"type"});
        take();
        expectSym("(");
        c.tyArgs = {type()};
        expectSym(")");
      }
      return c;
    }
    if (isIdent("reflect")) {
      take();
      c.k = ScriptCmd::Reflect;
      c.name = expectIdent("a theorem name");
      return c;
    }
    if (isIdent("exact")) {
      take();
      c.k = ScriptCmd::Exact;
      c.name = expectIdent("a theorem name");
      if (isIdent("with")) {
        take();
        parseInstArgs(c);
      }
      return c;
    }
    if (isIdent("rule")) take();
    c.k = ScriptCmd::Rule;
    c.name = expectIdent("a rule name");
    if (c.name == "wp_rec") {
      c.k = ScriptCmd::WpRec;
      c.name = expectIdent("the unfolding-equation theorem name");
      return c;
    }
    // generic rule arguments
    for (;;) {
      if (cur().k == Tok::Ident && (cur().text == "l" || cur().text == "r")) {
        c.words.push_back(take().text);
        continue;
      }
      if (isIdent("type")) {
        take();
        expectSym("(");
        c.tyArgs.push_back(type());
        expectSym(")");
        continue;
      }
      if (cur().k == Tok::Ident && !isKeyword(cur().text)) {
        c.words.push_back(take().text);
        continue;
      }
      if (isSym("(")) {
        take();
        c.tmArgs.push_back(term());
        expectSym(")");
        continue;
      }
      break;
    }
    return c;
  }

  void parseInstArgs(ScriptCmd& c) {
    expectSym("[");
    if (!isSym(";")) {
      if (!isSym("]")) {
        c.tyArgs.push_back(type());
        while (isSym(",")) {
          take();
          c.tyArgs.push_back(type());
        }
      }
    }
    if (isSym(";")) {
      take();
      if (!isSym("]")) {
        c.tmArgs.push_back(term());
        while (isSym(",")) {
          take();
          c.tmArgs.push_back(term());
        }
      }
    }
    expectSym("]");
  }

  bool takeGoalHyp() {
    if (isIdent("goal")) {
      take();
      return false;
    }
    if (isIdent("hyp")) {
      take();
      return true;
    }
    fail("expected 'goal' or 'hyp'", {"goal", "hyp"});
  }

  // ------------------------------------------------------------------ decls

  Decl decl() {
    Decl d;
    d.span = cur().span;
    if (isIdent("def")) {
      take();
      d.name = expectIdent("a definition name");
      parseTyParams(d.tyParams);
      if (isSym(":")) {
        take();
        d.k = Decl::TermDef;
        d.ty = type();
        expectSym(":=");
        d.tm = term();
      } else {
        expectSym(":=");
        d.k = Decl::TypeDef;
        d.tyBody = type();
      }
      return d;
    }
    if (isIdent("theorem")) {
      take();
      d.k = Decl::Theorem;
      d.name = expectIdent("a theorem name");
      parseTyParams(d.tyParams);
      while (isSym("(")) {
        take();
        SrcBinder b;
        b.name = expectIdent("a binder");
        expectSym(":");
        b.ty = type();
        expectSym(")");
        d.binders.push_back(std::move(b));
      }
      expectSym(":");
      if (isSym("|-")) {
        take();
        d.tm = nullptr;  // hyp = top
        d.tm2 = term();
      } else {
        SrcTmP first = term();
        if (isSym("|-")) {
          take();
          d.tm = first;
          d.tm2 = term();
        } else {
          d.tm = nullptr;
          d.tm2 = first;
        }
      }
      expectSym("{");
      d.script = script();
      expectSym("}");
      return d;
    }
    if (isIdent("law")) {
      take();
      d.k = Decl::LawCheck;
      d.name = expectIdent("a law name");
      expectSym(":");
      d.tm = term();
      expectSym("~");
      d.tm2 = term();
      expectSym(":");
      d.ty = type();
      if (!isIdent("fuel")) fail("expected 'fuel'", {"fuel"});
      take();
      d.fuel = expectNum();
      return d;
    }
    fail("expected a declaration ('def', 'theorem', or 'law')", {"def", "theorem", "law"});
  }

  void parseTyParams(std::vector<std::string>& out) {
    // (a b c) — distinguished from a theorem binder by the absence of ':'
    if (isSym("(") && peek(1).k == Tok::Ident && !isSym(":", 2)) {
      // could still be (a b): scan to matching close for ':' at depth 1
      size_t save = at;
      take();
      std::vector<std::string> names;
      bool isParams = true;
      while (!isSym(")")) {
        if (cur().k != Tok::Ident || isSym(":", 1)) {
          isParams = false;
          break;
        }
        names.push_back(take().text);
        if (isSym(":")) {
          isParams = false;
          break;
        }
      }
      if (isParams && isSym(")") && !names.empty()) {
        take();
        out = names;
        return;
      }
      at = save;
    }
  }

  SourceModule module(const std::string& fname) {
    SourceModule m;
    m.file = fname;
    while (cur().k != Tok::End) {
      try {
        m.decls.push_back(decl());
      } catch (const ParseFailure& f) {
        errors->push_back(f.err);
        // recover: skip to the next declaration keyword
        while (cur().k != Tok::End && !isIdent("def") && !isIdent("theorem") && !isIdent("law"))
          take();
      }
    }
    return m;
  }
};

}  // namespace

ParseResult parse_module(const std::string& text, const std::string& file) {
  Lexer lx(text);
  lx.run();
  ParseResult res;
  Parser p{std::move(lx.toks), 0, file, &res.errors};
  res.mod = p.module(file);
  return res;
}

SrcTmP parse_term(const std::string& text, std::vector<ParseError>& errors) {
  Lexer lx(text);
  lx.run();
  Parser p{std::move(lx.toks), 0, "<term>", &errors};
  try {
    SrcTmP t = p.term();
    if (p.cur().k != Tok::End) p.fail("trailing input after term");
    return t;
  } catch (const ParseFailure& f) {
    errors.push_back(f.err);
    return nullptr;
  }
}

SrcTyP parse_type(const std::string& text, std::vector<ParseError>& errors) {
  Lexer lx(text);
  lx.run();
  Parser p{std::move(lx.toks), 0, "<type>", &errors};
  try {
    SrcTyP t = p.type();
    if (p.cur().k != Tok::End) p.fail("trailing input after type");
    return t;
  } catch (const ParseFailure& f) {
    errors.push_back(f.err);
    return nullptr;
  }
}

}  // namespace lmr
