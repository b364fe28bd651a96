#include "lmr/pretty.hpp"

#include <algorithm>
#include <sstream>

namespace lmr {

namespace {

bool name_taken(const std::vector<std::string>& tys, const std::vector<std::string>& tms,
                const std::string& n) {
  return std::find(tys.begin(), tys.end(), n) != tys.end() ||
         std::find(tms.begin(), tms.end(), n) != tms.end();
}

// Pick a printable name for a binder: keep "_" for unused binders, freshen
// with primes on collision.
std::string freshen(const std::string& hint, bool used, const std::vector<std::string>& tys,
                    const std::vector<std::string>& tms) {
  if (!used) return "_";
  std::string base = (hint.empty() || hint == "_") ? "x" : hint;
  std::string n = base;
  while (name_taken(tys, tms, n)) n += "'";
  return n;
}

struct Printer {
  std::vector<std::string> tyNames;
  std::vector<std::string> tmNames;

  std::string tyName(int idx) const {
    if (idx >= 0 && idx < static_cast<int>(tyNames.size())) {
      const std::string& n = tyNames[tyNames.size() - 1 - idx];
      if (!n.empty() && n != "_") return n;
    }
    return "?t" + std::to_string(idx);
  }
  std::string tmName(int idx) const {
    if (idx >= 0 && idx < static_cast<int>(tmNames.size())) {
      const std::string& n = tmNames[tmNames.size() - 1 - idx];
      if (!n.empty() && n != "_") return n;
    }
    return "?v" + std::to_string(idx);
  }

  std::string paren(bool need, std::string s) const { return need ? "(" + s + ")" : std::move(s); }

  // Types. Levels: binder 0, arrow 1, sum 2, prod 3, prefix 4, atom 5.
  std::string ty(const TyP& t, int min) {
    switch (t->k) {
      case TyK::Var:
        return tyName(t->var);
      case TyK::Unit:
        return "1";
      case TyK::Empty:
        return "0";
      case TyK::Nat:
        return "nat";
      case TyK::Prop:
        return "prop";
      case TyK::Arrow:
        return paren(min > 1, ty(t->a, 2) + " -> " + ty(t->b, 1));
      case TyK::Sum:
        return paren(min > 2, ty(t->a, 3) + " + " + ty(t->b, 2));
      case TyK::Prod:
        return paren(min > 3, ty(t->a, 4) + " * " + ty(t->b, 3));
      case TyK::List:
        return paren(min > 4, "list " + ty(t->a, 5));
      case TyK::Ref:
        return paren(min > 4, "ref " + ty(t->a, 5));
      case TyK::Monad:
        return paren(min > 4, "T " + ty(t->a, 5));
      case TyK::Mu:
      case TyK::Forall:
      case TyK::Exists: {
        const char* kw = t->k == TyK::Mu ? "mu" : (t->k == TyK::Forall ? "forall" : "exists");
        std::string n = freshen(t->hint, ty_has_free(t->a, 0), tyNames, tmNames);
        tyNames.push_back(n);
        std::string body = ty(t->a, 0);
        tyNames.pop_back();
        return paren(min > 0, std::string(kw) + " " + n + ". " + body);
      }
    }
    return "?ty";
  }

  std::string binderName(const std::string& hint, const TmP& body, int freeIdx) {
    return freshen(hint, tm_has_free(body, freeIdx), tyNames, tmNames);
  }

  bool natLiteral(const TmP& t, uint64_t& out) const {
    uint64_t n = 0;
    const Tm* cur = t.get();
    while (cur->k == TmK::Succ) {
      n++;
      cur = cur->kids[0].get();
    }
    if (cur->k != TmK::Zero) return false;
    out = n;
    return true;
  }

  std::string kwapp(const char* kw, std::initializer_list<TmP> args, int min) {
    std::string s = kw;
    for (const auto& a : args) s += " " + tm(a, 10);
    return paren(min > 9, std::move(s));
  }

  // Terms. Levels per the grammar reference: bind/binders 0, => 2, \/ 3,
  // /\ 4, -* 5, * 6, ={}/|-> 7, box/|> 8, application 9, tyapp 10, atom 11.
  std::string tm(const TmP& t, int min) {
    switch (t->k) {
      case TmK::Var:
        return tmName(t->var);
      case TmK::Loc:
        return paren(min > 9, "loc " + std::to_string(t->var) + " : " + ty(t->tyAnn, 5));
      case TmK::Unit:
        return "()";
      case TmK::Top:
        return "top";
      case TmK::Bot:
        return "bot";
      case TmK::Step:
        return "step";
      case TmK::Nil:
        if (t->tyAnn) return "(nil : " + ty(ty_list(t->tyAnn), 0) + ")";
        return "nil";
      case TmK::Zero:
        return "0";
      case TmK::Succ: {
        uint64_t n;
        if (natLiteral(t, n)) return std::to_string(n);
        return kwapp("succ", {t->kids[0]}, min);
      }
      case TmK::Pair:
        return "(" + tm(t->kids[0], 0) + ", " + tm(t->kids[1], 0) + ")";
      case TmK::Fst:
        return kwapp("fst", {t->kids[0]}, min);
      case TmK::Snd:
        return kwapp("snd", {t->kids[0]}, min);
      case TmK::Inl:
        if (t->tyAnn)
          return "(inl " + tm(t->kids[0], 10) + " : " + ty(t->tyAnn, 0) + ")";
        return kwapp("inl", {t->kids[0]}, min);
      case TmK::Inr:
        if (t->tyAnn)
          return "(inr " + tm(t->kids[0], 10) + " : " + ty(t->tyAnn, 0) + ")";
        return kwapp("inr", {t->kids[0]}, min);
      case TmK::Case: {
        std::string nl = binderName(t->hints[0], t->kids[1], 0);
        tmNames.push_back(nl);
        std::string bl = tm(t->kids[1], 0);
        tmNames.pop_back();
        std::string nr = binderName(t->hints[1], t->kids[2], 0);
        tmNames.push_back(nr);
        std::string br = tm(t->kids[2], 0);
        tmNames.pop_back();
        return "match " + tm(t->kids[0], 10) + " { inl " + nl + " => " + bl + " | inr " + nr +
               " => " + br + " }";
      }
      case TmK::Lam: {
        std::string n = binderName(t->hints[0], t->kids[0], 0);
        std::string dom = t->tyAnn ? "(" + n + " : " + ty(t->tyAnn, 0) + ")" : n;
        tmNames.push_back(n);
        std::string body = tm(t->kids[0], 0);
        tmNames.pop_back();
        return paren(min > 0, "\\" + dom + ". " + body);
      }
      case TmK::App:
        return paren(min > 9, tm(t->kids[0], 9) + " " + tm(t->kids[1], 10));
      case TmK::TyLam: {
        std::string n = freshen(t->hints[0], tm_has_free_ty(t->kids[0], 0), tyNames, tmNames);
        tyNames.push_back(n);
        std::string body = tm(t->kids[0], 0);
        tyNames.pop_back();
        return paren(min > 0, "\\\\" + n + ". " + body);
      }
      case TmK::TyApp:
        return paren(min > 10, tm(t->kids[0], 10) + "[" + ty(t->tyAnn, 0) + "]");
      case TmK::Pack: {
        std::string inner = "pack (" + ty(t->tyAnn2, 0) + ", " + tm(t->kids[0], 0) + ")";
        if (t->tyAnn) return "(" + inner + " : " + ty(t->tyAnn, 0) + ")";
        return paren(min > 9, inner);
      }
      case TmK::Unpack: {
        std::string scrut = tm(t->kids[0], 10);
        std::string na = freshen(t->hints[0], tm_has_free_ty(t->kids[1], 0), tyNames, tmNames);
        tyNames.push_back(na);
        std::string nx = binderName(t->hints[1], t->kids[1], 0);
        tmNames.push_back(nx);
        std::string body = tm(t->kids[1], 0);
        tmNames.pop_back();
        tyNames.pop_back();
        return paren(min > 0, "unpack (" + na + ", " + nx + ") = " + scrut + " in " + body);
      }
      case TmK::Fold:
        if (t->tyAnn) return "(fold " + tm(t->kids[0], 10) + " : " + ty(t->tyAnn, 0) + ")";
        return kwapp("fold", {t->kids[0]}, min);
      case TmK::Unfold:
        return kwapp("unfold", {t->kids[0]}, min);
      case TmK::Ret:
        return kwapp("ret", {t->kids[0]}, min);
      case TmK::Bind: {
        std::string n = binderName(t->hints[0], t->kids[1], 0);
        std::string head = tm(t->kids[0], 1);
        tmNames.push_back(n);
        std::string body = tm(t->kids[1], 0);
        tmNames.pop_back();
        if (n == "_") return paren(min > 0, head + "; " + body);
        return paren(min > 0, n + " <- " + head + "; " + body);
      }
      case TmK::Get:
        return kwapp("get", {t->kids[0]}, min);
      case TmK::Set:
        return kwapp("set", {t->kids[0], t->kids[1]}, min);
      case TmK::New:
        return kwapp("new", {t->kids[0]}, min);
      case TmK::NatRec: {
        std::string s = "natrec " + tm(t->kids[0], 10) + " { zero => " + tm(t->kids[1], 0);
        std::string np = binderName(t->hints[0], t->kids[2], 1);
        tmNames.push_back(np);
        std::string ni = binderName(t->hints[1], t->kids[2], 0);
        tmNames.push_back(ni);
        s += " | succ " + np + ", " + ni + " => " + tm(t->kids[2], 0) + " }";
        tmNames.pop_back();
        tmNames.pop_back();
        return s;
      }
      case TmK::Cons:
        return kwapp("cons", {t->kids[0], t->kids[1]}, min);
      case TmK::ListRec: {
        std::string s = "listrec " + tm(t->kids[0], 10) + " { nil => " + tm(t->kids[1], 0);
        std::string nh = binderName(t->hints[0], t->kids[2], 2);
        tmNames.push_back(nh);
        std::string nt = binderName(t->hints[1], t->kids[2], 1);
        tmNames.push_back(nt);
        std::string ni = binderName(t->hints[2], t->kids[2], 0);
        tmNames.push_back(ni);
        s += " | cons " + nh + " " + nt + ", " + ni + " => " + tm(t->kids[2], 0) + " }";
        tmNames.pop_back();
        tmNames.pop_back();
        tmNames.pop_back();
        return s;
      }
      case TmK::Eq:
        return paren(min > 7,
                     tm(t->kids[0], 8) + " ={" + ty(t->tyAnn, 0) + "} " + tm(t->kids[1], 8));
      case TmK::And:
        return paren(min > 4, tm(t->kids[0], 5) + " /\\ " + tm(t->kids[1], 4));
      case TmK::Or:
        return paren(min > 3, tm(t->kids[0], 4) + " \\/ " + tm(t->kids[1], 3));
      case TmK::Imp:
        return paren(min > 2, tm(t->kids[0], 3) + " => " + tm(t->kids[1], 2));
      case TmK::ForallP:
      case TmK::ExistsP: {
        const char* kw = t->k == TmK::ForallP ? "forall" : "exists";
        std::string n = binderName(t->hints[0], t->kids[0], 0);
        std::string head = std::string(kw) + " (" + n + " : " + ty(t->tyAnn, 0) + "). ";
        tmNames.push_back(n);
        std::string body = tm(t->kids[0], 0);
        tmNames.pop_back();
        return paren(min > 0, head + body);
      }
      case TmK::Sep:
        return paren(min > 6, tm(t->kids[0], 7) + " * " + tm(t->kids[1], 6));
      case TmK::Wand:
        return paren(min > 5, tm(t->kids[0], 6) + " -* " + tm(t->kids[1], 5));
      case TmK::Box:
        return paren(min > 8, "box " + tm(t->kids[0], 8));
      case TmK::Later:
        return paren(min > 8, "|> " + tm(t->kids[0], 8));
      case TmK::PointsTo:
        return paren(min > 7, tm(t->kids[0], 8) + " |-> " + tm(t->kids[1], 8));
      case TmK::Wp: {
        std::string e = tm(t->kids[0], 10);
        std::string n = binderName(t->hints[0], t->kids[1], 0);
        tmNames.push_back(n);
        std::string post = tm(t->kids[1], 0);
        tmNames.pop_back();
        return paren(min > 9, "wp " + e + " { " + n + ". " + post + " }");
      }
    }
    return "?tm";
  }
};

}  // namespace

std::string pretty_ty(const TyP& t, const std::vector<std::string>& tyNames) {
  Printer p;
  p.tyNames = tyNames;
  return p.ty(t, 0);
}

std::string pretty_tm(const TmP& t, const std::vector<std::string>& tyNames,
                      const std::vector<std::string>& tmNames) {
  Printer p;
  p.tyNames = tyNames;
  p.tmNames = tmNames;
  return p.tm(t, 0);
}

std::string pretty_ty_in(const Ctx& ctx, const TyP& t) { return pretty_ty(t, ctx.tyNames); }
std::string pretty_tm_in(const Ctx& ctx, const TmP& t) {
  return pretty_tm(t, ctx.tyNames, ctx.tmNames);
}

}  // namespace lmr
