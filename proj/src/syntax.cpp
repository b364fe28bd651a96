#include "lmr/syntax.hpp"

namespace lmr {

// ---------------------------------------------------------------------------
// Type constructors

static TyP mkTy(TyK k) { return std::make_shared<Ty>(k); }

TyP ty_var(int i) {
  if (i < 0) throw InternalError("ty_var: negative index");
  auto t = std::make_shared<Ty>(TyK::Var);
  t->var = i;
  return t;
}
TyP ty_unit() { return mkTy(TyK::Unit); }
TyP ty_empty() { return mkTy(TyK::Empty); }
TyP ty_nat() { return mkTy(TyK::Nat); }
TyP ty_prop() { return mkTy(TyK::Prop); }

static TyP mkTy2(TyK k, TyP a, TyP b) {
  auto t = std::make_shared<Ty>(k);
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}
static TyP mkTy1(TyK k, TyP a) {
  auto t = std::make_shared<Ty>(k);
  t->a = std::move(a);
  return t;
}
static TyP mkTyBinder(TyK k, std::string hint, TyP body) {
  auto t = std::make_shared<Ty>(k);
  t->a = std::move(body);
  t->hint = std::move(hint);
  return t;
}

TyP ty_prod(TyP a, TyP b) { return mkTy2(TyK::Prod, std::move(a), std::move(b)); }
TyP ty_sum(TyP a, TyP b) { return mkTy2(TyK::Sum, std::move(a), std::move(b)); }
TyP ty_arrow(TyP a, TyP b) { return mkTy2(TyK::Arrow, std::move(a), std::move(b)); }
TyP ty_list(TyP a) { return mkTy1(TyK::List, std::move(a)); }
TyP ty_ref(TyP a) { return mkTy1(TyK::Ref, std::move(a)); }
TyP ty_monad(TyP a) { return mkTy1(TyK::Monad, std::move(a)); }
TyP ty_mu(std::string hint, TyP body) { return mkTyBinder(TyK::Mu, std::move(hint), std::move(body)); }
TyP ty_forall(std::string hint, TyP body) { return mkTyBinder(TyK::Forall, std::move(hint), std::move(body)); }
TyP ty_exists(std::string hint, TyP body) { return mkTyBinder(TyK::Exists, std::move(hint), std::move(body)); }

bool ty_is_binder(TyK k) { return k == TyK::Mu || k == TyK::Forall || k == TyK::Exists; }

// Generic traversal: rebuild with var-node replacement, tracking binder depth.
static TyP ty_map(const TyP& t, int depth, const std::function<TyP(int, int)>& onVar) {
  switch (t->k) {
    case TyK::Var:
      return onVar(t->var, depth);
    case TyK::Unit:
    case TyK::Empty:
    case TyK::Nat:
    case TyK::Prop:
      return t;
    default: {
      int d = ty_is_binder(t->k) ? depth + 1 : depth;
      TyP na = t->a ? ty_map(t->a, d, onVar) : nullptr;
      TyP nb = t->b ? ty_map(t->b, depth, onVar) : nullptr;
      if (na == t->a && nb == t->b) return t;
      auto n = std::make_shared<Ty>(t->k);
      n->a = na;
      n->b = nb;
      n->hint = t->hint;
      return n;
    }
  }
}

TyP ty_shift(const TyP& t, int by, int cutoff) {
  if (by == 0) return t;
  return ty_map(t, cutoff, [&](int v, int d) {
    if (v < d) return ty_var(v);
    if (v + by < d) throw InternalError("ty_shift: index underflow");
    return ty_var(v + by);
  });
}

TyP ty_subst(const TyP& t, int target, const TyP& B) {
  return ty_map(t, 0, [&](int v, int d) -> TyP {
    if (v == target + d) return ty_shift(B, d);
    if (v > target + d) return ty_var(v - 1);
    return ty_var(v);
  });
}

bool ty_alpha_eq(const TyP& a, const TyP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->k != b->k) return false;
  if (a->k == TyK::Var) return a->var == b->var;
  if (a->a || b->a) {
    if (!a->a || !b->a || !ty_alpha_eq(a->a, b->a)) return false;
  }
  if (a->b || b->b) {
    if (!a->b || !b->b || !ty_alpha_eq(a->b, b->b)) return false;
  }
  return true;
}

bool ty_has_free(const TyP& t, int i) {
  bool found = false;
  ty_map(t, 0, [&](int v, int d) {
    if (v == i + d) found = true;
    return ty_var(v);
  });
  return found;
}

int ty_max_var(const TyP& t) {
  int mx = -1;
  ty_map(t, 0, [&](int v, int d) {
    if (v >= d && v - d > mx) mx = v - d;
    return ty_var(v);
  });
  return mx;
}

// ---------------------------------------------------------------------------
// Term arity / binder tables

int tm_arity(TmK k) {
  switch (k) {
    case TmK::Var:
    case TmK::Loc:
    case TmK::Unit:
    case TmK::Step:
    case TmK::Zero:
    case TmK::Nil:
    case TmK::Top:
    case TmK::Bot:
      return 0;
    case TmK::Fst:
    case TmK::Snd:
    case TmK::Inl:
    case TmK::Inr:
    case TmK::Lam:
    case TmK::TyLam:
    case TmK::TyApp:
    case TmK::Pack:
    case TmK::Fold:
    case TmK::Unfold:
    case TmK::Ret:
    case TmK::Get:
    case TmK::New:
    case TmK::Succ:
    case TmK::ForallP:
    case TmK::ExistsP:
    case TmK::Box:
    case TmK::Later:
      return 1;
    case TmK::Pair:
    case TmK::App:
    case TmK::Unpack:
    case TmK::Bind:
    case TmK::Set:
    case TmK::Cons:
    case TmK::Eq:
    case TmK::And:
    case TmK::Or:
    case TmK::Imp:
    case TmK::Sep:
    case TmK::Wand:
    case TmK::PointsTo:
    case TmK::Wp:
      return 2;
    case TmK::Case:
    case TmK::NatRec:
    case TmK::ListRec:
      return 3;
  }
  throw InternalError("tm_arity: bad kind");
}

KidSig tm_kid_sig(TmK k, int kid) {
  switch (k) {
    case TmK::Lam:
      return {1, 0};
    case TmK::TyLam:
      return {0, 1};
    case TmK::Unpack:
      return kid == 1 ? KidSig{1, 1} : KidSig{0, 0};
    case TmK::Bind:
      return kid == 1 ? KidSig{1, 0} : KidSig{0, 0};
    case TmK::Case:
      return kid >= 1 ? KidSig{1, 0} : KidSig{0, 0};
    case TmK::NatRec:
      return kid == 2 ? KidSig{2, 0} : KidSig{0, 0};
    case TmK::ListRec:
      return kid == 2 ? KidSig{3, 0} : KidSig{0, 0};
    case TmK::ForallP:
    case TmK::ExistsP:
      return {1, 0};
    case TmK::Wp:
      return kid == 1 ? KidSig{1, 0} : KidSig{0, 0};
    default:
      return {0, 0};
  }
}

// ---------------------------------------------------------------------------
// Term constructors

static TmP mk(TmK k, std::vector<TmP> kids = {}, TyP ann = nullptr, TyP ann2 = nullptr,
              std::vector<std::string> hints = {}) {
  auto t = std::make_shared<Tm>(k);
  t->kids = std::move(kids);
  t->tyAnn = std::move(ann);
  t->tyAnn2 = std::move(ann2);
  t->hints = std::move(hints);
  if (static_cast<int>(t->kids.size()) != tm_arity(k))
    throw InternalError("tm constructor: arity mismatch");
  return t;
}

TmP tm_var(int i) {
  if (i < 0) throw InternalError("tm_var: negative index");
  auto t = std::make_shared<Tm>(TmK::Var);
  t->var = i;
  return t;
}
TmP tm_loc(int addr, TyP pointee) {
  if (addr < 0) throw InternalError("tm_loc: negative address");
  auto t = std::make_shared<Tm>(TmK::Loc);
  t->var = addr;
  t->tyAnn = std::move(pointee);
  return t;
}
TmP tm_unit() { return mk(TmK::Unit); }
TmP tm_pair(TmP a, TmP b) { return mk(TmK::Pair, {std::move(a), std::move(b)}); }
TmP tm_fst(TmP a) { return mk(TmK::Fst, {std::move(a)}); }
TmP tm_snd(TmP a) { return mk(TmK::Snd, {std::move(a)}); }
TmP tm_inl(TyP sum, TmP a) { return mk(TmK::Inl, {std::move(a)}, std::move(sum)); }
TmP tm_inr(TyP sum, TmP a) { return mk(TmK::Inr, {std::move(a)}, std::move(sum)); }
TmP tm_case(TmP scrut, std::string hl, TmP l, std::string hr, TmP r) {
  return mk(TmK::Case, {std::move(scrut), std::move(l), std::move(r)}, nullptr, nullptr,
            {std::move(hl), std::move(hr)});
}
TmP tm_lam(std::string hint, TyP dom, TmP body) {
  return mk(TmK::Lam, {std::move(body)}, std::move(dom), nullptr, {std::move(hint)});
}
TmP tm_app(TmP f, TmP a) { return mk(TmK::App, {std::move(f), std::move(a)}); }
TmP tm_tylam(std::string hint, TmP body) {
  return mk(TmK::TyLam, {std::move(body)}, nullptr, nullptr, {std::move(hint)});
}
TmP tm_tyapp(TmP f, TyP arg) { return mk(TmK::TyApp, {std::move(f)}, std::move(arg)); }
TmP tm_pack(TyP exTy, TyP witness, TmP body) {
  return mk(TmK::Pack, {std::move(body)}, std::move(exTy), std::move(witness));
}
TmP tm_unpack(TmP scrut, std::string tyHint, std::string tmHint, TmP body) {
  return mk(TmK::Unpack, {std::move(scrut), std::move(body)}, nullptr, nullptr,
            {std::move(tyHint), std::move(tmHint)});
}
TmP tm_fold(TyP muTy, TmP a) { return mk(TmK::Fold, {std::move(a)}, std::move(muTy)); }
TmP tm_unfold(TmP a) { return mk(TmK::Unfold, {std::move(a)}); }
TmP tm_ret(TmP a) { return mk(TmK::Ret, {std::move(a)}); }
TmP tm_bind(std::string hint, TmP head, TmP body) {
  return mk(TmK::Bind, {std::move(head), std::move(body)}, nullptr, nullptr, {std::move(hint)});
}
TmP tm_get(TmP l) { return mk(TmK::Get, {std::move(l)}); }
TmP tm_set(TmP l, TmP v) { return mk(TmK::Set, {std::move(l), std::move(v)}); }
TmP tm_new(TmP v) { return mk(TmK::New, {std::move(v)}); }
TmP tm_step() { return mk(TmK::Step); }
TmP tm_zero() { return mk(TmK::Zero); }
TmP tm_succ(TmP n) { return mk(TmK::Succ, {std::move(n)}); }
TmP tm_natlit(uint64_t n) {
  TmP t = tm_zero();
  for (uint64_t i = 0; i < n; i++) t = tm_succ(t);
  return t;
}
TmP tm_natrec(TmP scrut, TmP z, std::string hp, std::string hi, TmP s) {
  return mk(TmK::NatRec, {std::move(scrut), std::move(z), std::move(s)}, nullptr, nullptr,
            {std::move(hp), std::move(hi)});
}
TmP tm_nil(TyP elem) { return mk(TmK::Nil, {}, std::move(elem)); }
TmP tm_cons(TmP h, TmP t) { return mk(TmK::Cons, {std::move(h), std::move(t)}); }
TmP tm_listrec(TmP scrut, TmP z, std::string hh, std::string ht, std::string hi, TmP s) {
  return mk(TmK::ListRec, {std::move(scrut), std::move(z), std::move(s)}, nullptr, nullptr,
            {std::move(hh), std::move(ht), std::move(hi)});
}
TmP tm_eq(TyP at, TmP l, TmP r) { return mk(TmK::Eq, {std::move(l), std::move(r)}, std::move(at)); }
TmP tm_top() { return mk(TmK::Top); }
TmP tm_bot() { return mk(TmK::Bot); }
TmP tm_and(TmP a, TmP b) { return mk(TmK::And, {std::move(a), std::move(b)}); }
TmP tm_or(TmP a, TmP b) { return mk(TmK::Or, {std::move(a), std::move(b)}); }
TmP tm_imp(TmP a, TmP b) { return mk(TmK::Imp, {std::move(a), std::move(b)}); }
TmP tm_forallp(std::string hint, TyP dom, TmP body) {
  return mk(TmK::ForallP, {std::move(body)}, std::move(dom), nullptr, {std::move(hint)});
}
TmP tm_existsp(std::string hint, TyP dom, TmP body) {
  return mk(TmK::ExistsP, {std::move(body)}, std::move(dom), nullptr, {std::move(hint)});
}
TmP tm_sep(TmP a, TmP b) { return mk(TmK::Sep, {std::move(a), std::move(b)}); }
TmP tm_wand(TmP a, TmP b) { return mk(TmK::Wand, {std::move(a), std::move(b)}); }
TmP tm_box(TmP a) { return mk(TmK::Box, {std::move(a)}); }
TmP tm_later(TmP a) { return mk(TmK::Later, {std::move(a)}); }
TmP tm_points_to(TmP l, TmP v) { return mk(TmK::PointsTo, {std::move(l), std::move(v)}); }
TmP tm_wp(TmP e, std::string hint, TmP post) {
  return mk(TmK::Wp, {std::move(e), std::move(post)}, nullptr, nullptr, {std::move(hint)});
}

TmP tm_with_span(const TmP& t, Span sp) {
  auto n = std::make_shared<Tm>(*t);
  n->span = sp;
  return n;
}

TmP tm_seq(TmP first, TmP rest) { return tm_bind("_", std::move(first), tm_shift(rest, 1)); }

// ---------------------------------------------------------------------------
// Traversal

// onVar / onTy receive the *term*/*type* binder depth at the occurrence.
static TmP tm_traverse(const TmP& t, int tmDepth, int tyDepth,
                       const std::function<TmP(int, int)>& onVar,
                       const std::function<TyP(const TyP&, int)>& onTy) {
  switch (t->k) {
    case TmK::Var:
      return onVar(t->var, tmDepth);
    default: {
      bool changed = false;
      TyP na = t->tyAnn ? onTy(t->tyAnn, tyDepth) : nullptr;
      TyP nb = t->tyAnn2 ? onTy(t->tyAnn2, tyDepth) : nullptr;
      changed |= (na != t->tyAnn) || (nb != t->tyAnn2);
      std::vector<TmP> nk;
      nk.reserve(t->kids.size());
      for (size_t i = 0; i < t->kids.size(); i++) {
        KidSig sig = tm_kid_sig(t->k, static_cast<int>(i));
        TmP kid = tm_traverse(t->kids[i], tmDepth + sig.tmBinders, tyDepth + sig.tyBinders, onVar, onTy);
        changed |= (kid != t->kids[i]);
        nk.push_back(std::move(kid));
      }
      if (!changed) return t;
      auto n = std::make_shared<Tm>(*t);
      n->tyAnn = na;
      n->tyAnn2 = nb;
      n->kids = std::move(nk);
      return n;
    }
  }
}

static TyP ty_identity(const TyP& t, int) { return t; }

TmP tm_shift(const TmP& t, int by, int cutoff) {
  if (by == 0) return t;
  return tm_traverse(
      t, cutoff, 0,
      [&](int v, int d) {
        if (v < d) return tm_var(v);
        if (v + by < d) throw InternalError("tm_shift: index underflow");
        return tm_var(v + by);
      },
      ty_identity);
}

TmP tm_subst(const TmP& t, int target, const TmP& v) {
  return tm_traverse(
      t, 0, 0,
      [&](int x, int d) -> TmP {
        if (x == target + d) return tm_shift(v, d);
        if (x > target + d) return tm_var(x - 1);
        return tm_var(x);
      },
      ty_identity);
}

TmP tm_ty_shift(const TmP& t, int by, int cutoff) {
  if (by == 0) return t;
  return tm_traverse(
      t, 0, cutoff, [](int v, int) { return tm_var(v); },
      [&](const TyP& ty, int d) { return ty_shift(ty, by, d); });
}

TmP tm_ty_subst(const TmP& t, int target, const TyP& B) {
  return tm_traverse(
      t, 0, 0, [](int v, int) { return tm_var(v); },
      [&](const TyP& ty, int d) { return ty_subst(ty, target + d, B); });
}

TmP tm_map_free(const TmP& t, const std::function<TmP(int)>& f) {
  return tm_traverse(
      t, 0, 0,
      [&](int v, int d) -> TmP {
        if (v < d) return tm_var(v);
        return tm_shift(f(v - d), d);
      },
      ty_identity);
}

TmP tm_swap01(const TmP& t) {
  return tm_map_free(t, [](int v) {
    if (v == 0) return tm_var(1);
    if (v == 1) return tm_var(0);
    return tm_var(v);
  });
}

bool tm_has_free(const TmP& t, int i) {
  bool found = false;
  tm_traverse(
      t, 0, 0,
      [&](int v, int d) {
        if (v == i + d) found = true;
        return tm_var(v);
      },
      ty_identity);
  return found;
}

bool tm_has_free_ty(const TmP& t, int i) {
  bool found = false;
  tm_traverse(
      t, 0, 0, [](int v, int) { return tm_var(v); },
      [&](const TyP& ty, int d) {
        if (ty_has_free(ty, i + d)) found = true;
        return ty;
      });
  return found;
}

bool alpha_eq_ty(const TyP& a, const TyP& b) { return ty_alpha_eq(a, b); }

bool alpha_eq(const TmP& a, const TmP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->k != b->k) return false;
  switch (a->k) {
    case TmK::Var:
    case TmK::Loc:
      if (a->var != b->var) return false;
      break;
    default:
      break;
  }
  if ((a->tyAnn != nullptr) != (b->tyAnn != nullptr)) return false;
  if (a->tyAnn && !ty_alpha_eq(a->tyAnn, b->tyAnn)) return false;
  if ((a->tyAnn2 != nullptr) != (b->tyAnn2 != nullptr)) return false;
  if (a->tyAnn2 && !ty_alpha_eq(a->tyAnn2, b->tyAnn2)) return false;
  if (a->kids.size() != b->kids.size()) return false;
  for (size_t i = 0; i < a->kids.size(); i++)
    if (!alpha_eq(a->kids[i], b->kids[i])) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Contexts

const TyP& Ctx::lookup(int idx) const {
  if (idx < 0 || idx >= size()) throw InternalError("Ctx::lookup: index out of range");
  return elems[elems.size() - 1 - idx];
}

const std::string& Ctx::nameOf(int idx) const {
  static const std::string anon = "_";
  if (idx < 0 || idx >= static_cast<int>(tmNames.size())) return anon;
  return tmNames[tmNames.size() - 1 - idx];
}

Ctx Ctx::pushTm(const std::string& name, TyP ty) const {
  Ctx c = *this;
  c.elems.push_back(std::move(ty));
  c.tmNames.push_back(name);
  return c;
}

Ctx Ctx::pushTy(const std::string& name) const {
  Ctx c = *this;
  c.tyCount++;
  c.tyNames.push_back(name);
  for (auto& e : c.elems) e = ty_shift(e, 1);
  return c;
}

}  // namespace lmr
