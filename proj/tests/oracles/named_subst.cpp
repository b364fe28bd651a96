#include "named_subst.hpp"

#include <algorithm>
#include <set>

namespace lmr::testing {

// ---------------------------------------------------------------------------
// Types. Fragment: Var, Unit, Nat, Prod, Sum, Arrow, List, Ref, Monad, Mu,
// Forall, Exists.

static NTyP nty(TyK k, std::string name = "", NTyP a = nullptr, NTyP b = nullptr) {
  auto t = std::make_shared<NTy>();
  t->k = k;
  t->name = std::move(name);
  t->a = std::move(a);
  t->b = std::move(b);
  return t;
}

NTyP named_of_ty(const TyP& t, const std::vector<std::string>& env) {
  switch (t->k) {
    case TyK::Var:
      return nty(TyK::Var, env[env.size() - 1 - static_cast<size_t>(t->var)]);
    case TyK::Unit:
    case TyK::Empty:
    case TyK::Nat:
    case TyK::Prop:
      return nty(t->k);
    case TyK::Mu:
    case TyK::Forall:
    case TyK::Exists: {
      std::string n = "b" + std::to_string(env.size());
      auto ext = env;
      ext.push_back(n);
      return nty(t->k, n, named_of_ty(t->a, ext));
    }
    default: {
      NTyP a = t->a ? named_of_ty(t->a, env) : nullptr;
      NTyP b = t->b ? named_of_ty(t->b, env) : nullptr;
      return nty(t->k, "", a, b);
    }
  }
}

TyP named_to_ty(const NTyP& t, const std::vector<std::string>& env) {
  switch (t->k) {
    case TyK::Var: {
      auto it = std::find(env.rbegin(), env.rend(), t->name);
      if (it == env.rend()) throw InternalError("named_to_ty: unbound " + t->name);
      return ty_var(static_cast<int>(it - env.rbegin()));
    }
    case TyK::Unit: return ty_unit();
    case TyK::Empty: return ty_empty();
    case TyK::Nat: return ty_nat();
    case TyK::Prop: return ty_prop();
    case TyK::Mu:
    case TyK::Forall:
    case TyK::Exists: {
      auto ext = env;
      ext.push_back(t->name);
      TyP body = named_to_ty(t->a, ext);
      if (t->k == TyK::Mu) return ty_mu(t->name, body);
      if (t->k == TyK::Forall) return ty_forall(t->name, body);
      return ty_exists(t->name, body);
    }
    case TyK::Prod: return ty_prod(named_to_ty(t->a, env), named_to_ty(t->b, env));
    case TyK::Sum: return ty_sum(named_to_ty(t->a, env), named_to_ty(t->b, env));
    case TyK::Arrow: return ty_arrow(named_to_ty(t->a, env), named_to_ty(t->b, env));
    case TyK::List: return ty_list(named_to_ty(t->a, env));
    case TyK::Ref: return ty_ref(named_to_ty(t->a, env));
    case TyK::Monad: return ty_monad(named_to_ty(t->a, env));
  }
  throw InternalError("named_to_ty: bad kind");
}

static void free_ty_vars(const NTyP& t, std::set<std::string>& out) {
  if (t->k == TyK::Var) {
    out.insert(t->name);
    return;
  }
  if (t->a) {
    std::set<std::string> inner;
    free_ty_vars(t->a, inner);
    inner.erase(t->name);  // binder name empty for non-binders; harmless
    out.insert(inner.begin(), inner.end());
  }
  if (t->b) free_ty_vars(t->b, out);
}

static NTyP rename_ty(const NTyP& t, const std::string& from, const std::string& to) {
  if (t->k == TyK::Var) return t->name == from ? nty(TyK::Var, to) : t;
  if (!t->a && !t->b) return t;
  if (!t->name.empty() && t->name == from) return t;  // shadowed
  NTyP a = t->a ? rename_ty(t->a, from, to) : nullptr;
  NTyP b = t->b ? rename_ty(t->b, from, to) : nullptr;
  return nty(t->k, t->name, a, b);
}

NTyP named_subst_ty(const NTyP& t, const std::string& x, const NTyP& repl, int& fresh) {
  switch (t->k) {
    case TyK::Var:
      return t->name == x ? repl : t;
    case TyK::Mu:
    case TyK::Forall:
    case TyK::Exists: {
      if (t->name == x) return t;  // shadowed
      std::set<std::string> fv;
      free_ty_vars(repl, fv);
      std::string bn = t->name;
      NTyP body = t->a;
      if (fv.count(bn)) {
        std::string nn = "r" + std::to_string(fresh++);
        body = rename_ty(body, bn, nn);
        bn = nn;
      }
      return nty(t->k, bn, named_subst_ty(body, x, repl, fresh));
    }
    default: {
      NTyP a = t->a ? named_subst_ty(t->a, x, repl, fresh) : nullptr;
      NTyP b = t->b ? named_subst_ty(t->b, x, repl, fresh) : nullptr;
      if (!a && !b) return t;
      return nty(t->k, "", a, b);
    }
  }
}

// ---------------------------------------------------------------------------
// Terms. Fragment: Var, Unit, Pair, Fst, Snd, Lam, App, Ret, Bind, Get, Set,
// Succ, Zero (single-term-binder nodes only).

static NTmP ntm(TmK k, std::string name = "", std::vector<NTmP> kids = {}, TyP ann = nullptr) {
  auto t = std::make_shared<NTm>();
  t->k = k;
  t->name = std::move(name);
  t->kids = std::move(kids);
  t->tyAnn = ann;
  return t;
}

static bool binds_one(TmK k) { return k == TmK::Lam || k == TmK::Bind; }

NTmP named_of_tm(const TmP& t, const std::vector<std::string>& env) {
  switch (t->k) {
    case TmK::Var:
      return ntm(TmK::Var, env[env.size() - 1 - static_cast<size_t>(t->var)]);
    case TmK::Lam: {
      std::string n = "v" + std::to_string(env.size());
      auto ext = env;
      ext.push_back(n);
      return ntm(TmK::Lam, n, {named_of_tm(t->kids[0], ext)}, t->tyAnn);
    }
    case TmK::Bind: {
      std::string n = "v" + std::to_string(env.size());
      auto ext = env;
      ext.push_back(n);
      return ntm(TmK::Bind, n, {named_of_tm(t->kids[0], env), named_of_tm(t->kids[1], ext)});
    }
    default: {
      std::vector<NTmP> kids;
      for (const auto& k : t->kids) kids.push_back(named_of_tm(k, env));
      return ntm(t->k, "", std::move(kids), t->tyAnn);
    }
  }
}

TmP named_to_tm(const NTmP& t, const std::vector<std::string>& env) {
  switch (t->k) {
    case TmK::Var: {
      auto it = std::find(env.rbegin(), env.rend(), t->name);
      if (it == env.rend()) throw InternalError("named_to_tm: unbound " + t->name);
      return tm_var(static_cast<int>(it - env.rbegin()));
    }
    case TmK::Lam: {
      auto ext = env;
      ext.push_back(t->name);
      return tm_lam(t->name, t->tyAnn, named_to_tm(t->kids[0], ext));
    }
    case TmK::Bind: {
      auto ext = env;
      ext.push_back(t->name);
      return tm_bind(t->name, named_to_tm(t->kids[0], env), named_to_tm(t->kids[1], ext));
    }
    case TmK::Unit: return tm_unit();
    case TmK::Zero: return tm_zero();
    case TmK::Succ: return tm_succ(named_to_tm(t->kids[0], env));
    case TmK::Pair: return tm_pair(named_to_tm(t->kids[0], env), named_to_tm(t->kids[1], env));
    case TmK::Fst: return tm_fst(named_to_tm(t->kids[0], env));
    case TmK::Snd: return tm_snd(named_to_tm(t->kids[0], env));
    case TmK::App: return tm_app(named_to_tm(t->kids[0], env), named_to_tm(t->kids[1], env));
    case TmK::Ret: return tm_ret(named_to_tm(t->kids[0], env));
    case TmK::Get: return tm_get(named_to_tm(t->kids[0], env));
    case TmK::Set: return tm_set(named_to_tm(t->kids[0], env), named_to_tm(t->kids[1], env));
    default:
      throw InternalError("named_to_tm: outside oracle fragment");
  }
}

static void free_tm_vars(const NTmP& t, std::set<std::string>& out) {
  if (t->k == TmK::Var) {
    out.insert(t->name);
    return;
  }
  for (size_t i = 0; i < t->kids.size(); i++) {
    std::set<std::string> inner;
    free_tm_vars(t->kids[i], inner);
    bool bound = binds_one(t->k) && (t->k == TmK::Lam ? i == 0 : i == 1);
    if (bound) inner.erase(t->name);
    out.insert(inner.begin(), inner.end());
  }
}

static NTmP rename_tm(const NTmP& t, const std::string& from, const std::string& to) {
  if (t->k == TmK::Var) {
    if (t->name == from) return ntm(TmK::Var, to);
    return t;
  }
  std::vector<NTmP> kids;
  for (size_t i = 0; i < t->kids.size(); i++) {
    bool shadow = binds_one(t->k) && t->name == from && (t->k == TmK::Lam ? i == 0 : i == 1);
    kids.push_back(shadow ? t->kids[i] : rename_tm(t->kids[i], from, to));
  }
  return ntm(t->k, t->name, std::move(kids), t->tyAnn);
}

NTmP named_subst_tm(const NTmP& t, const std::string& x, const NTmP& repl, int& fresh) {
  if (t->k == TmK::Var) return t->name == x ? repl : t;
  if (binds_one(t->k)) {
    std::set<std::string> fv;
    free_tm_vars(repl, fv);
    std::string bn = t->name;
    NTmP t2 = t;
    if (bn == x) {
      // binder shadows x: substitute only where x is still free
      if (t->k == TmK::Lam) return t;
      return ntm(t->k, bn, {named_subst_tm(t->kids[0], x, repl, fresh), t->kids[1]}, t->tyAnn);
    }
    if (fv.count(bn)) {
      std::string nn = "r" + std::to_string(fresh++);
      t2 = ntm(t->k, nn,
               t->k == TmK::Lam
                   ? std::vector<NTmP>{rename_tm(t->kids[0], bn, nn)}
                   : std::vector<NTmP>{t->kids[0], rename_tm(t->kids[1], bn, nn)},
               t->tyAnn);
      bn = nn;
    }
    std::vector<NTmP> kids;
    for (const auto& k : t2->kids) kids.push_back(named_subst_tm(k, x, repl, fresh));
    return ntm(t2->k, bn, std::move(kids), t2->tyAnn);
  }
  std::vector<NTmP> kids;
  for (const auto& k : t->kids) kids.push_back(named_subst_tm(k, x, repl, fresh));
  return ntm(t->k, t->name, std::move(kids), t->tyAnn);
}

}  // namespace lmr::testing
