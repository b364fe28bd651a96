#include "lmr/conv.hpp"

#include <map>

namespace lmr {

// ---------------------------------------------------------------------------
// Normalization
//
// Orientation: beta for lambda/pair/case/tyapp/unpack and the recursors;
// monad left unit, right unit, and associativity (left-nested to
// right-nested); eta as contraction for lambda, pairs, universals and
// existential packs; unpack floated out of elimination contexts. Effect
// equations never fire here.

namespace {



TmP strengthen0(const TmP& body) {
  // body does not use var 0; remove the binder slot.
  return tm_subst(body, 0, tm_unit());
}

TmP norm(const TmP& u);

// One head-reduction step on a node whose children are normal; returns null
// when no rule applies.
TmP head_step(const TmP& t) {
  switch (t->k) {
    case TmK::App: {
      const TmP& f = t->kids[0];
      if (f->k == TmK::Lam) return tm_subst(f->kids[0], 0, t->kids[1]);
      if (f->k == TmK::Unpack)
        return tm_unpack(f->kids[0], f->hints[0], f->hints[1],
                         tm_app(f->kids[1], tm_ty_shift(tm_shift(t->kids[1], 1), 1)));
      return nullptr;
    }
    case TmK::Fst: {
      const TmP& p = t->kids[0];
      if (p->k == TmK::Pair) return p->kids[0];
      if (p->k == TmK::Unpack)
        return tm_unpack(p->kids[0], p->hints[0], p->hints[1], tm_fst(p->kids[1]));
      return nullptr;
    }
    case TmK::Snd: {
      const TmP& p = t->kids[0];
      if (p->k == TmK::Pair) return p->kids[1];
      if (p->k == TmK::Unpack)
        return tm_unpack(p->kids[0], p->hints[0], p->hints[1], tm_snd(p->kids[1]));
      return nullptr;
    }
    case TmK::Case: {
      const TmP& s = t->kids[0];
      if (s->k == TmK::Inl) return tm_subst(t->kids[1], 0, s->kids[0]);
      if (s->k == TmK::Inr) return tm_subst(t->kids[2], 0, s->kids[0]);
      if (s->k == TmK::Unpack) {
        TmP l = tm_ty_shift(tm_shift(t->kids[1], 1, 1), 1);
        TmP r = tm_ty_shift(tm_shift(t->kids[2], 1, 1), 1);
        return tm_unpack(s->kids[0], s->hints[0], s->hints[1],
                         tm_case(s->kids[1], t->hints[0], l, t->hints[1], r));
      }
      return nullptr;
    }
    case TmK::TyApp: {
      const TmP& f = t->kids[0];
      if (f->k == TmK::TyLam) return tm_ty_subst(f->kids[0], 0, t->tyAnn);
      if (f->k == TmK::Unpack)
        return tm_unpack(f->kids[0], f->hints[0], f->hints[1],
                         tm_tyapp(f->kids[1], ty_shift(t->tyAnn, 1)));
      return nullptr;
    }
    case TmK::Unfold: {
      const TmP& s = t->kids[0];
      if (s->k == TmK::Unpack)
        return tm_unpack(s->kids[0], s->hints[0], s->hints[1], tm_unfold(s->kids[1]));
      return nullptr;
    }
    case TmK::Unpack: {
      const TmP& s = t->kids[0];
      const TmP& body = t->kids[1];
      if (s->k == TmK::Pack)
        return tm_subst(tm_ty_subst(body, 0, s->tyAnn2), 0, s->kids[0]);
      // eta: unpack (a, x) = v in pack (a, x)  ~>  v
      if (body->k == TmK::Pack && body->tyAnn2 && body->tyAnn2->k == TyK::Var &&
          body->tyAnn2->var == 0 && body->kids[0]->k == TmK::Var && body->kids[0]->var == 0)
        return s;
      // dead unpack: body ignores both bound variables
      if (!tm_has_free(body, 0) && !tm_has_free_ty(body, 0))
        return tm_ty_shift(strengthen0(body), -1);
      if (s->k == TmK::Unpack) {
        TmP b2 = tm_ty_shift(tm_shift(body, 1, 1), 1, 1);
        return tm_unpack(s->kids[0], s->hints[0], s->hints[1],
                         tm_unpack(s->kids[1], t->hints[0], t->hints[1], b2));
      }
      return nullptr;
    }
    case TmK::NatRec: {
      const TmP& s = t->kids[0];
      if (s->k == TmK::Zero) return t->kids[1];
      if (s->k == TmK::Succ) {
        TmP pred = s->kids[0];
        TmP ih = tm_natrec(pred, t->kids[1], t->hints[0], t->hints[1], t->kids[2]);
        return tm_subst(tm_subst(t->kids[2], 0, tm_shift(ih, 1)), 0, pred);
      }
      return nullptr;
    }
    case TmK::ListRec: {
      const TmP& s = t->kids[0];
      if (s->k == TmK::Nil) return t->kids[1];
      if (s->k == TmK::Cons) {
        TmP h = s->kids[0], tail = s->kids[1];
        TmP ih = tm_listrec(tail, t->kids[1], t->hints[0], t->hints[1], t->hints[2], t->kids[2]);
        return tm_subst(tm_subst(tm_subst(t->kids[2], 0, tm_shift(ih, 2)), 0, tm_shift(tail, 1)), 0,
                        h);
      }
      return nullptr;
    }
    case TmK::Bind: {
      const TmP& head = t->kids[0];
      const TmP& body = t->kids[1];
      if (head->k == TmK::Ret) return tm_subst(body, 0, head->kids[0]);
      if (body->k == TmK::Ret && body->kids[0]->k == TmK::Var && body->kids[0]->var == 0)
        return head;
      if (head->k == TmK::Bind) {
        TmP inner = tm_bind(t->hints[0], head->kids[1], tm_shift(body, 1, 1));
        return tm_bind(head->hints[0], head->kids[0], inner);
      }
      if (head->k == TmK::Unpack)
        return tm_unpack(head->kids[0], head->hints[0], head->hints[1],
                         tm_bind(t->hints[0], head->kids[1], tm_ty_shift(tm_shift(body, 1, 1), 1)));
      return nullptr;
    }
    case TmK::Lam: {
      // eta: \x. f x ~> f  (x not free in f)
      const TmP& body = t->kids[0];
      if (body->k == TmK::App && body->kids[1]->k == TmK::Var && body->kids[1]->var == 0 &&
          !tm_has_free(body->kids[0], 0))
        return tm_shift(body->kids[0], -1, 0);
      return nullptr;
    }
    case TmK::TyLam: {
      const TmP& body = t->kids[0];
      if (body->k == TmK::TyApp && body->tyAnn->k == TyK::Var && body->tyAnn->var == 0 &&
          !tm_has_free_ty(body->kids[0], 0))
        return tm_ty_shift(body->kids[0], -1, 0);
      return nullptr;
    }
    case TmK::Pair: {
      // eta: (fst u, snd u) ~> u
      const TmP& a = t->kids[0];
      const TmP& b = t->kids[1];
      if (a->k == TmK::Fst && b->k == TmK::Snd && alpha_eq(a->kids[0], b->kids[0]))
        return a->kids[0];
      return nullptr;
    }
    default:
      return nullptr;
  }
}

TmP norm(const TmP& u) {
  // Children first, then repeated head steps (re-normalizing after each).
  TmP t = u;
  if (!t->kids.empty() || t->tyAnn) {
    auto n = std::make_shared<Tm>(*t);
    for (auto& k : n->kids) k = norm(k);
    t = n;
  }
  for (;;) {
    TmP r = head_step(t);
    if (!r) return t;
    t = norm(r);
  }
}

}  // namespace

TmP normalize(const TmP& u) { return norm(u); }

bool conv_eq(const TmP& u, const TmP& v) {
  if (alpha_eq(u, v)) return true;
  return alpha_eq(normalize(u), normalize(v));
}

// ---------------------------------------------------------------------------
// Paths

std::string path_to_string(const Path& p) {
  std::string s = "[";
  for (size_t i = 0; i < p.size(); i++) {
    if (i) s += ".";
    s += std::to_string(p[i]);
  }
  return s + "]";
}

TmP subterm_at(const TmP& t, const Path& p, PathCtx* info) {
  TmP cur = t;
  for (int step : p) {
    if (step < 0 || step >= static_cast<int>(cur->kids.size())) return nullptr;
    KidSig sig = tm_kid_sig(cur->k, step);
    if (info) {
      info->tmBinders += sig.tmBinders;
      info->tyBinders += sig.tyBinders;
      for (int b = 0; b < sig.tmBinders; b++) {
        size_t hintIdx = 0;
        // Binder hints: Case uses hints[branch-1]; others are positional.
        if (cur->k == TmK::Case)
          hintIdx = static_cast<size_t>(step - 1);
        else
          hintIdx = static_cast<size_t>(b);
        info->tmHints.push_back(hintIdx < cur->hints.size() ? cur->hints[hintIdx] : "_");
        info->tmDoms.push_back(cur->k == TmK::Lam ? cur->tyAnn : nullptr);
      }
    }
    cur = cur->kids[step];
  }
  return cur;
}

TmP replace_at(const TmP& t, const Path& p, const TmP& sub) {
  if (p.empty()) return sub;
  int step = p[0];
  if (step < 0 || step >= static_cast<int>(t->kids.size()))
    throw InternalError("replace_at: invalid path");
  auto n = std::make_shared<Tm>(*t);
  n->kids[step] = replace_at(t->kids[step], Path(p.begin() + 1, p.end()), sub);
  return n;
}

static void find_rec(const TmP& t, const TmP& pat, int tmDepth, int tyDepth, Path& cur,
                     std::vector<Path>& out, int limit) {
  if (static_cast<int>(out.size()) >= limit) return;
  TmP shifted = tm_ty_shift(tm_shift(pat, tmDepth), tyDepth);
  if (alpha_eq(t, shifted)) {
    out.push_back(cur);
    return;  // outermost occurrence only; no nested matches inside it
  }
  for (size_t i = 0; i < t->kids.size(); i++) {
    KidSig sig = tm_kid_sig(t->k, static_cast<int>(i));
    cur.push_back(static_cast<int>(i));
    find_rec(t->kids[i], pat, tmDepth + sig.tmBinders, tyDepth + sig.tyBinders, cur, out, limit);
    cur.pop_back();
  }
}

std::vector<Path> find_occurrences(const TmP& t, const TmP& pat, int limit) {
  std::vector<Path> out;
  Path cur;
  find_rec(t, pat, 0, 0, cur, out, limit);
  return out;
}

// ---------------------------------------------------------------------------
// Effect rewrites

const char* rw_rule_name(RwRule r) {
  switch (r) {
    case RwRule::UnfoldOfFold: return "unfold-of-fold";
    case RwRule::FoldOfUnfold: return "fold-of-unfold";
    case RwRule::GetAfterSet: return "get-after-set";
    case RwRule::SetAfterNew: return "set-after-new";
    case RwRule::SetAfterSet: return "set-after-set";
    case RwRule::GetAfterGet: return "get-after-get";
    case RwRule::SetAfterGet: return "set-after-get";
    case RwRule::StepCommuteGet: return "step-commute-get";
    case RwRule::StepCommuteSet: return "step-commute-set";
    case RwRule::StepCommuteNew: return "step-commute-new";
    case RwRule::StepCommuteBind: return "step-commute-bind";
  }
  return "?";
}

std::vector<RwRule> all_rw_rules() {
  return {RwRule::UnfoldOfFold,   RwRule::FoldOfUnfold,   RwRule::GetAfterSet,
          RwRule::SetAfterNew,    RwRule::SetAfterSet,    RwRule::GetAfterGet,
          RwRule::SetAfterGet,    RwRule::StepCommuteGet, RwRule::StepCommuteSet,
          RwRule::StepCommuteNew, RwRule::StepCommuteBind};
}

std::optional<RwRule> rw_rule_by_name(const std::string& s) {
  std::string n = s;
  for (auto& c : n)
    if (c == '_') c = '-';
  for (RwRule r : all_rw_rules())
    if (n == rw_rule_name(r)) return r;
  return std::nullopt;
}

namespace {

[[noreturn]] void no_match(RwRule r) {
  throw RewriteFailure(
      {RewriteError::NoMatch, std::string("rewrite ") + rw_rule_name(r) + ": pattern does not match"});
}

// Match Bind(head, body); outputs both parts.
bool as_bind(const TmP& t, TmP& head, TmP& body) {
  if (t->k != TmK::Bind) return false;
  head = t->kids[0];
  body = t->kids[1];
  return true;
}

// t = `u; rest` where the binder is discarded: yields rest strengthened.
bool as_seq(const TmP& t, TmP& head, TmP& rest) {
  TmP body;
  if (!as_bind(t, head, body)) return false;
  if (tm_has_free(body, 0)) return false;
  rest = strengthen0(body);
  return true;
}

TmP rw_unfold_of_fold(const TmP& t, RwDir dir, const TyP& tyArg) {
  if (dir == RwDir::Forward) {
    if (t->k == TmK::Unfold && t->kids[0]->k == TmK::Fold)
      return tm_seq(tm_step(), tm_ret(t->kids[0]->kids[0]));
    no_match(RwRule::UnfoldOfFold);
  }
  TmP head, rest;
  if (as_seq(t, head, rest) && head->k == TmK::Step && rest->k == TmK::Ret) {
    if (!tyArg)
      throw RewriteFailure({RewriteError::NeedsType,
                            "rewrite unfold-of-fold backward: needs the recursive type (with type ...)"});
    return tm_unfold(tm_fold(tyArg, rest->kids[0]));
  }
  no_match(RwRule::UnfoldOfFold);
}

TmP rw_fold_of_unfold(const TmP& t, RwDir dir, const TyP& tyArg) {
  if (dir == RwDir::Forward) {
    TmP head, body;
    if (as_bind(t, head, body) && head->k == TmK::Unfold && body->k == TmK::Ret &&
        body->kids[0]->k == TmK::Fold && body->kids[0]->kids[0]->k == TmK::Var &&
        body->kids[0]->kids[0]->var == 0)
      return tm_seq(tm_step(), tm_ret(head->kids[0]));
    no_match(RwRule::FoldOfUnfold);
  }
  TmP head, rest;
  if (as_seq(t, head, rest) && head->k == TmK::Step && rest->k == TmK::Ret) {
    if (!tyArg)
      throw RewriteFailure({RewriteError::NeedsType,
                            "rewrite fold-of-unfold backward: needs the recursive type (with type ...)"});
    return tm_bind("x", tm_unfold(rest->kids[0]), tm_ret(tm_fold(tyArg, tm_var(0))));
  }
  no_match(RwRule::FoldOfUnfold);
}

TmP rw_get_after_set(const TmP& t, RwDir dir) {
  if (dir == RwDir::Forward) {
    TmP head, body;
    if (as_bind(t, head, body) && head->k == TmK::Set) {
      const TmP& u = head->kids[0];
      const TmP& v = head->kids[1];
      // bare: set u v; get u
      if (body->k == TmK::Get && !tm_has_free(body, 0) &&
          alpha_eq(body->kids[0], tm_shift(u, 1)))
        return tm_seq(tm_step(), tm_seq(tm_set(u, v), tm_ret(v)));
      // with continuation: set u v; x <- get u; k   ~>  step; set u v; k[v/x]
      TmP ghead, gbody;
      if (as_bind(body, ghead, gbody) && ghead->k == TmK::Get &&
          alpha_eq(ghead->kids[0], tm_shift(u, 1))) {
        // gbody: 0 = read value, 1 = set unit
        TmP k1 = tm_subst(gbody, 0, tm_shift(v, 1));  // now 0 = set unit
        TmP k2 = tm_shift(k1, 1, 1);                  // insert step unit above
        TmP inner = tm_bind("_", tm_set(tm_shift(u, 1), tm_shift(v, 1)), k2);
        return tm_bind("_", tm_step(), inner);
      }
    }
    no_match(RwRule::GetAfterSet);
  }
  // backward, bare form only: step; set u v; ret v  ~>  set u v; get u
  TmP h1, r1;
  if (as_seq(t, h1, r1) && h1->k == TmK::Step) {
    TmP h2, r2;
    if (as_seq(r1, h2, r2) && h2->k == TmK::Set && r2->k == TmK::Ret &&
        alpha_eq(r2->kids[0], h2->kids[1]))
      return tm_seq(tm_set(h2->kids[0], h2->kids[1]), tm_get(h2->kids[0]));
  }
  no_match(RwRule::GetAfterSet);
}

TmP rw_set_after_new(const TmP& t, RwDir dir, const TmP& tmArg) {
  if (dir == RwDir::Forward) {
    TmP head, xbody;
    if (as_bind(t, head, xbody) && head->k == TmK::New) {
      TmP shead, sbody;
      if (as_bind(xbody, shead, sbody) && shead->k == TmK::Set &&
          shead->kids[0]->k == TmK::Var && shead->kids[0]->var == 0 &&
          !tm_has_free(shead->kids[1], 0) && !tm_has_free(sbody, 0)) {
        TmP v = tm_shift(shead->kids[1], -1, 0);
        TmP w = strengthen0(sbody);  // 0 = allocated ref again
        return tm_bind(t->hints[0], tm_new(v), w);
      }
    }
    no_match(RwRule::SetAfterNew);
  }
  TmP head, xbody;
  if (as_bind(t, head, xbody) && head->k == TmK::New) {
    TmP init = tmArg ? tmArg : head->kids[0];
    TmP setter = tm_set(tm_var(0), tm_shift(head->kids[0], 1));
    return tm_bind(t->hints[0], tm_new(init), tm_bind("_", setter, tm_shift(xbody, 1, 0)));
  }
  no_match(RwRule::SetAfterNew);
}

TmP rw_set_after_set(const TmP& t, RwDir dir, const TmP& tmArg) {
  if (dir == RwDir::Forward) {
    TmP head, body;
    if (as_bind(t, head, body) && head->k == TmK::Set) {
      TmP uShifted = tm_shift(head->kids[0], 1);
      // bare: set u v; set u w
      if (body->k == TmK::Set && alpha_eq(body->kids[0], uShifted) && !tm_has_free(body, 0))
        return tm_set(head->kids[0], tm_shift(body->kids[1], -1, 0));
      // with continuation
      TmP shead, sbody;
      if (as_bind(body, shead, sbody) && shead->k == TmK::Set &&
          alpha_eq(shead->kids[0], uShifted) && !tm_has_free(shead->kids[1], 0) &&
          !tm_has_free(sbody, 1)) {
        TmP w = tm_shift(shead->kids[1], -1, 0);
        TmP k = tm_subst(sbody, 1, tm_unit());  // drop the outer discarded unit
        return tm_bind(body->hints[0], tm_set(head->kids[0], w), k);
      }
    }
    no_match(RwRule::SetAfterSet);
  }
  if (t->k == TmK::Set) {
    TmP v = tmArg ? tmArg : t->kids[1];
    return tm_seq(tm_set(t->kids[0], v), tm_set(t->kids[0], t->kids[1]));
  }
  no_match(RwRule::SetAfterSet);
}

TmP rw_get_after_get(const TmP& t, RwDir) {
  // symmetric: swap two adjacent reads (both directions are the same move)
  TmP h1, b1;
  if (as_bind(t, h1, b1) && h1->k == TmK::Get) {
    TmP h2, b2;
    if (as_bind(b1, h2, b2) && h2->k == TmK::Get && !tm_has_free(h2, 0)) {
      TmP v = tm_shift(h2->kids[0], -1, 0);
      TmP inner = tm_bind(b1->hints[0], tm_get(tm_shift(h1->kids[0], 1)), tm_swap01(b2));
      return tm_bind(t->hints[0], tm_get(v), inner);
    }
  }
  no_match(RwRule::GetAfterGet);
}

TmP rw_set_after_get(const TmP& t, RwDir dir) {
  if (dir == RwDir::Forward) {
    TmP h1, b1;
    if (as_bind(t, h1, b1) && h1->k == TmK::Get) {
      TmP h2, b2;
      if (as_bind(b1, h2, b2) && h2->k == TmK::Set &&
          alpha_eq(h2->kids[0], tm_shift(h1->kids[0], 1)) && h2->kids[1]->k == TmK::Var &&
          h2->kids[1]->var == 0 && !tm_has_free(b2, 0)) {
        return tm_bind(t->hints[0], tm_get(h1->kids[0]), strengthen0(b2));
      }
    }
    no_match(RwRule::SetAfterGet);
  }
  TmP h1, b1;
  if (as_bind(t, h1, b1) && h1->k == TmK::Get) {
    TmP setter = tm_set(tm_shift(h1->kids[0], 1), tm_var(0));
    return tm_bind(t->hints[0], tm_get(h1->kids[0]), tm_bind("_", setter, tm_shift(b1, 1, 0)));
  }
  no_match(RwRule::SetAfterGet);
}

// op; step; w  <~>  step; op; w   for a primitive effect in head position.
TmP rw_step_commute(const TmP& t, RwDir dir, RwRule rule) {
  auto headMatches = [&](const TmP& h) {
    switch (rule) {
      case RwRule::StepCommuteGet: return h->k == TmK::Get;
      case RwRule::StepCommuteSet: return h->k == TmK::Set;
      case RwRule::StepCommuteNew: return h->k == TmK::New;
      case RwRule::StepCommuteBind: return true;
      default: return false;
    }
  };
  if (dir == RwDir::Forward) {
    TmP h1, b1;
    if (as_bind(t, h1, b1) && headMatches(h1) && h1->k != TmK::Step) {
      TmP h2, b2;
      if (as_bind(b1, h2, b2) && h2->k == TmK::Step && !tm_has_free(h2, 0)) {
        TmP inner = tm_bind(t->hints[0], tm_shift(h1, 1), tm_swap01(b2));
        return tm_bind("_", tm_step(), inner);
      }
    }
    no_match(rule);
  }
  TmP h1, b1;
  if (as_bind(t, h1, b1) && h1->k == TmK::Step) {
    TmP h2, b2;
    if (as_bind(b1, h2, b2) && headMatches(h2) && h2->k != TmK::Step && !tm_has_free(h2, 0)) {
      TmP inner = tm_bind("_", tm_step(), tm_swap01(b2));
      return tm_bind(b1->hints[0], tm_shift(h2, -1, 0), inner);
    }
  }
  no_match(rule);
}

}  // namespace

TmP rewrite_term(const TmP& t, RwRule rule, RwDir dir, const TyP& tyArg) {
  switch (rule) {
    case RwRule::UnfoldOfFold: return rw_unfold_of_fold(t, dir, tyArg);
    case RwRule::FoldOfUnfold: return rw_fold_of_unfold(t, dir, tyArg);
    case RwRule::GetAfterSet: return rw_get_after_set(t, dir);
    case RwRule::SetAfterNew: return rw_set_after_new(t, dir, nullptr);
    case RwRule::SetAfterSet: return rw_set_after_set(t, dir, nullptr);
    case RwRule::GetAfterGet: return rw_get_after_get(t, dir);
    case RwRule::SetAfterGet: return rw_set_after_get(t, dir);
    case RwRule::StepCommuteGet:
    case RwRule::StepCommuteSet:
    case RwRule::StepCommuteNew:
    case RwRule::StepCommuteBind:
      return rw_step_commute(t, dir, rule);
  }
  throw InternalError("rewrite_term: bad rule");
}

TmP rewrite_at(const TmP& root, const Path& path, RwRule rule, RwDir dir, const TyP& tyArg) {
  TmP sub = subterm_at(root, path);
  if (!sub)
    throw RewriteFailure({RewriteError::PathInvalid, "rewrite: path " + path_to_string(path) +
                                                         " does not resolve to a subterm"});
  TmP replaced = rewrite_term(sub, rule, dir, tyArg);
  return replace_at(root, path, replaced);
}

}  // namespace lmr
