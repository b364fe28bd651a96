#include "lmr/typeck.hpp"

#include "lmr/pretty.hpp"

namespace lmr {

const char* type_err_kind_name(TypeErrKind k) {
  switch (k) {
    case TypeErrKind::Mismatch: return "mismatch";
    case TypeErrKind::FlagViolation: return "flag-violation";
    case TypeErrKind::Unbound: return "unbound";
    case TypeErrKind::NotAMonad: return "not-a-monad";
    case TypeErrKind::NotARef: return "not-a-ref";
    case TypeErrKind::NotAFunction: return "not-a-function";
    case TypeErrKind::NotASum: return "not-a-sum";
    case TypeErrKind::NotAPair: return "not-a-pair";
    case TypeErrKind::NotAList: return "not-a-list";
    case TypeErrKind::NotANat: return "not-a-nat";
    case TypeErrKind::NotAMu: return "not-a-mu";
    case TypeErrKind::NotAForall: return "not-a-forall";
    case TypeErrKind::NotAExists: return "not-a-exists";
    case TypeErrKind::NotAProp: return "not-a-prop";
    case TypeErrKind::AnnotationRequired: return "annotation-required";
    case TypeErrKind::ScopeEscape: return "scope-escape";
    case TypeErrKind::IllFormed: return "ill-formed";
  }
  return "unknown";
}

[[noreturn]] static void fail(TypeErrKind k, Span sp, std::string msg, TyP expected = nullptr,
                              TyP actual = nullptr) {
  throw TypeCheckFailure(TypeError{k, sp, std::move(msg), std::move(expected), std::move(actual)});
}

// ---------------------------------------------------------------------------
// Type formation

void check_ty(const Ctx& ctx, const TyP& a, TypeFlag flag) {
  switch (a->k) {
    case TyK::Var:
      if (a->var < 0 || a->var >= ctx.tyCount)
        fail(TypeErrKind::Unbound, {}, "unbound type variable");
      return;  // type variables range over program types
    case TyK::Unit:
    case TyK::Empty:
    case TyK::Nat:
      return;
    case TyK::Prop:
      if (flag == TypeFlag::Program)
        fail(TypeErrKind::FlagViolation, {}, "prop is a logical type, not a program type");
      return;
    case TyK::Prod:
    case TyK::Sum:
    case TyK::Arrow:
      check_ty(ctx, a->a, flag);
      check_ty(ctx, a->b, flag);
      return;
    case TyK::List:
      check_ty(ctx, a->a, flag);
      return;
    case TyK::Forall: {
      Ctx ext = ctx.pushTy(a->hint);
      check_ty(ext, a->a, flag);
      return;
    }
    case TyK::Mu:
    case TyK::Exists: {
      Ctx ext = ctx.pushTy(a->hint);
      check_ty(ext, a->a, TypeFlag::Program);
      return;
    }
    case TyK::Ref:
    case TyK::Monad:
      check_ty(ctx, a->a, TypeFlag::Program);
      return;
  }
  throw InternalError("check_ty: bad kind");
}

bool is_program_ty(const Ctx& ctx, const TyP& a) {
  try {
    check_ty(ctx, a, TypeFlag::Program);
    return true;
  } catch (const TypeCheckFailure&) {
    return false;
  }
}

// Demand A ≡ B (types have no redexes, so conversion is alpha-equality).
static void demand_eq(const TyP& expected, const TyP& actual, Span sp) {
  if (!ty_alpha_eq(expected, actual))
    fail(TypeErrKind::Mismatch, sp,
         "type mismatch: expected " + pretty_ty(expected) + ", got " + pretty_ty(actual), expected,
         actual);
}

static void demand_program(const Ctx& ctx, const TyP& a, Span sp, const char* what) {
  try {
    check_ty(ctx, a, TypeFlag::Program);
  } catch (const TypeCheckFailure&) {
    fail(TypeErrKind::FlagViolation, sp,
         std::string(what) + " requires a program type, got " + pretty_ty(a), nullptr, a);
  }
}

// ---------------------------------------------------------------------------
// Elements

static TyP infer(const Ctx& ctx, const TmP& u);
static void check(const Ctx& ctx, const TmP& u, const TyP& expected);

static TyP infer_monadic(const Ctx& ctx, const TmP& u, const char* who) {
  TyP t = infer(ctx, u);
  if (t->k != TyK::Monad)
    fail(TypeErrKind::NotAMonad, u->span,
         std::string(who) + ": expected a computation, got " + pretty_ty(t), nullptr, t);
  return t->a;
}

static TyP infer(const Ctx& ctx, const TmP& u) {
  switch (u->k) {
    case TmK::Var:
      if (u->var < 0 || u->var >= ctx.size()) fail(TypeErrKind::Unbound, u->span, "unbound variable");
      return ctx.lookup(u->var);
    case TmK::Loc:
      if (!u->tyAnn) fail(TypeErrKind::AnnotationRequired, u->span, "location literal needs a type");
      check_ty(ctx, u->tyAnn, TypeFlag::Program);
      return ty_ref(u->tyAnn);
    case TmK::Unit:
      return ty_unit();
    case TmK::Pair: {
      TyP a = infer(ctx, u->kids[0]);
      TyP b = infer(ctx, u->kids[1]);
      return ty_prod(a, b);
    }
    case TmK::Fst: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Prod) fail(TypeErrKind::NotAPair, u->span, "fst of non-pair", nullptr, t);
      return t->a;
    }
    case TmK::Snd: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Prod) fail(TypeErrKind::NotAPair, u->span, "snd of non-pair", nullptr, t);
      return t->b;
    }
    case TmK::Inl: {
      if (!u->tyAnn) fail(TypeErrKind::AnnotationRequired, u->span, "inl needs a sum annotation");
      if (u->tyAnn->k != TyK::Sum) fail(TypeErrKind::NotASum, u->span, "inl annotation is not a sum");
      check_ty(ctx, u->tyAnn, TypeFlag::Logical);
      check(ctx, u->kids[0], u->tyAnn->a);
      return u->tyAnn;
    }
    case TmK::Inr: {
      if (!u->tyAnn) fail(TypeErrKind::AnnotationRequired, u->span, "inr needs a sum annotation");
      if (u->tyAnn->k != TyK::Sum) fail(TypeErrKind::NotASum, u->span, "inr annotation is not a sum");
      check_ty(ctx, u->tyAnn, TypeFlag::Logical);
      check(ctx, u->kids[0], u->tyAnn->b);
      return u->tyAnn;
    }
    case TmK::Case: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Sum) fail(TypeErrKind::NotASum, u->span, "case scrutinee is not a sum", nullptr, t);
      TyP l = infer(ctx.pushTm(u->hints[0], t->a), u->kids[1]);
      TyP r = infer(ctx.pushTm(u->hints[1], t->b), u->kids[2]);
      demand_eq(l, r, u->span);
      return l;
    }
    case TmK::Lam: {
      if (!u->tyAnn)
        fail(TypeErrKind::AnnotationRequired, u->span, "lambda needs a domain annotation here");
      check_ty(ctx, u->tyAnn, TypeFlag::Logical);
      TyP cod = infer(ctx.pushTm(u->hints[0], u->tyAnn), u->kids[0]);
      return ty_arrow(u->tyAnn, cod);
    }
    case TmK::App: {
      TyP f = infer(ctx, u->kids[0]);
      if (f->k != TyK::Arrow)
        fail(TypeErrKind::NotAFunction, u->span, "application head is not a function", nullptr, f);
      check(ctx, u->kids[1], f->a);
      return f->b;
    }
    case TmK::TyLam: {
      TyP body = infer(ctx.pushTy(u->hints[0]), u->kids[0]);
      return ty_forall(u->hints[0], body);
    }
    case TmK::TyApp: {
      TyP f = infer(ctx, u->kids[0]);
      if (f->k != TyK::Forall)
        fail(TypeErrKind::NotAForall, u->span, "type application head is not universal", nullptr, f);
      demand_program(ctx, u->tyAnn, u->span, "type argument");
      return ty_subst(f->a, 0, u->tyAnn);
    }
    case TmK::Pack: {
      if (!u->tyAnn || u->tyAnn->k != TyK::Exists)
        fail(TypeErrKind::AnnotationRequired, u->span, "pack needs an existential annotation");
      check_ty(ctx, u->tyAnn, TypeFlag::Program);
      demand_program(ctx, u->tyAnn2, u->span, "pack witness");
      check(ctx, u->kids[0], ty_subst(u->tyAnn->a, 0, u->tyAnn2));
      return u->tyAnn;
    }
    case TmK::Unpack: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Exists)
        fail(TypeErrKind::NotAExists, u->span, "unpack scrutinee is not existential", nullptr, t);
      Ctx ext = ctx.pushTy(u->hints[0]).pushTm(u->hints[1], t->a);
      TyP body = infer(ext, u->kids[1]);
      if (ty_has_free(body, 0))
        fail(TypeErrKind::ScopeEscape, u->span, "unpack body type mentions the abstract type");
      return ty_subst(body, 0, ty_unit());  // strengthen: var 0 does not occur
    }
    case TmK::Fold: {
      if (!u->tyAnn || u->tyAnn->k != TyK::Mu)
        fail(TypeErrKind::AnnotationRequired, u->span, "fold needs a recursive-type annotation");
      check_ty(ctx, u->tyAnn, TypeFlag::Program);
      check(ctx, u->kids[0], ty_subst(u->tyAnn->a, 0, u->tyAnn));
      return u->tyAnn;
    }
    case TmK::Unfold: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Mu)
        fail(TypeErrKind::NotAMu, u->span, "unfold of non-recursive type", nullptr, t);
      return ty_monad(ty_subst(t->a, 0, t));
    }
    case TmK::Ret: {
      TyP a = infer(ctx, u->kids[0]);
      demand_program(ctx, a, u->span, "ret");
      return ty_monad(a);
    }
    case TmK::Bind: {
      TyP a = infer_monadic(ctx, u->kids[0], "bind");
      TyP b = infer(ctx.pushTm(u->hints[0], a), u->kids[1]);
      if (b->k != TyK::Monad)
        fail(TypeErrKind::NotAMonad, u->span, "bind body must be a computation", nullptr, b);
      return b;
    }
    case TmK::Get: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Ref) fail(TypeErrKind::NotARef, u->span, "get of non-reference", nullptr, t);
      return ty_monad(t->a);
    }
    case TmK::Set: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Ref) fail(TypeErrKind::NotARef, u->span, "set of non-reference", nullptr, t);
      check(ctx, u->kids[1], t->a);
      return ty_monad(ty_unit());
    }
    case TmK::New: {
      TyP a = infer(ctx, u->kids[0]);
      demand_program(ctx, a, u->span, "new");
      return ty_monad(ty_ref(a));
    }
    case TmK::Step:
      return ty_monad(ty_unit());
    case TmK::Zero:
      return ty_nat();
    case TmK::Succ:
      check(ctx, u->kids[0], ty_nat());
      return ty_nat();
    case TmK::NatRec: {
      check(ctx, u->kids[0], ty_nat());
      TyP motive = infer(ctx, u->kids[1]);
      Ctx ext = ctx.pushTm(u->hints[0], ty_nat()).pushTm(u->hints[1], motive);
      check(ext, u->kids[2], motive);
      return motive;
    }
    case TmK::Nil: {
      if (!u->tyAnn) fail(TypeErrKind::AnnotationRequired, u->span, "nil needs an element annotation");
      check_ty(ctx, u->tyAnn, TypeFlag::Logical);
      return ty_list(u->tyAnn);
    }
    case TmK::Cons: {
      TyP a = infer(ctx, u->kids[0]);
      check(ctx, u->kids[1], ty_list(a));
      return ty_list(a);
    }
    case TmK::ListRec: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::List)
        fail(TypeErrKind::NotAList, u->span, "listrec scrutinee is not a list", nullptr, t);
      TyP motive = infer(ctx, u->kids[1]);
      Ctx ext = ctx.pushTm(u->hints[0], t->a).pushTm(u->hints[1], t).pushTm(u->hints[2], motive);
      check(ext, u->kids[2], motive);
      return motive;
    }
    // Propositions.
    case TmK::Eq: {
      check_ty(ctx, u->tyAnn, TypeFlag::Logical);
      check(ctx, u->kids[0], u->tyAnn);
      check(ctx, u->kids[1], u->tyAnn);
      return ty_prop();
    }
    case TmK::Top:
    case TmK::Bot:
      return ty_prop();
    case TmK::And:
    case TmK::Or:
    case TmK::Imp:
    case TmK::Sep:
    case TmK::Wand:
      check(ctx, u->kids[0], ty_prop());
      check(ctx, u->kids[1], ty_prop());
      return ty_prop();
    case TmK::ForallP:
    case TmK::ExistsP: {
      check_ty(ctx, u->tyAnn, TypeFlag::Logical);
      check(ctx.pushTm(u->hints[0], u->tyAnn), u->kids[0], ty_prop());
      return ty_prop();
    }
    case TmK::Box:
    case TmK::Later:
      check(ctx, u->kids[0], ty_prop());
      return ty_prop();
    case TmK::PointsTo: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Ref)
        fail(TypeErrKind::NotARef, u->span, "points-to subject is not a reference", nullptr, t);
      check(ctx, u->kids[1], t->a);
      return ty_prop();
    }
    case TmK::Wp: {
      TyP a = infer_monadic(ctx, u->kids[0], "wp");
      check(ctx.pushTm(u->hints[0], a), u->kids[1], ty_prop());
      return ty_prop();
    }
  }
  throw InternalError("infer: bad kind");
}

// Checking mode: push the expected type into annotation-hungry constructors.
static void check(const Ctx& ctx, const TmP& u, const TyP& expected) {
  switch (u->k) {
    case TmK::Lam:
      if (!u->tyAnn) {
        if (expected->k != TyK::Arrow)
          fail(TypeErrKind::NotAFunction, u->span, "lambda checked against non-function type",
               expected, nullptr);
        check(ctx.pushTm(u->hints[0], expected->a), u->kids[0], expected->b);
        return;
      }
      break;
    case TmK::Inl:
      if (!u->tyAnn) {
        if (expected->k != TyK::Sum)
          fail(TypeErrKind::NotASum, u->span, "inl checked against non-sum type", expected, nullptr);
        check_ty(ctx, expected, TypeFlag::Logical);
        check(ctx, u->kids[0], expected->a);
        return;
      }
      break;
    case TmK::Inr:
      if (!u->tyAnn) {
        if (expected->k != TyK::Sum)
          fail(TypeErrKind::NotASum, u->span, "inr checked against non-sum type", expected, nullptr);
        check_ty(ctx, expected, TypeFlag::Logical);
        check(ctx, u->kids[0], expected->b);
        return;
      }
      break;
    case TmK::Nil:
      if (!u->tyAnn) {
        if (expected->k != TyK::List)
          fail(TypeErrKind::NotAList, u->span, "nil checked against non-list type", expected, nullptr);
        check_ty(ctx, expected, TypeFlag::Logical);
        return;
      }
      break;
    case TmK::Fold:
      if (!u->tyAnn) {
        if (expected->k != TyK::Mu)
          fail(TypeErrKind::NotAMu, u->span, "fold checked against non-recursive type", expected,
               nullptr);
        check_ty(ctx, expected, TypeFlag::Program);
        check(ctx, u->kids[0], ty_subst(expected->a, 0, expected));
        return;
      }
      break;
    case TmK::Pack:
      if (!u->tyAnn) {
        if (expected->k != TyK::Exists)
          fail(TypeErrKind::NotAExists, u->span, "pack checked against non-existential type",
               expected, nullptr);
        check_ty(ctx, expected, TypeFlag::Program);
        demand_program(ctx, u->tyAnn2, u->span, "pack witness");
        check(ctx, u->kids[0], ty_subst(expected->a, 0, u->tyAnn2));
        return;
      }
      break;
    case TmK::Pair:
      if (expected->k == TyK::Prod) {
        check(ctx, u->kids[0], expected->a);
        check(ctx, u->kids[1], expected->b);
        return;
      }
      break;
    case TmK::Ret:
      if (expected->k == TyK::Monad) {
        check(ctx, u->kids[0], expected->a);
        return;
      }
      break;
    case TmK::Cons:
      if (expected->k == TyK::List) {
        check(ctx, u->kids[0], expected->a);
        check(ctx, u->kids[1], expected);
        return;
      }
      break;
    case TmK::Case: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::Sum)
        fail(TypeErrKind::NotASum, u->span, "case scrutinee is not a sum", nullptr, t);
      check(ctx.pushTm(u->hints[0], t->a), u->kids[1], expected);
      check(ctx.pushTm(u->hints[1], t->b), u->kids[2], expected);
      return;
    }
    case TmK::Bind:
      if (expected->k == TyK::Monad) {
        TyP a = infer_monadic(ctx, u->kids[0], "bind");
        check(ctx.pushTm(u->hints[0], a), u->kids[1], expected);
        return;
      }
      break;
    case TmK::NatRec: {
      check(ctx, u->kids[0], ty_nat());
      check(ctx, u->kids[1], expected);
      Ctx ext = ctx.pushTm(u->hints[0], ty_nat()).pushTm(u->hints[1], expected);
      check(ext, u->kids[2], expected);
      return;
    }
    case TmK::ListRec: {
      TyP t = infer(ctx, u->kids[0]);
      if (t->k != TyK::List)
        fail(TypeErrKind::NotAList, u->span, "listrec scrutinee is not a list", nullptr, t);
      check(ctx, u->kids[1], expected);
      Ctx ext = ctx.pushTm(u->hints[0], t->a).pushTm(u->hints[1], t).pushTm(u->hints[2], expected);
      check(ext, u->kids[2], expected);
      return;
    }
    default:
      break;
  }
  TyP actual = infer(ctx, u);
  demand_eq(expected, actual, u->span);
}

TyP infer_tm(const Ctx& ctx, const TmP& u) { return infer(ctx, u); }
void check_tm(const Ctx& ctx, const TmP& u, const TyP& expected) { check(ctx, u, expected); }
void check_prop(const Ctx& ctx, const TmP& phi) { check(ctx, phi, ty_prop()); }

bool sequent_alpha_eq(const Sequent& a, const Sequent& b) {
  if (a.ctx.tyCount != b.ctx.tyCount) return false;
  if (a.ctx.size() != b.ctx.size()) return false;
  for (int i = 0; i < a.ctx.size(); i++)
    if (!ty_alpha_eq(a.ctx.elems[i], b.ctx.elems[i])) return false;
  return alpha_eq(a.hyp, b.hyp) && alpha_eq(a.goal, b.goal);
}

void check_sequent(const Sequent& s) {
  Ctx probe;
  probe.tyCount = s.ctx.tyCount;
  probe.tyNames = s.ctx.tyNames;
  for (size_t i = 0; i < s.ctx.elems.size(); i++) {
    check_ty(probe, s.ctx.elems[i], TypeFlag::Logical);
    probe = probe.pushTm(i < s.ctx.tmNames.size() ? s.ctx.tmNames[i] : "_", s.ctx.elems[i]);
  }
  check_prop(s.ctx, s.hyp);
  check_prop(s.ctx, s.goal);
}

}  // namespace lmr
