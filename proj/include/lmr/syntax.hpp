#pragma once

// Core abstract syntax for lmr: types and terms in a nameless (de Bruijn)
// representation. Two independent index spaces: type variables count into
// the type context, element variables into the element context. Surface
// names survive only as display hints on binders.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lmr {

struct Span {
  int32_t begin = -1;
  int32_t end = -1;
  int32_t line = -1;
  int32_t col = -1;
  bool valid() const { return begin >= 0; }
};

// Programming errors (ill-scoped indices, broken invariants). Never raised
// on well-formed input.
struct InternalError : std::logic_error {
  explicit InternalError(const std::string& m) : std::logic_error(m) {}
};

// ---------------------------------------------------------------------------
// Types

enum class TyK : uint8_t {
  Var,
  Unit,
  Empty,
  Prod,
  Sum,
  Arrow,
  Nat,
  List,
  Mu,
  Forall,
  Exists,
  Ref,
  Monad,  // T A
  Prop,
};

struct Ty;
using TyP = std::shared_ptr<const Ty>;

struct Ty {
  TyK k;
  int var = -1;      // TyK::Var
  TyP a, b;          // children; unary constructors use `a`
  std::string hint;  // binder display hint (Mu/Forall/Exists)

  Ty(TyK kk) : k(kk) {}
};

TyP ty_var(int i);
TyP ty_unit();
TyP ty_empty();
TyP ty_nat();
TyP ty_prop();
TyP ty_prod(TyP a, TyP b);
TyP ty_sum(TyP a, TyP b);
TyP ty_arrow(TyP a, TyP b);
TyP ty_list(TyP a);
TyP ty_ref(TyP a);
TyP ty_monad(TyP a);
TyP ty_mu(std::string hint, TyP body);
TyP ty_forall(std::string hint, TyP body);
TyP ty_exists(std::string hint, TyP body);

// Does the constructor at `k` bind a type variable in its body?
bool ty_is_binder(TyK k);

// Shift type variables >= cutoff by `by`.
TyP ty_shift(const TyP& t, int by, int cutoff = 0);
// Capture-avoiding substitution of B for variable `target`; variables above
// `target` are shifted down by one.
TyP ty_subst(const TyP& t, int target, const TyP& B);
bool ty_alpha_eq(const TyP& a, const TyP& b);
// True iff variable `i` occurs free.
bool ty_has_free(const TyP& t, int i);
// Largest type variable index used, or -1.
int ty_max_var(const TyP& t);

// ---------------------------------------------------------------------------
// Terms
//
// Propositions are ordinary terms (of type Prop when well-typed); the
// propositional connectives are just more constructors here.

enum class TmK : uint8_t {
  Var,
  Loc,  // literal store location (oracle harness); tyAnn = pointee type
  Unit,
  Pair,
  Fst,
  Snd,
  Inl,   // tyAnn = full sum type
  Inr,   // tyAnn = full sum type
  Case,  // scrut, left binder, right binder
  Lam,   // tyAnn = domain
  App,
  TyLam,
  TyApp,   // tyAnn = type argument
  Pack,    // tyAnn = existential type, tyAnn2 = witness
  Unpack,  // scrut, body (1 ty binder + 1 tm binder)
  Fold,    // tyAnn = mu type
  Unfold,
  Ret,
  Bind,  // head, body binder
  Get,
  Set,
  New,
  Step,
  Zero,
  Succ,
  NatRec,  // scrut, zero branch, succ branch (pred, ih)
  Nil,     // tyAnn = element type
  Cons,
  ListRec,  // scrut, nil branch, cons branch (head, tail, ih)
  // Propositional constructors.
  Eq,  // tyAnn = the type at which the equation lives
  Top,
  Bot,
  And,
  Or,
  Imp,
  ForallP,  // tyAnn = domain, body binder
  ExistsP,  // tyAnn = domain, body binder
  Sep,
  Wand,
  Box,
  Later,
  PointsTo,  // location, value
  Wp,        // expression, postcondition binder
};

struct Tm;
using TmP = std::shared_ptr<const Tm>;

struct Tm {
  TmK k;
  int var = -1;  // Var index or Loc address
  TyP tyAnn, tyAnn2;
  std::vector<TmP> kids;
  std::vector<std::string> hints;  // display hints for bound variables
  Span span;

  Tm(TmK kk) : k(kk) {}
};

// Per-child binder structure: how many term/type variables child `i` binds.
struct KidSig {
  int tmBinders;
  int tyBinders;
};
// Number of children the kind carries (fixed arity).
int tm_arity(TmK k);
KidSig tm_kid_sig(TmK k, int kid);

TmP tm_var(int i);
TmP tm_loc(int addr, TyP pointee);
TmP tm_unit();
TmP tm_pair(TmP a, TmP b);
TmP tm_fst(TmP a);
TmP tm_snd(TmP a);
TmP tm_inl(TyP sum, TmP a);
TmP tm_inr(TyP sum, TmP a);
TmP tm_case(TmP scrut, std::string hl, TmP l, std::string hr, TmP r);
TmP tm_lam(std::string hint, TyP dom, TmP body);
TmP tm_app(TmP f, TmP a);
TmP tm_tylam(std::string hint, TmP body);
TmP tm_tyapp(TmP f, TyP arg);
TmP tm_pack(TyP exTy, TyP witness, TmP body);
TmP tm_unpack(TmP scrut, std::string tyHint, std::string tmHint, TmP body);
TmP tm_fold(TyP muTy, TmP a);
TmP tm_unfold(TmP a);
TmP tm_ret(TmP a);
TmP tm_bind(std::string hint, TmP head, TmP body);
TmP tm_get(TmP l);
TmP tm_set(TmP l, TmP v);
TmP tm_new(TmP v);
TmP tm_step();
TmP tm_zero();
TmP tm_succ(TmP n);
TmP tm_natlit(uint64_t n);
TmP tm_natrec(TmP scrut, TmP z, std::string hp, std::string hi, TmP s);
TmP tm_nil(TyP elem);
TmP tm_cons(TmP h, TmP t);
TmP tm_listrec(TmP scrut, TmP z, std::string hh, std::string ht, std::string hi, TmP s);
TmP tm_eq(TyP at, TmP l, TmP r);
TmP tm_top();
TmP tm_bot();
TmP tm_and(TmP a, TmP b);
TmP tm_or(TmP a, TmP b);
TmP tm_imp(TmP a, TmP b);
TmP tm_forallp(std::string hint, TyP dom, TmP body);
TmP tm_existsp(std::string hint, TyP dom, TmP body);
TmP tm_sep(TmP a, TmP b);
TmP tm_wand(TmP a, TmP b);
TmP tm_box(TmP a);
TmP tm_later(TmP a);
TmP tm_points_to(TmP l, TmP v);
TmP tm_wp(TmP e, std::string hint, TmP post);

TmP tm_with_span(const TmP& t, Span sp);

// `step; e` — bind with a discarded binder.
TmP tm_seq(TmP first, TmP rest);

// Term-variable shifting/substitution.
TmP tm_shift(const TmP& t, int by, int cutoff = 0);
TmP tm_subst(const TmP& t, int target, const TmP& v);
// Type variables occurring inside a term.
TmP tm_ty_shift(const TmP& t, int by, int cutoff = 0);
TmP tm_ty_subst(const TmP& t, int target, const TyP& B);

// Remap free term variables: idx -> f(idx) where idx is depth-corrected
// (i.e. f sees indices relative to the term's root). f must return a term
// valid at the root; it is shifted under binders automatically.
TmP tm_map_free(const TmP& t, const std::function<TmP(int)>& f);

// Swap free variables 0 and 1 (used when reordering adjacent binds).
TmP tm_swap01(const TmP& t);

bool tm_has_free(const TmP& t, int i);
bool tm_has_free_ty(const TmP& t, int i);
// Structural equality modulo display hints and spans; with de Bruijn
// indices this *is* alpha-equivalence.
bool alpha_eq(const TmP& a, const TmP& b);
bool alpha_eq_ty(const TyP& a, const TyP& b);

// ---------------------------------------------------------------------------
// Contexts

// A typing context: `tyCount` type variables and an ordered list of element
// entries. Element types are stored fully shifted to the current type
// context. Entry 0 of `elems` is the *oldest* binding; de Bruijn index i
// refers to elems[size()-1-i].
struct Ctx {
  int tyCount = 0;
  std::vector<TyP> elems;
  std::vector<std::string> tyNames;
  std::vector<std::string> tmNames;

  int size() const { return static_cast<int>(elems.size()); }
  const TyP& lookup(int idx) const;
  const std::string& nameOf(int idx) const;
  Ctx pushTm(const std::string& name, TyP ty) const;
  Ctx pushTy(const std::string& name) const;
};

}  // namespace lmr
