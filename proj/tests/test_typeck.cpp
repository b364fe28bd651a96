#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "lmr/conv.hpp"
#include "lmr/pretty.hpp"
#include "lmr/typeck.hpp"

using namespace lmr;

namespace {

TyP llist(const TyP& elem) {
  // mu r. 1 + ref (elem * r); elem must make sense one binder up
  return ty_mu("r", ty_sum(ty_unit(), ty_ref(ty_prod(ty_shift(elem, 1), ty_var(0)))));
}

Ctx oneTyVar() {
  Ctx c;
  return c.pushTy("a");
}

}  // namespace

TEST_CASE("llist is a program type over one type variable") {
  Ctx xi = oneTyVar();
  CHECK_NOTHROW(check_ty(xi, llist(ty_var(0)), TypeFlag::Program));
}

TEST_CASE("prop is not a program type") {
  Ctx c;
  CHECK_THROWS_AS(check_ty(c, ty_prop(), TypeFlag::Program), TypeCheckFailure);
  CHECK_NOTHROW(check_ty(c, ty_prop(), TypeFlag::Logical));
}

TEST_CASE("forall over prop-valued body is logical only") {
  Ctx c;
  TyP t = ty_forall("a", ty_arrow(ty_var(0), ty_prop()));
  CHECK_NOTHROW(check_ty(c, t, TypeFlag::Logical));
  CHECK_THROWS_AS(check_ty(c, t, TypeFlag::Program), TypeCheckFailure);
}

TEST_CASE("program types pass at the logical flag (monotonicity)") {
  Ctx xi = oneTyVar();
  for (const TyP& t : {llist(ty_var(0)), ty_monad(ty_nat()), ty_ref(ty_unit()),
                       ty_exists("b", ty_var(0))}) {
    CHECK_NOTHROW(check_ty(xi, t, TypeFlag::Program));
    CHECK_NOTHROW(check_ty(xi, t, TypeFlag::Logical));
  }
}

TEST_CASE("monadic rule composition: \\x. y <- get x; ret y") {
  Ctx c;
  TmP body = tm_bind("y", tm_get(tm_var(0)), tm_ret(tm_var(0)));
  TmP f = tm_lam("x", ty_ref(ty_nat()), body);
  TyP t = infer_tm(c, f);
  CHECK(ty_alpha_eq(t, ty_arrow(ty_ref(ty_nat()), ty_monad(ty_nat()))));
}

TEST_CASE("set at the wrong value type is a mismatch") {
  Ctx c = Ctx{}.pushTm("l", ty_ref(ty_nat()));
  TmP bad = tm_set(tm_var(0), tm_unit());
  CHECK_THROWS_AS(infer_tm(c, bad), TypeCheckFailure);
}

TEST_CASE("get of a non-reference reports not-a-ref") {
  Ctx c;
  try {
    infer_tm(c, tm_get(tm_natlit(3)));
    FAIL("expected failure");
  } catch (const TypeCheckFailure& e) {
    CHECK(e.err.kind == TypeErrKind::NotARef);
  }
}

TEST_CASE("ret of a logical-only value is a flag violation") {
  Ctx c;
  CHECK_THROWS_AS(infer_tm(c, tm_ret(tm_top())), TypeCheckFailure);
}

TEST_CASE("unfold returns under the monad") {
  Ctx xi = oneTyVar();
  TyP ll = llist(ty_var(0));
  Ctx c = xi.pushTm("l", ll);
  TyP t = infer_tm(c, tm_unfold(tm_var(0)));
  TyP unrolled = ty_subst(ty_sum(ty_unit(), ty_ref(ty_prod(ty_var(1), ty_var(0)))), 0, ll);
  CHECK(ty_alpha_eq(t, ty_monad(unrolled)));
}

TEST_CASE("propositional constructors land in Prop") {
  Ctx c = Ctx{}.pushTm("l", ty_ref(ty_nat()));
  TmP pto = tm_points_to(tm_var(0), tm_natlit(3));
  CHECK(ty_alpha_eq(infer_tm(c, pto), ty_prop()));
  TmP w = tm_wp(tm_get(tm_var(0)), "x", tm_eq(ty_nat(), tm_var(0), tm_natlit(3)));
  CHECK(ty_alpha_eq(infer_tm(c, w), ty_prop()));
  TmP q = tm_forallp("x", ty_nat(), tm_later(tm_box(tm_top())));
  CHECK(ty_alpha_eq(infer_tm(c, q), ty_prop()));
}

TEST_CASE("wp over a non-computation fails") {
  Ctx c;
  CHECK_THROWS_AS(infer_tm(c, tm_wp(tm_natlit(2), "x", tm_top())), TypeCheckFailure);
}

TEST_CASE("existential propositions quantify over logical types") {
  Ctx c;
  TmP t = tm_existsp("p", ty_prop(), tm_imp(tm_var(0), tm_var(0)));
  CHECK(ty_alpha_eq(infer_tm(c, t), ty_prop()));
}

TEST_CASE("pack/unpack with scope escape detection") {
  Ctx c;
  TyP ex = ty_exists("a", ty_var(0));
  TmP packed = tm_pack(ex, ty_nat(), tm_natlit(3));
  CHECK(ty_alpha_eq(infer_tm(c, packed), ex));
  // unpack whose body type mentions the abstract type is rejected
  TmP bad = tm_unpack(packed, "a", "x", tm_pair(tm_var(0), tm_var(0)));
  CHECK_THROWS_AS(infer_tm(c, bad), TypeCheckFailure);
  // a benign unpack is fine
  TmP ok = tm_unpack(packed, "a", "x", tm_unit());
  CHECK(ty_alpha_eq(infer_tm(c, ok), ty_unit()));
}

TEST_CASE("synthesis determinism") {
  Ctx c = Ctx{}.pushTm("l", ty_ref(ty_nat()));
  TmP t = tm_bind("y", tm_get(tm_var(0)), tm_ret(tm_succ(tm_var(0))));
  TyP a = infer_tm(c, t);
  TyP b = infer_tm(c, t);
  CHECK(ty_alpha_eq(a, b));
}

TEST_CASE("subject reduction: normalization preserves inferred types") {
  Ctx c = Ctx{}.pushTm("l", ty_ref(ty_nat()));
  TmP t = tm_app(tm_lam("x", ty_nat(), tm_ret(tm_var(0))), tm_natlit(5));
  TyP before = infer_tm(c, t);
  TyP after = infer_tm(c, normalize(t));
  CHECK(ty_alpha_eq(before, after));
}

TEST_CASE("check_sequent accepts trivial entailment and rejects unbound variables") {
  Sequent s;
  s.ctx = oneTyVar();
  s.hyp = tm_top();
  s.goal = tm_top();
  CHECK_NOTHROW(check_sequent(s));
  Sequent bad;
  bad.hyp = tm_top();
  bad.goal = tm_eq(ty_nat(), tm_var(0), tm_natlit(1));  // unbound
  CHECK_THROWS_AS(check_sequent(bad), TypeCheckFailure);
}

TEST_CASE("annotation requirements in synthesis position") {
  Ctx c;
  CHECK_THROWS_AS(infer_tm(c, tm_lam("x", nullptr, tm_var(0))), TypeCheckFailure);
  CHECK_THROWS_AS(infer_tm(c, tm_nil(nullptr)), TypeCheckFailure);
  CHECK_NOTHROW(check_tm(c, tm_nil(nullptr), ty_list(ty_nat())));
  CHECK_NOTHROW(check_tm(c, tm_lam("x", nullptr, tm_var(0)), ty_arrow(ty_nat(), ty_nat())));
}
