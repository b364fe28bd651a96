#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "lmr/conv.hpp"
#include "lmr/interp.hpp"
#include "lmr/pretty.hpp"
#include "lmr/typeck.hpp"

using namespace lmr;

namespace {

// Type-directed generator for well-typed closed-ish terms; used for the
// normalize idempotence / preservation properties.
struct TypedGen {
  std::mt19937_64 rng;
  explicit TypedGen(uint64_t seed) : rng(seed) {}
  uint64_t pick(uint64_t n) { return rng() % n; }

  TyP someTy(int depth) {
    if (depth <= 0) return pick(2) == 0 ? ty_nat() : ty_unit();
    switch (pick(5)) {
      case 0: return ty_nat();
      case 1: return ty_unit();
      case 2: return ty_prod(someTy(depth - 1), someTy(depth - 1));
      case 3: return ty_arrow(someTy(depth - 1), someTy(depth - 1));
      default: return ty_monad(someTy(depth - 1));
    }
  }

  // Build a term of type `ty` under `ctx` (element types only).
  TmP of(const std::vector<TyP>& ctx, const TyP& ty, int depth) {
    // use a variable of the right type when available
    if (pick(3) == 0) {
      std::vector<int> hits;
      for (size_t i = 0; i < ctx.size(); i++)
        if (ty_alpha_eq(ctx[ctx.size() - 1 - i], ty)) hits.push_back(static_cast<int>(i));
      if (!hits.empty()) return tm_var(hits[pick(hits.size())]);
    }
    if (depth > 0 && pick(4) == 0) {
      // redex: (\x:A. body) arg
      TyP a = someTy(1);
      auto ext = ctx;
      ext.push_back(a);
      return tm_app(tm_lam("x", a, of(ext, ty, depth - 1)), of(ctx, a, depth - 1));
    }
    if (depth > 0 && pick(5) == 0) {
      TyP a = someTy(1);
      return tm_fst(tm_pair(of(ctx, ty, depth - 1), of(ctx, a, depth - 1)));
    }
    switch (ty->k) {
      case TyK::Nat:
        if (depth > 0 && pick(3) == 0)
          return tm_natrec(of(ctx, ty_nat(), depth - 1), of(ctx, ty_nat(), depth - 1), "p", "i",
                           tm_var(0));
        return tm_natlit(pick(4));
      case TyK::Unit:
        return tm_unit();
      case TyK::Prod:
        return tm_pair(of(ctx, ty->a, depth - 1), of(ctx, ty->b, depth - 1));
      case TyK::Arrow: {
        auto ext = ctx;
        ext.push_back(ty->a);
        return tm_lam("x", ty->a, of(ext, ty->b, depth - 1));
      }
      case TyK::Monad: {
        switch (depth > 0 ? pick(4) : 0) {
          case 0: return tm_ret(of(ctx, ty->a, depth - 1));
          case 1: return tm_seq(tm_step(), of(ctx, ty, depth - 1));
          case 2: {
            TyP a = someTy(1);
            auto ext = ctx;
            ext.push_back(a);
            return tm_bind("x", tm_ret(of(ctx, a, depth - 1)), of(ext, ty, depth - 1));
          }
          default: {
            TyP a = someTy(1);
            auto ext = ctx;
            ext.push_back(a);
            return tm_bind("x", tm_bind("y", tm_ret(of(ctx, a, depth - 1)), tm_ret(tm_var(0))),
                           of(ext, ty, depth - 1));
          }
        }
      }
      case TyK::List:
        return tm_nil(ty->a);
      default:
        return tm_unit();
    }
  }
};

Ctx emptyCtx() { return Ctx{}; }

Ctx ctxWith(std::vector<TyP> tys) {
  Ctx c;
  for (size_t i = 0; i < tys.size(); i++) c = c.pushTm("v" + std::to_string(i), tys[i]);
  return c;
}

}  // namespace

TEST_CASE("monad laws in normalize") {
  // bind(ret 5, x. set l x) -> set l 5
  TmP l = tm_loc(0, ty_nat());
  TmP t = tm_bind("x", tm_ret(tm_natlit(5)), tm_set(tm_shift(l, 1), tm_var(0)));
  CHECK(alpha_eq(normalize(t), tm_set(l, tm_natlit(5))));

  // bind(u, x. ret x) -> u
  TmP u = tm_get(l);
  CHECK(alpha_eq(normalize(tm_bind("x", u, tm_ret(tm_var(0)))), u));

  // bind(bind(a, x.b), y.c) -> bind(a, x. bind(b, y.c))
  TmP a = tm_get(l);
  TmP b = tm_ret(tm_succ(tm_var(0)));
  TmP c = tm_ret(tm_var(0));
  TmP lhs = tm_bind("y", tm_bind("x", a, b), c);
  TmP rhs = tm_bind("x", a, tm_bind("y", b, tm_shift(c, 1, 1)));
  CHECK(alpha_eq(normalize(lhs), normalize(rhs)));
}

TEST_CASE("beta and recursor reductions") {
  TmP five = tm_natlit(5);
  TmP idnat = tm_lam("x", ty_nat(), tm_var(0));
  CHECK(alpha_eq(normalize(tm_app(idnat, five)), five));

  // (\x. ret x) 5 ~ ret 5
  CHECK(conv_eq(tm_app(tm_lam("x", ty_nat(), tm_ret(tm_var(0))), five), tm_ret(five)));

  // step; ret 5 is NOT convertible with ret 5
  CHECK(!conv_eq(tm_seq(tm_step(), tm_ret(five)), tm_ret(five)));

  // natrec 3 { zero => 0 | succ p, i => succ i } = 3
  TmP t = tm_natrec(tm_natlit(3), tm_zero(), "p", "i", tm_succ(tm_var(0)));
  CHECK(alpha_eq(normalize(t), tm_natlit(3)));

  // listrec append on literals
  TyP ln = ty_nat();
  TmP xs = tm_cons(tm_natlit(1), tm_cons(tm_natlit(2), tm_nil(ln)));
  TmP ys = tm_cons(tm_natlit(3), tm_nil(ln));
  TmP app = tm_listrec(xs, ys, "h", "t", "i", tm_cons(tm_var(2), tm_var(0)));
  TmP expect = tm_cons(tm_natlit(1), tm_cons(tm_natlit(2), tm_cons(tm_natlit(3), tm_nil(ln))));
  CHECK(alpha_eq(normalize(app), expect));
}

TEST_CASE("eta contractions") {
  // \x. f x -> f
  TmP f = tm_var(0);
  TmP etaF = tm_lam("x", ty_nat(), tm_app(tm_shift(f, 1), tm_var(0)));
  CHECK(alpha_eq(normalize(etaF), f));
  // (fst p, snd p) -> p
  TmP p = tm_var(0);
  CHECK(alpha_eq(normalize(tm_pair(tm_fst(p), tm_snd(p))), p));
}

TEST_CASE("wp is convertible across beta") {
  // wp((\x. e) v){y. phi}  ~  wp(e[v/x]){y. phi}
  TmP l = tm_loc(0, ty_nat());
  TmP e = tm_set(tm_shift(l, 1), tm_var(0));
  TmP lhs = tm_wp(tm_app(tm_lam("x", ty_nat(), e), tm_natlit(3)), "y", tm_top());
  TmP rhs = tm_wp(tm_set(l, tm_natlit(3)), "y", tm_top());
  CHECK(conv_eq(lhs, rhs));
}

TEST_CASE("unfold of fold is not a conversion") {
  TyP mu = ty_mu("t", ty_nat());
  TmP t = tm_unfold(tm_fold(mu, tm_natlit(2)));
  CHECK(alpha_eq(normalize(t), t));  // stuck: effect equations need explicit rewrites
}

TEST_CASE("rewrite: get-after-set") {
  TmP l = tm_loc(0, ty_nat());
  TmP v = tm_natlit(3);
  TmP lhs = tm_seq(tm_set(l, v), tm_get(l));
  TmP got = rewrite_term(lhs, RwRule::GetAfterSet, RwDir::Forward);
  TmP expect = tm_seq(tm_step(), tm_seq(tm_set(l, v), tm_ret(v)));
  CHECK(alpha_eq(got, expect));
  // and back
  TmP back = rewrite_term(got, RwRule::GetAfterSet, RwDir::Backward);
  CHECK(alpha_eq(back, lhs));
}

TEST_CASE("rewrite: unfold-of-fold and set-after-set") {
  TyP mu = ty_mu("t", ty_nat());
  TmP u = tm_natlit(7);
  TmP lhs = tm_unfold(tm_fold(mu, u));
  TmP got = rewrite_term(lhs, RwRule::UnfoldOfFold, RwDir::Forward);
  CHECK(alpha_eq(got, tm_seq(tm_step(), tm_ret(u))));
  CHECK(alpha_eq(rewrite_term(got, RwRule::UnfoldOfFold, RwDir::Backward, mu), lhs));

  TmP l = tm_loc(0, ty_nat());
  TmP ss = tm_seq(tm_set(l, tm_natlit(1)), tm_set(l, tm_natlit(2)));
  CHECK(alpha_eq(rewrite_term(ss, RwRule::SetAfterSet, RwDir::Forward),
                 tm_set(l, tm_natlit(2))));
}

TEST_CASE("rewrite at a path inside a wp") {
  TyP mu = ty_mu("t", ty_nat());
  TmP prog = tm_bind("z", tm_unfold(tm_fold(mu, tm_natlit(1))), tm_ret(tm_var(0)));
  TmP goal = tm_wp(prog, "x", tm_eq(ty_nat(), tm_var(0), tm_natlit(1)));
  // the unfold(fold _) sits at goal.kids[0].kids[0]
  Path p = {0, 0};
  TmP rewritten = rewrite_at(goal, p, RwRule::UnfoldOfFold, RwDir::Forward);
  TmP expectProg = tm_bind("z", tm_seq(tm_step(), tm_ret(tm_natlit(1))), tm_ret(tm_var(0)));
  CHECK(alpha_eq(rewritten, tm_wp(expectProg, "x", tm_eq(ty_nat(), tm_var(0), tm_natlit(1)))));
}

TEST_CASE("find_occurrences shifts the pattern under binders") {
  // pattern: var 0 of the root context; underneath a lambda it is var 1
  TmP pat = tm_var(0);
  TmP t = tm_pair(tm_var(0), tm_lam("x", ty_nat(), tm_var(1)));
  auto occ = find_occurrences(t, pat);
  REQUIRE(occ.size() == 2);
  CHECK(occ[0] == Path{0});
  CHECK(occ[1] == Path{1, 0});
}

TEST_CASE("every rewrite rule is observation-preserving on generated instances") {
  // Cross-validated through the law suite: lhs generated per rule, rhs is
  // the rewrite output, compared by exact observation. This is the oracle
  // for the whole catalog.
  LawReport rep = law_suite(0, 20, 50);
  for (const auto& r : rep.rules) {
    CHECK_MESSAGE(r.passes == r.instances, r.rule << ": " << r.passes << "/" << r.instances);
    if (!r.failures.empty()) {
      auto& f = r.failures[0];
      MESSAGE(r.rule << " cex: " << f.term1 << "  vs  " << f.term2 << " heap=" << f.heap
                     << " fuel=" << f.fuel << " obs1=" << f.obs1 << " obs2=" << f.obs2);
    }
  }
}

TEST_CASE("rewrite rules are type-preserving on generated instances") {
  // law_suite drives generation; here we re-derive a few instances directly
  // and compare types before/after.
  TmP l = tm_loc(0, ty_nat());
  Ctx ctx = emptyCtx();
  std::vector<std::pair<TmP, RwRule>> cases = {
      {tm_seq(tm_set(l, tm_natlit(1)), tm_get(l)), RwRule::GetAfterSet},
      {tm_seq(tm_set(l, tm_natlit(1)), tm_set(l, tm_natlit(2))), RwRule::SetAfterSet},
      {tm_bind("x", tm_get(l), tm_bind("_", tm_set(tm_shift(l, 1), tm_var(0)), tm_ret(tm_var(1)))),
       RwRule::SetAfterGet},
  };
  for (auto& [t, rule] : cases) {
    TyP before = infer_tm(ctx, t);
    TmP r = rewrite_term(t, rule, RwDir::Forward);
    TyP after = infer_tm(ctx, r);
    CHECK(ty_alpha_eq(before, after));
  }
}

TEST_CASE("normalize idempotence and type preservation on generated terms") {
  TypedGen g(424242);
  int count = 0;
  for (int i = 0; i < 1000; i++) {
    TyP ty = g.someTy(2);
    std::vector<TyP> vars = {ty_nat(), ty_monad(ty_nat())};
    TmP t = g.of(vars, ty, 4);
    Ctx ctx = ctxWith(vars);
    TyP before = infer_tm(ctx, t);
    TmP n1 = normalize(t);
    TmP n2 = normalize(n1);
    CHECK_MESSAGE(alpha_eq(n1, n2), "not idempotent: " << pretty_tm(t));
    TyP after = infer_tm(ctx, n1);
    CHECK_MESSAGE(ty_alpha_eq(before, after), "type changed: " << pretty_tm(t));
    count++;
  }
  CHECK(count == 1000);
}

TEST_CASE("confluence smoke test: random reduction orders agree") {
  // normalize is deterministic; exercise alternative orders by normalizing
  // random subterms first and then the whole term.
  TypedGen g(13);
  std::mt19937_64 rng(99);
  for (int i = 0; i < 1000; i++) {
    TyP ty = g.someTy(2);
    std::vector<TyP> vars = {ty_nat()};
    TmP t = g.of(vars, ty, 4);
    TmP direct = normalize(t);
    // normalize a random child first (when one exists), splice, then finish
    TmP staged = t;
    if (!t->kids.empty()) {
      size_t k = rng() % t->kids.size();
      auto n = std::make_shared<Tm>(*t);
      n->kids[k] = normalize(n->kids[k]);
      staged = normalize(TmP(n));
    } else {
      staged = normalize(staged);
    }
    CHECK(alpha_eq(direct, staged));
  }
}
