#include "lmr/kernel.hpp"

#include <map>

#include "lmr/pretty.hpp"

namespace lmr {

const char* rule_name(RuleId r) {
  switch (r) {
    case RuleId::Hyp: return "hyp";
    case RuleId::Cut: return "cut";
    case RuleId::WeakenHyp: return "weaken-hyp";
    case RuleId::ConvGoal: return "conv-goal";
    case RuleId::ConvHyp: return "conv-hyp";
    case RuleId::SubstInstance: return "subst-instance";
    case RuleId::EqFormation: return "eq-formation";
    case RuleId::LawvereFwd: return "lawvere-fwd";
    case RuleId::LawvereBwd: return "lawvere-bwd";
    case RuleId::EqReflect: return "eq-reflect";
    case RuleId::PropExt: return "prop-ext";
    case RuleId::EqSubst: return "eq-subst";
    case RuleId::TrueIntro: return "true-intro";
    case RuleId::FalseElim: return "false-elim";
    case RuleId::AndIntro: return "and-intro";
    case RuleId::AndElim: return "and-elim";
    case RuleId::OrIntro: return "or-intro";
    case RuleId::OrElim: return "or-elim";
    case RuleId::ImpIntro: return "imp-intro";
    case RuleId::ImpElim: return "imp-elim";
    case RuleId::ForallIntro: return "forall-intro";
    case RuleId::ForallElim: return "forall-elim";
    case RuleId::ExistsIntro: return "exists-intro";
    case RuleId::ExistsElim: return "exists-elim";
    case RuleId::ListCases: return "list-cases";
    case RuleId::NatCases: return "nat-cases";
    case RuleId::WandAdjFwd: return "wand-adjunction-fwd";
    case RuleId::WandAdjBwd: return "wand-adjunction-bwd";
    case RuleId::SepMono: return "sep-mono";
    case RuleId::SepWeaken: return "sep-weaken";
    case RuleId::SepAssocL: return "sep-assoc-l";
    case RuleId::SepAssocR: return "sep-assoc-r";
    case RuleId::SepComm: return "sep-comm";
    case RuleId::SepTopIntro: return "sep-top-intro";
    case RuleId::BoxMono: return "box-mono";
    case RuleId::BoxDup: return "box-dup";
    case RuleId::BoxIdem: return "box-idem";
    case RuleId::BoxAndToSep: return "box-and-to-sep";
    case RuleId::BoxValid: return "box-valid";
    case RuleId::LaterIntro: return "later-intro";
    case RuleId::LaterMono: return "later-mono";
    case RuleId::LaterAnd: return "later-and";
    case RuleId::LaterSep: return "later-sep";
    case RuleId::LaterWand: return "later-wand";
    case RuleId::LaterBoxCommuteL: return "later-box-commute-l";
    case RuleId::LaterBoxCommuteR: return "later-box-commute-r";
    case RuleId::FoldEqFwd: return "fold-equality-fwd";
    case RuleId::FoldEqBwd: return "fold-equality-bwd";
    case RuleId::StepEqFwd: return "step-equality-fwd";
    case RuleId::StepEqBwd: return "step-equality-bwd";
    case RuleId::Loeb: return "loeb";
    case RuleId::WpWand: return "wp-wand";
    case RuleId::WpVal: return "wp-val";
    case RuleId::WpBind: return "wp-bind";
    case RuleId::WpGet: return "wp-get";
    case RuleId::WpSet: return "wp-set";
    case RuleId::WpNew: return "wp-new";
    case RuleId::WpStep: return "wp-step";
  }
  return "?";
}

std::vector<RuleId> all_rules() {
  std::vector<RuleId> out;
  for (int i = 0; i <= static_cast<int>(RuleId::WpStep); i++) out.push_back(static_cast<RuleId>(i));
  return out;
}

std::optional<RuleId> rule_by_name(const std::string& s) {
  std::string n = s;
  for (auto& c : n)
    if (c == '_') c = '-';
  for (RuleId r : all_rules())
    if (n == rule_name(r)) return r;
  return std::nullopt;
}

namespace {

[[noreturn]] void mismatch(RuleId r, const std::string& why) {
  throw KernelError(KernelError::RuleMismatch, std::string(rule_name(r)) + ": " + why);
}
[[noreturn]] void badArg(RuleId r, const std::string& why) {
  throw KernelError(KernelError::IllTypedArg, std::string(rule_name(r)) + ": " + why);
}
[[noreturn]] void sideCond(RuleId r, const std::string& why) {
  throw KernelError(KernelError::SideConditionFailed, std::string(rule_name(r)) + ": " + why);
}

const TmP& needKid(const TmP& t, TmK k, RuleId r, const char* what, int i = 0) {
  if (t->k != k) mismatch(r, std::string("expected ") + what);
  return t->kids[static_cast<size_t>(i)];
}

void need(bool cond, RuleId r, const std::string& why) {
  if (!cond) mismatch(r, why);
}

Sequent mkSeq(const Ctx& ctx, TmP hyp, TmP goal) {
  Sequent s;
  s.ctx = ctx;
  s.hyp = std::move(hyp);
  s.goal = std::move(goal);
  return s;
}

Ctx popCtx(const Ctx& ctx) {
  Ctx c = ctx;
  c.elems.pop_back();
  if (!c.tmNames.empty()) c.tmNames.pop_back();
  return c;
}

const TmP& argTm(const RuleArgs& a, size_t i, RuleId r) {
  if (i >= a.terms.size()) badArg(r, "missing term argument");
  return a.terms[i];
}
const TyP& argTy(const RuleArgs& a, size_t i, RuleId r) {
  if (i >= a.types.size()) badArg(r, "missing type argument");
  return a.types[i];
}
int argNat(const RuleArgs& a, size_t i, RuleId r) {
  if (i >= a.nats.size()) badArg(r, "missing numeric argument");
  return a.nats[i];
}
std::string argHint(const RuleArgs& a, size_t i) {
  return i < a.hints.size() ? a.hints[i] : "x";
}

void checkPropArg(const Ctx& ctx, const TmP& t, RuleId r) {
  try {
    check_prop(ctx, t);
  } catch (const TypeCheckFailure& e) {
    badArg(r, std::string("argument is not a proposition: ") + e.what());
  }
}

// `step; u` destructuring.
bool asSeqStep(const TmP& t, TmP& rest) {
  if (t->k != TmK::Bind || t->kids[0]->k != TmK::Step) return false;
  if (tm_has_free(t->kids[1], 0)) return false;
  rest = tm_subst(t->kids[1], 0, tm_unit());
  return true;
}

// Instantiate a registered equation side at the current context.
TmP instantiate_eq_side(const RegEq& eq, const TmP& side, const std::vector<TyP>& tyInst,
                        const std::vector<TmP>& tmInst) {
  TmP t = side;
  int n = eq.tyCount;
  for (int idx = n - 1; idx >= 0; idx--) t = tm_ty_subst(t, idx, tyInst[static_cast<size_t>(n - 1 - idx)]);
  int m = static_cast<int>(eq.gamma.size());
  for (int idx = m - 1; idx >= 0; idx--) t = tm_subst(t, idx, tmInst[static_cast<size_t>(m - 1 - idx)]);
  return t;
}

TmP apply_conv(const Ctx& ctx, const TmP& target, const ConvSpec& cs,
               const std::vector<RegEq>& eqEnv, RuleId r) {
  switch (cs.k) {
    case ConvSpec::Replace: {
      checkPropArg(ctx, cs.replacement, r);
      if (!conv_eq(target, cs.replacement))
        sideCond(r, "replacement is not convertible with the target");
      return cs.replacement;
    }
    case ConvSpec::Normalize:
      return normalize(target);
    case ConvSpec::EffectRw: {
      TmP out;
      try {
        out = rewrite_at(target, cs.path, cs.rule, cs.dir, cs.tyArg);
      } catch (const RewriteFailure& f) {
        sideCond(r, f.err.message);
      }
      try {
        check_prop(ctx, out);
      } catch (const TypeCheckFailure& e) {
        sideCond(r, std::string("rewrite result ill-typed: ") + e.what());
      }
      return out;
    }
    case ConvSpec::RegEqRw: {
      if (cs.eqIndex < 0 || cs.eqIndex >= static_cast<int>(eqEnv.size()))
        badArg(r, "no such registered equation");
      const RegEq& eq = eqEnv[static_cast<size_t>(cs.eqIndex)];
      if (static_cast<int>(cs.tyInst.size()) != eq.tyCount)
        badArg(r, "registered equation: wrong number of type instantiations");
      if (cs.tmInst.size() != eq.gamma.size())
        badArg(r, "registered equation: wrong number of term instantiations");
      for (const TyP& ty : cs.tyInst) {
        try {
          check_ty(ctx, ty, TypeFlag::Program);
        } catch (const TypeCheckFailure& e) {
          badArg(r, std::string("instantiation type: ") + e.what());
        }
      }
      // typecheck term instantiations against the instantiated gamma
      for (size_t p = 0; p < eq.gamma.size(); p++) {
        TyP expect = eq.gamma[p];
        for (int idx = eq.tyCount - 1; idx >= 0; idx--)
          expect = ty_subst(expect, idx, cs.tyInst[static_cast<size_t>(eq.tyCount - 1 - idx)]);
        // earlier gamma entries may be mentioned by later ones only through
        // types, which cannot happen here (gamma holds types); direct check:
        try {
          check_tm(ctx, cs.tmInst[p], expect);
        } catch (const TypeCheckFailure& e) {
          badArg(r, std::string("instantiation term: ") + e.what());
        }
      }
      TmP lhsI = instantiate_eq_side(eq, eq.lhs, cs.tyInst, cs.tmInst);
      TmP rhsI = instantiate_eq_side(eq, eq.rhs, cs.tyInst, cs.tmInst);
      if (cs.eqBackward) std::swap(lhsI, rhsI);
      PathCtx pc;
      TmP sub = subterm_at(target, cs.path, &pc);
      if (!sub) sideCond(r, "path does not resolve");
      TmP want = tm_shift(tm_ty_shift(lhsI, pc.tyBinders), pc.tmBinders);
      if (!alpha_eq(sub, want))
        sideCond(r, "subterm at path does not match the registered equation ("
                        + pretty_tm(sub) + " vs " + pretty_tm(want) + ")");
      TmP repl = tm_shift(tm_ty_shift(rhsI, pc.tyBinders), pc.tmBinders);
      TmP out = replace_at(target, cs.path, repl);
      try {
        check_prop(ctx, out);
      } catch (const TypeCheckFailure& e) {
        sideCond(r, std::string("equation rewrite result ill-typed: ") + e.what());
      }
      return out;
    }
  }
  throw InternalError("apply_conv: bad kind");
}

}  // namespace

Sequent reg_eq_sequent(const RegEq& eq) {
  Sequent s;
  s.ctx.tyCount = eq.tyCount;
  s.ctx.elems = eq.gamma;
  for (size_t i = 0; i < eq.gamma.size(); i++) s.ctx.tmNames.push_back("x" + std::to_string(i));
  for (int i = 0; i < eq.tyCount; i++) s.ctx.tyNames.push_back("a" + std::to_string(i));
  s.hyp = tm_top();
  s.goal = tm_eq(eq.at, eq.lhs, eq.rhs);
  return s;
}

std::vector<Sequent> rule_premises(const Sequent& g, RuleId rule, const RuleArgs& args,
                                   const std::vector<RegEq>& eqEnv) {
  const Ctx& ctx = g.ctx;
  const TmP& chi = g.hyp;
  const TmP& rho = g.goal;
  switch (rule) {
    case RuleId::Hyp:
      need(conv_eq(chi, rho), rule, "hypothesis and goal are not convertible");
      return {};
    case RuleId::Cut: {
      const TmP& phi = argTm(args, 0, rule);
      checkPropArg(ctx, phi, rule);
      return {mkSeq(ctx, chi, phi), mkSeq(ctx, tm_and(chi, phi), rho)};
    }
    case RuleId::WeakenHyp: {
      const TmP& mid = argTm(args, 0, rule);
      checkPropArg(ctx, mid, rule);
      return {mkSeq(ctx, chi, mid), mkSeq(ctx, mid, rho)};
    }
    case RuleId::ConvGoal: {
      if (!args.conv) badArg(rule, "missing conversion spec");
      TmP out = apply_conv(ctx, rho, *args.conv, eqEnv, rule);
      return {mkSeq(ctx, chi, out)};
    }
    case RuleId::ConvHyp: {
      if (!args.conv) badArg(rule, "missing conversion spec");
      TmP out = apply_conv(ctx, chi, *args.conv, eqEnv, rule);
      return {mkSeq(ctx, out, rho)};
    }
    case RuleId::SubstInstance: {
      int flavor = argNat(args, 0, rule);
      if (flavor == 0) {
        const TyP& a = argTy(args, 0, rule);
        const TmP& t = argTm(args, 0, rule);
        const TmP& hypP = argTm(args, 1, rule);
        const TmP& goalP = argTm(args, 2, rule);
        try {
          check_ty(ctx, a, TypeFlag::Logical);
          check_tm(ctx, t, a);
        } catch (const TypeCheckFailure& e) {
          badArg(rule, e.what());
        }
        need(alpha_eq(tm_subst(hypP, 0, t), chi), rule, "hypothesis is not the instance");
        need(alpha_eq(tm_subst(goalP, 0, t), rho), rule, "goal is not the instance");
        return {mkSeq(ctx.pushTm(argHint(args, 0), a), hypP, goalP)};
      }
      const TyP& b = argTy(args, 0, rule);
      const TmP& hypP = argTm(args, 0, rule);
      const TmP& goalP = argTm(args, 1, rule);
      try {
        check_ty(ctx, b, TypeFlag::Program);
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      need(alpha_eq(tm_ty_subst(hypP, 0, b), chi), rule, "hypothesis is not the instance");
      need(alpha_eq(tm_ty_subst(goalP, 0, b), rho), rule, "goal is not the instance");
      return {mkSeq(ctx.pushTy(argHint(args, 0)), hypP, goalP)};
    }
    case RuleId::EqFormation: {
      need(rho->k == TmK::Eq, rule, "goal is not an equation");
      need(conv_eq(rho->kids[0], rho->kids[1]), rule, "sides are not convertible");
      return {};
    }
    case RuleId::LawvereFwd: {
      need(ctx.size() >= 2, rule, "needs two trailing context variables");
      need(ty_alpha_eq(ctx.lookup(0), ctx.lookup(1)), rule, "last two variables differ in type");
      need(chi->k == TmK::And, rule, "hypothesis is not a conjunction");
      const TmP& eq = chi->kids[1];
      need(eq->k == TmK::Eq && eq->kids[0]->k == TmK::Var && eq->kids[0]->var == 1 &&
               eq->kids[1]->k == TmK::Var && eq->kids[1]->var == 0,
           rule, "hypothesis does not end with x = y for the last two variables");
      need(ty_alpha_eq(eq->tyAnn, ctx.lookup(0)), rule, "equation type mismatch");
      auto contract = [](const TmP& t) { return tm_subst(t, 0, tm_var(0)); };
      return {mkSeq(popCtx(ctx), contract(chi->kids[0]), contract(rho))};
    }
    case RuleId::LawvereBwd: {
      need(ctx.size() >= 1, rule, "needs a trailing context variable");
      TyP a = ctx.lookup(0);
      const TmP& hypP = argTm(args, 0, rule);
      const TmP& goalP = argTm(args, 1, rule);
      auto contract = [](const TmP& t) { return tm_subst(t, 0, tm_var(0)); };
      need(alpha_eq(contract(hypP), chi), rule, "hypothesis is not the contraction");
      need(alpha_eq(contract(goalP), rho), rule, "goal is not the contraction");
      Ctx ext = ctx.pushTm(argHint(args, 0) + "'", a);
      return {mkSeq(ext, tm_and(hypP, tm_eq(a, tm_var(1), tm_var(0))), goalP)};
    }
    case RuleId::EqReflect:
      throw InternalError("eq-reflect premises are handled by the tree walker");
    case RuleId::PropExt: {
      need(rho->k == TmK::Eq && rho->tyAnn->k == TyK::Prop, rule,
           "goal is not an equation between propositions");
      const TmP& phi = rho->kids[0];
      const TmP& psi = rho->kids[1];
      return {mkSeq(ctx, tm_and(chi, phi), psi), mkSeq(ctx, tm_and(chi, psi), phi)};
    }
    case RuleId::EqSubst: {
      int idx = argNat(args, 0, rule);
      need(idx >= 0 && idx < ctx.size(), rule, "no such context variable");
      need(chi->k == TmK::And, rule, "hypothesis is not a conjunction");
      const TmP& eq = chi->kids[1];
      need(eq->k == TmK::Eq && eq->kids[0]->k == TmK::Var && eq->kids[0]->var == idx, rule,
           "hypothesis does not end with the variable equation");
      const TmP& t = eq->kids[1];
      need(!tm_has_free(t, idx), rule, "equation right side mentions the variable");
      need(ty_alpha_eq(eq->tyAnn, ctx.lookup(idx)), rule, "equation type mismatch");
      auto replace = [&](const TmP& u) {
        return tm_map_free(u, [&](int v) { return v == idx ? t : tm_var(v); });
      };
      return {mkSeq(ctx, replace(chi->kids[0]), replace(rho))};
    }
    case RuleId::TrueIntro:
      need(rho->k == TmK::Top, rule, "goal is not top");
      return {};
    case RuleId::FalseElim:
      return {mkSeq(ctx, chi, tm_bot())};
    case RuleId::AndIntro: {
      need(rho->k == TmK::And, rule, "goal is not a conjunction");
      return {mkSeq(ctx, chi, rho->kids[0]), mkSeq(ctx, chi, rho->kids[1])};
    }
    case RuleId::AndElim: {
      int side = argNat(args, 0, rule);
      const TmP& other = argTm(args, 0, rule);
      checkPropArg(ctx, other, rule);
      TmP conj = side == 0 ? tm_and(rho, other) : tm_and(other, rho);
      return {mkSeq(ctx, chi, conj)};
    }
    case RuleId::OrIntro: {
      need(rho->k == TmK::Or, rule, "goal is not a disjunction");
      int side = argNat(args, 0, rule);
      return {mkSeq(ctx, chi, side == 0 ? rho->kids[0] : rho->kids[1])};
    }
    case RuleId::OrElim: {
      need(chi->k == TmK::Or, rule, "hypothesis is not a disjunction");
      return {mkSeq(ctx, chi->kids[0], rho), mkSeq(ctx, chi->kids[1], rho)};
    }
    case RuleId::ImpIntro: {
      need(rho->k == TmK::Imp, rule, "goal is not an implication");
      return {mkSeq(ctx, tm_and(chi, rho->kids[0]), rho->kids[1])};
    }
    case RuleId::ImpElim: {
      const TmP& phi = argTm(args, 0, rule);
      checkPropArg(ctx, phi, rule);
      return {mkSeq(ctx, chi, tm_imp(phi, rho)), mkSeq(ctx, chi, phi)};
    }
    case RuleId::ForallIntro: {
      need(rho->k == TmK::ForallP, rule, "goal is not a universal");
      Ctx ext = ctx.pushTm(args.hints.empty() ? rho->hints[0] : args.hints[0], rho->tyAnn);
      return {mkSeq(ext, tm_shift(chi, 1), rho->kids[0])};
    }
    case RuleId::ForallElim: {
      need(chi->k == TmK::ForallP, rule, "hypothesis is not a universal");
      const TmP& t = argTm(args, 0, rule);
      try {
        check_tm(ctx, t, chi->tyAnn);
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      return {mkSeq(ctx, tm_subst(chi->kids[0], 0, t), rho)};
    }
    case RuleId::ExistsIntro: {
      need(rho->k == TmK::ExistsP, rule, "goal is not an existential");
      const TmP& t = argTm(args, 0, rule);
      try {
        check_tm(ctx, t, rho->tyAnn);
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      return {mkSeq(ctx, chi, tm_subst(rho->kids[0], 0, t))};
    }
    case RuleId::ExistsElim: {
      need(chi->k == TmK::ExistsP, rule, "hypothesis is not an existential");
      Ctx ext = ctx.pushTm(args.hints.empty() ? chi->hints[0] : args.hints[0], chi->tyAnn);
      return {mkSeq(ext, chi->kids[0], tm_shift(rho, 1))};
    }
    case RuleId::ListCases: {
      const TmP& t = argTm(args, 0, rule);
      TyP listTy;
      try {
        listTy = infer_tm(ctx, t);
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      need(listTy->k == TyK::List, rule, "scrutinee is not a list");
      TyP elem = listTy->a;
      Sequent nilCase = mkSeq(ctx, tm_and(chi, tm_eq(listTy, t, tm_nil(elem))), rho);
      Ctx ext = ctx.pushTm(argHint(args, 0), elem).pushTm(args.hints.size() > 1 ? args.hints[1] : "tl", listTy);
      TmP consT = tm_cons(tm_var(1), tm_var(0));
      Sequent consCase = mkSeq(ext, tm_and(tm_shift(chi, 2), tm_eq(listTy, tm_shift(t, 2), consT)),
                               tm_shift(rho, 2));
      return {nilCase, consCase};
    }
    case RuleId::NatCases: {
      const TmP& t = argTm(args, 0, rule);
      try {
        check_tm(ctx, t, ty_nat());
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      Sequent zeroCase = mkSeq(ctx, tm_and(chi, tm_eq(ty_nat(), t, tm_zero())), rho);
      Ctx ext = ctx.pushTm(argHint(args, 0), ty_nat());
      Sequent succCase = mkSeq(
          ext, tm_and(tm_shift(chi, 1), tm_eq(ty_nat(), tm_shift(t, 1), tm_succ(tm_var(0)))),
          tm_shift(rho, 1));
      return {zeroCase, succCase};
    }
    case RuleId::WandAdjFwd: {
      need(rho->k == TmK::Wand, rule, "goal is not a wand");
      return {mkSeq(ctx, tm_sep(chi, rho->kids[0]), rho->kids[1])};
    }
    case RuleId::WandAdjBwd: {
      need(chi->k == TmK::Sep, rule, "hypothesis is not a separating conjunction");
      return {mkSeq(ctx, chi->kids[0], tm_wand(chi->kids[1], rho))};
    }
    case RuleId::SepMono: {
      need(chi->k == TmK::Sep, rule, "hypothesis is not a separating conjunction");
      need(rho->k == TmK::Sep, rule, "goal is not a separating conjunction");
      return {mkSeq(ctx, chi->kids[0], rho->kids[0]), mkSeq(ctx, chi->kids[1], rho->kids[1])};
    }
    case RuleId::SepWeaken: {
      need(rho->k == TmK::And, rule, "goal is not a conjunction");
      return {mkSeq(ctx, chi, tm_sep(rho->kids[0], rho->kids[1]))};
    }
    case RuleId::SepAssocL: {
      need(rho->k == TmK::Sep && rho->kids[1]->k == TmK::Sep, rule,
           "goal is not a right-nested separating conjunction");
      const TmP& a = rho->kids[0];
      const TmP& b = rho->kids[1]->kids[0];
      const TmP& c = rho->kids[1]->kids[1];
      return {mkSeq(ctx, chi, tm_sep(tm_sep(a, b), c))};
    }
    case RuleId::SepAssocR: {
      need(rho->k == TmK::Sep && rho->kids[0]->k == TmK::Sep, rule,
           "goal is not a left-nested separating conjunction");
      const TmP& a = rho->kids[0]->kids[0];
      const TmP& b = rho->kids[0]->kids[1];
      const TmP& c = rho->kids[1];
      return {mkSeq(ctx, chi, tm_sep(a, tm_sep(b, c)))};
    }
    case RuleId::SepComm: {
      need(rho->k == TmK::Sep, rule, "goal is not a separating conjunction");
      return {mkSeq(ctx, chi, tm_sep(rho->kids[1], rho->kids[0]))};
    }
    case RuleId::SepTopIntro: {
      need(rho->k == TmK::Sep && rho->kids[1]->k == TmK::Top, rule, "goal is not (phi * top)");
      return {mkSeq(ctx, chi, rho->kids[0])};
    }
    case RuleId::BoxMono: {
      need(chi->k == TmK::Box, rule, "hypothesis is not boxed");
      need(rho->k == TmK::Box, rule, "goal is not boxed");
      return {mkSeq(ctx, chi->kids[0], rho->kids[0])};
    }
    case RuleId::BoxDup: {
      need(rho->k == TmK::Sep && rho->kids[1]->k == TmK::Box, rule, "goal is not (phi * box phi)");
      need(alpha_eq(rho->kids[0], rho->kids[1]->kids[0]), rule, "the two components differ");
      return {mkSeq(ctx, chi, rho->kids[1])};
    }
    case RuleId::BoxIdem: {
      need(rho->k == TmK::Box && rho->kids[0]->k == TmK::Box, rule, "goal is not box box");
      return {mkSeq(ctx, chi, rho->kids[0])};
    }
    case RuleId::BoxAndToSep: {
      need(rho->k == TmK::Sep && rho->kids[1]->k == TmK::Box, rule, "goal is not (phi * box psi)");
      return {mkSeq(ctx, chi, tm_and(rho->kids[0], rho->kids[1]))};
    }
    case RuleId::BoxValid: {
      need(rho->k == TmK::Box, rule, "goal is not boxed");
      return {mkSeq(ctx, tm_top(), rho->kids[0])};
    }
    case RuleId::LaterIntro: {
      need(rho->k == TmK::Later, rule, "goal is not under later");
      return {mkSeq(ctx, chi, rho->kids[0])};
    }
    case RuleId::LaterMono: {
      need(chi->k == TmK::Later, rule, "hypothesis is not under later");
      need(rho->k == TmK::Later, rule, "goal is not under later");
      return {mkSeq(ctx, chi->kids[0], rho->kids[0])};
    }
    case RuleId::LaterAnd: {
      need(rho->k == TmK::Later && rho->kids[0]->k == TmK::And, rule,
           "goal is not later of a conjunction");
      const TmP& a = rho->kids[0]->kids[0];
      const TmP& b = rho->kids[0]->kids[1];
      return {mkSeq(ctx, chi, tm_and(tm_later(a), tm_later(b)))};
    }
    case RuleId::LaterSep: {
      need(rho->k == TmK::Later && rho->kids[0]->k == TmK::Sep, rule,
           "goal is not later of a separating conjunction");
      const TmP& a = rho->kids[0]->kids[0];
      const TmP& b = rho->kids[0]->kids[1];
      return {mkSeq(ctx, chi, tm_sep(tm_later(a), tm_later(b)))};
    }
    case RuleId::LaterWand: {
      need(rho->k == TmK::Wand && rho->kids[0]->k == TmK::Later && rho->kids[1]->k == TmK::Later,
           rule, "goal is not (later phi -* later psi)");
      return {mkSeq(ctx, chi, tm_wand(rho->kids[0]->kids[0], rho->kids[1]->kids[0]))};
    }
    case RuleId::LaterBoxCommuteL: {
      need(rho->k == TmK::Box && rho->kids[0]->k == TmK::Later, rule, "goal is not box later");
      return {mkSeq(ctx, chi, tm_later(tm_box(rho->kids[0]->kids[0])))};
    }
    case RuleId::LaterBoxCommuteR: {
      need(rho->k == TmK::Later && rho->kids[0]->k == TmK::Box, rule, "goal is not later box");
      return {mkSeq(ctx, chi, tm_box(tm_later(rho->kids[0]->kids[0])))};
    }
    case RuleId::FoldEqFwd: {
      need(rho->k == TmK::Eq && rho->tyAnn->k == TyK::Mu, rule,
           "goal is not an equation at a recursive type");
      const TmP& l = rho->kids[0];
      const TmP& rr = rho->kids[1];
      need(l->k == TmK::Fold && rr->k == TmK::Fold, rule, "sides are not folds");
      TyP unrolled = ty_subst(rho->tyAnn->a, 0, rho->tyAnn);
      return {mkSeq(ctx, chi, tm_later(tm_eq(unrolled, l->kids[0], rr->kids[0])))};
    }
    case RuleId::FoldEqBwd: {
      need(rho->k == TmK::Later && rho->kids[0]->k == TmK::Eq, rule,
           "goal is not later of an equation");
      const TyP& mu = argTy(args, 0, rule);
      need(mu->k == TyK::Mu, rule, "type argument is not a recursive type");
      try {
        check_ty(ctx, mu, TypeFlag::Program);
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      const TmP& eq = rho->kids[0];
      need(ty_alpha_eq(ty_subst(mu->a, 0, mu), eq->tyAnn), rule,
           "equation is not at the unrolling of the recursive type");
      return {mkSeq(ctx, chi,
                    tm_eq(mu, tm_fold(mu, eq->kids[0]), tm_fold(mu, eq->kids[1])))};
    }
    case RuleId::StepEqFwd: {
      need(rho->k == TmK::Eq && rho->tyAnn->k == TyK::Monad, rule,
           "goal is not an equation at a computation type");
      TmP u, v;
      need(asSeqStep(rho->kids[0], u) && asSeqStep(rho->kids[1], v), rule,
           "sides do not both start with step");
      return {mkSeq(ctx, chi, tm_later(tm_eq(rho->tyAnn, u, v)))};
    }
    case RuleId::StepEqBwd: {
      need(rho->k == TmK::Later && rho->kids[0]->k == TmK::Eq &&
               rho->kids[0]->tyAnn->k == TyK::Monad,
           rule, "goal is not later of a computation equation");
      const TmP& eq = rho->kids[0];
      return {mkSeq(ctx, chi,
                    tm_eq(eq->tyAnn, tm_seq(tm_step(), eq->kids[0]),
                          tm_seq(tm_step(), eq->kids[1])))};
    }
    case RuleId::Loeb:
      return {mkSeq(ctx, tm_and(chi, tm_later(rho)), rho)};
    case RuleId::WpWand: {
      need(rho->k == TmK::Wp, rule, "goal is not a weakest precondition");
      const TmP& mid = argTm(args, 0, rule);  // binder body over the result
      TyP a;
      try {
        TyP et = infer_tm(ctx, rho->kids[0]);
        if (et->k != TyK::Monad) mismatch(rule, "wp subject is not a computation");
        a = et->a;
        check_prop(ctx.pushTm(rho->hints[0], a), mid);
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      TmP wand = tm_forallp(rho->hints[0], a, tm_wand(mid, rho->kids[1]));
      return {mkSeq(ctx, chi, tm_sep(wand, tm_wp(rho->kids[0], rho->hints[0], mid)))};
    }
    case RuleId::WpVal: {
      need(rho->k == TmK::Wp, rule, "goal is not a weakest precondition");
      const TmP& e = needKid(rho->kids[0], TmK::Ret, rule, "wp of ret");
      return {mkSeq(ctx, chi, tm_subst(rho->kids[1], 0, e))};
    }
    case RuleId::WpBind: {
      need(rho->k == TmK::Wp, rule, "goal is not a weakest precondition");
      const TmP& b = rho->kids[0];
      need(b->k == TmK::Bind, rule, "wp subject is not a bind");
      TmP inner =
          tm_wp(b->kids[1], rho->hints[0], tm_shift(rho->kids[1], 1, 1));
      TmP outer = tm_wp(b->kids[0], b->hints[0], inner);
      return {mkSeq(ctx, chi, outer)};
    }
    case RuleId::WpGet: {
      need(rho->k == TmK::Wp, rule, "goal is not a weakest precondition");
      const TmP& l = needKid(rho->kids[0], TmK::Get, rule, "wp of get");
      TyP a;
      try {
        TyP lt = infer_tm(ctx, l);
        if (lt->k != TyK::Ref) mismatch(rule, "get subject is not a reference");
        a = lt->a;
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      TmP lUp = tm_shift(l, 1);
      TmP pto = tm_points_to(lUp, tm_var(0));
      TmP body = tm_sep(pto, tm_later(tm_wand(pto, rho->kids[1])));
      return {mkSeq(ctx, chi, tm_existsp(rho->hints[0], a, body))};
    }
    case RuleId::WpSet: {
      need(rho->k == TmK::Wp, rule, "goal is not a weakest precondition");
      const TmP& s = rho->kids[0];
      need(s->k == TmK::Set, rule, "wp subject is not a set");
      TyP a;
      try {
        TyP lt = infer_tm(ctx, s->kids[0]);
        if (lt->k != TyK::Ref) mismatch(rule, "set subject is not a reference");
        a = lt->a;
      } catch (const TypeCheckFailure& e) {
        badArg(rule, e.what());
      }
      TmP some = tm_existsp("y", a, tm_points_to(tm_shift(s->kids[0], 1), tm_var(0)));
      TmP post0 = tm_subst(rho->kids[1], 0, tm_unit());
      TmP wand = tm_wand(tm_points_to(s->kids[0], s->kids[1]), post0);
      return {mkSeq(ctx, chi, tm_sep(some, wand))};
    }
    case RuleId::WpNew: {
      need(rho->k == TmK::Wp, rule, "goal is not a weakest precondition");
      const TmP& e = needKid(rho->kids[0], TmK::New, rule, "wp of new");
      TyP a;
      try {
        a = infer_tm(ctx, e);
      } catch (const TypeCheckFailure& ex) {
        badArg(rule, ex.what());
      }
      TmP body = tm_wand(tm_points_to(tm_var(0), tm_shift(e, 1)), rho->kids[1]);
      return {mkSeq(ctx, chi, tm_forallp(rho->hints[0], ty_ref(a), body))};
    }
    case RuleId::WpStep: {
      need(rho->k == TmK::Wp, rule, "goal is not a weakest precondition");
      need(rho->kids[0]->k == TmK::Step, rule, "wp subject is not step");
      return {mkSeq(ctx, chi, tm_later(tm_subst(rho->kids[1], 0, tm_unit())))};
    }
  }
  throw InternalError("rule_premises: bad rule");
}

// ---------------------------------------------------------------------------
// State layer

ProofState initial_state(const Sequent& s) {
  check_sequent(s);
  ProofState st;
  st.root = std::make_shared<TreeSlot>();
  st.goals.push_back(OpenGoal{s, {}, st.root});
  return st;
}

static void checkGoalIdx(const ProofState& st, size_t i) {
  if (i >= st.goals.size())
    throw KernelError(KernelError::RuleMismatch, "no open goal #" + std::to_string(i));
}

void apply_rule(ProofState& st, size_t goalIdx, RuleId rule, RuleArgs args) {
  checkGoalIdx(st, goalIdx);
  OpenGoal goal = st.goals[goalIdx];
  std::vector<Sequent> prem = rule_premises(goal.seq, rule, args, goal.env);
  for (const Sequent& p : prem) check_sequent(p);
  goal.slot->filled = true;
  goal.slot->rule = rule;
  goal.slot->args = std::move(args);
  std::vector<OpenGoal> newGoals;
  for (const Sequent& p : prem) {
    auto slot = std::make_shared<TreeSlot>();
    goal.slot->kids.push_back(slot);
    newGoals.push_back(OpenGoal{p, goal.env, slot});
  }
  st.goals.erase(st.goals.begin() + static_cast<long>(goalIdx));
  st.goals.insert(st.goals.begin() + static_cast<long>(goalIdx), newGoals.begin(), newGoals.end());
}

void register_reflection(ProofState& st, size_t goalIdx, const RegEq& eq, ProofTreeP certificate) {
  checkGoalIdx(st, goalIdx);
  Sequent eqSeq = reg_eq_sequent(eq);
  if (eqSeq.hyp->k != TmK::Top)
    throw KernelError(KernelError::SideConditionFailed, "eq-reflect: hypothesis must be top");
  check_proof(eqSeq, certificate);
  OpenGoal& goal = st.goals[goalIdx];
  goal.slot->filled = true;
  goal.slot->rule = RuleId::EqReflect;
  goal.slot->args.eq = eq;
  auto certSlot = std::make_shared<TreeSlot>();
  certSlot->filled = true;
  certSlot->done = std::move(certificate);
  auto contSlot = std::make_shared<TreeSlot>();
  goal.slot->kids = {certSlot, contSlot};
  goal.env.push_back(eq);
  goal.slot = contSlot;
}

void close_with_tree(ProofState& st, size_t goalIdx, ProofTreeP tree) {
  checkGoalIdx(st, goalIdx);
  OpenGoal goal = st.goals[goalIdx];
  check_proof(goal.seq, tree);
  goal.slot->filled = true;
  goal.slot->done = std::move(tree);
  st.goals.erase(st.goals.begin() + static_cast<long>(goalIdx));
}

static ProofTreeP slot_to_tree(const TreeSlotP& slot) {
  if (!slot->filled) throw KernelError(KernelError::Incomplete, "open goal remains");
  if (slot->done) return slot->done;
  auto n = std::make_shared<ProofTree>();
  n->rule = slot->rule;
  n->args = slot->args;
  for (const auto& k : slot->kids) n->kids.push_back(slot_to_tree(k));
  return n;
}

ProofTreeP extract_tree(const ProofState& st) {
  if (!st.goals.empty())
    throw KernelError(KernelError::Incomplete,
                      std::to_string(st.goals.size()) + " goal(s) remain open");
  return slot_to_tree(st.root);
}

// ---------------------------------------------------------------------------
// Certification

namespace {

void check_node(const Sequent& s, const ProofTreeP& n, std::vector<RegEq>& env,
                std::string& where) {
  if (!n) throw KernelError(KernelError::Incomplete, where + ": missing subtree");
  if (n->rule == RuleId::EqReflect) {
    if (!n->args.eq)
      throw KernelError(KernelError::RuleMismatch, where + ": eq-reflect without an equation");
    if (n->kids.size() != 2)
      throw KernelError(KernelError::RuleMismatch, where + ": eq-reflect arity");
    Sequent eqSeq = reg_eq_sequent(*n->args.eq);
    check_sequent(eqSeq);
    std::string w0 = where + "/0";
    std::vector<RegEq> freshEnv = env;
    check_node(eqSeq, n->kids[0], freshEnv, w0);
    env.push_back(*n->args.eq);
    std::string w1 = where + "/1";
    check_node(s, n->kids[1], env, w1);
    env.pop_back();
    return;
  }
  std::vector<Sequent> prem;
  try {
    prem = rule_premises(s, n->rule, n->args, env);
  } catch (KernelError& e) {
    throw KernelError(e.kind, where + ": " + e.what());
  }
  if (prem.size() != n->kids.size())
    throw KernelError(KernelError::RuleMismatch,
                      where + ": " + rule_name(n->rule) + " expects " +
                          std::to_string(prem.size()) + " premises, tree has " +
                          std::to_string(n->kids.size()));
  for (size_t i = 0; i < prem.size(); i++) {
    std::string wi = where + "/" + std::to_string(i);
    check_node(prem[i], n->kids[i], env, wi);
  }
}

}  // namespace

void check_proof(const Sequent& s, const ProofTreeP& tree) {
  check_sequent(s);
  std::vector<RegEq> env;
  std::string where = "root";
  check_node(s, tree, env, where);
}

// ---------------------------------------------------------------------------
// Transport

namespace {

struct TransportCtx {
  const std::vector<TyP>& tyInst;
  const std::vector<TmP>& tmInst;
  int baseTy;
  int baseTm;
};

}  // namespace

// Replace free type variables >= k by instances (types over the target
// context shifted by k); lower variables are node-local binders.
static TyP transport_ty_impl(const TyP& t, const TransportCtx& tc, int k) {
  switch (t->k) {
    case TyK::Var: {
      if (t->var < k) return t;
      int base = t->var - k;
      if (base >= tc.baseTy) throw KernelError(KernelError::SideConditionFailed,
                                               "transport: type variable outside the base context");
      // base index counts from the binder end: instantiation in binding order
      return ty_shift(tc.tyInst[static_cast<size_t>(tc.baseTy - 1 - base)], k);
    }
    case TyK::Unit:
    case TyK::Empty:
    case TyK::Nat:
    case TyK::Prop:
      return t;
    default: {
      auto n = std::make_shared<Ty>(*t);
      int k2 = ty_is_binder(t->k) ? k + 1 : k;
      if (n->a) n->a = transport_ty_impl(n->a, tc, k2);
      if (n->b) n->b = transport_ty_impl(n->b, tc, k);
      return n;
    }
  }
}

static TmP transport_tm_impl(const TmP& t, const TransportCtx& tc, int kTm, int kTy);

static TmP transport_kids(const TmP& t, const TransportCtx& tc, int kTm, int kTy) {
  auto n = std::make_shared<Tm>(*t);
  if (n->tyAnn) n->tyAnn = transport_ty_impl(n->tyAnn, tc, kTy);
  if (n->tyAnn2) n->tyAnn2 = transport_ty_impl(n->tyAnn2, tc, kTy);
  for (size_t i = 0; i < n->kids.size(); i++) {
    KidSig sig = tm_kid_sig(t->k, static_cast<int>(i));
    n->kids[i] = transport_tm_impl(n->kids[i], tc, kTm + sig.tmBinders, kTy + sig.tyBinders);
  }
  return n;
}

static TmP transport_tm_impl(const TmP& t, const TransportCtx& tc, int kTm, int kTy) {
  if (t->k == TmK::Var) {
    if (t->var < kTm) return t;
    int base = t->var - kTm;
    if (base >= tc.baseTm)
      throw KernelError(KernelError::SideConditionFailed,
                        "transport: variable outside the base context");
    return tm_shift(tc.tmInst[static_cast<size_t>(tc.baseTm - 1 - base)], kTm);
  }
  return transport_kids(t, tc, kTm, kTy);
}

namespace {

struct KidDelta {
  int tm = 0;
  int ty = 0;
};

KidDelta kid_delta(RuleId rule, size_t kid, const RuleArgs& args) {
  switch (rule) {
    case RuleId::ForallIntro:
    case RuleId::ExistsElim:
    case RuleId::LawvereBwd:
      return {1, 0};
    case RuleId::LawvereFwd:
      return {-1, 0};
    case RuleId::ListCases:
      return kid == 1 ? KidDelta{2, 0} : KidDelta{};
    case RuleId::NatCases:
      return kid == 1 ? KidDelta{1, 0} : KidDelta{};
    case RuleId::SubstInstance:
      if (!args.nats.empty() && args.nats[0] == 1) return {0, 1};
      return {1, 0};
    default:
      return {};
  }
}

ProofTreeP transport_node(const ProofTreeP& n, const TransportCtx& tc, int kTm, int kTy) {
  if (!n) return n;
  if (n->rule == RuleId::EqReflect)
    throw KernelError(KernelError::SideConditionFailed,
                      "transport: eq-reflect inside a transported proof is not supported");
  auto out = std::make_shared<ProofTree>();
  out->rule = n->rule;
  RuleArgs a = n->args;
  for (auto& t : a.terms) t = transport_tm_impl(t, tc, kTm, kTy);
  for (auto& ty : a.types) ty = transport_ty_impl(ty, tc, kTy);
  if (a.conv) {
    if (a.conv->k == ConvSpec::RegEqRw)
      throw KernelError(KernelError::SideConditionFailed,
                        "transport: registered-equation rewrites are not supported");
    if (a.conv->replacement) a.conv->replacement = transport_tm_impl(a.conv->replacement, tc, kTm, kTy);
    if (a.conv->tyArg) a.conv->tyArg = transport_ty_impl(a.conv->tyArg, tc, kTy);
  }
  out->args = std::move(a);
  for (size_t i = 0; i < n->kids.size(); i++) {
    KidDelta d = kid_delta(n->rule, i, n->args);
    int kTm2 = kTm + d.tm;
    int kTy2 = kTy + d.ty;
    if (kTm2 < 0)
      throw KernelError(KernelError::SideConditionFailed,
                        "transport: proof contracts base variables");
    out->kids.push_back(transport_node(n->kids[i], tc, kTm2, kTy2));
  }
  return out;
}

}  // namespace

ProofTreeP transport_tree(const ProofTreeP& tree, const std::vector<TyP>& tyInst,
                          const std::vector<TmP>& tmInst, int baseTyCount, int baseTmCount) {
  if (static_cast<int>(tyInst.size()) != baseTyCount ||
      static_cast<int>(tmInst.size()) != baseTmCount)
    throw KernelError(KernelError::IllTypedArg, "transport: instantiation arity mismatch");
  TransportCtx tc{tyInst, tmInst, baseTyCount, baseTmCount};
  return transport_node(tree, tc, 0, 0);
}

}  // namespace lmr
