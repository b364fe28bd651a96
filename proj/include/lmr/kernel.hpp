#pragma once

// LCF-style proof checker. A closed catalog of primitive rules acts on
// sequents Ξ | Γ | φ ⊢ ψ by backward goal transformation; scripts drive a
// ProofState, and the final certifier re-checks the extracted tree from
// scratch, re-running every conversion and rewrite side condition.
//
// Judgmental equality enters through two doors only: conv-goal/conv-hyp
// handle the decidable beta/eta/monad fragment implicitly and apply the
// effect equations or registered (reflected) equations at explicit paths.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmr/conv.hpp"
#include "lmr/typeck.hpp"

namespace lmr {

enum class RuleId : uint8_t {
  // structural
  Hyp,
  Cut,
  WeakenHyp,
  ConvGoal,
  ConvHyp,
  SubstInstance,
  // equality
  EqFormation,
  LawvereFwd,
  LawvereBwd,
  EqReflect,
  PropExt,
  EqSubst,
  // intuitionistic first-order logic
  TrueIntro,
  FalseElim,
  AndIntro,
  AndElim,
  OrIntro,
  OrElim,
  ImpIntro,
  ImpElim,
  ForallIntro,
  ForallElim,
  ExistsIntro,
  ExistsElim,
  ListCases,
  NatCases,
  // separation
  WandAdjFwd,
  WandAdjBwd,
  SepMono,
  SepWeaken,
  SepAssocL,
  SepAssocR,
  SepComm,
  SepTopIntro,
  // persistence
  BoxMono,
  BoxDup,
  BoxIdem,
  BoxAndToSep,
  BoxValid,
  // later modality
  LaterIntro,
  LaterMono,
  LaterAnd,
  LaterSep,
  LaterWand,
  LaterBoxCommuteL,
  LaterBoxCommuteR,
  FoldEqFwd,
  FoldEqBwd,
  StepEqFwd,
  StepEqBwd,
  Loeb,
  // weakest preconditions
  WpWand,
  WpVal,
  WpBind,
  WpGet,
  WpSet,
  WpNew,
  WpStep,
};

const char* rule_name(RuleId r);
std::optional<RuleId> rule_by_name(const std::string& s);  // '-' and '_' both accepted
std::vector<RuleId> all_rules();

// A reflected equation: Ξ' | Γ' | ⊤ ⊢ u =A v, stored with its own context.
struct RegEq {
  int tyCount = 0;
  std::vector<TyP> gamma;
  TyP at;
  TmP lhs, rhs;
};

// Justification carried by conv-goal / conv-hyp.
struct ConvSpec {
  enum K { Replace, Normalize, EffectRw, RegEqRw } k = Normalize;
  TmP replacement;  // Replace
  // EffectRw
  RwRule rule = RwRule::UnfoldOfFold;
  RwDir dir = RwDir::Forward;
  TyP tyArg;
  // RegEqRw
  int eqIndex = -1;
  bool eqBackward = false;
  std::vector<TyP> tyInst;
  std::vector<TmP> tmInst;
  // EffectRw / RegEqRw target
  Path path;
};

struct RuleArgs {
  std::vector<TmP> terms;
  std::vector<TyP> types;
  std::vector<int> nats;
  std::vector<std::string> hints;
  std::optional<ConvSpec> conv;
  std::optional<RegEq> eq;  // EqReflect
};

struct ProofTree;
using ProofTreeP = std::shared_ptr<const ProofTree>;
struct ProofTree {
  RuleId rule;
  RuleArgs args;
  std::vector<ProofTreeP> kids;
};

struct KernelError : std::runtime_error {
  enum Kind { RuleMismatch, IllTypedArg, SideConditionFailed, Incomplete } kind;
  KernelError(Kind k, const std::string& m) : std::runtime_error(m), kind(k) {}
};

// Compute the premises the rule instance demands of `goal`. Throws
// KernelError when the rule does not apply or arguments are ill-typed.
// EqReflect is excluded (handled by the tree walker directly).
std::vector<Sequent> rule_premises(const Sequent& goal, RuleId rule, const RuleArgs& args,
                                   const std::vector<RegEq>& eqEnv);

// ---------------------------------------------------------------------------
// Goal-state layer

struct TreeSlot;
using TreeSlotP = std::shared_ptr<TreeSlot>;
struct TreeSlot {
  bool filled = false;
  RuleId rule = RuleId::Hyp;
  RuleArgs args;
  std::vector<TreeSlotP> kids;
  ProofTreeP done;  // pre-certified subtree spliced in whole
};

struct OpenGoal {
  Sequent seq;
  std::vector<RegEq> env;
  TreeSlotP slot;
};

struct ProofState {
  std::vector<OpenGoal> goals;  // goal 0 is the current goal
  TreeSlotP root;
};

ProofState initial_state(const Sequent& s);
// Applies a rule to goal `goalIdx`; its premises (in order) replace it.
void apply_rule(ProofState& st, size_t goalIdx, RuleId rule, RuleArgs args);
// Register an equation for later conv-goal/conv-hyp use in goal `goalIdx`.
// `certificate` must prove Ξ'|Γ'|⊤ ⊢ lhs =at rhs and is re-checked here.
void register_reflection(ProofState& st, size_t goalIdx, const RegEq& eq, ProofTreeP certificate);
// Close goal `goalIdx` with a certified tree for exactly its sequent.
void close_with_tree(ProofState& st, size_t goalIdx, ProofTreeP tree);
ProofTreeP extract_tree(const ProofState& st);  // all goals must be closed

// Full certification from scratch; no state from the script layer is
// trusted. Throws KernelError (first failing node, with a path string).
void check_proof(const Sequent& s, const ProofTreeP& tree);

// Sequent of a registered equation (hyp ⊤, goal lhs =at rhs).
Sequent reg_eq_sequent(const RegEq& eq);

// Transport a certified tree along an instantiation of its base context:
// type parameters get `tyInst`, element parameters get `tmInst` (expressed
// in the target context). The tree must not use eq-reflect or registered
// rewrites and must never contract base variables.
ProofTreeP transport_tree(const ProofTreeP& tree, const std::vector<TyP>& tyInst,
                          const std::vector<TmP>& tmInst, int baseTyCount, int baseTmCount);

}  // namespace lmr
