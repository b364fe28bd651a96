#pragma once

// Bidirectional typechecking for types, terms, propositions, and sequents.
// Type formation carries a flag: program types are the fragment closed under
// the monad, references, recursive and existential types; logical types add
// Prop. Every program type is accepted wherever a logical type is expected.

#include <string>

#include "lmr/syntax.hpp"

namespace lmr {

enum class TypeFlag : uint8_t { Program, Logical };

enum class TypeErrKind : uint8_t {
  Mismatch,
  FlagViolation,
  Unbound,
  NotAMonad,
  NotARef,
  NotAFunction,
  NotASum,
  NotAPair,
  NotAList,
  NotANat,
  NotAMu,
  NotAForall,
  NotAExists,
  NotAProp,
  AnnotationRequired,
  ScopeEscape,
  IllFormed,
};

struct TypeError {
  TypeErrKind kind;
  Span span;
  std::string message;
  TyP expected;  // may be null
  TyP actual;    // may be null
};

struct TypeCheckFailure : std::runtime_error {
  TypeError err;
  explicit TypeCheckFailure(TypeError e) : std::runtime_error(e.message), err(std::move(e)) {}
};

const char* type_err_kind_name(TypeErrKind k);

// Judgment Ξ ⊢ι A type. Throws TypeCheckFailure on violation.
void check_ty(const Ctx& ctx, const TyP& a, TypeFlag flag);
bool is_program_ty(const Ctx& ctx, const TyP& a);

// Synthesize the type of `u` in `ctx`. Where synthesis is ambiguous
// (pack, injections, nil, fold, unannotated lambdas) the term must carry
// its annotation; `check_tm` pushes an expected type instead.
TyP infer_tm(const Ctx& ctx, const TmP& u);
void check_tm(const Ctx& ctx, const TmP& u, const TyP& expected);

// φ prop  ≡  φ : Prop.
void check_prop(const Ctx& ctx, const TmP& phi);

struct Sequent {
  Ctx ctx;
  TmP hyp;   // type Prop
  TmP goal;  // type Prop
};

bool sequent_alpha_eq(const Sequent& a, const Sequent& b);

// Contexts well-formed, hyp and goal are propositions.
void check_sequent(const Sequent& s);

}  // namespace lmr
