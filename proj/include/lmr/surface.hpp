#pragma once

// Concrete syntax: lexer and parser for .lmr modules (type/term definitions,
// theorem statements with proof scripts, law checks). The surface AST is
// named; elaboration to the nameless core happens in elab.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmr/conv.hpp"
#include "lmr/syntax.hpp"

namespace lmr {

// ---------------------------------------------------------------------------
// Surface types

struct SrcTy;
using SrcTyP = std::shared_ptr<const SrcTy>;

struct SrcTy {
  enum K {
    Var,   // name (a type variable or a zero-argument definition)
    DefApp,  // name applied to type arguments
    Unit,
    Empty,
    Nat,
    Prop,
    Prod,
    Sum,
    Arrow,
    List,
    Ref,
    Monad,
    Mu,
    Forall,
    Exists,
  } k;
  std::string name;
  SrcTyP a, b;
  std::vector<SrcTyP> args;
  Span span;
};

// ---------------------------------------------------------------------------
// Surface terms (propositions included)

struct SrcTm;
using SrcTmP = std::shared_ptr<const SrcTm>;

struct SrcTm {
  enum K {
    Var,  // may resolve to a local or a global definition; tyArgs instantiate
    LocLit,
    Unit,
    Pair,
    Fst,
    Snd,
    Inl,
    Inr,
    Match,
    Lam,
    TyLam,
    App,
    TyApp,
    Pack,
    Unpack,
    Fold,
    Unfold,
    Ret,
    Bind,
    Get,
    Set,
    New,
    Step,
    NatLit,
    Succ,
    NatRec,
    Nil,
    Cons,
    ListRec,
    Rec,  // rec f x. e   (sugar; needs a checking type)
    Ascribe,
    Eq,
    Top,
    Bot,
    And,
    Or,
    Imp,
    ForallP,
    ExistsP,
    Sep,
    Wand,
    Box,
    Later,
    PointsTo,
    Wp,
  } k;
  std::string name;                  // Var name / first binder
  std::vector<std::string> binders;  // additional binder names
  std::vector<SrcTmP> kids;
  std::vector<SrcTyP> tyArgs;  // Var instantiation or TyApp argument
  SrcTyP tyAnn;                // Lam domain / Eq type / Ascribe / quantifier domain
  uint64_t num = 0;            // NatLit / LocLit
  Span span;
};

// ---------------------------------------------------------------------------
// Proof scripts

struct PathSpec {
  enum K { Numeric, Occurrence } k = Numeric;
  Path path;
  int occIndex = 1;  // 1-based
  SrcTmP pattern;
};

struct ScriptCmd {
  enum K {
    Rule,       // name + args
    Normalize,  // goal|hyp
    ConvTo,     // goal|hyp (term)
    Rewrite,    // effect rule at path
    ConvByEq,   // registered equation at path
    Reflect,
    Exact,
    WpRec,
    Qed,
  } k = Rule;
  std::string name;  // rule / theorem / equation name
  std::vector<SrcTmP> tmArgs;
  std::vector<SrcTyP> tyArgs;
  std::vector<std::string> words;  // 'l'/'r', binder hints
  bool inHyp = false;
  bool backward = false;
  std::optional<PathSpec> at;
  Span span;
};

// ---------------------------------------------------------------------------
// Declarations

struct SrcBinder {
  std::string name;
  SrcTyP ty;
};

struct Decl {
  enum K { TypeDef, TermDef, Theorem, LawCheck } k;
  std::string name;
  std::vector<std::string> tyParams;
  std::vector<SrcBinder> binders;  // theorem element context
  SrcTyP ty;                       // TermDef annotation / LawCheck type
  SrcTmP tm, tm2;                  // TermDef body / theorem hyp+goal / law sides
  SrcTyP tyBody;                   // TypeDef body
  std::vector<ScriptCmd> script;   // Theorem proof
  uint64_t fuel = 0;               // LawCheck
  Span span;
};

struct SourceModule {
  std::string file;
  std::vector<Decl> decls;
};

struct ParseError {
  Span span;
  std::string message;
  std::vector<std::string> expected;
};

struct ParseResult {
  SourceModule mod;
  std::vector<ParseError> errors;
  bool ok() const { return errors.empty(); }
};

ParseResult parse_module(const std::string& text, const std::string& file = "<input>");

// Single-term entry points used by tests and the CLI.
SrcTmP parse_term(const std::string& text, std::vector<ParseError>& errors);
SrcTyP parse_type(const std::string& text, std::vector<ParseError>& errors);

}  // namespace lmr
