#pragma once

// Decidable judgmental-equality fragment and the directed effect rewrites.
//
// `normalize` computes the beta/eta + monad-law normal form; it never fires
// the effect equations (those change observable step counts and must be
// invoked explicitly through `rewrite`). `conv_eq` is alpha-equality of
// normal forms and is what the typechecker and kernel use implicitly.

#include <optional>
#include <string>
#include <vector>

#include "lmr/syntax.hpp"
#include "lmr/typeck.hpp"

namespace lmr {

TmP normalize(const TmP& u);
bool conv_eq(const TmP& u, const TmP& v);

// ---------------------------------------------------------------------------
// Paths: child-index sequences addressing a subterm, crossing binders.

using Path = std::vector<int>;

std::string path_to_string(const Path& p);

struct PathCtx {
  // Extra binders crossed between the root and the subterm.
  int tmBinders = 0;
  int tyBinders = 0;
  std::vector<std::string> tmHints;
  std::vector<TyP> tmDoms;  // domain types where known (Lam/Bind/...); null otherwise
};

// Resolve `p` in `t`; returns nullptr when the path is invalid.
TmP subterm_at(const TmP& t, const Path& p, PathCtx* info = nullptr);
// Replace the subterm at `p` (must resolve). Throws InternalError when invalid.
TmP replace_at(const TmP& t, const Path& p, const TmP& sub);
// Leftmost-outermost occurrences of `pat` (shifted under binders as it
// descends, so `pat` is read in the root context). At most `limit` results.
std::vector<Path> find_occurrences(const TmP& t, const TmP& pat, int limit = 16);

// ---------------------------------------------------------------------------
// Effect-equation rewrites

enum class RwRule : uint8_t {
  UnfoldOfFold,
  FoldOfUnfold,
  GetAfterSet,
  SetAfterNew,
  SetAfterSet,
  GetAfterGet,
  SetAfterGet,
  StepCommuteGet,
  StepCommuteSet,
  StepCommuteNew,
  StepCommuteBind,
};

enum class RwDir : uint8_t { Forward, Backward };

const char* rw_rule_name(RwRule r);
std::optional<RwRule> rw_rule_by_name(const std::string& s);
std::vector<RwRule> all_rw_rules();

struct RewriteError {
  enum Kind { NoMatch, PathInvalid, NeedsType } kind;
  std::string message;
};

struct RewriteFailure : std::runtime_error {
  RewriteError err;
  explicit RewriteFailure(RewriteError e) : std::runtime_error(e.message), err(std::move(e)) {}
};

// Rewrite the whole term `t` (which is the subterm a path resolved to).
// Some backward directions need a type argument (e.g. the mu-type when
// reintroducing a fold). Throws RewriteFailure on no-match.
TmP rewrite_term(const TmP& t, RwRule rule, RwDir dir, const TyP& tyArg = nullptr);

// Rewrite inside `root` at `path`.
TmP rewrite_at(const TmP& root, const Path& path, RwRule rule, RwDir dir,
               const TyP& tyArg = nullptr);

}  // namespace lmr
