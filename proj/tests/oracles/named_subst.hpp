#pragma once

// Independent named-variable substitution oracle used to validate the
// de Bruijn machinery. Deliberately naive: names everywhere, capture
// avoided by renaming binders with a fresh counter. Covers the fragment
// the random generators produce.

#include <memory>
#include <string>
#include <vector>

#include "lmr/syntax.hpp"

namespace lmr::testing {

struct NTy;
using NTyP = std::shared_ptr<const NTy>;

struct NTy {
  TyK k;
  std::string name;   // Var name or binder name
  NTyP a, b;
};

NTyP named_of_ty(const TyP& t, const std::vector<std::string>& env);
TyP named_to_ty(const NTyP& t, const std::vector<std::string>& env);
// Capture-avoiding substitution of `repl` for free variable `x`.
NTyP named_subst_ty(const NTyP& t, const std::string& x, const NTyP& repl, int& fresh);

struct NTm;
using NTmP = std::shared_ptr<const NTm>;

struct NTm {
  TmK k;
  std::string name;  // Var name or binder name (single-binder nodes)
  TyP tyAnn;         // annotations carried opaquely (no type vars in the fragment)
  std::vector<NTmP> kids;
};

NTmP named_of_tm(const TmP& t, const std::vector<std::string>& env);
TmP named_to_tm(const NTmP& t, const std::vector<std::string>& env);
NTmP named_subst_tm(const NTmP& t, const std::string& x, const NTmP& repl, int& fresh);

}  // namespace lmr::testing
