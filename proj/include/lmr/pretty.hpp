#pragma once

// Deterministic ASCII rendering of types and terms. Binder hints are used
// when available and freshened on collision, so parse(pretty(t)) is
// alpha-equal to t for well-scoped input.

#include <string>
#include <vector>

#include "lmr/syntax.hpp"

namespace lmr {

std::string pretty_ty(const TyP& t, const std::vector<std::string>& tyNames = {});
std::string pretty_tm(const TmP& t, const std::vector<std::string>& tyNames = {},
                      const std::vector<std::string>& tmNames = {});

// Render in the context of `ctx` (names taken from it).
std::string pretty_ty_in(const Ctx& ctx, const TyP& t);
std::string pretty_tm_in(const Ctx& ctx, const TmP& t);

}  // namespace lmr
