#pragma once

// Fuel-indexed reference interpreter. Computations run against a concrete
// global store; `get`, `unfold`, and `step` each consume one unit of fuel,
// `ret`/`set`/`new`/`bind` are free. Running out of fuel is an observation,
// not an error, which makes the interpreter a finite-depth stand-in for the
// guarded semantics and the executable oracle for the effect equations.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lmr/syntax.hpp"

namespace lmr {

struct Value;
using ValueP = std::shared_ptr<const Value>;

enum class ValK : uint8_t {
  Unit,
  Pair,
  Inl,
  Inr,
  Closure,    // env + lambda body
  TyClosure,  // env + type-lambda body
  Pack,
  Fold,
  Loc,
  Nat,
  List,
  Thunk,  // suspended computation of monadic type
};

struct Value {
  ValK k;
  uint64_t num = 0;                   // Nat / Loc
  std::vector<ValueP> vs;             // Pair / List elements / payloads
  std::vector<ValueP> env;            // Closure / TyClosure / Thunk capture
  TmP body;                           // Closure / TyClosure / Thunk code
  TyP ty;                             // Pack witness
  Value(ValK kk) : k(kk) {}
};

ValueP v_unit();
ValueP v_pair(ValueP a, ValueP b);
ValueP v_inl(ValueP a);
ValueP v_inr(ValueP a);
ValueP v_loc(uint64_t addr);
ValueP v_nat(uint64_t n);
ValueP v_list(std::vector<ValueP> elems);
ValueP v_fold(ValueP a);

bool value_eq(const ValueP& a, const ValueP& b);
std::string show_value(const ValueP& v);

struct Heap {
  std::map<uint64_t, ValueP> cells;
  uint64_t nextFresh = 0;

  bool wellFormed() const;
  std::string show() const;
};

bool heap_eq(const Heap& a, const Heap& b);

struct Observation {
  bool outOfFuel = false;
  ValueP value;       // when done
  Heap heap;          // when done
  uint64_t steps = 0;  // fuel consumed when done
};

bool obs_eq(const Observation& a, const Observation& b);
std::string show_obs(const Observation& o);

// Fault-injection knobs for the mutation fixtures; the real semantics is the
// default-constructed model.
struct CostModel {
  uint64_t getCost = 1;
  uint64_t unfoldCost = 1;
  uint64_t stepCost = 1;
};

// Big-step execution of a closed term of monadic type.
Observation eval(const TmP& e, const Heap& h, uint64_t fuel, const CostModel& cm = {},
                 std::vector<std::string>* trace = nullptr);

// Pure evaluation of a closed non-monadic term (monadic subterms suspend).
ValueP eval_pure(const TmP& e);

// ---------------------------------------------------------------------------
// Oracle relations

struct ObsCounterexample {
  Heap heap;
  uint64_t fuel = 0;
  Observation lhs, rhs;
};

// Exact observation equality under every supplied heap and every fuel value
// 0..fuelMax.
std::optional<ObsCounterexample> obs_equiv(const TmP& e1, const TmP& e2,
                                           const std::vector<Heap>& heaps, uint64_t fuelMax,
                                           const CostModel& cm = {});

// All heaps with locations 0..maxLocs-1 (every subset size) and nat values
// <= maxVal.
std::vector<Heap> small_heaps(int maxLocs, uint64_t maxVal);

// ---------------------------------------------------------------------------
// Law suite

struct LawInstance {
  TmP lhs, rhs;
  Heap heap;
};

struct LawFailure {
  std::string term1, term2, heap;
  uint64_t fuel = 0;
  std::string obs1, obs2;
};

struct LawResult {
  std::string rule;
  int instances = 0;
  int passes = 0;
  std::vector<LawFailure> failures;
};

struct LawReport {
  std::vector<LawResult> rules;
  bool allPass() const;
  std::string to_json() const;
};

// Ground-instance validation of the effect equations, the monad laws, the
// universal/existential beta laws, and the step-commutation rules.
LawReport law_suite(uint64_t seed, int instancesPerRule, uint64_t fuelMax,
                    const CostModel& cm = {}, int shards = 1);

// ---------------------------------------------------------------------------
// Weakest-precondition checking at desk scale

struct WpWitness {
  Heap frame;
  std::string reason;
};

// Runs e against pre+frame for each frame; Done runs must preserve the frame
// bit-for-bit and satisfy `post` on (value, heap minus frame). OutOfFuel
// passes (partial wp).
std::optional<WpWitness> wp_check(const TmP& e, const Heap& pre, const std::vector<Heap>& frames,
                                  const std::function<bool(const ValueP&, const Heap&)>& post,
                                  uint64_t fuel, const CostModel& cm = {});

}  // namespace lmr
