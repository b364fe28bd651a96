#include "lmr/interp.hpp"

#include <atomic>
#include <future>
#include <random>
#include <sstream>

#include "lmr/conv.hpp"
#include "lmr/pretty.hpp"

#include "json.hpp"

namespace lmr {

// ---------------------------------------------------------------------------
// Values

static ValueP mkv(ValK k) { return std::make_shared<Value>(k); }

ValueP v_unit() { return mkv(ValK::Unit); }
ValueP v_pair(ValueP a, ValueP b) {
  auto v = std::make_shared<Value>(ValK::Pair);
  v->vs = {std::move(a), std::move(b)};
  return v;
}
ValueP v_inl(ValueP a) {
  auto v = std::make_shared<Value>(ValK::Inl);
  v->vs = {std::move(a)};
  return v;
}
ValueP v_inr(ValueP a) {
  auto v = std::make_shared<Value>(ValK::Inr);
  v->vs = {std::move(a)};
  return v;
}
ValueP v_loc(uint64_t addr) {
  auto v = std::make_shared<Value>(ValK::Loc);
  v->num = addr;
  return v;
}
ValueP v_nat(uint64_t n) {
  auto v = std::make_shared<Value>(ValK::Nat);
  v->num = n;
  return v;
}
ValueP v_list(std::vector<ValueP> elems) {
  auto v = std::make_shared<Value>(ValK::List);
  v->vs = std::move(elems);
  return v;
}
ValueP v_fold(ValueP a) {
  auto v = std::make_shared<Value>(ValK::Fold);
  v->vs = {std::move(a)};
  return v;
}

bool value_eq(const ValueP& a, const ValueP& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->k != b->k) return false;
  if (a->num != b->num) return false;
  if (a->vs.size() != b->vs.size()) return false;
  for (size_t i = 0; i < a->vs.size(); i++)
    if (!value_eq(a->vs[i], b->vs[i])) return false;
  if ((a->body != nullptr) != (b->body != nullptr)) return false;
  if (a->body && !alpha_eq(a->body, b->body)) return false;
  if (a->env.size() != b->env.size()) return false;
  for (size_t i = 0; i < a->env.size(); i++)
    if (!value_eq(a->env[i], b->env[i])) return false;
  if ((a->ty != nullptr) != (b->ty != nullptr)) return false;
  if (a->ty && !ty_alpha_eq(a->ty, b->ty)) return false;
  return true;
}

std::string show_value(const ValueP& v) {
  if (!v) return "<null>";
  switch (v->k) {
    case ValK::Unit: return "()";
    case ValK::Pair: return "(" + show_value(v->vs[0]) + ", " + show_value(v->vs[1]) + ")";
    case ValK::Inl: return "inl " + show_value(v->vs[0]);
    case ValK::Inr: return "inr " + show_value(v->vs[0]);
    case ValK::Closure: return "<closure>";
    case ValK::TyClosure: return "<ty-closure>";
    case ValK::Pack: return "pack " + show_value(v->vs[0]);
    case ValK::Fold: return "fold " + show_value(v->vs[0]);
    case ValK::Loc: return "loc " + std::to_string(v->num);
    case ValK::Nat: return std::to_string(v->num);
    case ValK::List: {
      std::string s = "[";
      for (size_t i = 0; i < v->vs.size(); i++) {
        if (i) s += ", ";
        s += show_value(v->vs[i]);
      }
      return s + "]";
    }
    case ValK::Thunk: return "<thunk>";
  }
  return "?";
}

bool Heap::wellFormed() const {
  uint64_t expect = 0;
  for (const auto& [addr, v] : cells) {
    if (addr != expect++) return false;
    if (!v) return false;
  }
  return expect == nextFresh;
}

std::string Heap::show() const {
  std::string s = "{";
  bool first = true;
  for (const auto& [addr, v] : cells) {
    if (!first) s += ", ";
    first = false;
    s += std::to_string(addr) + "↦" + show_value(v);
  }
  return s + "}";
}

bool heap_eq(const Heap& a, const Heap& b) {
  if (a.nextFresh != b.nextFresh) return false;
  if (a.cells.size() != b.cells.size()) return false;
  auto ia = a.cells.begin();
  auto ib = b.cells.begin();
  for (; ia != a.cells.end(); ++ia, ++ib) {
    if (ia->first != ib->first) return false;
    if (!value_eq(ia->second, ib->second)) return false;
  }
  return true;
}

bool obs_eq(const Observation& a, const Observation& b) {
  if (a.outOfFuel != b.outOfFuel) return false;
  if (a.outOfFuel) return true;
  return a.steps == b.steps && value_eq(a.value, b.value) && heap_eq(a.heap, b.heap);
}

std::string show_obs(const Observation& o) {
  if (o.outOfFuel) return "OutOfFuel";
  return "Done value=" + show_value(o.value) + " heap=" + o.heap.show() +
         " steps=" + std::to_string(o.steps);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

using Env = std::vector<ValueP>;  // back() = de Bruijn index 0

const ValueP& env_lookup(const Env& env, int idx) {
  if (idx < 0 || idx >= static_cast<int>(env.size()))
    throw InternalError("eval: unbound variable (open term?)");
  return env[env.size() - 1 - idx];
}

bool is_monadic_head(TmK k) {
  switch (k) {
    case TmK::Ret:
    case TmK::Bind:
    case TmK::Get:
    case TmK::Set:
    case TmK::New:
    case TmK::Step:
    case TmK::Unfold:
      return true;
    default:
      return false;
  }
}

ValueP thunk(Env env, TmP body) {
  auto v = std::make_shared<Value>(ValK::Thunk);
  v->env = std::move(env);
  v->body = std::move(body);
  return v;
}

ValueP pure(const Env& env, const TmP& t) {
  if (is_monadic_head(t->k)) return thunk(env, t);
  switch (t->k) {
    case TmK::Var:
      return env_lookup(env, t->var);
    case TmK::Loc:
      return v_loc(static_cast<uint64_t>(t->var));
    case TmK::Unit:
      return v_unit();
    case TmK::Pair:
      return v_pair(pure(env, t->kids[0]), pure(env, t->kids[1]));
    case TmK::Fst: {
      ValueP p = pure(env, t->kids[0]);
      if (p->k != ValK::Pair) throw InternalError("eval: fst of non-pair");
      return p->vs[0];
    }
    case TmK::Snd: {
      ValueP p = pure(env, t->kids[0]);
      if (p->k != ValK::Pair) throw InternalError("eval: snd of non-pair");
      return p->vs[1];
    }
    case TmK::Inl:
      return v_inl(pure(env, t->kids[0]));
    case TmK::Inr:
      return v_inr(pure(env, t->kids[0]));
    case TmK::Case: {
      ValueP s = pure(env, t->kids[0]);
      Env ext = env;
      if (s->k == ValK::Inl) {
        ext.push_back(s->vs[0]);
        return pure(ext, t->kids[1]);
      }
      if (s->k == ValK::Inr) {
        ext.push_back(s->vs[0]);
        return pure(ext, t->kids[2]);
      }
      throw InternalError("eval: case of non-injection");
    }
    case TmK::Lam: {
      auto v = std::make_shared<Value>(ValK::Closure);
      v->env = env;
      v->body = t->kids[0];
      return v;
    }
    case TmK::App: {
      ValueP f = pure(env, t->kids[0]);
      ValueP a = pure(env, t->kids[1]);
      if (f->k != ValK::Closure) throw InternalError("eval: application of non-closure");
      Env ext = f->env;
      ext.push_back(a);
      return pure(ext, f->body);
    }
    case TmK::TyLam: {
      auto v = std::make_shared<Value>(ValK::TyClosure);
      v->env = env;
      v->body = t->kids[0];
      return v;
    }
    case TmK::TyApp: {
      ValueP f = pure(env, t->kids[0]);
      if (f->k != ValK::TyClosure) throw InternalError("eval: type application of non-ty-closure");
      return pure(f->env, f->body);  // types are erased at run time
    }
    case TmK::Pack: {
      auto v = std::make_shared<Value>(ValK::Pack);
      v->vs = {pure(env, t->kids[0])};
      v->ty = t->tyAnn2;
      return v;
    }
    case TmK::Unpack: {
      ValueP s = pure(env, t->kids[0]);
      if (s->k != ValK::Pack) throw InternalError("eval: unpack of non-pack");
      Env ext = env;
      ext.push_back(s->vs[0]);
      return pure(ext, t->kids[1]);
    }
    case TmK::Fold:
      return v_fold(pure(env, t->kids[0]));
    case TmK::Zero:
      return v_nat(0);
    case TmK::Succ: {
      ValueP n = pure(env, t->kids[0]);
      if (n->k != ValK::Nat) throw InternalError("eval: succ of non-nat");
      return v_nat(n->num + 1);
    }
    case TmK::NatRec: {
      ValueP n = pure(env, t->kids[0]);
      if (n->k != ValK::Nat) throw InternalError("eval: natrec of non-nat");
      ValueP acc = pure(env, t->kids[1]);
      for (uint64_t i = 0; i < n->num; i++) {
        Env ext = env;
        ext.push_back(v_nat(i));
        ext.push_back(acc);
        acc = pure(ext, t->kids[2]);
      }
      return acc;
    }
    case TmK::Nil:
      return v_list({});
    case TmK::Cons: {
      ValueP h = pure(env, t->kids[0]);
      ValueP tl = pure(env, t->kids[1]);
      if (tl->k != ValK::List) throw InternalError("eval: cons onto non-list");
      std::vector<ValueP> elems;
      elems.reserve(tl->vs.size() + 1);
      elems.push_back(h);
      elems.insert(elems.end(), tl->vs.begin(), tl->vs.end());
      return v_list(std::move(elems));
    }
    case TmK::ListRec: {
      ValueP l = pure(env, t->kids[0]);
      if (l->k != ValK::List) throw InternalError("eval: listrec of non-list");
      ValueP acc = pure(env, t->kids[1]);
      for (size_t i = l->vs.size(); i-- > 0;) {
        std::vector<ValueP> tail(l->vs.begin() + static_cast<long>(i) + 1, l->vs.end());
        Env ext = env;
        ext.push_back(l->vs[i]);
        ext.push_back(v_list(std::move(tail)));
        ext.push_back(acc);
        acc = pure(ext, t->kids[2]);
      }
      return acc;
    }
    default:
      throw InternalError("eval: propositions have no run-time meaning");
  }
}

struct Runner {
  const CostModel& cm;
  std::vector<std::string>* trace;

  bool charge(uint64_t& fuel, uint64_t& used, uint64_t cost) {
    if (fuel < cost) return false;
    fuel -= cost;
    used += cost;
    return true;
  }

  // Returns nullptr value on out-of-fuel.
  ValueP exec(const Env& env, const TmP& t, Heap& h, uint64_t& fuel, uint64_t& used) {
    switch (t->k) {
      case TmK::Ret:
        return pure(env, t->kids[0]);
      case TmK::Bind: {
        ValueP v1 = exec(env, t->kids[0], h, fuel, used);
        if (!v1) return nullptr;
        Env ext = env;
        ext.push_back(v1);
        return exec(ext, t->kids[1], h, fuel, used);
      }
      case TmK::Get: {
        ValueP l = pure(env, t->kids[0]);
        if (l->k != ValK::Loc) throw InternalError("eval: get of non-location");
        auto it = h.cells.find(l->num);
        if (it == h.cells.end()) throw InternalError("eval: get of unallocated location");
        if (!charge(fuel, used, cm.getCost)) return nullptr;
        if (trace) trace->push_back("get loc " + std::to_string(l->num) + " -> " + show_value(it->second));
        return it->second;
      }
      case TmK::Set: {
        ValueP l = pure(env, t->kids[0]);
        if (l->k != ValK::Loc) throw InternalError("eval: set of non-location");
        if (!h.cells.count(l->num)) throw InternalError("eval: set of unallocated location");
        h.cells[l->num] = pure(env, t->kids[1]);
        return v_unit();
      }
      case TmK::New: {
        uint64_t addr = h.nextFresh++;
        h.cells[addr] = pure(env, t->kids[0]);
        return v_loc(addr);
      }
      case TmK::Step: {
        if (!charge(fuel, used, cm.stepCost)) return nullptr;
        if (trace) trace->push_back("step");
        return v_unit();
      }
      case TmK::Unfold: {
        ValueP w = pure(env, t->kids[0]);
        if (w->k != ValK::Fold) throw InternalError("eval: unfold of non-fold");
        if (!charge(fuel, used, cm.unfoldCost)) return nullptr;
        if (trace) trace->push_back("unfold");
        return w->vs[0];
      }
      default: {
        ValueP w = pure(env, t);
        if (w->k != ValK::Thunk) throw InternalError("eval: computation position held a non-thunk");
        return exec(w->env, w->body, h, fuel, used);
      }
    }
  }
};

}  // namespace

ValueP eval_pure(const TmP& e) { return pure({}, e); }

Observation eval(const TmP& e, const Heap& h, uint64_t fuel, const CostModel& cm,
                 std::vector<std::string>* trace) {
  Runner r{cm, trace};
  Observation o;
  o.heap = h;
  uint64_t remaining = fuel;
  uint64_t used = 0;
  ValueP v = r.exec({}, e, o.heap, remaining, used);
  if (!v) {
    Observation oof;
    oof.outOfFuel = true;
    return oof;
  }
  o.value = v;
  o.steps = used;
  return o;
}

// ---------------------------------------------------------------------------
// Oracle relations

std::optional<ObsCounterexample> obs_equiv(const TmP& e1, const TmP& e2,
                                           const std::vector<Heap>& heaps, uint64_t fuelMax,
                                           const CostModel& cm) {
  for (const Heap& h : heaps) {
    for (uint64_t fuel = 0; fuel <= fuelMax; fuel++) {
      Observation o1 = eval(e1, h, fuel, cm);
      Observation o2 = eval(e2, h, fuel, cm);
      if (!obs_eq(o1, o2)) return ObsCounterexample{h, fuel, o1, o2};
    }
  }
  return std::nullopt;
}

std::vector<Heap> small_heaps(int maxLocs, uint64_t maxVal) {
  std::vector<Heap> out;
  std::vector<Heap> frontier;
  Heap empty;
  out.push_back(empty);
  frontier.push_back(empty);
  for (int size = 1; size <= maxLocs; size++) {
    std::vector<Heap> next;
    for (const Heap& h : frontier) {
      for (uint64_t v = 0; v <= maxVal; v++) {
        Heap h2 = h;
        h2.cells[h2.nextFresh] = v_nat(v);
        h2.nextFresh++;
        next.push_back(h2);
        out.push_back(h2);
      }
    }
    frontier = std::move(next);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Law suite

namespace {

struct LawGen {
  std::mt19937_64 rng;
  explicit LawGen(uint64_t seed) : rng(seed) {}

  uint64_t pick(uint64_t n) { return rng() % n; }  // 0..n-1

  TmP natc() { return tm_natlit(pick(4)); }

  Heap heap(int minLocs) {
    int size = minLocs + static_cast<int>(pick(static_cast<uint64_t>(4 - minLocs)));
    Heap h;
    for (int i = 0; i < size; i++) {
      h.cells[h.nextFresh] = v_nat(pick(4));
      h.nextFresh++;
    }
    return h;
  }

  TmP loc(const Heap& h) { return tm_loc(static_cast<int>(pick(h.nextFresh)), ty_nat()); }

  // Continuation of type T nat with one free nat variable (index 0).
  TmP contNat1(const Heap& h) {
    switch (pick(4)) {
      case 0: return tm_ret(tm_var(0));
      case 1: return tm_ret(natc());
      case 2: return tm_seq(tm_set(loc(h), tm_var(0)), tm_ret(tm_var(0)));
      default: return tm_get(loc(h));
    }
  }

  // T nat with two free nat-ish variables (0 and 1); safe when either is nat.
  TmP contNat2of(int idx, const Heap& h) {
    switch (pick(3)) {
      case 0: return tm_ret(tm_var(idx));
      case 1: return tm_ret(natc());
      default: return tm_seq(tm_set(loc(h), tm_var(idx)), tm_ret(tm_var(idx)));
    }
  }

  // Closed computation of type T nat.
  TmP compNat(const Heap& h) {
    switch (pick(4)) {
      case 0: return tm_ret(natc());
      case 1: return tm_get(loc(h));
      case 2: return tm_seq(tm_set(loc(h), natc()), tm_ret(natc()));
      default: return tm_seq(tm_step(), tm_ret(natc()));
    }
  }
};

LawInstance gen_effect_instance(RwRule rule, LawGen& g) {
  Heap h = g.heap(1);
  switch (rule) {
    case RwRule::UnfoldOfFold: {
      TyP mu = ty_mu("t", ty_nat());
      return {tm_unfold(tm_fold(mu, g.natc())), nullptr, h};
    }
    case RwRule::FoldOfUnfold: {
      TyP mu = ty_mu("t", ty_nat());
      TmP u = tm_fold(mu, g.natc());
      return {tm_bind("x", tm_unfold(u), tm_ret(tm_fold(mu, tm_var(0)))), nullptr, h};
    }
    case RwRule::GetAfterSet: {
      TmP l = g.loc(h);
      TmP v = g.natc();
      if (g.pick(2) == 0)
        return {tm_seq(tm_set(l, v), tm_get(l)), nullptr, h};
      return {tm_bind("_", tm_set(l, v), tm_bind("x", tm_get(tm_shift(l, 1)), g.contNat1(h))),
              nullptr, h};
    }
    case RwRule::SetAfterNew: {
      TmP u = g.natc();
      TmP v = g.natc();
      // x <- new u; set x v; W  where W reads the fresh cell or returns a constant
      TmP w = g.pick(2) == 0 ? tm_ret(g.natc()) : tm_get(tm_var(1));
      TmP body = tm_bind("_", tm_set(tm_var(0), tm_shift(v, 1)), w);
      return {tm_bind("x", tm_new(u), body), nullptr, h};
    }
    case RwRule::SetAfterSet: {
      TmP l = g.loc(h);
      TmP v = g.natc();
      TmP w = g.natc();
      if (g.pick(2) == 0)
        return {tm_seq(tm_set(l, v), tm_set(l, w)), nullptr, h};
      return {tm_seq(tm_set(l, v), tm_seq(tm_set(l, w), tm_get(l))), nullptr, h};
    }
    case RwRule::GetAfterGet: {
      TmP l1 = g.loc(h);
      TmP l2 = g.loc(h);
      TmP w = g.pick(2) == 0 ? tm_ret(tm_pair(tm_var(1), tm_var(0))) : tm_ret(tm_var(g.pick(2)));
      return {tm_bind("x", tm_get(l1), tm_bind("y", tm_get(tm_shift(l2, 1)), w)), nullptr, h};
    }
    case RwRule::SetAfterGet: {
      TmP l = g.loc(h);
      TmP w = g.pick(2) == 0 ? tm_ret(tm_var(1)) : tm_shift(g.compNat(h), 2);
      TmP body = tm_bind("_", tm_set(tm_shift(l, 1), tm_var(0)), w);
      return {tm_bind("x", tm_get(l), body), nullptr, h};
    }
    case RwRule::StepCommuteGet: {
      TmP l = g.loc(h);
      TmP w = tm_ret(tm_var(1));
      return {tm_bind("x", tm_get(l), tm_bind("_", tm_step(), w)), nullptr, h};
    }
    case RwRule::StepCommuteSet: {
      TmP l = g.loc(h);
      TmP w = tm_shift(g.compNat(h), 2);
      return {tm_bind("_", tm_set(l, g.natc()), tm_bind("_", tm_step(), w)), nullptr, h};
    }
    case RwRule::StepCommuteNew: {
      TmP w = g.pick(2) == 0 ? tm_ret(g.natc()) : tm_get(tm_var(1));
      return {tm_bind("x", tm_new(g.natc()), tm_bind("_", tm_step(), w)), nullptr, h};
    }
    case RwRule::StepCommuteBind: {
      TmP e = g.compNat(h);
      TmP w = tm_ret(tm_var(1));
      return {tm_bind("x", e, tm_bind("_", tm_step(), w)), nullptr, h};
    }
  }
  throw InternalError("gen_effect_instance: bad rule");
}

LawResult run_law(const std::string& name, uint64_t seed, int instances, uint64_t fuelMax,
                  const CostModel& cm,
                  const std::function<LawInstance(LawGen&)>& gen) {
  LawResult res;
  res.rule = name;
  uint64_t ruleSeed = seed;
  for (char c : name) ruleSeed = ruleSeed * 1099511628211ULL + static_cast<uint64_t>(c);
  LawGen g(ruleSeed);
  for (int i = 0; i < instances; i++) {
    LawInstance inst = gen(g);
    res.instances++;
    auto cex = obs_equiv(inst.lhs, inst.rhs, {inst.heap}, fuelMax, cm);
    if (!cex) {
      res.passes++;
    } else {
      LawFailure f;
      f.term1 = pretty_tm(inst.lhs);
      f.term2 = pretty_tm(inst.rhs);
      f.heap = cex->heap.show();
      f.fuel = cex->fuel;
      f.obs1 = show_obs(cex->lhs);
      f.obs2 = show_obs(cex->rhs);
      res.failures.push_back(std::move(f));
    }
  }
  return res;
}

}  // namespace

bool LawReport::allPass() const {
  for (const auto& r : rules)
    if (r.passes != r.instances) return false;
  return true;
}

std::string LawReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : rules) {
    nlohmann::json fj = nlohmann::json::array();
    for (const auto& f : r.failures) {
      fj.push_back({{"term1", f.term1},
                    {"term2", f.term2},
                    {"heap", f.heap},
                    {"fuel", f.fuel},
                    {"obs1", f.obs1},
                    {"obs2", f.obs2}});
    }
    j.push_back({{"rule", r.rule},
                 {"instances", r.instances},
                 {"passes", r.passes},
                 {"failures", fj}});
  }
  return j.dump(2);
}

LawReport law_suite(uint64_t seed, int instancesPerRule, uint64_t fuelMax, const CostModel& cm,
                    int shards) {
  struct Job {
    std::string name;
    std::function<LawInstance(LawGen&)> gen;
  };
  std::vector<Job> jobs;

  for (RwRule r : all_rw_rules()) {
    jobs.push_back({rw_rule_name(r), [r](LawGen& g) {
                      LawInstance inst = gen_effect_instance(r, g);
                      inst.rhs = rewrite_term(inst.lhs, r, RwDir::Forward,
                                              r == RwRule::UnfoldOfFold || r == RwRule::FoldOfUnfold
                                                  ? ty_mu("t", ty_nat())
                                                  : nullptr);
                      return inst;
                    }});
  }

  jobs.push_back({"monad-left-unit", [](LawGen& g) {
                    Heap h = g.heap(1);
                    TmP u = g.natc();
                    TmP body = g.contNat1(h);
                    return LawInstance{tm_bind("x", tm_ret(u), body), tm_subst(body, 0, u), h};
                  }});
  jobs.push_back({"monad-right-unit", [](LawGen& g) {
                    Heap h = g.heap(1);
                    TmP e = g.compNat(h);
                    return LawInstance{tm_bind("x", e, tm_ret(tm_var(0))), e, h};
                  }});
  jobs.push_back({"monad-assoc", [](LawGen& g) {
                    Heap h = g.heap(1);
                    TmP e1 = g.compNat(h);
                    TmP e2 = g.contNat1(h);
                    TmP e3 = g.contNat1(h);
                    TmP lhs = tm_bind("y", tm_bind("x", e1, e2), e3);
                    TmP rhs = tm_bind("x", e1, tm_bind("y", e2, tm_shift(e3, 1, 1)));
                    return LawInstance{lhs, rhs, h};
                  }});
  jobs.push_back({"forall-beta", [](LawGen& g) {
                    Heap h = g.heap(1);
                    TmP body;
                    switch (g.pick(3)) {
                      case 0: body = tm_ret(tm_nil(ty_var(0))); break;
                      case 1: body = tm_ret(g.natc()); break;
                      default: body = tm_seq(tm_step(), tm_ret(tm_nil(ty_var(0)))); break;
                    }
                    TmP lhs = tm_tyapp(tm_tylam("a", body), ty_nat());
                    TmP rhs = tm_ty_subst(body, 0, ty_nat());
                    return LawInstance{lhs, rhs, h};
                  }});
  jobs.push_back({"exists-beta", [](LawGen& g) {
                    Heap h = g.heap(1);
                    TyP ex = ty_exists("a", ty_nat());
                    TmP u = g.natc();
                    TmP body = g.pick(2) == 0 ? tm_ret(tm_var(0)) : tm_seq(tm_step(), tm_ret(tm_var(0)));
                    TmP lhs = tm_unpack(tm_pack(ex, ty_nat(), u), "a", "x", body);
                    TmP rhs = tm_subst(tm_ty_subst(body, 0, ty_nat()), 0, u);
                    return LawInstance{lhs, rhs, h};
                  }});

  LawReport report;
  report.rules.resize(jobs.size());
  if (shards <= 1) {
    for (size_t i = 0; i < jobs.size(); i++)
      report.rules[i] = run_law(jobs[i].name, seed, instancesPerRule, fuelMax, cm, jobs[i].gen);
    return report;
  }
  std::vector<std::future<void>> futs;
  std::atomic<size_t> next{0};
  for (int s = 0; s < shards; s++) {
    futs.push_back(std::async(std::launch::async, [&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= jobs.size()) return;
        report.rules[i] = run_law(jobs[i].name, seed, instancesPerRule, fuelMax, cm, jobs[i].gen);
      }
    }));
  }
  for (auto& f : futs) f.get();
  return report;
}

// ---------------------------------------------------------------------------
// wp checking

std::optional<WpWitness> wp_check(const TmP& e, const Heap& pre, const std::vector<Heap>& frames,
                                  const std::function<bool(const ValueP&, const Heap&)>& post,
                                  uint64_t fuel, const CostModel& cm) {
  for (const Heap& frame : frames) {
    Heap combined = pre;
    for (const auto& [addr, v] : frame.cells) {
      if (combined.cells.count(addr))
        throw std::invalid_argument("wp_check: frame overlaps the precondition heap");
      combined.cells[addr] = v;
    }
    combined.nextFresh = std::max(pre.nextFresh, frame.nextFresh);
    Observation o = eval(e, combined, fuel, cm);
    if (o.outOfFuel) continue;  // partial wp: divergence passes
    for (const auto& [addr, v] : frame.cells) {
      auto it = o.heap.cells.find(addr);
      if (it == o.heap.cells.end() || !value_eq(it->second, v))
        return WpWitness{frame, "frame cell " + std::to_string(addr) + " disturbed"};
    }
    Heap rest = o.heap;
    for (const auto& [addr, v] : frame.cells) rest.cells.erase(addr);
    if (!post(o.value, rest)) return WpWitness{frame, "postcondition failed"};
  }
  return std::nullopt;
}

}  // namespace lmr
