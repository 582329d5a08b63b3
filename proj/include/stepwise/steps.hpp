#pragma once

// Single-redex rewriting of arithmetic expressions into `=`-joined traces.
//
// Rule priority for one step:
//   1. sign normalization anywhere (pairs of negative factors in a * / chain cancel)
//   2. leftmost percent literal becomes a decimal
//   3. leftmost freshly computed fraction that is not in lowest terms is reduced
//   4. inside the leftmost innermost unfinished bracket (or the top level):
//        a bracket around a finished literal is dropped,
//        otherwise the leftmost operator of the highest precedence tier whose
//        operands are both literals is evaluated (a fraction division first
//        turns into multiplication by the reciprocal).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stepwise/error.hpp"
#include "stepwise/expr.hpp"
#include "stepwise/numeric.hpp"

namespace stepwise {

enum class RuleId {
  SignNormalize,     // R1
  PercentToDecimal,  // R2
  ReduceBinop,       // R3
  FractionDivToMul,  // R4
  FractionReduce,    // R5
  DropGroup,         // R6
};

inline const char* rule_name(RuleId r) {
  switch (r) {
    case RuleId::SignNormalize: return "R1 sign-normalize";
    case RuleId::PercentToDecimal: return "R2 percent-to-decimal";
    case RuleId::ReduceBinop: return "R3 reduce-binop";
    case RuleId::FractionDivToMul: return "R4 fraction-division-to-multiplication";
    case RuleId::FractionReduce: return "R5 fraction-reduce";
    case RuleId::DropGroup: return "R6 drop-group";
  }
  return "?";
}

struct Step {
  ExprPtr expr;
  RuleId rule;
};

struct StepTrace {
  ExprPtr original;
  std::vector<ExprPtr> snapshots;
  std::vector<RuleId> rules;
  NumberValue final;
};

namespace detail {

using Path = std::vector<int>;

inline ExprPtr child_of(const Expr& e, int i) {
  if (auto u = e.as<Unary>()) return u->operand;
  if (auto b = e.as<Binary>()) return i == 0 ? b->lhs : b->rhs;
  if (auto g = e.as<Group>()) return g->inner;
  return nullptr;
}

inline ExprPtr with_child(const Expr& e, int i, ExprPtr c) {
  if (auto u = e.as<Unary>()) return make_expr(Unary{u->sign, std::move(c), u->marker});
  if (auto b = e.as<Binary>()) {
    return i == 0 ? make_expr(Binary{b->op, std::move(c), b->rhs})
                  : make_expr(Binary{b->op, b->lhs, std::move(c)});
  }
  if (auto g = e.as<Group>()) return make_expr(Group{g->kind, std::move(c)});
  return nullptr;
}

inline ExprPtr node_at(const ExprPtr& root, std::span<const int> path) {
  ExprPtr cur = root;
  for (int i : path) cur = child_of(*cur, i);
  return cur;
}

inline ExprPtr replace_at(const ExprPtr& root, std::span<const int> path, ExprPtr repl) {
  if (path.empty()) return repl;
  ExprPtr child = child_of(*root, path.front());
  return with_child(*root, path.front(), replace_at(child, path.subspan(1), std::move(repl)));
}

/// Whether the node at `path` is printed first within its bracket (or the
/// whole expression), i.e. not directly after an operator or sign.
inline bool at_start(const ExprPtr& root, std::span<const int> path) {
  bool start = true;
  ExprPtr cur = root;
  for (int i : path) {
    if (cur->is<Group>()) start = true;
    else if (cur->is<Unary>()) start = false;
    else if (cur->is<Binary>() && i == 1) start = false;
    cur = child_of(*cur, i);
  }
  return start;
}

inline bool is_literal(const Expr& e) { return e.is<NumberLit>() || e.is<FractionLit>(); }

/// A literal, possibly under stacked signs.
inline bool is_operand_literal(const Expr& e) {
  if (is_literal(e)) return true;
  if (auto u = e.as<Unary>()) return is_operand_literal(*u->operand);
  return false;
}

inline bool is_fraction_valued(const Expr& e) {
  if (e.is<FractionLit>()) return true;
  if (auto u = e.as<Unary>()) return is_fraction_valued(*u->operand);
  return false;
}

/// Brackets (possibly nested) around an operand literal.
inline bool is_redundant_group(const Expr& e) {
  const Group* g = e.as<Group>();
  if (g == nullptr) return false;
  if (is_operand_literal(*g->inner)) return true;
  return is_redundant_group(*g->inner);
}

inline ExprPtr strip_groups(ExprPtr e) {
  while (auto g = e->as<Group>()) e = g->inner;
  return e;
}

inline bool contains_percent(const Expr& e) {
  if (auto n = e.as<NumberLit>()) return n->percent;
  if (auto u = e.as<Unary>()) return contains_percent(*u->operand);
  return false;
}

inline NumberValue literal_value(const Expr& e) {
  if (auto n = e.as<NumberLit>()) return n->percent ? percent_to_decimal(n->value) : n->value;
  if (auto f = e.as<FractionLit>()) return NumberValue(Fraction(f->num, f->den));
  if (auto u = e.as<Unary>()) {
    NumberValue v = literal_value(*u->operand);
    return u->sign == '-' ? negate(v) : v;
  }
  throw Error(ErrorCode::NonTerminating, "not a literal: " + print(e));
}

/// Collapses a signed literal into a single literal node.
inline ExprPtr fold_signed_literal(const Expr& e, bool at_root) {
  NumberValue v = literal_value(e);
  const Expr* inner = &e;
  while (auto u = inner->as<Unary>()) inner = u->operand.get();
  if (auto f = inner->as<FractionLit>()) {
    const Fraction& fr = v.as_fraction();
    return make_expr(FractionLit{fr.num(), fr.den(), at_root || f->bare, f->computed});
  }
  return make_number(v);
}

/// After replacing the node at `path`, folds a sign applied directly to a
/// plain number literal into the literal.
inline ExprPtr replace_and_fold(const ExprPtr& root, Path path, ExprPtr repl) {
  while (!path.empty() && repl->is<NumberLit>() && !repl->as<NumberLit>()->percent) {
    Path parent_path(path.begin(), path.end() - 1);
    ExprPtr parent = node_at(root, parent_path);
    const Unary* u = parent->as<Unary>();
    if (u == nullptr) break;
    NumberValue v = repl->as<NumberLit>()->value;
    repl = make_number(u->sign == '-' ? negate(v) : v);
    path = std::move(parent_path);
  }
  return replace_at(root, path, std::move(repl));
}

inline ExprPtr strip_markers(const ExprPtr& e) {
  if (auto u = e->as<Unary>()) {
    if (u->marker) return strip_markers(u->operand);
    ExprPtr c = strip_markers(u->operand);
    return c == u->operand ? e : make_expr(Unary{u->sign, c, false});
  }
  if (auto b = e->as<Binary>()) {
    ExprPtr l = strip_markers(b->lhs);
    ExprPtr r = strip_markers(b->rhs);
    return (l == b->lhs && r == b->rhs) ? e : make_expr(Binary{b->op, l, r});
  }
  if (auto g = e->as<Group>()) {
    ExprPtr c = strip_markers(g->inner);
    return c == g->inner ? e : make_expr(Group{g->kind, c});
  }
  return e;
}

// --- R1 ---------------------------------------------------------------------

inline bool is_muldiv(const Expr& e) {
  const Binary* b = e.as<Binary>();
  return b != nullptr && (b->op == BinOp::Mul || b->op == BinOp::Div);
}

// Negative factors of a * / chain: explicit sign applications anywhere along
// * / chains and brackets, plus negative literals that are direct factors
// (not wrapped in brackets).
inline bool counted_negative(const Expr& e, bool in_group) {
  if (auto u = e.as<Unary>()) return u->sign == '-';
  if (in_group) return false;
  if (auto n = e.as<NumberLit>()) return n->value.is_negative();
  if (auto f = e.as<FractionLit>()) return f->num.sign() < 0;
  return false;
}

inline int count_negatives(const Expr& e, bool in_group) {
  if (is_muldiv(e)) {
    const Binary& b = *e.as<Binary>();
    return count_negatives(*b.lhs, in_group) + count_negatives(*b.rhs, in_group);
  }
  if (auto g = e.as<Group>()) return count_negatives(*g->inner, true);
  if (auto u = e.as<Unary>()) {
    return (u->sign == '-' ? 1 : 0) + count_negatives(*u->operand, in_group);
  }
  return counted_negative(e, in_group) ? 1 : 0;
}

struct CancelState {
  bool keep_first;
  int seen = 0;
};

inline ExprPtr cancel_negatives(const ExprPtr& e, bool in_group, CancelState& st) {
  if (is_muldiv(*e)) {
    const Binary& b = *e->as<Binary>();
    ExprPtr l = cancel_negatives(b.lhs, in_group, st);
    ExprPtr r = cancel_negatives(b.rhs, in_group, st);
    return make_expr(Binary{b.op, l, r});
  }
  if (auto g = e->as<Group>()) {
    return make_expr(Group{g->kind, cancel_negatives(g->inner, true, st)});
  }
  if (auto u = e->as<Unary>()) {
    if (u->sign == '-') {
      const bool keep = st.keep_first && st.seen == 0;
      ++st.seen;
      ExprPtr inner = cancel_negatives(u->operand, in_group, st);
      return keep ? make_expr(Unary{'-', inner, false}) : inner;
    }
    return make_expr(Unary{u->sign, cancel_negatives(u->operand, in_group, st), u->marker});
  }
  if (!counted_negative(*e, in_group)) return e;
  const bool keep = st.keep_first && st.seen == 0;
  ++st.seen;
  if (keep) return e;
  if (auto n = e->as<NumberLit>()) {
    NumberValue v = negate(n->value);
    v = v.with_origin(v.is_dec() ? Origin::Decimal : Origin::Integer);
    std::string text = n->text.front() == '-' ? n->text.substr(1) : render(v);
    return make_expr(NumberLit{v, text, n->percent});
  }
  const FractionLit& f = *e->as<FractionLit>();
  return make_expr(FractionLit{-f.num, f.den, f.bare, f.computed});
}

inline Path first_factor_path(const ExprPtr& chain) {
  Path path;
  ExprPtr cur = chain;
  for (;;) {
    if (is_muldiv(*cur)) {
      path.push_back(0);
      cur = cur->as<Binary>()->lhs;
    } else if (auto g = cur->as<Group>(); g != nullptr && is_muldiv(*g->inner)) {
      path.push_back(0);
      cur = g->inner;
    } else {
      return path;
    }
  }
}

inline bool first_factor_negative(const ExprPtr& chain) {
  ExprPtr cur = chain;
  bool in_group = false;
  for (;;) {
    if (is_muldiv(*cur)) {
      cur = cur->as<Binary>()->lhs;
    } else if (auto g = cur->as<Group>(); g != nullptr && is_muldiv(*g->inner)) {
      cur = g->inner;
      in_group = true;
    } else {
      return counted_negative(*cur, in_group);
    }
  }
}

inline std::optional<ExprPtr> normalize_chain(const ExprPtr& root, const ExprPtr& e, Path& path,
                                              bool parent_muldiv) {
  if (is_muldiv(*e) && !parent_muldiv) {
    const int negatives = count_negatives(*e, false);
    if (negatives >= 2) {
      CancelState st{negatives % 2 == 1};
      const bool first_negative = first_factor_negative(e);
      ExprPtr chain = cancel_negatives(e, false, st);
      if (negatives % 2 == 0 && !first_negative && at_start(root, path)) {
        Path fp = first_factor_path(chain);
        ExprPtr leaf = node_at(chain, fp);
        const Unary* lu = leaf->as<Unary>();
        if (lu == nullptr || lu->sign != '+') {
          chain = replace_at(chain, fp, make_expr(Unary{'+', leaf, true}));
        }
      }
      return replace_at(root, path, chain);
    }
  }
  const bool muldiv = is_muldiv(*e);
  for (int i = 0; i < 2; ++i) {
    ExprPtr c = child_of(*e, i);
    if (!c) break;
    if (e->is<Unary>() || e->is<Group>()) {
      if (i > 0) break;
    }
    path.push_back(i);
    auto r = normalize_chain(root, c, path, muldiv);
    path.pop_back();
    if (r) return r;
  }
  return std::nullopt;
}

inline std::optional<ExprPtr> sign_normalize(const ExprPtr& root) {
  if (root->is<Unary>() && is_operand_literal(*root) && !contains_percent(*root)) {
    return fold_signed_literal(*root, true);
  }
  Path path;
  return normalize_chain(root, root, path, false);
}

// --- R2 / R5 ----------------------------------------------------------------

template <class Pred>
bool find_first(const ExprPtr& e, Path& path, Pred pred) {
  if (pred(*e)) return true;
  for (int i = 0; i < 2; ++i) {
    ExprPtr c = child_of(*e, i);
    if (!c) break;
    path.push_back(i);
    if (find_first(c, path, pred)) return true;
    path.pop_back();
    if (!e->is<Binary>()) break;
  }
  return false;
}

inline std::optional<ExprPtr> convert_first_percent(const ExprPtr& root) {
  Path path;
  if (!find_first(root, path, [](const Expr& e) {
        auto n = e.as<NumberLit>();
        return n != nullptr && n->percent;
      })) {
    return std::nullopt;
  }
  const NumberLit& lit = *node_at(root, path)->as<NumberLit>();
  return replace_at(root, path, make_number(percent_to_decimal(lit.value)));
}

inline bool needs_reduction(const FractionLit& f) {
  if (!f.computed) return false;
  return f.den == WideInt(1) || !Fraction(f.num, f.den).is_canonical();
}

inline std::optional<ExprPtr> reduce_first_computed(const ExprPtr& root) {
  Path path;
  if (!find_first(root, path, [](const Expr& e) {
        auto f = e.as<FractionLit>();
        return f != nullptr && needs_reduction(*f);
      })) {
    return std::nullopt;
  }
  const FractionLit& f = *node_at(root, path)->as<FractionLit>();
  Fraction r = Fraction(f.num, f.den).reduced();
  if (r.den() == WideInt(1)) return replace_and_fold(root, path, make_number(NumberValue(r.num())));
  return replace_at(root, path, make_expr(FractionLit{r.num(), r.den(), path.empty(), true}));
}

// --- focus: R6, R4, R3 ------------------------------------------------------

// Leftmost innermost bracket whose content is not yet a literal.
inline bool find_focus(const ExprPtr& e, Path& path) {
  if (auto g = e->as<Group>(); g != nullptr && !is_redundant_group(*e)) {
    path.push_back(0);
    if (find_focus(g->inner, path)) return true;
    path.pop_back();
    return true;
  }
  for (int i = 0; i < 2; ++i) {
    ExprPtr c = child_of(*e, i);
    if (!c) break;
    path.push_back(i);
    if (find_focus(c, path)) return true;
    path.pop_back();
    if (!e->is<Binary>()) break;
  }
  return false;
}

// Walks the focus content without entering brackets.
template <class Fn>
void walk_flat(const ExprPtr& e, Path& path, Fn&& fn) {
  fn(e, path);
  if (e->is<Group>()) return;
  for (int i = 0; i < 2; ++i) {
    ExprPtr c = child_of(*e, i);
    if (!c) break;
    path.push_back(i);
    walk_flat(c, path, fn);
    path.pop_back();
    if (!e->is<Binary>()) break;
  }
}

inline NumberValue apply_op(BinOp op, const NumberValue& a, const NumberValue& b, Mode mode) {
  switch (op) {
    case BinOp::Add: return add(a, b);
    case BinOp::Sub: return sub(a, b);
    case BinOp::Mul: return mul(a, b);
    case BinOp::Div:
      return div(a, b, mode == Mode::Fraction ? DivisionPolicy::Exact : DivisionPolicy::DecimalFallback);
    case BinOp::Pow: return pow(a, b);
  }
  return a;
}

inline ExprPtr reciprocal(const Expr& e) {
  if (auto u = e.as<Unary>()) return make_expr(Unary{u->sign, reciprocal(*u->operand), false});
  const FractionLit& f = *e.as<FractionLit>();
  if (f.num.is_zero()) {
    throw Error(ErrorCode::DivByZero, "reciprocal of zero fraction " + print(e));
  }
  WideInt num = f.den;
  WideInt den = f.num;
  if (den.sign() < 0) {
    num = -num;
    den = -den;
  }
  return make_expr(FractionLit{num, den, false, false});
}

inline ExprPtr result_node(const NumberValue& v, BinOp op) {
  if (v.is_fraction()) {
    const Fraction& f = v.as_fraction();
    return make_expr(FractionLit{f.num(), f.den(), op == BinOp::Add || op == BinOp::Sub, true});
  }
  return make_number(v);
}

inline bool is_negative_number(const Expr& e) {
  auto n = e.as<NumberLit>();
  return n != nullptr && !n->text.empty() && n->text.front() == '-';
}

inline Step reduce_in_focus(const ExprPtr& root, const std::optional<Path>& group_path, Mode mode) {
  Path content_path;
  if (group_path) {
    content_path = *group_path;
    content_path.push_back(0);
  }
  ExprPtr content = node_at(root, content_path);

  // R6
  {
    Path p = content_path;
    std::optional<Path> hit;
    walk_flat(content, p, [&](const ExprPtr& e, const Path& at) {
      if (!hit && is_redundant_group(*e)) hit = at;
    });
    if (hit) {
      ExprPtr lit = strip_groups(node_at(root, *hit));
      return {replace_and_fold(root, *hit, lit), RuleId::DropGroup};
    }
  }

  // R3 / R4
  std::optional<Path> best;
  int best_tier = -1;
  {
    Path p = content_path;
    walk_flat(content, p, [&](const ExprPtr& e, const Path& at) {
      const Binary* b = e->as<Binary>();
      if (b == nullptr || !is_operand_literal(*b->lhs) || !is_operand_literal(*b->rhs)) return;
      const int tier = precedence(b->op);
      if (tier > best_tier) {
        best_tier = tier;
        best = at;
      }
    });
  }
  if (!best) {
    throw Error(ErrorCode::NonTerminating, "no applicable rule for " + print(root));
  }
  ExprPtr redex = node_at(root, *best);
  const Binary& b = *redex->as<Binary>();
  if (mode == Mode::Fraction && b.op == BinOp::Div && is_fraction_valued(*b.rhs)) {
    ExprPtr rewritten = make_expr(Binary{BinOp::Mul, b.lhs, reciprocal(*b.rhs)});
    return {replace_at(root, *best, rewritten), RuleId::FractionDivToMul};
  }

  NumberValue value;
  try {
    value = apply_op(b.op, literal_value(*b.lhs), literal_value(*b.rhs), mode);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::DivByZero) {
      throw Error(ErrorCode::DivByZero, "division by zero in " + print(*redex));
    }
    throw;
  }
  ExprPtr replaced = replace_and_fold(root, *best, result_node(value, b.op));

  // A bracket whose content just became a literal disappears in the same
  // step, unless that would put a negative number right after an operator.
  if (group_path) {
    ExprPtr group = node_at(replaced, *group_path);
    const Group* g = group->as<Group>();
    if (g != nullptr && is_operand_literal(*g->inner)) {
      const bool keep = is_negative_number(*g->inner) && !at_start(replaced, *group_path);
      if (!keep) replaced = replace_and_fold(replaced, *group_path, g->inner);
    }
  }

  if (auto f = replaced->as<FractionLit>(); f != nullptr && f->computed && !f->bare &&
                                             !needs_reduction(*f)) {
    replaced = make_expr(FractionLit{f->num, f->den, true, true});
  }
  return {replaced, RuleId::ReduceBinop};
}

}  // namespace detail

/// Applies exactly one rewrite, or returns nullopt when `e` is a final literal.
inline std::optional<Step> next_step(const ExprPtr& input, Mode mode) {
  ExprPtr e = detail::strip_markers(input);
  if (auto r = detail::sign_normalize(e)) return Step{*r, RuleId::SignNormalize};
  if (auto r = detail::convert_first_percent(e)) return Step{*r, RuleId::PercentToDecimal};
  if (auto r = detail::reduce_first_computed(e)) return Step{*r, RuleId::FractionReduce};
  if (detail::is_literal(*e)) return std::nullopt;
  detail::Path focus;
  std::optional<detail::Path> group_path;
  if (detail::find_focus(e, focus)) group_path = std::move(focus);
  return detail::reduce_in_focus(e, group_path, mode);
}

/// Maximum trace length (number of snapshots) accepted for an expression.
inline std::size_t trace_bound(const Expr& e) {
  return 4 * static_cast<std::size_t>(count_atomic_ops(e)) + 4;
}

/// Recursive evaluation with the same numeric semantics as the step engine.
inline NumberValue direct_eval(const Expr& e, Mode mode) {
  return std::visit(
      [&](const auto& n) -> NumberValue {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          return n.percent ? percent_to_decimal(n.value) : n.value;
        } else if constexpr (std::is_same_v<T, FractionLit>) {
          return NumberValue(Fraction(n.num, n.den));
        } else if constexpr (std::is_same_v<T, Unary>) {
          NumberValue v = direct_eval(*n.operand, mode);
          return n.sign == '-' ? negate(v) : v;
        } else if constexpr (std::is_same_v<T, Binary>) {
          NumberValue a = direct_eval(*n.lhs, mode);
          NumberValue b = direct_eval(*n.rhs, mode);
          try {
            return detail::apply_op(n.op, a, b, mode);
          } catch (const Error& err) {
            if (err.code() == ErrorCode::DivByZero) {
              throw Error(ErrorCode::DivByZero, "division by zero in " + print(e));
            }
            throw;
          }
        } else {
          return direct_eval(*n.inner, mode);
        }
      },
      e.node);
}
inline NumberValue direct_eval(const ExprPtr& e, Mode mode) { return direct_eval(*e, mode); }

/// Rewrites to a literal, one rule per snapshot.
inline StepTrace trace(const ExprPtr& e, Mode mode) {
  StepTrace t;
  t.original = e;
  t.snapshots.push_back(e);
  const std::size_t bound = trace_bound(*e);
  for (;;) {
    std::optional<Step> step;
    try {
      step = next_step(t.snapshots.back(), mode);
    } catch (const Error& err) {
      if (err.is_math_error()) throw Error(err.code(), err.detail(), t.rules.size());
      throw;
    }
    if (!step) break;
    t.snapshots.push_back(step->expr);
    t.rules.push_back(step->rule);
    if (t.snapshots.size() > bound) {
      throw Error(ErrorCode::NonTerminating,
                  "trace exceeded " + std::to_string(bound) + " snapshots for " + print(e),
                  t.rules.size());
    }
  }
  t.final = detail::literal_value(*t.snapshots.back());
  return t;
}

inline std::string render_trace(const StepTrace& t) {
  std::string out;
  for (std::size_t i = 0; i < t.snapshots.size(); ++i) {
    if (i > 0) out += '=';
    out += print(*t.snapshots[i]);
  }
  return out;
}

/// Parses and traces, then renders the line.
inline std::string trace_text(std::string_view src, Mode mode = Mode::Standard) {
  return render_trace(trace(parse(src, mode), mode));
}

}  // namespace stepwise
