#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "jafun/heap.hpp"
#include "jafun/program.hpp"
#include "jafun/syntax.hpp"

namespace jafun {

/// The twenty reduction rule labels.
enum class RuleName {
    Newk,
    Letin,
    Letgo,
    Ifeq,
    Ifneq,
    Mthdnpe,
    Mthd,
    Mthdret,
    Assignnpe,
    Assignev,
    Varnpe,
    Var,
    Thrownull,
    Throw,
    Ctchin,
    Ctchnrml,
    Ctchexok,
    Letex,
    Methodex,
    Ctchexnok,
};

inline constexpr std::array<RuleName, 20> kAllRules = {
    RuleName::Newk,    RuleName::Letin,     RuleName::Letgo,    RuleName::Ifeq,
    RuleName::Ifneq,   RuleName::Mthdnpe,   RuleName::Mthd,     RuleName::Mthdret,
    RuleName::Assignnpe, RuleName::Assignev, RuleName::Varnpe,  RuleName::Var,
    RuleName::Thrownull, RuleName::Throw,   RuleName::Ctchin,   RuleName::Ctchnrml,
    RuleName::Ctchexok, RuleName::Letex,    RuleName::Methodex, RuleName::Ctchexnok,
};

const char* rule_label(RuleName r);

/// Replaces free occurrences of the binder (a Var or This value) by the
/// location. Does not descend into subterms whose binder shadows the
/// name; substituted values are closed, so no capture can occur.
ExprPtr subst(const ExprPtr& e, const Value& binder, const Loc& l);

/// Builds the frame pushed by a method call: looks up the method on the
/// runtime class of the receiver, checks arity, substitutes `this` and
/// the parameters. Any lookup failure or arity mismatch -> nullopt.
std::optional<Frame> get_invoke_body(const Program& p,
                                     const std::optional<std::string>& runtime_cls,
                                     std::size_t recv_loc, const std::string& method,
                                     const std::vector<Value>& args);

struct Step {
    Heap heap;
    FrameStack stack;
    RuleName rule;
};

/// One small step, with the rules matched in the order they are usually
/// stated: construction rules first, context/value rules afterwards.
/// nullopt covers both final configurations and genuinely stuck states.
std::optional<Step> red(const Program& p, const Heap& h, const FrameStack& fs);

/// Extensionally identical to red; dispatches first on the execution
/// mode and redex constructor, and inspects the context only when the
/// redex is a value.
std::optional<Step> red2(const Program& p, const Heap& h, const FrameStack& fs);

/// Non-empty, and every non-top frame is a normal-mode method call whose
/// receiver and arguments are all location values.
bool well_formed_framestack(const FrameStack& fs);

struct TraceEvent {
    std::size_t step = 0;
    RuleName rule = RuleName::Newk;
    std::size_t stack_depth = 0;
    std::size_t heap_size = 0;
    ExecMode mode;
    std::optional<std::size_t> gamma_size;  // typed runs only
};

/// One JSON object per line, keys in fixed order.
std::string trace_event_json(const TraceEvent& ev);

struct Outcome {
    enum class Kind { Normal, Uncaught, Stuck, OutOfFuel };
    Kind kind = Kind::Stuck;
    Loc loc;           // Normal / Uncaught
    std::string cls;   // Uncaught exception class
    Heap heap;
    FrameStack stack;  // Stuck / OutOfFuel
    std::size_t steps = 0;
};

std::string to_string(Outcome::Kind k);

enum class UntypedEngine { Red, Red2 };

struct RunResult {
    Outcome outcome;
    std::vector<TraceEvent> trace;
};

/// Iterates the chosen engine until a final configuration, stuckness or
/// fuel exhaustion, recording one trace event per step.
RunResult run(const Program& p, Heap h, FrameStack fs, std::size_t fuel,
              UntypedEngine engine);

}  // namespace jafun
