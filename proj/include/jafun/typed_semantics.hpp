#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jafun/heap.hpp"
#include "jafun/program.hpp"
#include "jafun/semantics.hpp"
#include "jafun/syntax.hpp"
#include "jafun/typesystem.hpp"

namespace jafun {

/// A frame enriched with full typing metadata: enclosing class and
/// method declarations, exception environment, typing environment, and
/// the target type of the plugged expression.
struct TypedFrame {
    ClassDecl cdecl;
    MethodDecl mdecl;
    ExEnv xi;
    Env gamma;
    Frame fr;
    ACId acid;

    bool operator==(const TypedFrame&) const = default;
};

/// Typed frame stack; back() is the topmost frame.
using TypedFrameStack = std::vector<TypedFrame>;

/// Type erasure: per-frame projection of fr, order preserved.
FrameStack erase_types(const TypedFrameStack& tfs);

/// Builds the callee environment for a method call: the receiver
/// location at (runtime class, receiver mode), each non-null argument
/// location at its declared parameter type, and the NPE location when
/// absent. Null arguments are skipped; first binding of a location wins.
std::optional<Env> call_env(const Program& p, const std::string& runtime_cls,
                            const MethodDecl& md, const std::vector<Value>& recv_and_args);

/// Frame derivability: the declarations are part of the program and the
/// plugged expression types below the target. For exceptional frames the
/// redex must be a location value and the dispatched class must be
/// handleable via Xi, the enclosing catch nodes, or the implicit NPE.
bool frame_derivable(const Program& p, const TypedFrame& tf);

/// Per-frame heap consistency: Gamma keys unique and non-null, every
/// bound location mapped with a heap class below its declared type, and
/// the NPE location present.
bool frame_consistent_with_heap(const Program& p, const Heap& h, const TypedFrame& tf);

/// Full stack predicate: every frame derivable and heap-consistent,
/// adjacent frames agree (caller redex is a call on a mapped receiver
/// whose lookup produced the callee metadata and target type), and an
/// exceptional top frame holds a mapped location of the dispatched class.
bool stack_derivable(const Program& p, const Heap& h, const TypedFrameStack& tfs);

struct TypedStep {
    Heap heap;
    TypedFrameStack stack;
    RuleName rule;
};

/// The frame/heap transformation of red applied to the top frame, with
/// typing metadata maintained per rule. Rules are matched in the order
/// they are usually stated.
std::optional<TypedStep> typed_red(const Program& p, const Heap& h,
                                   const TypedFrameStack& tfs);

/// Extensionally identical to typed_red; dispatch order as in red2.
std::optional<TypedStep> typed_red2(const Program& p, const Heap& h,
                                    const TypedFrameStack& tfs);

struct StartState {
    Heap heap;
    TypedFrameStack stack;
};

/// Initial configuration: the heap holds the NPE object plus one fresh
/// receiver of the entry class with all fields null; the stack is a
/// single typed frame invoking the zero-parameter entry method on it.
std::optional<StartState> start_typed(const Program& p, const std::string& entry_class,
                                      const std::string& entry_method);

enum class TypedEngine { TypedRed, TypedRed2 };

/// Typed run driver; trace events carry the top frame's Gamma size.
RunResult run_typed(const Program& p, Heap h, TypedFrameStack tfs, std::size_t fuel,
                    TypedEngine engine);

}  // namespace jafun
