#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "jafun/program.hpp"
#include "jafun/syntax.hpp"

namespace jafun {

/// Permission weakening order: RWR below RD below ATM. Weakening is
/// always allowed; the sealed mode is weakest.
bool mode_leq(AccessMode a, AccessMode b);
AccessMode mode_join(AccessMode a, AccessMode b);

/// Componentwise: subtyping on the class part, mode_leq on the mode part.
bool acid_leq(const Program& p, const ACId& a, const ACId& b);

/// Least upper bound: least common superclass (Bottom is the identity,
/// Object the top) paired with the mode join.
ACId acid_join(const Program& p, const ACId& a, const ACId& b);

enum class TypeReason {
    UnboundVar,
    ModeViolation,
    ClassMismatch,
    NoSuchField,
    NoSuchMethod,
    UncoveredThrow,
    AtmFollowed,
    WriteWithoutRwr,
    ArityMismatch,
    UnverifiedCall,
};

std::string to_string(TypeReason r);

struct TypeError {
    std::string path;
    std::optional<ACId> expected;
    std::optional<ACId> found;
    TypeReason reason = TypeReason::ClassMismatch;
    bool operator==(const TypeError&) const = default;
};

std::string to_string(const TypeError& e);

/// Typing environment: keys are Var/This/Loc values, unique, never Null.
class Env {
public:
    std::optional<ACId> find(const Value& key) const;
    bool contains(const Value& key) const { return find(key).has_value(); }

    /// Insert-or-replace.
    Env with(const Value& key, const ACId& type) const;
    /// Insert only when the key is absent; existing bindings win.
    Env with_if_absent(const Value& key, const ACId& type) const;

    std::size_t size() const { return bindings_.size(); }
    const std::vector<std::pair<Value, ACId>>& bindings() const { return bindings_; }

    bool operator==(const Env&) const = default;

private:
    std::vector<std::pair<Value, ACId>> bindings_;
};

/// Exception environment: the exceptions legal at the current point.
/// <NPE, atm> is implicitly a member of every ExEnv.
using ExEnv = std::vector<ACId>;

/// True when `thrown` is covered by some entry of xi or the implicit
/// <NPE, atm>. Mode coverage is skipped in class-only mode.
bool exenv_covers(const Program& p, const ExEnv& xi, const ACId& thrown, bool check_modes);

/// Runtime-faithful coverage of a raised exception. The enclosing catch
/// clauses (innermost last in `catches`) are scanned innermost-first:
/// the first clause whose class covers the thrown class is the one that
/// will catch, so its mode must cover too; a clause strictly below the
/// thrown class might catch a subclass value at assumptions the thrower
/// cannot meet, and rejects. Exceptions no clause can catch fall back to
/// the declared set `xi` plus the implicit <NPE, atm>.
bool throw_covered(const Program& p, const ExEnv& xi, const std::vector<ACId>& catches,
                   const ACId& thrown, bool check_modes);

using InferResult = std::variant<ACId, TypeError>;

/// Typing mode: source checking rejects forms whose only possible
/// outcome is an NPE (null receivers); runtime-frame checking types them
/// at Bottom, since substitution legitimately produces them mid-run.
enum class InferMode { Source, RuntimeFrame };

/// Syntax-directed type synthesis for the expression, in the context of
/// the given class and method declaration. Unannotated methods get
/// class-only checking (modes ignored). UnverifiedCall diagnostics are
/// appended to `warnings` when provided; they never fail inference.
InferResult infer(const Program& p, const ClassDecl& cls, const MethodDecl& mth,
                  const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                  std::vector<TypeError>* warnings = nullptr,
                  InferMode mode = InferMode::Source);

/// Checks every method body of every class against its declared
/// signature. The result mixes hard errors with UnverifiedCall warnings;
/// use is_warning to tell them apart.
std::vector<TypeError> check_program(const Program& p);

inline bool is_warning(const TypeError& e) { return e.reason == TypeReason::UnverifiedCall; }

}  // namespace jafun
