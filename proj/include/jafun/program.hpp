#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jafun/syntax.hpp"

namespace jafun {

enum class ViolationKind {
    DuplicateClass,
    MissingObject,
    MissingNPE,
    UnknownSuper,
    ExtendsCycle,
    ObjectHasSuper,
    DuplicateField,
    DuplicateMethod,
    BadOverride,
    UnknownClassInSig,
};

std::string to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string subject;
    std::string detail;
    bool operator==(const Violation&) const = default;
};

std::string to_string(const Violation& v);

/// Full well-formedness check; an empty result means the program is
/// well formed. All violations are reported, not just the first.
std::vector<Violation> well_formed(const Program& p);

/// First declaration with the given name, or null.
const ClassDecl* find_class(const Program& p, const std::string& name);

/// Reflexive-transitive subtyping along extends edges; Bottom is below
/// everything. Cycle-safe (walks are bounded by class count).
bool subtype_leq(const Program& p, const ClassRef& c, const ClassRef& d);

/// All fields of `cls` including inherited ones, base-class fields first.
/// This ordering defines constructor-argument order. Absent class -> nullopt.
std::optional<std::vector<FieldDecl>> flds(const Program& p, const std::string& cls);

struct MethodLookup {
    const ClassDecl* cls;
    const MethodDecl* method;
};

/// Dynamic-dispatch lookup: searches `cls`, then its ancestors, returning
/// the first class declaring `name` together with the declaration.
std::optional<MethodLookup> method_lookup(const Program& p, const std::string& cls,
                                          const std::string& name);

std::vector<std::string> param_names(const MethodDecl& m);

/// Return type of the method found from `cls`, as a (class, mode) pair.
std::optional<ACId> return_type(const Program& p, const std::string& cls,
                                const std::string& name);

/// Declared throws clause as ACIds.
std::vector<ACId> throws_of(const MethodDecl& m);

}  // namespace jafun
