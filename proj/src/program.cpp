#include "jafun/program.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace jafun {

std::string to_string(ViolationKind k) {
    switch (k) {
    case ViolationKind::DuplicateClass: return "DuplicateClass";
    case ViolationKind::MissingObject: return "MissingObject";
    case ViolationKind::MissingNPE: return "MissingNPE";
    case ViolationKind::UnknownSuper: return "UnknownSuper";
    case ViolationKind::ExtendsCycle: return "ExtendsCycle";
    case ViolationKind::ObjectHasSuper: return "ObjectHasSuper";
    case ViolationKind::DuplicateField: return "DuplicateField";
    case ViolationKind::DuplicateMethod: return "DuplicateMethod";
    case ViolationKind::BadOverride: return "BadOverride";
    case ViolationKind::UnknownClassInSig: return "UnknownClassInSig";
    }
    return "?";
}

std::string to_string(const Violation& v) {
    std::string s = to_string(v.kind) + ": " + v.subject;
    if (!v.detail.empty()) s += " (" + v.detail + ")";
    return s;
}

const ClassDecl* find_class(const Program& p, const std::string& name) {
    for (const ClassDecl& c : p) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

namespace {

/// Walks the extends chain from `cls` collecting visited declarations,
/// root last. Returns false when the chain does not terminate at a
/// class without a superclass within the class-count bound (i.e. a cycle
/// or a dangling extends).
bool ancestor_chain(const Program& p, const std::string& cls,
                    std::vector<const ClassDecl*>& out) {
    const ClassDecl* cur = find_class(p, cls);
    std::size_t bound = p.size() + 1;
    while (cur != nullptr && bound-- > 0) {
        out.push_back(cur);
        if (!cur->extends) return true;
        cur = find_class(p, *cur->extends);
    }
    return false;
}

bool same_signature(const MethodDecl& a, const MethodDecl& b) {
    if (a.ret_mode != b.ret_mode || a.ret_cls != b.ret_cls || a.recv_mode != b.recv_mode)
        return false;
    if (a.params.size() != b.params.size()) return false;
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        if (a.params[i].mode != b.params[i].mode || a.params[i].cls != b.params[i].cls)
            return false;
    }
    return a.throws_list == b.throws_list;
}

}  // namespace

std::vector<Violation> well_formed(const Program& p) {
    std::vector<Violation> out;
    auto report = [&](ViolationKind k, const std::string& subject, const std::string& detail) {
        out.push_back(Violation{k, subject, detail});
    };

    std::unordered_set<std::string> seen;
    for (const ClassDecl& c : p) {
        if (!seen.insert(c.name).second)
            report(ViolationKind::DuplicateClass, c.name, "class declared more than once");
    }
    if (find_class(p, kObjectClass) == nullptr)
        report(ViolationKind::MissingObject, kObjectClass, "predefined class missing");
    if (find_class(p, kNpeClass) == nullptr)
        report(ViolationKind::MissingNPE, kNpeClass, "predefined class missing");

    for (const ClassDecl& c : p) {
        if (c.name == kObjectClass) {
            if (c.extends)
                report(ViolationKind::ObjectHasSuper, c.name, "Object must not extend");
            continue;
        }
        if (!c.extends) {
            report(ViolationKind::UnknownSuper, c.name, "only Object may lack extends");
        } else if (find_class(p, *c.extends) == nullptr) {
            report(ViolationKind::UnknownSuper, c.name, "unknown superclass " + *c.extends);
        }
    }

    // Cycle detection: a chain that never reaches a root within the bound.
    for (const ClassDecl& c : p) {
        std::vector<const ClassDecl*> chain;
        if (!ancestor_chain(p, c.name, chain)) {
            bool dangling = !chain.empty() && chain.back()->extends &&
                            find_class(p, *chain.back()->extends) == nullptr;
            if (!dangling)
                report(ViolationKind::ExtendsCycle, c.name, "extends chain does not terminate");
        }
    }

    for (const ClassDecl& c : p) {
        std::unordered_set<std::string> fieldNames;
        for (const FieldDecl& f : c.fields) {
            if (!fieldNames.insert(f.name).second)
                report(ViolationKind::DuplicateField, c.name + "." + f.name,
                       "field declared more than once");
            if (find_class(p, f.cls) == nullptr)
                report(ViolationKind::UnknownClassInSig, c.name + "." + f.name,
                       "unknown field class " + f.cls);
        }
        // Shadowing an inherited field is a violation too.
        std::vector<const ClassDecl*> chain;
        if (c.extends && !ancestor_chain(p, *c.extends, chain)) chain.clear();
        {
            for (const ClassDecl* anc : chain) {
                for (const FieldDecl& f : anc->fields) {
                    if (fieldNames.count(f.name))
                        report(ViolationKind::DuplicateField, c.name + "." + f.name,
                               "shadows field of " + anc->name);
                }
            }
        }

        std::unordered_set<std::string> methodNames;
        for (const MethodDecl& m : c.methods) {
            if (!methodNames.insert(m.name).second)
                report(ViolationKind::DuplicateMethod, c.name + "." + m.name,
                       "method declared more than once");
            if (find_class(p, m.ret_cls) == nullptr)
                report(ViolationKind::UnknownClassInSig, c.name + "." + m.name,
                       "unknown return class " + m.ret_cls);
            for (const ParamDecl& par : m.params) {
                if (find_class(p, par.cls) == nullptr)
                    report(ViolationKind::UnknownClassInSig, c.name + "." + m.name,
                           "unknown parameter class " + par.cls);
            }
            for (const ThrowsDecl& t : m.throws_list) {
                if (find_class(p, t.cls) == nullptr)
                    report(ViolationKind::UnknownClassInSig, c.name + "." + m.name,
                           "unknown throws class " + t.cls);
            }
            // Overrides must repeat the overridden signature exactly.
            for (const ClassDecl* anc : chain) {
                for (const MethodDecl& base : anc->methods) {
                    if (base.name == m.name && !same_signature(base, m)) {
                        report(ViolationKind::BadOverride, c.name + "." + m.name,
                               "signature differs from " + anc->name + "." + base.name);
                    }
                }
            }
        }
    }
    return out;
}

bool subtype_leq(const Program& p, const ClassRef& c, const ClassRef& d) {
    if (c.is_bottom()) return true;
    if (d.is_bottom()) return false;
    if (c.name() == d.name()) return true;
    const ClassDecl* cur = find_class(p, c.name());
    std::size_t bound = p.size() + 1;
    while (cur != nullptr && cur->extends && bound-- > 0) {
        if (*cur->extends == d.name()) return true;
        cur = find_class(p, *cur->extends);
    }
    return false;
}

std::optional<std::vector<FieldDecl>> flds(const Program& p, const std::string& cls) {
    std::vector<const ClassDecl*> chain;
    if (find_class(p, cls) == nullptr) return std::nullopt;
    if (!ancestor_chain(p, cls, chain)) return std::nullopt;
    std::vector<FieldDecl> out;
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
        out.insert(out.end(), (*it)->fields.begin(), (*it)->fields.end());
    }
    return out;
}

std::optional<MethodLookup> method_lookup(const Program& p, const std::string& cls,
                                          const std::string& name) {
    const ClassDecl* cur = find_class(p, cls);
    std::size_t bound = p.size() + 1;
    while (cur != nullptr && bound-- > 0) {
        for (const MethodDecl& m : cur->methods) {
            if (m.name == name) return MethodLookup{cur, &m};
        }
        if (!cur->extends) return std::nullopt;
        cur = find_class(p, *cur->extends);
    }
    return std::nullopt;
}

std::vector<std::string> param_names(const MethodDecl& m) {
    std::vector<std::string> out;
    out.reserve(m.params.size());
    for (const ParamDecl& p : m.params) out.push_back(p.name);
    return out;
}

std::optional<ACId> return_type(const Program& p, const std::string& cls,
                                const std::string& name) {
    auto found = method_lookup(p, cls, name);
    if (!found) return std::nullopt;
    return ACId{ClassRef::named(found->method->ret_cls), found->method->ret_mode};
}

std::vector<ACId> throws_of(const MethodDecl& m) {
    std::vector<ACId> out;
    out.reserve(m.throws_list.size());
    for (const ThrowsDecl& t : m.throws_list)
        out.push_back(ACId{ClassRef::named(t.cls), t.mode});
    return out;
}

}  // namespace jafun
