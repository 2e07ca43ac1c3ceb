#include "jafun/typesystem.hpp"

#include <algorithm>

namespace jafun {

namespace {

int mode_rank(AccessMode m) {
    switch (m) {
    case AccessMode::RWR: return 0;
    case AccessMode::RD: return 1;
    case AccessMode::ATM: return 2;
    }
    return 0;
}

}  // namespace

bool mode_leq(AccessMode a, AccessMode b) { return mode_rank(a) <= mode_rank(b); }

AccessMode mode_join(AccessMode a, AccessMode b) { return mode_leq(a, b) ? b : a; }

bool acid_leq(const Program& p, const ACId& a, const ACId& b) {
    return subtype_leq(p, a.cls, b.cls) && mode_leq(a.mode, b.mode);
}

namespace {

std::vector<std::string> superclass_names(const Program& p, const std::string& cls) {
    std::vector<std::string> out;
    const ClassDecl* cur = find_class(p, cls);
    std::size_t bound = p.size() + 1;
    if (cur == nullptr) out.push_back(cls);
    while (cur != nullptr && bound-- > 0) {
        out.push_back(cur->name);
        if (!cur->extends) break;
        cur = find_class(p, *cur->extends);
    }
    return out;
}

}  // namespace

ACId acid_join(const Program& p, const ACId& a, const ACId& b) {
    AccessMode mode = mode_join(a.mode, b.mode);
    if (a.cls.is_bottom()) return ACId{b.cls, mode};
    if (b.cls.is_bottom()) return ACId{a.cls, mode};
    std::vector<std::string> aChain = superclass_names(p, a.cls.name());
    std::vector<std::string> bChain = superclass_names(p, b.cls.name());
    for (const std::string& candidate : bChain) {
        if (std::find(aChain.begin(), aChain.end(), candidate) != aChain.end())
            return ACId{ClassRef::named(candidate), mode};
    }
    return ACId{ClassRef::named(kObjectClass), mode};
}

std::string to_string(TypeReason r) {
    switch (r) {
    case TypeReason::UnboundVar: return "UnboundVar";
    case TypeReason::ModeViolation: return "ModeViolation";
    case TypeReason::ClassMismatch: return "ClassMismatch";
    case TypeReason::NoSuchField: return "NoSuchField";
    case TypeReason::NoSuchMethod: return "NoSuchMethod";
    case TypeReason::UncoveredThrow: return "UncoveredThrow";
    case TypeReason::AtmFollowed: return "AtmFollowed";
    case TypeReason::WriteWithoutRwr: return "WriteWithoutRwr";
    case TypeReason::ArityMismatch: return "ArityMismatch";
    case TypeReason::UnverifiedCall: return "UnverifiedCall";
    }
    return "?";
}

std::string to_string(const TypeError& e) {
    std::string s = e.path + ": " + to_string(e.reason);
    s += ": expected " + (e.expected ? to_string(*e.expected) : std::string("-"));
    s += ", found " + (e.found ? to_string(*e.found) : std::string("-"));
    return s;
}

std::optional<ACId> Env::find(const Value& key) const {
    for (const auto& [k, t] : bindings_) {
        if (k == key) return t;
    }
    return std::nullopt;
}

Env Env::with(const Value& key, const ACId& type) const {
    Env out = *this;
    for (auto& [k, t] : out.bindings_) {
        if (k == key) {
            t = type;
            return out;
        }
    }
    out.bindings_.emplace_back(key, type);
    return out;
}

Env Env::with_if_absent(const Value& key, const ACId& type) const {
    if (contains(key)) return *this;
    Env out = *this;
    out.bindings_.emplace_back(key, type);
    return out;
}

bool exenv_covers(const Program& p, const ExEnv& xi, const ACId& thrown, bool check_modes) {
    auto covers = [&](const ACId& allowed) {
        if (!subtype_leq(p, thrown.cls, allowed.cls)) return false;
        return !check_modes || mode_leq(thrown.mode, allowed.mode);
    };
    for (const ACId& allowed : xi) {
        if (covers(allowed)) return true;
    }
    return covers(ACId{ClassRef::named(kNpeClass), AccessMode::ATM});
}

bool throw_covered(const Program& p, const ExEnv& xi, const std::vector<ACId>& catches,
                   const ACId& thrown, bool check_modes) {
    for (auto it = catches.rbegin(); it != catches.rend(); ++it) {
        if (subtype_leq(p, thrown.cls, it->cls)) {
            // This is the clause that will catch the exception.
            return !check_modes || mode_leq(thrown.mode, it->mode);
        }
        if (subtype_leq(p, it->cls, thrown.cls)) return false;
    }
    return exenv_covers(p, xi, thrown, check_modes);
}

namespace {

/// Recursive checker; carries the enclosing declaration context, the
/// expression path for diagnostics, the class-only flag for unannotated
/// methods, and the stack of enclosing catch clauses (innermost last).
class Checker {
public:
    Checker(const Program& p, const ClassDecl& cls, const MethodDecl& mth,
            std::vector<TypeError>* warnings, InferMode mode)
        : p_(p), cls_(cls), mth_(mth), warnings_(warnings), modes_on_(mth.annotated),
          runtime_(mode == InferMode::RuntimeFrame) {}

    InferResult infer_expr(const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                           const std::string& path) {
        switch (e->kind) {
        case Expr::Kind::Val: return value_type(gamma, e->val, path);
        case Expr::Kind::Let: return infer_let(xi, gamma, e, path);
        case Expr::Kind::New: return infer_new(gamma, e, path);
        case Expr::Kind::FieldRead: return infer_field_read(xi, gamma, e, path);
        case Expr::Kind::FieldWrite: return infer_field_write(xi, gamma, e, path);
        case Expr::Kind::If: return infer_if(xi, gamma, e, path);
        case Expr::Kind::Invoke: return infer_invoke(xi, gamma, e, path);
        case Expr::Kind::Throw: return infer_throw(xi, gamma, e, path);
        case Expr::Kind::TryCatch: return infer_try(xi, gamma, e, path);
        }
        return err(path, TypeReason::ClassMismatch, std::nullopt, std::nullopt);
    }

    /// acid_leq that ignores modes inside unannotated methods.
    bool fits(const ACId& a, const ACId& b) const {
        if (!modes_on_) return subtype_leq(p_, a.cls, b.cls);
        return acid_leq(p_, a, b);
    }

private:
    const Program& p_;
    const ClassDecl& cls_;
    const MethodDecl& mth_;
    std::vector<TypeError>* warnings_;
    bool modes_on_;
    bool runtime_;
    std::vector<ACId> catches_;  // enclosing catch clauses, innermost last

    static TypeError err(const std::string& path, TypeReason reason,
                         std::optional<ACId> expected, std::optional<ACId> found) {
        return TypeError{path, std::move(expected), std::move(found), reason};
    }

    InferResult value_type(const Env& gamma, const Value& v, const std::string& path) {
        if (v.kind() == Value::Kind::Null) return ACId{ClassRef::bottom(), AccessMode::RWR};
        if (auto t = gamma.find(v)) return *t;
        return err(path, TypeReason::UnboundVar, std::nullopt, std::nullopt);
    }

    /// A Var may hold null at run time; this/locations cannot.
    static bool maybe_null(const Value& v) {
        return v.kind() == Value::Kind::Var || v.kind() == Value::Kind::Null;
    }

    bool covered(const ExEnv& xi, const ACId& thrown, bool check_modes) const {
        return throw_covered(p_, xi, catches_, thrown, check_modes);
    }

    /// Operations with a possibly-null receiver can raise the implicit
    /// NPE; the surrounding handlers must be able to take it.
    std::optional<TypeError> check_npe_path(const ExEnv& xi, const Value& recv,
                                            const std::string& path) {
        if (!maybe_null(recv)) return std::nullopt;
        ACId npe{ClassRef::named(kNpeClass), AccessMode::ATM};
        if (covered(xi, npe, modes_on_)) return std::nullopt;
        return err(path, TypeReason::UncoveredThrow, std::nullopt, npe);
    }

    /// Reports a requirement failure as ModeViolation when only the mode
    /// part fails, ClassMismatch otherwise.
    TypeError fit_error(const std::string& path, const ACId& found, const ACId& expected) {
        TypeReason reason = subtype_leq(p_, found.cls, expected.cls)
                                ? TypeReason::ModeViolation
                                : TypeReason::ClassMismatch;
        return err(path, reason, expected, found);
    }

    InferResult infer_let(const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                          const std::string& path) {
        InferResult bound = infer_expr(xi, gamma, e->sub1, path + "/let.bound");
        if (std::holds_alternative<TypeError>(bound)) return bound;
        ACId t1 = std::get<ACId>(bound);
        ACId declared{ClassRef::named(e->cls), t1.mode};
        if (!fits(t1, declared)) return fit_error(path + "/let.bound", t1, declared);
        Env inner = gamma.with(Value::var(e->var), declared);
        return infer_expr(xi, inner, e->sub2, path + "/let.body");
    }

    InferResult infer_new(const Env& gamma, const ExprPtr& e, const std::string& path) {
        ACId result{ClassRef::named(e->cls), e->mode};
        auto fields = flds(p_, e->cls);
        if (!fields) return err(path, TypeReason::ClassMismatch, std::nullopt, result);
        if (fields->size() != e->args.size())
            return err(path, TypeReason::ArityMismatch, std::nullopt, result);
        for (std::size_t i = 0; i < e->args.size(); ++i) {
            InferResult arg = value_type(gamma, e->args[i], path + "/new.arg" +
                                                               std::to_string(i));
            if (std::holds_alternative<TypeError>(arg)) return arg;
            const FieldDecl& f = (*fields)[i];
            AccessMode required =
                f.fmode == FieldMode::REP ? e->mode : AccessMode::ATM;
            ACId want{ClassRef::named(f.cls), required};
            if (!fits(std::get<ACId>(arg), want))
                return fit_error(path + "/new.arg" + std::to_string(i),
                                 std::get<ACId>(arg), want);
        }
        return result;
    }

    /// Field lookup through a receiver type; rejects ATM receivers and
    /// Bottom receivers. On success yields the field declaration and the
    /// read type through this receiver.
    std::variant<std::pair<FieldDecl, ACId>, TypeError> field_through(
        const Env& gamma, const Value& recv, const std::string& member,
        const std::string& path) {
        InferResult rt = value_type(gamma, recv, path);
        if (std::holds_alternative<TypeError>(rt)) return std::get<TypeError>(rt);
        ACId recvType = std::get<ACId>(rt);
        if (recvType.cls.is_bottom())
            return err(path, TypeReason::NoSuchField, std::nullopt, recvType);
        if (modes_on_ && !mode_leq(recvType.mode, AccessMode::RD))
            return err(path, TypeReason::AtmFollowed, std::nullopt, recvType);
        auto fields = flds(p_, recvType.cls.name());
        if (!fields) return err(path, TypeReason::NoSuchField, std::nullopt, recvType);
        for (const FieldDecl& f : *fields) {
            if (f.name != member) continue;
            AccessMode mode =
                f.fmode == FieldMode::REP ? recvType.mode : AccessMode::ATM;
            return std::make_pair(f, ACId{ClassRef::named(f.cls), mode});
        }
        return err(path, TypeReason::NoSuchField, std::nullopt, recvType);
    }

    InferResult infer_field_read(const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                                 const std::string& path) {
        if (runtime_) {
            InferResult rt = value_type(gamma, e->recv, path + "/read");
            if (std::holds_alternative<TypeError>(rt)) return rt;
            if (std::get<ACId>(rt).cls.is_bottom()) {
                // Guaranteed NPE; the read never yields a value.
                if (auto npe = check_npe_path(xi, e->recv, path + "/read")) return *npe;
                return ACId{ClassRef::bottom(), AccessMode::RWR};
            }
        }
        auto r = field_through(gamma, e->recv, e->member, path + "/read");
        if (std::holds_alternative<TypeError>(r)) return std::get<TypeError>(r);
        if (auto npe = check_npe_path(xi, e->recv, path + "/read")) return *npe;
        return std::get<std::pair<FieldDecl, ACId>>(r).second;
    }

    InferResult infer_field_write(const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                                  const std::string& path) {
        InferResult rt = value_type(gamma, e->recv, path + "/write");
        if (std::holds_alternative<TypeError>(rt)) return rt;
        ACId recvType = std::get<ACId>(rt);
        InferResult vt = value_type(gamma, e->val, path + "/write.value");
        if (std::holds_alternative<TypeError>(vt)) return vt;
        ACId valType = std::get<ACId>(vt);
        if (runtime_ && recvType.cls.is_bottom()) {
            if (auto npe = check_npe_path(xi, e->recv, path + "/write")) return *npe;
            return ACId{ClassRef::bottom(), AccessMode::RWR};
        }
        if (modes_on_ && recvType.mode != AccessMode::RWR)
            return err(path + "/write", TypeReason::WriteWithoutRwr, std::nullopt, recvType);
        auto r = field_through(gamma, e->recv, e->member, path + "/write");
        if (std::holds_alternative<TypeError>(r)) return std::get<TypeError>(r);
        const auto& [field, readType] = std::get<std::pair<FieldDecl, ACId>>(r);
        AccessMode required =
            field.fmode == FieldMode::REP ? AccessMode::RWR : AccessMode::ATM;
        ACId want{ClassRef::named(field.cls), required};
        if (!fits(valType, want))
            return fit_error(path + "/write.value", valType, want);
        if (auto npe = check_npe_path(xi, e->recv, path + "/write")) return *npe;
        return readType;
    }

    InferResult infer_if(const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                         const std::string& path) {
        InferResult left = value_type(gamma, e->val, path + "/if.lhs");
        if (std::holds_alternative<TypeError>(left)) return left;
        InferResult right = value_type(gamma, e->val2, path + "/if.rhs");
        if (std::holds_alternative<TypeError>(right)) return right;
        InferResult thenType = infer_expr(xi, gamma, e->sub1, path + "/if.then");
        if (std::holds_alternative<TypeError>(thenType)) return thenType;
        InferResult elseType = infer_expr(xi, gamma, e->sub2, path + "/if.else");
        if (std::holds_alternative<TypeError>(elseType)) return elseType;
        return acid_join(p_, std::get<ACId>(thenType), std::get<ACId>(elseType));
    }

    InferResult infer_invoke(const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                             const std::string& path) {
        InferResult rt = value_type(gamma, e->recv, path + "/call");
        if (std::holds_alternative<TypeError>(rt)) return rt;
        ACId recvType = std::get<ACId>(rt);
        if (recvType.cls.is_bottom()) {
            if (!runtime_)
                return err(path + "/call", TypeReason::NoSuchMethod, std::nullopt, recvType);
            if (auto npe = check_npe_path(xi, e->recv, path + "/call")) return *npe;
            return ACId{ClassRef::bottom(), AccessMode::RWR};
        }
        auto found = method_lookup(p_, recvType.cls.name(), e->member);
        if (!found)
            return err(path + "/call", TypeReason::NoSuchMethod, std::nullopt, recvType);
        const MethodDecl& md = *found->method;
        if (warnings_ && mth_.annotated && !md.annotated)
            warnings_->push_back(err(path + "/call", TypeReason::UnverifiedCall,
                                     std::nullopt, recvType));
        // Calls into unannotated methods are exactly what UnverifiedCall
        // marks: their normalized modes carry no information, so only the
        // class parts are held against them.
        bool strict = modes_on_ && md.annotated;
        if (strict && !mode_leq(recvType.mode, md.recv_mode))
            return err(path + "/call", TypeReason::ModeViolation,
                       ACId{recvType.cls, md.recv_mode}, recvType);
        if (md.params.size() != e->args.size())
            return err(path + "/call", TypeReason::ArityMismatch, std::nullopt, recvType);
        for (std::size_t i = 0; i < e->args.size(); ++i) {
            std::string argPath = path + "/call.arg" + std::to_string(i);
            InferResult at = value_type(gamma, e->args[i], argPath);
            if (std::holds_alternative<TypeError>(at)) return at;
            ACId want{ClassRef::named(md.params[i].cls), md.params[i].mode};
            bool ok = strict ? acid_leq(p_, std::get<ACId>(at), want)
                             : subtype_leq(p_, std::get<ACId>(at).cls, want.cls);
            if (!ok) return fit_error(argPath, std::get<ACId>(at), want);
        }
        for (const ACId& thrown : throws_of(md)) {
            if (!covered(xi, thrown, strict))
                return err(path + "/call", TypeReason::UncoveredThrow, std::nullopt, thrown);
        }
        if (auto npe = check_npe_path(xi, e->recv, path + "/call")) return *npe;
        return ACId{ClassRef::named(md.ret_cls), md.ret_mode};
    }

    InferResult infer_throw(const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                            const std::string& path) {
        InferResult vt = value_type(gamma, e->val, path + "/throw");
        if (std::holds_alternative<TypeError>(vt)) return vt;
        ACId thrown = std::get<ACId>(vt);
        if (thrown.cls.is_bottom()) {
            // Throwing null raises the implicit NPE.
            ACId npe{ClassRef::named(kNpeClass), AccessMode::ATM};
            if (!covered(xi, npe, modes_on_))
                return err(path + "/throw", TypeReason::UncoveredThrow, std::nullopt, npe);
            return ACId{ClassRef::bottom(), AccessMode::RWR};
        }
        if (!covered(xi, thrown, modes_on_))
            return err(path + "/throw", TypeReason::UncoveredThrow, std::nullopt, thrown);
        // A variable operand may still hold null at run time.
        if (auto npe = check_npe_path(xi, e->val, path + "/throw")) return *npe;
        return ACId{ClassRef::bottom(), AccessMode::RWR};
    }

    InferResult infer_try(const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                          const std::string& path) {
        ACId caught{ClassRef::named(e->cls), e->mode};
        catches_.push_back(caught);
        InferResult bodyType = infer_expr(xi, gamma, e->sub1, path + "/try.body");
        catches_.pop_back();
        if (std::holds_alternative<TypeError>(bodyType)) return bodyType;
        Env handlerEnv = gamma.with(Value::var(e->var), caught);
        InferResult handlerType =
            infer_expr(xi, handlerEnv, e->sub2, path + "/try.handler");
        if (std::holds_alternative<TypeError>(handlerType)) return handlerType;
        return acid_join(p_, std::get<ACId>(bodyType), std::get<ACId>(handlerType));
    }
};

}  // namespace

InferResult infer(const Program& p, const ClassDecl& cls, const MethodDecl& mth,
                  const ExEnv& xi, const Env& gamma, const ExprPtr& e,
                  std::vector<TypeError>* warnings, InferMode mode) {
    Checker checker(p, cls, mth, warnings, mode);
    return checker.infer_expr(xi, gamma, e, "");
}

std::vector<TypeError> check_program(const Program& p) {
    std::vector<TypeError> out;
    for (const ClassDecl& c : p) {
        for (const MethodDecl& m : c.methods) {
            ExEnv xi = throws_of(m);
            Env gamma;
            gamma = gamma.with(Value::this_ref(),
                               ACId{ClassRef::named(c.name), m.recv_mode});
            for (const ParamDecl& par : m.params) {
                gamma = gamma.with(Value::var(par.name),
                                   ACId{ClassRef::named(par.cls), par.mode});
            }
            std::vector<TypeError> warnings;
            InferResult r = infer(p, c, m, xi, gamma, m.body, &warnings);
            std::string prefix = c.name + "." + m.name;
            for (TypeError& w : warnings) {
                w.path = prefix + w.path;
                out.push_back(std::move(w));
            }
            if (std::holds_alternative<TypeError>(r)) {
                TypeError e = std::get<TypeError>(r);
                e.path = prefix + e.path;
                out.push_back(std::move(e));
                continue;
            }
            ACId bodyType = std::get<ACId>(r);
            ACId declared{ClassRef::named(m.ret_cls), m.ret_mode};
            bool ok = m.annotated ? acid_leq(p, bodyType, declared)
                                  : subtype_leq(p, bodyType.cls, declared.cls);
            if (!ok) {
                TypeReason reason = subtype_leq(p, bodyType.cls, declared.cls)
                                        ? TypeReason::ModeViolation
                                        : TypeReason::ClassMismatch;
                out.push_back(TypeError{prefix + "/return", declared, bodyType, reason});
            }
        }
    }
    return out;
}

}  // namespace jafun
