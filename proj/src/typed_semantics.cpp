#include "jafun/typed_semantics.hpp"

#include <set>

namespace jafun {

FrameStack erase_types(const TypedFrameStack& tfs) {
    FrameStack out;
    out.reserve(tfs.size());
    for (const TypedFrame& tf : tfs) out.push_back(tf.fr);
    return out;
}

std::optional<Env> call_env(const Program&, const std::string& runtime_cls,
                            const MethodDecl& md, const std::vector<Value>& recv_and_args) {
    if (recv_and_args.size() != md.params.size() + 1) return std::nullopt;
    const Value& recv = recv_and_args.front();
    if (recv.kind() != Value::Kind::Loc) return std::nullopt;
    Env env;
    env = env.with_if_absent(recv, ACId{ClassRef::named(runtime_cls), md.recv_mode});
    for (std::size_t i = 0; i < md.params.size(); ++i) {
        const Value& arg = recv_and_args[i + 1];
        if (arg.kind() != Value::Kind::Loc) continue;  // null arguments are skipped
        env = env.with_if_absent(arg, ACId{ClassRef::named(md.params[i].cls),
                                           md.params[i].mode});
    }
    env = env.with_if_absent(Value::loc(kNpeLoc),
                             ACId{ClassRef::named(kNpeClass), AccessMode::ATM});
    return env;
}

namespace {

/// Class-only handleability of a dispatched exception: covered by Xi,
/// by an enclosing catch node, or by the implicit NPE entry.
bool exception_handleable(const Program& p, const ExEnv& xi, const Ctx& ctx,
                          const std::string& exc_cls) {
    ACId thrown{ClassRef::named(exc_cls), AccessMode::ATM};
    if (exenv_covers(p, xi, thrown, /*check_modes=*/false)) return true;
    for (const CtxNode& node : ctx) {
        if (node.kind == CtxNode::Kind::Try &&
            subtype_leq(p, thrown.cls, ClassRef::named(node.cls)))
            return true;
    }
    return false;
}

}  // namespace

bool frame_derivable(const Program& p, const TypedFrame& tf) {
    const ClassDecl* cd = find_class(p, tf.cdecl.name);
    if (cd == nullptr || !(*cd == tf.cdecl)) return false;
    auto found = method_lookup(p, tf.cdecl.name, tf.mdecl.name);
    if (!found || !(*found->method == tf.mdecl)) return false;
    if (tf.fr.mode.is_normal()) {
        InferResult r = infer(p, tf.cdecl, tf.mdecl, tf.xi, tf.gamma,
                              context_plug(tf.fr.ctx, tf.fr.redex));
        if (std::holds_alternative<TypeError>(r)) return false;
        const ACId& t = std::get<ACId>(r);
        return tf.mdecl.annotated ? acid_leq(p, t, tf.acid)
                                  : subtype_leq(p, t.cls, tf.acid.cls);
    }
    if (tf.fr.redex->kind != Expr::Kind::Val || !tf.fr.redex->val.is_location())
        return false;
    return exception_handleable(p, tf.xi, tf.fr.ctx, tf.fr.mode.exception_class());
}

bool frame_consistent_with_heap(const Program& p, const Heap& h, const TypedFrame& tf) {
    std::set<std::pair<int, std::string>> seen;
    bool npe_present = false;
    for (const auto& [key, type] : tf.gamma.bindings()) {
        if (key.kind() == Value::Kind::Null) return false;
        std::pair<int, std::string> id{static_cast<int>(key.kind()),
                                       key.kind() == Value::Kind::Loc
                                           ? std::to_string(key.loc_index())
                                           : key.name()};
        if (!seen.insert(id).second) return false;
        if (key.kind() != Value::Kind::Loc) continue;
        auto cls = get_class_name(h, key.loc_index());
        if (!cls) return false;
        if (!subtype_leq(p, ClassRef::named(*cls), type.cls)) return false;
        if (key.loc_index() == kNpeLoc && !type.cls.is_bottom() &&
            type.cls.name() == kNpeClass)
            npe_present = true;
    }
    return npe_present;
}

bool stack_derivable(const Program& p, const Heap& h, const TypedFrameStack& tfs) {
    for (const TypedFrame& tf : tfs) {
        if (!frame_derivable(p, tf)) return false;
        if (!frame_consistent_with_heap(p, h, tf)) return false;
    }
    // Pairwise caller/callee agreement for every non-top frame.
    for (std::size_t i = 0; i + 1 < tfs.size(); ++i) {
        const TypedFrame& caller = tfs[i];
        const TypedFrame& callee = tfs[i + 1];
        const ExprPtr& redex = caller.fr.redex;
        if (redex->kind != Expr::Kind::Invoke) return false;
        if (redex->recv.kind() != Value::Kind::Loc) return false;
        for (const Value& arg : redex->args) {
            if (!arg.is_location()) return false;
        }
        auto d0 = get_class_name(h, redex->recv.loc_index());
        if (!d0) return false;
        const ClassDecl* cd = find_class(p, *d0);
        auto found = method_lookup(p, *d0, redex->member);
        if (cd == nullptr || !found) return false;
        if (!(callee.cdecl == *cd)) return false;
        if (!(callee.mdecl == *found->method)) return false;
        if (callee.xi != throws_of(callee.mdecl)) return false;
        auto target = return_type(p, *d0, redex->member);
        if (!target || !(callee.acid == *target)) return false;
    }
    // An exceptional top frame must hold a mapped location of the
    // dispatched exception class.
    if (!tfs.empty()) {
        const TypedFrame& top = tfs.back();
        if (!top.fr.mode.is_normal()) {
            if (top.fr.redex->kind != Expr::Kind::Val ||
                top.fr.redex->val.kind() != Value::Kind::Loc)
                return false;
            auto cls = get_class_name(h, top.fr.redex->val.loc_index());
            if (!cls) return false;
            if (!subtype_leq(p, ClassRef::named(*cls),
                             ClassRef::named(top.fr.mode.exception_class())))
                return false;
        }
    }
    return true;
}

namespace {

TypedFrameStack with_top(TypedFrameStack tfs, TypedFrame tf) {
    tfs.back() = std::move(tf);
    return tfs;
}

Ctx pop_inner(const Ctx& ctx) { return Ctx(ctx.begin() + 1, ctx.end()); }

Ctx push_inner(const Ctx& ctx, CtxNode node) {
    Ctx out;
    out.reserve(ctx.size() + 1);
    out.push_back(std::move(node));
    out.insert(out.end(), ctx.begin(), ctx.end());
    return out;
}

bool all_locations(const std::vector<Value>& vs) {
    for (const Value& v : vs) {
        if (!v.is_location()) return false;
    }
    return true;
}

// --- typed rule attempts; frame/heap transformations mirror red ---

std::optional<TypedStep> t_newk(const Program& p, const Heap& h,
                                const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::New) return std::nullopt;
    if (!all_locations(fr.redex->args)) return std::nullopt;
    auto allocated = alloc(h, p, fr.redex->cls);
    if (!allocated) return std::nullopt;
    auto fields = flds(p, fr.redex->cls);
    if (!fields || fields->size() != fr.redex->args.size()) return std::nullopt;
    HeapObject obj;
    obj.cls = fr.redex->cls;
    for (std::size_t i = 0; i < fields->size(); ++i) {
        obj.fields[(*fields)[i].name] = *as_location(fr.redex->args[i]);
    }
    Heap h2 = allocated->second;
    std::size_t l0 = allocated->first.index();
    h2.objects[l0] = std::move(obj);
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, make_val(Value::loc(l0)), fr.mode};
    nf.gamma = top.gamma.with_if_absent(Value::loc(l0),
                                        ACId{ClassRef::named(fr.redex->cls), fr.redex->mode});
    return TypedStep{std::move(h2), with_top(tfs, std::move(nf)), RuleName::Newk};
}

std::optional<TypedStep> t_letin(const Program&, const Heap& h,
                                 const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Let) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{push_inner(fr.ctx, ctx_let(fr.redex->cls, fr.redex->var, fr.redex->sub2)),
                  fr.redex->sub1, fr.mode};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Letin};
}

std::optional<TypedStep> t_letgo(const Program&, const Heap& h,
                                 const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Val ||
        !fr.redex->val.is_location())
        return std::nullopt;
    if (fr.ctx.empty() || fr.ctx.front().kind != CtxNode::Kind::Let) return std::nullopt;
    const CtxNode& node = fr.ctx.front();
    TypedFrame nf = top;
    nf.fr = Frame{pop_inner(fr.ctx),
                  subst(node.rest, Value::var(node.var), *as_location(fr.redex->val)),
                  fr.mode};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Letgo};
}

std::optional<TypedStep> t_if(const Program&, const Heap& h, const TypedFrameStack& tfs,
                              bool wantEq) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::If) return std::nullopt;
    if (!fr.redex->val.is_location() || !fr.redex->val2.is_location()) return std::nullopt;
    bool eq = fr.redex->val == fr.redex->val2;
    if (eq != wantEq) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, eq ? fr.redex->sub1 : fr.redex->sub2, fr.mode};
    return TypedStep{h, with_top(tfs, std::move(nf)), eq ? RuleName::Ifeq : RuleName::Ifneq};
}

std::optional<TypedStep> t_mthdnpe(const Program&, const Heap& h,
                                   const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Invoke) return std::nullopt;
    if (fr.redex->recv.kind() != Value::Kind::Null) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, make_val(Value::loc(kNpeLoc)), ExecMode::exceptional(kNpeClass)};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Mthdnpe};
}

std::optional<TypedStep> t_mthd(const Program& p, const Heap& h,
                                const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Invoke) return std::nullopt;
    if (fr.redex->recv.kind() != Value::Kind::Loc) return std::nullopt;
    std::size_t n = fr.redex->recv.loc_index();
    auto d0 = get_class_name(h, n);
    if (!d0) return std::nullopt;
    auto body = get_invoke_body(p, d0, n, fr.redex->member, fr.redex->args);
    if (!body) return std::nullopt;
    const ClassDecl* cd = find_class(p, *d0);
    auto found = method_lookup(p, *d0, fr.redex->member);
    auto acid = return_type(p, *d0, fr.redex->member);
    if (cd == nullptr || !found || !acid) return std::nullopt;
    std::vector<Value> recv_and_args;
    recv_and_args.reserve(fr.redex->args.size() + 1);
    recv_and_args.push_back(fr.redex->recv);
    recv_and_args.insert(recv_and_args.end(), fr.redex->args.begin(), fr.redex->args.end());
    auto gamma = call_env(p, *d0, *found->method, recv_and_args);
    if (!gamma) return std::nullopt;
    TypedFrame nf;
    nf.cdecl = *cd;
    nf.mdecl = *found->method;
    nf.xi = throws_of(*found->method);
    nf.gamma = std::move(*gamma);
    nf.fr = std::move(*body);
    nf.acid = *acid;
    TypedFrameStack out = tfs;
    out.push_back(std::move(nf));
    return TypedStep{h, std::move(out), RuleName::Mthd};
}

std::optional<TypedStep> t_mthdret(const Program&, const Heap& h,
                                   const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Val ||
        !fr.redex->val.is_location() || !fr.ctx.empty())
        return std::nullopt;
    if (tfs.size() < 2) return std::nullopt;
    const TypedFrame& below = tfs[tfs.size() - 2];
    if (!below.fr.mode.is_normal() || below.fr.redex->kind != Expr::Kind::Invoke)
        return std::nullopt;
    TypedFrameStack out(tfs.begin(), tfs.end() - 1);
    TypedFrame& caller = out.back();
    caller.fr = Frame{below.fr.ctx, make_val(fr.redex->val), below.fr.mode};
    // A freshly returned location enters the caller's environment at the
    // callee's target type; existing bindings win.
    if (fr.redex->val.kind() == Value::Kind::Loc)
        caller.gamma = caller.gamma.with_if_absent(fr.redex->val, top.acid);
    return TypedStep{h, std::move(out), RuleName::Mthdret};
}

std::optional<TypedStep> t_assignnpe(const Program&, const Heap& h,
                                     const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::FieldWrite)
        return std::nullopt;
    if (fr.redex->recv.kind() != Value::Kind::Null || !fr.redex->val.is_location())
        return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, make_val(Value::loc(kNpeLoc)), ExecMode::exceptional(kNpeClass)};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Assignnpe};
}

std::optional<TypedStep> t_assignev(const Program&, const Heap& h,
                                    const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::FieldWrite)
        return std::nullopt;
    if (fr.redex->recv.kind() != Value::Kind::Loc || !fr.redex->val.is_location())
        return std::nullopt;
    auto h2 = field_write(h, fr.redex->recv.loc_index(), fr.redex->member,
                          *as_location(fr.redex->val));
    if (!h2) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, make_val(fr.redex->val), fr.mode};
    return TypedStep{std::move(*h2), with_top(tfs, std::move(nf)), RuleName::Assignev};
}

std::optional<TypedStep> t_varnpe(const Program&, const Heap& h,
                                  const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::FieldRead)
        return std::nullopt;
    if (fr.redex->recv.kind() != Value::Kind::Null) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, make_val(Value::loc(kNpeLoc)), ExecMode::exceptional(kNpeClass)};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Varnpe};
}

std::optional<TypedStep> t_var(const Program& p, const Heap& h,
                               const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::FieldRead)
        return std::nullopt;
    if (fr.redex->recv.kind() != Value::Kind::Loc) return std::nullopt;
    auto l = field_read(h, fr.redex->recv.loc_index(), fr.redex->member);
    if (!l) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, make_val(to_value(*l)), fr.mode};
    if (!l->is_null() && !top.gamma.contains(Value::loc(l->index()))) {
        // The read location is new to Gamma: bind it at the field-read
        // type computed from the receiver's Gamma entry.
        auto recvType = top.gamma.find(fr.redex->recv);
        if (!recvType || recvType->cls.is_bottom()) return std::nullopt;
        auto fields = flds(p, recvType->cls.name());
        if (!fields) return std::nullopt;
        const FieldDecl* field = nullptr;
        for (const FieldDecl& f : *fields) {
            if (f.name == fr.redex->member) {
                field = &f;
                break;
            }
        }
        if (field == nullptr) return std::nullopt;
        AccessMode mode =
            field->fmode == FieldMode::REP ? recvType->mode : AccessMode::ATM;
        nf.gamma = top.gamma.with_if_absent(Value::loc(l->index()),
                                            ACId{ClassRef::named(field->cls), mode});
    }
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Var};
}

std::optional<TypedStep> t_thrownull(const Program&, const Heap& h,
                                     const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Throw) return std::nullopt;
    if (fr.redex->val.kind() != Value::Kind::Null) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, make_val(Value::loc(kNpeLoc)), ExecMode::exceptional(kNpeClass)};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Thrownull};
}

std::optional<TypedStep> t_throw(const Program&, const Heap& h,
                                 const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Throw) return std::nullopt;
    if (fr.redex->val.kind() != Value::Kind::Loc) return std::nullopt;
    auto cls = get_class_name(h, fr.redex->val.loc_index());
    if (!cls) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{fr.ctx, make_val(fr.redex->val), ExecMode::exceptional(*cls)};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Throw};
}

std::optional<TypedStep> t_ctchin(const Program&, const Heap& h,
                                  const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::TryCatch) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{push_inner(fr.ctx, ctx_try(fr.redex->mode, fr.redex->cls, fr.redex->var,
                                             fr.redex->sub2)),
                  fr.redex->sub1, fr.mode};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Ctchin};
}

std::optional<TypedStep> t_ctchnrml(const Program&, const Heap& h,
                                    const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (!fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Val ||
        !fr.redex->val.is_location())
        return std::nullopt;
    if (fr.ctx.empty() || fr.ctx.front().kind != CtxNode::Kind::Try) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{pop_inner(fr.ctx), fr.redex, fr.mode};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Ctchnrml};
}

std::optional<TypedStep> t_ctchexok(const Program& p, const Heap& h,
                                    const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Val ||
        !fr.redex->val.is_location())
        return std::nullopt;
    if (fr.ctx.empty() || fr.ctx.front().kind != CtxNode::Kind::Try) return std::nullopt;
    const CtxNode& node = fr.ctx.front();
    if (!subtype_leq(p, ClassRef::named(fr.mode.exception_class()),
                     ClassRef::named(node.cls)))
        return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{pop_inner(fr.ctx),
                  subst(node.rest, Value::var(node.var), *as_location(fr.redex->val)),
                  ExecMode::normal()};
    if (fr.redex->val.kind() == Value::Kind::Loc)
        nf.gamma = top.gamma.with_if_absent(fr.redex->val,
                                            ACId{ClassRef::named(node.cls), node.mode});
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Ctchexok};
}

std::optional<TypedStep> t_letex(const Program&, const Heap& h,
                                 const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Val ||
        !fr.redex->val.is_location())
        return std::nullopt;
    if (fr.ctx.empty() || fr.ctx.front().kind != CtxNode::Kind::Let) return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{pop_inner(fr.ctx), fr.redex, fr.mode};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Letex};
}

std::optional<TypedStep> t_methodex(const Program&, const Heap& h,
                                    const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Val ||
        !fr.redex->val.is_location() || !fr.ctx.empty())
        return std::nullopt;
    if (tfs.size() < 2) return std::nullopt;
    const TypedFrame& below = tfs[tfs.size() - 2];
    if (!below.fr.mode.is_normal() || below.fr.redex->kind != Expr::Kind::Invoke)
        return std::nullopt;
    TypedFrameStack out(tfs.begin(), tfs.end() - 1);
    TypedFrame& caller = out.back();
    caller.fr = Frame{below.fr.ctx, make_val(fr.redex->val), fr.mode};
    return TypedStep{h, std::move(out), RuleName::Methodex};
}

std::optional<TypedStep> t_ctchexnok(const Program& p, const Heap& h,
                                     const TypedFrameStack& tfs) {
    const TypedFrame& top = tfs.back();
    const Frame& fr = top.fr;
    if (fr.mode.is_normal() || fr.redex->kind != Expr::Kind::Val ||
        !fr.redex->val.is_location())
        return std::nullopt;
    if (fr.ctx.empty() || fr.ctx.front().kind != CtxNode::Kind::Try) return std::nullopt;
    if (subtype_leq(p, ClassRef::named(fr.mode.exception_class()),
                    ClassRef::named(fr.ctx.front().cls)))
        return std::nullopt;
    TypedFrame nf = top;
    nf.fr = Frame{pop_inner(fr.ctx), fr.redex, fr.mode};
    return TypedStep{h, with_top(tfs, std::move(nf)), RuleName::Ctchexnok};
}

}  // namespace

std::optional<TypedStep> typed_red(const Program& p, const Heap& h,
                                   const TypedFrameStack& tfs) {
    if (tfs.empty()) return std::nullopt;
    if (auto s = t_newk(p, h, tfs)) return s;
    if (auto s = t_letin(p, h, tfs)) return s;
    if (auto s = t_letgo(p, h, tfs)) return s;
    if (auto s = t_if(p, h, tfs, true)) return s;
    if (auto s = t_if(p, h, tfs, false)) return s;
    if (auto s = t_mthdnpe(p, h, tfs)) return s;
    if (auto s = t_mthd(p, h, tfs)) return s;
    if (auto s = t_mthdret(p, h, tfs)) return s;
    if (auto s = t_assignnpe(p, h, tfs)) return s;
    if (auto s = t_assignev(p, h, tfs)) return s;
    if (auto s = t_varnpe(p, h, tfs)) return s;
    if (auto s = t_var(p, h, tfs)) return s;
    if (auto s = t_thrownull(p, h, tfs)) return s;
    if (auto s = t_throw(p, h, tfs)) return s;
    if (auto s = t_ctchin(p, h, tfs)) return s;
    if (auto s = t_ctchnrml(p, h, tfs)) return s;
    if (auto s = t_ctchexok(p, h, tfs)) return s;
    if (auto s = t_letex(p, h, tfs)) return s;
    if (auto s = t_methodex(p, h, tfs)) return s;
    if (auto s = t_ctchexnok(p, h, tfs)) return s;
    return std::nullopt;
}

std::optional<TypedStep> typed_red2(const Program& p, const Heap& h,
                                    const TypedFrameStack& tfs) {
    if (tfs.empty()) return std::nullopt;
    const Frame& fr = tfs.back().fr;
    if (!fr.mode.is_normal()) {
        if (fr.redex->kind != Expr::Kind::Val || !fr.redex->val.is_location())
            return std::nullopt;
        if (!fr.ctx.empty()) {
            if (fr.ctx.front().kind == CtxNode::Kind::Let) return t_letex(p, h, tfs);
            if (auto s = t_ctchexok(p, h, tfs)) return s;
            return t_ctchexnok(p, h, tfs);
        }
        return t_methodex(p, h, tfs);
    }
    switch (fr.redex->kind) {
    case Expr::Kind::New: return t_newk(p, h, tfs);
    case Expr::Kind::Let: return t_letin(p, h, tfs);
    case Expr::Kind::If: {
        if (auto s = t_if(p, h, tfs, true)) return s;
        return t_if(p, h, tfs, false);
    }
    case Expr::Kind::Invoke:
        if (fr.redex->recv.kind() == Value::Kind::Null) return t_mthdnpe(p, h, tfs);
        return t_mthd(p, h, tfs);
    case Expr::Kind::FieldWrite:
        if (fr.redex->recv.kind() == Value::Kind::Null) return t_assignnpe(p, h, tfs);
        return t_assignev(p, h, tfs);
    case Expr::Kind::FieldRead:
        if (fr.redex->recv.kind() == Value::Kind::Null) return t_varnpe(p, h, tfs);
        return t_var(p, h, tfs);
    case Expr::Kind::Throw:
        if (fr.redex->val.kind() == Value::Kind::Null) return t_thrownull(p, h, tfs);
        return t_throw(p, h, tfs);
    case Expr::Kind::TryCatch: return t_ctchin(p, h, tfs);
    case Expr::Kind::Val: {
        if (!fr.redex->val.is_location()) return std::nullopt;
        if (!fr.ctx.empty()) {
            if (fr.ctx.front().kind == CtxNode::Kind::Let) return t_letgo(p, h, tfs);
            return t_ctchnrml(p, h, tfs);
        }
        return t_mthdret(p, h, tfs);
    }
    }
    return std::nullopt;
}

std::optional<StartState> start_typed(const Program& p, const std::string& entry_class,
                                      const std::string& entry_method) {
    const ClassDecl* cd = find_class(p, entry_class);
    if (cd == nullptr) return std::nullopt;
    auto found = method_lookup(p, entry_class, entry_method);
    if (!found || !found->method->params.empty()) return std::nullopt;
    auto fields = flds(p, entry_class);
    if (!fields) return std::nullopt;
    auto acid = return_type(p, entry_class, entry_method);
    if (!acid) return std::nullopt;

    Heap h = init_heap();
    auto allocated = alloc(h, p, entry_class);
    if (!allocated) return std::nullopt;
    std::size_t l = allocated->first.index();
    HeapObject receiver;
    receiver.cls = entry_class;
    for (const FieldDecl& f : *fields) receiver.fields[f.name] = Loc::null();
    h.objects[l] = std::move(receiver);

    TypedFrame tf;
    tf.cdecl = *cd;
    tf.mdecl = *found->method;
    tf.xi = throws_of(tf.mdecl);
    tf.gamma = Env{}
                   .with(Value::loc(l), ACId{ClassRef::named(entry_class),
                                             found->method->recv_mode})
                   .with_if_absent(Value::loc(kNpeLoc),
                                   ACId{ClassRef::named(kNpeClass), AccessMode::ATM});
    tf.fr = Frame{{}, make_invoke(Value::loc(l), entry_method, {}), ExecMode::normal()};
    tf.acid = *acid;
    return StartState{std::move(h), {std::move(tf)}};
}

namespace {

bool typed_final(const TypedFrameStack& tfs) {
    if (tfs.size() != 1) return false;
    const Frame& fr = tfs.front().fr;
    return fr.ctx.empty() && fr.redex->kind == Expr::Kind::Val && fr.redex->val.is_location();
}

}  // namespace

RunResult run_typed(const Program& p, Heap h, TypedFrameStack tfs, std::size_t fuel,
                    TypedEngine engine) {
    RunResult result;
    std::size_t steps = 0;
    while (true) {
        if (typed_final(tfs)) {
            const Frame& fr = tfs.front().fr;
            Outcome out;
            out.loc = *as_location(fr.redex->val);
            out.heap = std::move(h);
            out.stack = erase_types(tfs);
            out.steps = steps;
            if (fr.mode.is_normal()) {
                out.kind = Outcome::Kind::Normal;
            } else {
                out.kind = Outcome::Kind::Uncaught;
                out.cls = fr.mode.exception_class();
            }
            result.outcome = std::move(out);
            return result;
        }
        if (steps == fuel) {
            result.outcome = Outcome{Outcome::Kind::OutOfFuel, Loc::null(), "", std::move(h),
                                     erase_types(tfs), steps};
            return result;
        }
        auto step = engine == TypedEngine::TypedRed ? typed_red(p, h, tfs)
                                                    : typed_red2(p, h, tfs);
        if (!step) {
            result.outcome = Outcome{Outcome::Kind::Stuck, Loc::null(), "", std::move(h),
                                     erase_types(tfs), steps};
            return result;
        }
        h = std::move(step->heap);
        tfs = std::move(step->stack);
        ++steps;
        result.trace.push_back(TraceEvent{steps, step->rule, tfs.size(), h.objects.size(),
                                          tfs.back().fr.mode, tfs.back().gamma.size()});
    }
}

}  // namespace jafun
