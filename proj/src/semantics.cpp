#include "jafun/semantics.hpp"

#include <sstream>

namespace jafun {

const char* rule_label(RuleName r) {
    switch (r) {
    case RuleName::Newk: return "newk";
    case RuleName::Letin: return "letin";
    case RuleName::Letgo: return "letgo";
    case RuleName::Ifeq: return "ifeq";
    case RuleName::Ifneq: return "ifneq";
    case RuleName::Mthdnpe: return "mthdnpe";
    case RuleName::Mthd: return "mthd";
    case RuleName::Mthdret: return "mthdret";
    case RuleName::Assignnpe: return "assignnpe";
    case RuleName::Assignev: return "assignev";
    case RuleName::Varnpe: return "varnpe";
    case RuleName::Var: return "var";
    case RuleName::Thrownull: return "thrownull";
    case RuleName::Throw: return "throw";
    case RuleName::Ctchin: return "ctchin";
    case RuleName::Ctchnrml: return "ctchnrml";
    case RuleName::Ctchexok: return "ctchexok";
    case RuleName::Letex: return "letex";
    case RuleName::Methodex: return "methodex";
    case RuleName::Ctchexnok: return "ctchexnok";
    }
    return "?";
}

namespace {

Value subst_value(const Value& v, const Value& binder, const Loc& l) {
    return v == binder ? to_value(l) : v;
}

bool shadows(const Value& binder, const std::string& var) {
    return binder.kind() == Value::Kind::Var && binder.name() == var;
}

}  // namespace

ExprPtr subst(const ExprPtr& e, const Value& binder, const Loc& l) {
    switch (e->kind) {
    case Expr::Kind::New: {
        std::vector<Value> args;
        args.reserve(e->args.size());
        for (const Value& v : e->args) args.push_back(subst_value(v, binder, l));
        return make_new(e->mode, e->cls, std::move(args));
    }
    case Expr::Kind::Let: {
        ExprPtr bound = subst(e->sub1, binder, l);
        ExprPtr body = shadows(binder, e->var) ? e->sub2 : subst(e->sub2, binder, l);
        return make_let(e->cls, e->var, std::move(bound), std::move(body));
    }
    case Expr::Kind::FieldRead:
        return make_field_read(subst_value(e->recv, binder, l), e->member);
    case Expr::Kind::FieldWrite:
        return make_field_write(subst_value(e->recv, binder, l), e->member,
                                subst_value(e->val, binder, l));
    case Expr::Kind::If:
        return make_if(subst_value(e->val, binder, l), subst_value(e->val2, binder, l),
                       subst(e->sub1, binder, l), subst(e->sub2, binder, l));
    case Expr::Kind::Invoke: {
        std::vector<Value> args;
        args.reserve(e->args.size());
        for (const Value& v : e->args) args.push_back(subst_value(v, binder, l));
        return make_invoke(subst_value(e->recv, binder, l), e->member, std::move(args));
    }
    case Expr::Kind::Val:
        return make_val(subst_value(e->val, binder, l));
    case Expr::Kind::Throw:
        return make_throw(subst_value(e->val, binder, l));
    case Expr::Kind::TryCatch: {
        ExprPtr body = subst(e->sub1, binder, l);
        ExprPtr handler = shadows(binder, e->var) ? e->sub2 : subst(e->sub2, binder, l);
        return make_try(std::move(body), e->mode, e->cls, e->var, std::move(handler));
    }
    }
    return e;
}

std::optional<Frame> get_invoke_body(const Program& p,
                                     const std::optional<std::string>& runtime_cls,
                                     std::size_t recv_loc, const std::string& method,
                                     const std::vector<Value>& args) {
    if (!runtime_cls) return std::nullopt;
    auto found = method_lookup(p, *runtime_cls, method);
    if (!found) return std::nullopt;
    const MethodDecl& md = *found->method;
    if (md.params.size() != args.size()) return std::nullopt;
    for (const Value& v : args) {
        if (!v.is_location()) return std::nullopt;
    }
    ExprPtr body = subst(md.body, Value::this_ref(), Loc::at(recv_loc));
    for (std::size_t i = 0; i < args.size(); ++i) {
        body = subst(body, Value::var(md.params[i].name), *as_location(args[i]));
    }
    return Frame{{}, std::move(body), ExecMode::normal()};
}

namespace {

bool all_locations(const std::vector<Value>& vs) {
    for (const Value& v : vs) {
        if (!v.is_location()) return false;
    }
    return true;
}

Step make_step(Heap h, FrameStack fs, RuleName rule) {
    return Step{std::move(h), std::move(fs), rule};
}

/// Replaces the top frame of `fs` with `fr`.
FrameStack with_top(FrameStack fs, Frame fr) {
    fs.back() = std::move(fr);
    return fs;
}

Ctx pop_inner(const Ctx& ctx) { return Ctx(ctx.begin() + 1, ctx.end()); }

Ctx push_inner(const Ctx& ctx, CtxNode node) {
    Ctx out;
    out.reserve(ctx.size() + 1);
    out.push_back(std::move(node));
    out.insert(out.end(), ctx.begin(), ctx.end());
    return out;
}

// --- one attempt function per reduction rule; each checks its full pattern ---

std::optional<Step> try_newk(const Program& p, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::New) return std::nullopt;
    if (!all_locations(top.redex->args)) return std::nullopt;
    auto allocated = alloc(h, p, top.redex->cls);
    if (!allocated) return std::nullopt;
    auto fields = flds(p, top.redex->cls);
    if (!fields || fields->size() != top.redex->args.size()) return std::nullopt;
    HeapObject obj;
    obj.cls = top.redex->cls;
    for (std::size_t i = 0; i < fields->size(); ++i) {
        obj.fields[(*fields)[i].name] = *as_location(top.redex->args[i]);
    }
    Heap h2 = allocated->second;
    std::size_t l0 = allocated->first.index();
    h2.objects[l0] = std::move(obj);
    return make_step(std::move(h2),
                     with_top(fs, Frame{top.ctx, make_val(Value::loc(l0)), top.mode}),
                     RuleName::Newk);
}

std::optional<Step> try_letin(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::Let) return std::nullopt;
    Ctx ctx = push_inner(top.ctx, ctx_let(top.redex->cls, top.redex->var, top.redex->sub2));
    return make_step(h, with_top(fs, Frame{std::move(ctx), top.redex->sub1, top.mode}),
                     RuleName::Letin);
}

std::optional<Step> try_letgo(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::Val ||
        !top.redex->val.is_location())
        return std::nullopt;
    if (top.ctx.empty() || top.ctx.front().kind != CtxNode::Kind::Let) return std::nullopt;
    const CtxNode& node = top.ctx.front();
    ExprPtr next = subst(node.rest, Value::var(node.var), *as_location(top.redex->val));
    return make_step(h, with_top(fs, Frame{pop_inner(top.ctx), std::move(next), top.mode}),
                     RuleName::Letgo);
}

std::optional<Step> try_if(const Program&, const Heap& h, const FrameStack& fs, bool wantEq) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::If) return std::nullopt;
    if (!top.redex->val.is_location() || !top.redex->val2.is_location()) return std::nullopt;
    bool eq = top.redex->val == top.redex->val2;
    if (eq != wantEq) return std::nullopt;
    return make_step(h, with_top(fs, Frame{top.ctx, eq ? top.redex->sub1 : top.redex->sub2,
                                           top.mode}),
                     eq ? RuleName::Ifeq : RuleName::Ifneq);
}

std::optional<Step> try_mthdnpe(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::Invoke) return std::nullopt;
    if (top.redex->recv.kind() != Value::Kind::Null) return std::nullopt;
    return make_step(h,
                     with_top(fs, Frame{top.ctx, make_val(Value::loc(kNpeLoc)),
                                        ExecMode::exceptional(kNpeClass)}),
                     RuleName::Mthdnpe);
}

std::optional<Step> try_mthd(const Program& p, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::Invoke) return std::nullopt;
    if (top.redex->recv.kind() != Value::Kind::Loc) return std::nullopt;
    std::size_t n = top.redex->recv.loc_index();
    auto frame = get_invoke_body(p, get_class_name(h, n), n, top.redex->member,
                                 top.redex->args);
    if (!frame) return std::nullopt;
    FrameStack out = fs;
    out.push_back(std::move(*frame));
    return make_step(h, std::move(out), RuleName::Mthd);
}

std::optional<Step> try_mthdret(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::Val ||
        !top.redex->val.is_location() || !top.ctx.empty())
        return std::nullopt;
    if (fs.size() < 2) return std::nullopt;
    const Frame& below = fs[fs.size() - 2];
    if (!below.mode.is_normal() || below.redex->kind != Expr::Kind::Invoke)
        return std::nullopt;
    FrameStack out(fs.begin(), fs.end() - 1);
    out.back() = Frame{below.ctx, make_val(top.redex->val), below.mode};
    return make_step(h, std::move(out), RuleName::Mthdret);
}

std::optional<Step> try_assignnpe(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::FieldWrite)
        return std::nullopt;
    if (top.redex->recv.kind() != Value::Kind::Null || !top.redex->val.is_location())
        return std::nullopt;
    return make_step(h,
                     with_top(fs, Frame{top.ctx, make_val(Value::loc(kNpeLoc)),
                                        ExecMode::exceptional(kNpeClass)}),
                     RuleName::Assignnpe);
}

std::optional<Step> try_assignev(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::FieldWrite)
        return std::nullopt;
    if (top.redex->recv.kind() != Value::Kind::Loc || !top.redex->val.is_location())
        return std::nullopt;
    auto h2 = field_write(h, top.redex->recv.loc_index(), top.redex->member,
                          *as_location(top.redex->val));
    if (!h2) return std::nullopt;
    return make_step(std::move(*h2),
                     with_top(fs, Frame{top.ctx, make_val(top.redex->val), top.mode}),
                     RuleName::Assignev);
}

std::optional<Step> try_varnpe(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::FieldRead)
        return std::nullopt;
    if (top.redex->recv.kind() != Value::Kind::Null) return std::nullopt;
    return make_step(h,
                     with_top(fs, Frame{top.ctx, make_val(Value::loc(kNpeLoc)),
                                        ExecMode::exceptional(kNpeClass)}),
                     RuleName::Varnpe);
}

std::optional<Step> try_var(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::FieldRead)
        return std::nullopt;
    if (top.redex->recv.kind() != Value::Kind::Loc) return std::nullopt;
    auto l = field_read(h, top.redex->recv.loc_index(), top.redex->member);
    if (!l) return std::nullopt;
    return make_step(h, with_top(fs, Frame{top.ctx, make_val(to_value(*l)), top.mode}),
                     RuleName::Var);
}

std::optional<Step> try_thrownull(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::Throw) return std::nullopt;
    if (top.redex->val.kind() != Value::Kind::Null) return std::nullopt;
    return make_step(h,
                     with_top(fs, Frame{top.ctx, make_val(Value::loc(kNpeLoc)),
                                        ExecMode::exceptional(kNpeClass)}),
                     RuleName::Thrownull);
}

std::optional<Step> try_throw(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::Throw) return std::nullopt;
    if (top.redex->val.kind() != Value::Kind::Loc) return std::nullopt;
    auto cls = get_class_name(h, top.redex->val.loc_index());
    if (!cls) return std::nullopt;
    return make_step(
        h, with_top(fs, Frame{top.ctx, make_val(top.redex->val), ExecMode::exceptional(*cls)}),
        RuleName::Throw);
}

std::optional<Step> try_ctchin(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::TryCatch) return std::nullopt;
    Ctx ctx = push_inner(top.ctx, ctx_try(top.redex->mode, top.redex->cls, top.redex->var,
                                          top.redex->sub2));
    return make_step(h, with_top(fs, Frame{std::move(ctx), top.redex->sub1, top.mode}),
                     RuleName::Ctchin);
}

std::optional<Step> try_ctchnrml(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (!top.mode.is_normal() || top.redex->kind != Expr::Kind::Val ||
        !top.redex->val.is_location())
        return std::nullopt;
    if (top.ctx.empty() || top.ctx.front().kind != CtxNode::Kind::Try) return std::nullopt;
    return make_step(h, with_top(fs, Frame{pop_inner(top.ctx), top.redex, top.mode}),
                     RuleName::Ctchnrml);
}

std::optional<Step> try_ctchexok(const Program& p, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (top.mode.is_normal() || top.redex->kind != Expr::Kind::Val ||
        !top.redex->val.is_location())
        return std::nullopt;
    if (top.ctx.empty() || top.ctx.front().kind != CtxNode::Kind::Try) return std::nullopt;
    const CtxNode& node = top.ctx.front();
    if (!subtype_leq(p, ClassRef::named(top.mode.exception_class()),
                     ClassRef::named(node.cls)))
        return std::nullopt;
    ExprPtr handler = subst(node.rest, Value::var(node.var), *as_location(top.redex->val));
    return make_step(
        h, with_top(fs, Frame{pop_inner(top.ctx), std::move(handler), ExecMode::normal()}),
        RuleName::Ctchexok);
}

std::optional<Step> try_letex(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (top.mode.is_normal() || top.redex->kind != Expr::Kind::Val ||
        !top.redex->val.is_location())
        return std::nullopt;
    if (top.ctx.empty() || top.ctx.front().kind != CtxNode::Kind::Let) return std::nullopt;
    return make_step(h, with_top(fs, Frame{pop_inner(top.ctx), top.redex, top.mode}),
                     RuleName::Letex);
}

std::optional<Step> try_methodex(const Program&, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (top.mode.is_normal() || top.redex->kind != Expr::Kind::Val ||
        !top.redex->val.is_location() || !top.ctx.empty())
        return std::nullopt;
    if (fs.size() < 2) return std::nullopt;
    const Frame& below = fs[fs.size() - 2];
    if (!below.mode.is_normal() || below.redex->kind != Expr::Kind::Invoke)
        return std::nullopt;
    FrameStack out(fs.begin(), fs.end() - 1);
    out.back() = Frame{below.ctx, make_val(top.redex->val), top.mode};
    return make_step(h, std::move(out), RuleName::Methodex);
}

std::optional<Step> try_ctchexnok(const Program& p, const Heap& h, const FrameStack& fs) {
    const Frame& top = fs.back();
    if (top.mode.is_normal() || top.redex->kind != Expr::Kind::Val ||
        !top.redex->val.is_location())
        return std::nullopt;
    if (top.ctx.empty() || top.ctx.front().kind != CtxNode::Kind::Try) return std::nullopt;
    if (subtype_leq(p, ClassRef::named(top.mode.exception_class()),
                    ClassRef::named(top.ctx.front().cls)))
        return std::nullopt;
    return make_step(h, with_top(fs, Frame{pop_inner(top.ctx), top.redex, top.mode}),
                     RuleName::Ctchexnok);
}

}  // namespace

std::optional<Step> red(const Program& p, const Heap& h, const FrameStack& fs) {
    if (fs.empty()) return std::nullopt;
    if (auto s = try_newk(p, h, fs)) return s;
    if (auto s = try_letin(p, h, fs)) return s;
    if (auto s = try_letgo(p, h, fs)) return s;
    if (auto s = try_if(p, h, fs, true)) return s;
    if (auto s = try_if(p, h, fs, false)) return s;
    if (auto s = try_mthdnpe(p, h, fs)) return s;
    if (auto s = try_mthd(p, h, fs)) return s;
    if (auto s = try_mthdret(p, h, fs)) return s;
    if (auto s = try_assignnpe(p, h, fs)) return s;
    if (auto s = try_assignev(p, h, fs)) return s;
    if (auto s = try_varnpe(p, h, fs)) return s;
    if (auto s = try_var(p, h, fs)) return s;
    if (auto s = try_thrownull(p, h, fs)) return s;
    if (auto s = try_throw(p, h, fs)) return s;
    if (auto s = try_ctchin(p, h, fs)) return s;
    if (auto s = try_ctchnrml(p, h, fs)) return s;
    if (auto s = try_ctchexok(p, h, fs)) return s;
    if (auto s = try_letex(p, h, fs)) return s;
    if (auto s = try_methodex(p, h, fs)) return s;
    if (auto s = try_ctchexnok(p, h, fs)) return s;
    return std::nullopt;
}

std::optional<Step> red2(const Program& p, const Heap& h, const FrameStack& fs) {
    if (fs.empty()) return std::nullopt;
    const Frame& top = fs.back();
    if (!top.mode.is_normal()) {
        // Exception dispatch: only value redexes move, and the context
        // decides between letex, the two catch rules and methodex.
        if (top.redex->kind != Expr::Kind::Val || !top.redex->val.is_location())
            return std::nullopt;
        if (!top.ctx.empty()) {
            if (top.ctx.front().kind == CtxNode::Kind::Let) return try_letex(p, h, fs);
            if (auto s = try_ctchexok(p, h, fs)) return s;
            return try_ctchexnok(p, h, fs);
        }
        return try_methodex(p, h, fs);
    }
    switch (top.redex->kind) {
    case Expr::Kind::New: return try_newk(p, h, fs);
    case Expr::Kind::Let: return try_letin(p, h, fs);
    case Expr::Kind::If: {
        if (auto s = try_if(p, h, fs, true)) return s;
        return try_if(p, h, fs, false);
    }
    case Expr::Kind::Invoke:
        if (top.redex->recv.kind() == Value::Kind::Null) return try_mthdnpe(p, h, fs);
        return try_mthd(p, h, fs);
    case Expr::Kind::FieldWrite:
        if (top.redex->recv.kind() == Value::Kind::Null) return try_assignnpe(p, h, fs);
        return try_assignev(p, h, fs);
    case Expr::Kind::FieldRead:
        if (top.redex->recv.kind() == Value::Kind::Null) return try_varnpe(p, h, fs);
        return try_var(p, h, fs);
    case Expr::Kind::Throw:
        if (top.redex->val.kind() == Value::Kind::Null) return try_thrownull(p, h, fs);
        return try_throw(p, h, fs);
    case Expr::Kind::TryCatch: return try_ctchin(p, h, fs);
    case Expr::Kind::Val: {
        if (!top.redex->val.is_location()) return std::nullopt;
        if (!top.ctx.empty()) {
            if (top.ctx.front().kind == CtxNode::Kind::Let) return try_letgo(p, h, fs);
            return try_ctchnrml(p, h, fs);
        }
        return try_mthdret(p, h, fs);
    }
    }
    return std::nullopt;
}

bool well_formed_framestack(const FrameStack& fs) {
    if (fs.empty()) return false;
    for (std::size_t i = 0; i + 1 < fs.size(); ++i) {
        const Frame& fr = fs[i];
        if (!fr.mode.is_normal()) return false;
        if (fr.redex->kind != Expr::Kind::Invoke) return false;
        if (!fr.redex->recv.is_location()) return false;
        if (!all_locations(fr.redex->args)) return false;
    }
    return true;
}

std::string trace_event_json(const TraceEvent& ev) {
    std::ostringstream out;
    out << "{\"step\":" << ev.step << ",\"rule\":\"" << rule_label(ev.rule)
        << "\",\"stackDepth\":" << ev.stack_depth << ",\"heapSize\":" << ev.heap_size
        << ",\"mode\":\"" << (ev.mode.is_normal() ? "normal" : ev.mode.exception_class())
        << "\"";
    if (ev.gamma_size) out << ",\"gammaSize\":" << *ev.gamma_size;
    out << "}";
    return out.str();
}

std::string to_string(Outcome::Kind k) {
    switch (k) {
    case Outcome::Kind::Normal: return "normal";
    case Outcome::Kind::Uncaught: return "uncaught-exception";
    case Outcome::Kind::Stuck: return "stuck";
    case Outcome::Kind::OutOfFuel: return "out-of-fuel";
    }
    return "?";
}

namespace {

bool is_final_configuration(const FrameStack& fs) {
    if (fs.size() != 1) return false;
    const Frame& fr = fs.front();
    return fr.ctx.empty() && fr.redex->kind == Expr::Kind::Val && fr.redex->val.is_location();
}

Outcome classify_final(Heap h, const FrameStack& fs, std::size_t steps) {
    const Frame& fr = fs.front();
    Outcome out;
    out.loc = *as_location(fr.redex->val);
    out.heap = std::move(h);
    out.stack = fs;
    out.steps = steps;
    if (fr.mode.is_normal()) {
        out.kind = Outcome::Kind::Normal;
    } else {
        out.kind = Outcome::Kind::Uncaught;
        out.cls = fr.mode.exception_class();
    }
    return out;
}

}  // namespace

RunResult run(const Program& p, Heap h, FrameStack fs, std::size_t fuel,
              UntypedEngine engine) {
    RunResult result;
    std::size_t steps = 0;
    while (true) {
        if (is_final_configuration(fs)) {
            result.outcome = classify_final(std::move(h), fs, steps);
            return result;
        }
        if (steps == fuel) {
            result.outcome = Outcome{Outcome::Kind::OutOfFuel, Loc::null(), "", std::move(h),
                                     std::move(fs), steps};
            return result;
        }
        auto step = engine == UntypedEngine::Red ? red(p, h, fs) : red2(p, h, fs);
        if (!step) {
            result.outcome = Outcome{Outcome::Kind::Stuck, Loc::null(), "", std::move(h),
                                     std::move(fs), steps};
            return result;
        }
        h = std::move(step->heap);
        fs = std::move(step->stack);
        ++steps;
        result.trace.push_back(TraceEvent{steps, step->rule, fs.size(), h.objects.size(),
                                          fs.back().mode, std::nullopt});
    }
}

}  // namespace jafun
