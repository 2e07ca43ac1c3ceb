#include "doctest.h"

#include <fstream>
#include <set>
#include <sstream>

#include "jafun/frontend.hpp"
#include "jafun/semantics.hpp"
#include "jafun/typed_semantics.hpp"

using namespace jafun;

namespace {

Program parse_loaded(const std::string& src) {
    ParseResult r = parse_program(src);
    REQUIRE(std::holds_alternative<Program>(r));
    return load(std::get<Program>(r));
}

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(JAFUN_PROGRAMS_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Independent free-variable computation, used as the substitution oracle.
void free_vars(const ExprPtr& e, std::set<std::string>& out) {
    auto addValue = [&](const Value& v) {
        if (v.kind() == Value::Kind::Var) out.insert(v.name());
    };
    switch (e->kind) {
    case Expr::Kind::New:
        for (const Value& v : e->args) addValue(v);
        break;
    case Expr::Kind::Let: {
        free_vars(e->sub1, out);
        std::set<std::string> body;
        free_vars(e->sub2, body);
        body.erase(e->var);
        out.insert(body.begin(), body.end());
        break;
    }
    case Expr::Kind::FieldRead: addValue(e->recv); break;
    case Expr::Kind::FieldWrite:
        addValue(e->recv);
        addValue(e->val);
        break;
    case Expr::Kind::If:
        addValue(e->val);
        addValue(e->val2);
        free_vars(e->sub1, out);
        free_vars(e->sub2, out);
        break;
    case Expr::Kind::Invoke:
        addValue(e->recv);
        for (const Value& v : e->args) addValue(v);
        break;
    case Expr::Kind::Val: addValue(e->val); break;
    case Expr::Kind::Throw: addValue(e->val); break;
    case Expr::Kind::TryCatch: {
        free_vars(e->sub1, out);
        std::set<std::string> handler;
        free_vars(e->sub2, handler);
        handler.erase(e->var);
        out.insert(handler.begin(), handler.end());
        break;
    }
    }
}

Frame frame(Ctx ctx, ExprPtr redex, ExecMode mode = ExecMode::normal()) {
    return Frame{std::move(ctx), std::move(redex), std::move(mode)};
}

}  // namespace

TEST_CASE("subst replaces free variable occurrences") {
    ExprPtr e = make_val(Value::var("x"));
    CHECK(expr_eq(subst(e, Value::var("x"), Loc::at(7)), make_val(Value::loc(7))));
    CHECK(expr_eq(subst(e, Value::var("x"), Loc::null()), make_val(Value::null())));
    CHECK(expr_eq(subst(e, Value::var("y"), Loc::at(7)), e));
}

TEST_CASE("subst respects shadowing in let bodies") {
    ExprPtr e = make_let("C", "x", make_val(Value::var("x")), make_val(Value::var("x")));
    ExprPtr result = subst(e, Value::var("x"), Loc::at(1));
    ExprPtr expected =
        make_let("C", "x", make_val(Value::loc(1)), make_val(Value::var("x")));
    CHECK(expr_eq(result, expected));
}

TEST_CASE("subst respects shadowing in catch handlers") {
    ExprPtr e = make_try(make_val(Value::var("x")), AccessMode::RWR, "C", "x",
                         make_val(Value::var("x")));
    ExprPtr result = subst(e, Value::var("x"), Loc::at(1));
    CHECK(expr_eq(result, make_try(make_val(Value::loc(1)), AccessMode::RWR, "C", "x",
                                   make_val(Value::var("x")))));
}

TEST_CASE("subst eliminates exactly the free occurrences") {
    ExprPtr e = make_let(
        "C", "y", make_invoke(Value::var("x"), "m", {Value::var("x"), Value::var("z")}),
        make_if(Value::var("x"), Value::var("y"), make_val(Value::var("x")),
                make_val(Value::var("z"))));
    std::set<std::string> before;
    free_vars(e, before);
    CHECK(before.count("x") == 1);
    std::set<std::string> after;
    free_vars(subst(e, Value::var("x"), Loc::at(3)), after);
    CHECK(after.count("x") == 0);
    CHECK(after.count("z") == 1);

    // Substituting a variable that is not free changes nothing.
    CHECK(expr_eq(subst(e, Value::var("notfree"), Loc::at(9)), e));
}

TEST_CASE("subst substitutes this and parameters in one pass per binder") {
    ExprPtr body = make_invoke(Value::this_ref(), "m", {Value::var("p"), Value::null()});
    ExprPtr afterThis = subst(body, Value::this_ref(), Loc::at(2));
    ExprPtr afterBoth = subst(afterThis, Value::var("p"), Loc::at(3));
    CHECK(expr_eq(afterBoth,
                  make_invoke(Value::loc(2), "m", {Value::loc(3), Value::null()})));
}

TEST_CASE("ifeq reduces to the then branch when locations agree") {
    Program p = load({});
    Heap h = init_heap();
    ExprPtr e1 = make_val(Value::var("a"));
    ExprPtr e2 = make_val(Value::var("b"));
    FrameStack fs = {frame({}, make_if(Value::null(), Value::null(), e1, e2))};
    auto s = red(p, h, fs);
    REQUIRE(s.has_value());
    CHECK(s->rule == RuleName::Ifeq);
    CHECK(expr_eq(s->stack.back().redex, e1));

    FrameStack fs2 = {frame({}, make_if(Value::loc(0), Value::null(), e1, e2))};
    auto s2 = red(p, h, fs2);
    REQUIRE(s2.has_value());
    CHECK(s2->rule == RuleName::Ifneq);
}

TEST_CASE("invoking on null dispatches the preallocated NPE") {
    Program p = load({});
    Heap h = init_heap();
    FrameStack fs = {frame({}, make_invoke(Value::null(), "m", {}))};
    auto s = red(p, h, fs);
    REQUIRE(s.has_value());
    CHECK(s->rule == RuleName::Mthdnpe);
    CHECK(s->heap == h);
    const Frame& top = s->stack.back();
    CHECK(expr_eq(top.redex, make_val(Value::loc(kNpeLoc))));
    CHECK(top.mode == ExecMode::exceptional("NPE"));
}

TEST_CASE("a lone value is final: no rule applies") {
    Program p = load({});
    Heap h = init_heap();
    FrameStack fs = {frame({}, make_val(Value::loc(0)))};
    CHECK_FALSE(red(p, h, fs).has_value());
    CHECK_FALSE(red2(p, h, fs).has_value());
    CHECK_FALSE(red(p, h, {}).has_value());
}

TEST_CASE("letgo pops the context node and substitutes") {
    Program p = load({});
    Heap h = init_heap();
    ExprPtr body = make_val(Value::var("x"));
    FrameStack fs = {frame({ctx_let("C", "x", body)}, make_val(Value::loc(1)))};
    auto s = red(p, h, fs);
    REQUIRE(s.has_value());
    CHECK(s->rule == RuleName::Letgo);
    CHECK(s->stack.back().ctx.empty());
    // Oracle: compose the substitution with the rule.
    CHECK(expr_eq(s->stack.back().redex, subst(body, Value::var("x"), Loc::at(1))));
}

TEST_CASE("well_formed_framestack accepts invoke-shaped lower frames only") {
    ExprPtr value = make_val(Value::loc(1));
    ExprPtr invoke = make_invoke(Value::loc(1), "m", {Value::null()});
    ExprPtr letRedex = make_let("C", "x", value, value);

    CHECK(well_formed_framestack({frame({}, letRedex)}));  // any single frame
    CHECK(well_formed_framestack({frame({}, invoke), frame({}, value)}));
    CHECK_FALSE(well_formed_framestack({frame({}, letRedex), frame({}, value)}));
    CHECK_FALSE(well_formed_framestack({}));
    // Non-top frames must be in normal mode.
    CHECK_FALSE(well_formed_framestack(
        {frame({}, invoke, ExecMode::exceptional("NPE")), frame({}, value)}));
    // Arguments must be location values.
    ExprPtr varArgs = make_invoke(Value::loc(1), "m", {Value::var("x")});
    CHECK_FALSE(well_formed_framestack({frame({}, varArgs), frame({}, value)}));
}

TEST_CASE("red is deterministic under double evaluation") {
    Program p = parse_loaded(fixture("allrules.jf"));
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    Heap h = st->heap;
    FrameStack fs = erase_types(st->stack);
    for (int i = 0; i < 50; ++i) {
        auto a = red(p, h, fs);
        auto b = red(p, h, fs);
        REQUIRE(a.has_value() == b.has_value());
        if (!a) break;
        CHECK(a->heap == b->heap);
        CHECK(a->stack == b->stack);
        CHECK(a->rule == b->rule);
        h = a->heap;
        fs = a->stack;
    }
}

TEST_CASE("running the singleton driver allocates a fresh cell") {
    Program p = parse_loaded(
        fixture("dlist.jf") +
        "\nclass Driver ext Object {\n"
        "  rwr DList rd main() {\n"
        "    let DList tmp = new rwr DList(null, null, null) in tmp.singleton(null)\n"
        "  }\n"
        "}\n");
    auto st = start_typed(p, "Driver", "main");
    REQUIRE(st.has_value());
    std::set<std::size_t> before;
    for (const auto& [k, v] : st->heap.objects) before.insert(k);
    RunResult r = run(p, st->heap, erase_types(st->stack), 1000, UntypedEngine::Red);
    REQUIRE(r.outcome.kind == Outcome::Kind::Normal);
    REQUIRE_FALSE(r.outcome.loc.is_null());
    CHECK(before.count(r.outcome.loc.index()) == 0);  // fresh DList object
    CHECK(get_class_name(r.outcome.heap, r.outcome.loc.index()) == "DList");
    REQUIRE_FALSE(r.trace.empty());
    CHECK(r.trace.front().rule == RuleName::Mthd);
    CHECK(r.trace.back().rule == RuleName::Mthdret);
}

TEST_CASE("a null field read escapes as an uncaught NPE with the hand-traced rules") {
    Program p = parse_loaded(fixture("npe.jf"));
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    RunResult r = run(p, st->heap, erase_types(st->stack), 1000, UntypedEngine::Red);
    REQUIRE(r.outcome.kind == Outcome::Kind::Uncaught);
    CHECK(r.outcome.cls == "NPE");
    CHECK(r.outcome.loc == Loc::at(kNpeLoc));
    REQUIRE(r.trace.size() == 3);
    CHECK(r.trace[0].rule == RuleName::Mthd);
    CHECK(r.trace[1].rule == RuleName::Varnpe);
    CHECK(r.trace[2].rule == RuleName::Methodex);
}

TEST_CASE("fuel zero on a non-final state reports out-of-fuel") {
    Program p = parse_loaded(fixture("npe.jf"));
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    RunResult r = run(p, st->heap, erase_types(st->stack), 0, UntypedEngine::Red);
    CHECK(r.outcome.kind == Outcome::Kind::OutOfFuel);

    // Fuel zero on a final state still classifies the result.
    FrameStack done = {frame({}, make_val(Value::null()))};
    RunResult r2 = run(p, init_heap(), done, 0, UntypedEngine::Red);
    CHECK(r2.outcome.kind == Outcome::Kind::Normal);
}

TEST_CASE("the all-rules fixture emits every rule label") {
    Program p = parse_loaded(fixture("allrules.jf"));
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    RunResult r = run(p, st->heap, erase_types(st->stack), 2000, UntypedEngine::Red);
    CHECK(r.outcome.kind == Outcome::Kind::Normal);
    std::set<RuleName> seen;
    for (const auto& ev : r.trace) seen.insert(ev.rule);
    for (RuleName rule : kAllRules) {
        INFO("missing rule ", rule_label(rule));
        CHECK(seen.count(rule) == 1);
    }
}

TEST_CASE("trace events serialize to the line format") {
    TraceEvent ev{3, RuleName::Letgo, 2, 4, ExecMode::normal(), std::nullopt};
    CHECK(trace_event_json(ev) ==
          "{\"step\":3,\"rule\":\"letgo\",\"stackDepth\":2,\"heapSize\":4,"
          "\"mode\":\"normal\"}");
    TraceEvent ex{1, RuleName::Mthdnpe, 1, 1, ExecMode::exceptional("NPE"), 5};
    CHECK(trace_event_json(ex) ==
          "{\"step\":1,\"rule\":\"mthdnpe\",\"stackDepth\":1,\"heapSize\":1,"
          "\"mode\":\"NPE\",\"gammaSize\":5}");
}

TEST_CASE("stack shape, exception locality and heap domain are preserved stepwise") {
    Program p = parse_loaded(fixture("allrules.jf"));
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    Heap h = st->heap;
    FrameStack fs = erase_types(st->stack);
    while (true) {
        bool wfBefore = well_formed_framestack(fs);
        auto s = red(p, h, fs);
        if (!s) break;
        if (wfBefore) CHECK(well_formed_framestack(s->stack));
        for (std::size_t i = 0; i + 1 < s->stack.size(); ++i)
            CHECK(s->stack[i].mode.is_normal());
        for (const auto& [k, obj] : h.objects) CHECK(s->heap.objects.count(k) == 1);
        h = s->heap;
        fs = s->stack;
    }
}
