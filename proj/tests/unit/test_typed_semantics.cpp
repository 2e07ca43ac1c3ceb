#include "doctest.h"

#include <fstream>
#include <sstream>

#include "jafun/frontend.hpp"
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

Program dlist_program() { return parse_loaded(fixture("dlist.jf")); }

/// Heap with one all-null DList cell at location 1.
Heap one_cell_heap() {
    Heap h = init_heap();
    h.objects[1] = HeapObject{
        {{"prev", Loc::null()}, {"val", Loc::null()}, {"next", Loc::null()}}, "DList"};
    return h;
}

ACId acid(const std::string& cls, AccessMode m) { return ACId{ClassRef::named(cls), m}; }

/// A caller frame poised to invoke copy() on the cell at location 1.
TypedFrame copy_call_frame(const Program& p) {
    TypedFrame tf;
    tf.cdecl = *find_class(p, "DList");
    tf.mdecl = *method_lookup(p, "DList", "copy")->method;
    tf.xi = {};
    tf.gamma = Env{}
                   .with(Value::loc(1), acid("DList", AccessMode::RD))
                   .with(Value::loc(kNpeLoc), acid("NPE", AccessMode::ATM));
    tf.fr = Frame{{}, make_invoke(Value::loc(1), "copy", {}), ExecMode::normal()};
    tf.acid = acid("DList", AccessMode::RWR);
    return tf;
}

}  // namespace

TEST_CASE("erasure is a length-preserving projection") {
    CHECK(erase_types({}).empty());
    Program p = dlist_program();
    TypedFrame tf = copy_call_frame(p);
    FrameStack fs = erase_types({tf, tf});
    REQUIRE(fs.size() == 2);
    CHECK(fs[0] == tf.fr);
}

TEST_CASE("call_env binds the receiver at its runtime class and skips nulls") {
    Program p = dlist_program();
    const MethodDecl& appRec = *method_lookup(p, "DList", "appRec")->method;
    auto env = call_env(p, "DList", appRec, {Value::loc(3), Value::null()});
    REQUIRE(env.has_value());
    REQUIRE(env->size() == 2);
    CHECK(env->find(Value::loc(3)) == acid("DList", AccessMode::RD));
    CHECK(env->find(Value::loc(kNpeLoc)) == acid("NPE", AccessMode::ATM));

    // A non-null argument is bound at its declared parameter type.
    auto env2 = call_env(p, "DList", appRec, {Value::loc(3), Value::loc(4)});
    REQUIRE(env2.has_value());
    CHECK(env2->find(Value::loc(4)) == acid("DList", AccessMode::RWR));

    // The receiver type uses the runtime class, not the declaring class.
    Program sub = parse_loaded(fixture("dlist.jf") + "\nclass Longer ext DList { }\n");
    auto env3 = call_env(sub, "Longer", appRec, {Value::loc(3), Value::null()});
    CHECK(env3->find(Value::loc(3)) == acid("Longer", AccessMode::RD));

    CHECK_FALSE(call_env(p, "DList", appRec, {Value::loc(3)}).has_value());  // arity
    CHECK_FALSE(call_env(p, "DList", appRec, {Value::null(), Value::null()}).has_value());
}

TEST_CASE("frames built by start_typed are derivable") {
    Program p = dlist_program();
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    REQUIRE(st->stack.size() == 1);
    CHECK(frame_derivable(p, st->stack.front()));
    CHECK(frame_consistent_with_heap(p, st->heap, st->stack.front()));
    CHECK(stack_derivable(p, st->heap, st->stack));
    CHECK(well_formed_framestack(erase_types(st->stack)));
    CHECK(type_correct_heap(p, st->heap));
}

TEST_CASE("narrowing the target type breaks derivability") {
    Program p = dlist_program();
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    TypedFrame tf = st->stack.front();
    tf.acid = acid("NPE", AccessMode::RWR);
    CHECK_FALSE(frame_derivable(p, tf));
}

TEST_CASE("a location missing from Gamma breaks derivability") {
    Program p = dlist_program();
    TypedFrame tf = copy_call_frame(p);
    tf.gamma = Env{}.with(Value::loc(kNpeLoc), acid("NPE", AccessMode::ATM));
    CHECK_FALSE(frame_derivable(p, tf));  // receiver location unbound
}

TEST_CASE("heap consistency checks uniqueness, classes and the npe binding") {
    Program p = dlist_program();
    Heap h = init_heap();
    TypedFrame tf = copy_call_frame(p);
    tf.gamma = Env{}.with(Value::loc(kNpeLoc), acid("NPE", AccessMode::ATM));
    CHECK(frame_consistent_with_heap(p, h, tf));

    Heap withA = one_cell_heap();
    tf.gamma = Env{}
                   .with(Value::loc(kNpeLoc), acid("NPE", AccessMode::ATM))
                   .with(Value::loc(1), acid("NPE", AccessMode::ATM));
    CHECK_FALSE(frame_consistent_with_heap(p, withA, tf));  // DList not <=: NPE

    tf.gamma = Env{}.with(Value::loc(1), acid("DList", AccessMode::RD));
    CHECK_FALSE(frame_consistent_with_heap(p, withA, tf));  // npe binding absent
}

TEST_CASE("the typed call rule builds the paper-shaped frame") {
    Program p = dlist_program();
    Heap h = one_cell_heap();
    TypedFrameStack tfs = {copy_call_frame(p)};
    REQUIRE(stack_derivable(p, h, tfs));
    auto step = typed_red(p, h, tfs);
    REQUIRE(step.has_value());
    CHECK(step->rule == RuleName::Mthd);
    REQUIRE(step->stack.size() == 2);
    const TypedFrame& callee = step->stack.back();
    CHECK(callee.cdecl.name == "DList");
    CHECK(callee.mdecl.name == "copy");
    CHECK(callee.xi.empty());
    CHECK(callee.acid == acid("DList", AccessMode::RWR));
    CHECK(callee.gamma.find(Value::loc(1)) == acid("DList", AccessMode::RD));
    CHECK(callee.gamma.find(Value::loc(kNpeLoc)) == acid("NPE", AccessMode::ATM));
    CHECK(callee.gamma.size() == 2);
    CHECK(stack_derivable(p, step->heap, step->stack));
}

TEST_CASE("typed allocation extends Gamma by exactly one binding") {
    Program p = dlist_program();
    Heap h = init_heap();
    TypedFrame tf = copy_call_frame(p);
    tf.mdecl = *method_lookup(p, "DList", "singleton")->method;
    tf.fr = Frame{{}, make_new(AccessMode::RWR, "DList",
                               {Value::null(), Value::null(), Value::null()}),
                  ExecMode::normal()};
    tf.acid = acid("DList", AccessMode::RWR);
    auto step = typed_red(p, h, {tf});
    REQUIRE(step.has_value());
    CHECK(step->rule == RuleName::Newk);
    const TypedFrame& top = step->stack.back();
    CHECK(top.gamma.size() == tf.gamma.size() + 1);
    CHECK(top.gamma.find(Value::loc(1)) == acid("DList", AccessMode::RWR));
}

TEST_CASE("tampering with the callee target type breaks the stack predicate") {
    Program p = dlist_program();
    Heap h = one_cell_heap();
    auto step = typed_red(p, h, {copy_call_frame(p)});
    REQUIRE(step.has_value());
    TypedFrameStack stack = step->stack;
    REQUIRE(stack_derivable(p, step->heap, stack));
    stack.back().acid = acid("Object", AccessMode::RWR);  // != caller's return type
    CHECK_FALSE(stack_derivable(p, step->heap, stack));
}

TEST_CASE("an exceptional top frame must hold a mapped exception location") {
    Program p = dlist_program();
    Heap h = one_cell_heap();
    TypedFrame tf = copy_call_frame(p);
    tf.fr = Frame{{}, make_val(Value::null()), ExecMode::exceptional("NPE")};
    CHECK_FALSE(stack_derivable(p, h, {tf}));

    tf.fr = Frame{{}, make_val(Value::loc(kNpeLoc)), ExecMode::exceptional("NPE")};
    CHECK(stack_derivable(p, h, {tf}));
}

TEST_CASE("typed engines agree on examples and on the empty stack") {
    Program p = dlist_program();
    Heap h = one_cell_heap();
    CHECK_FALSE(typed_red(p, h, {}).has_value());
    CHECK_FALSE(typed_red2(p, h, {}).has_value());

    Heap cur = h;
    TypedFrameStack tfs = {copy_call_frame(p)};
    for (int i = 0; i < 200; ++i) {
        auto a = typed_red(p, cur, tfs);
        auto b = typed_red2(p, cur, tfs);
        REQUIRE(a.has_value() == b.has_value());
        if (!a) break;
        CHECK(a->heap == b->heap);
        CHECK(a->stack == b->stack);
        CHECK(a->rule == b->rule);
        cur = a->heap;
        tfs = a->stack;
    }
}

TEST_CASE("every typed step commutes with erasure along a full run") {
    Program p = dlist_program();
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    Heap h = st->heap;
    TypedFrameStack tfs = st->stack;
    std::size_t steps = 0;
    while (true) {
        auto tr = typed_red(p, h, tfs);
        if (!tr) break;
        auto ur = red(p, h, erase_types(tfs));
        REQUIRE(ur.has_value());
        CHECK(ur->heap == tr->heap);
        CHECK(ur->stack == erase_types(tr->stack));
        CHECK(ur->rule == tr->rule);
        h = tr->heap;
        tfs = tr->stack;
        ++steps;
        REQUIRE(steps < 5000);
    }
    CHECK(steps > 10);
}

TEST_CASE("start_typed rejects missing entries and parameterized entries") {
    Program p = dlist_program();
    CHECK_FALSE(start_typed(p, "Main", "nosuch").has_value());
    CHECK_FALSE(start_typed(p, "Nowhere", "main").has_value());
    CHECK_FALSE(start_typed(p, "DList", "appRec").has_value());  // has a parameter
    CHECK(start_typed(p, "DList", "copy").has_value());
}

TEST_CASE("typed runs report the same outcome as untyped runs") {
    Program p = dlist_program();
    auto st = start_typed(p, "Main", "main");
    REQUIRE(st.has_value());
    RunResult typed = run_typed(p, st->heap, st->stack, 5000, TypedEngine::TypedRed);
    RunResult untyped = run(p, st->heap, erase_types(st->stack), 5000, UntypedEngine::Red);
    CHECK(typed.outcome.kind == Outcome::Kind::Normal);
    CHECK(typed.outcome.kind == untyped.outcome.kind);
    CHECK(typed.outcome.loc == untyped.outcome.loc);
    CHECK(typed.outcome.heap == untyped.outcome.heap);
    CHECK(typed.outcome.steps == untyped.outcome.steps);
    REQUIRE_FALSE(typed.trace.empty());
    CHECK(typed.trace.front().gamma_size.has_value());
}
