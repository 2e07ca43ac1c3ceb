#include "doctest.h"

#include <random>

#include "jafun/syntax.hpp"

using namespace jafun;

namespace {

/// Grammar-style oracle: builds the nested term by structural recursion
/// over a tree-shaped context, outermost node first, and flattens the
/// same tree innermost-first for context_plug.
struct BCtxtTerm {
    std::vector<CtxNode> outermost_first;

    ExprPtr plug(ExprPtr e) const {
        ExprPtr out = std::move(e);
        for (auto it = outermost_first.rbegin(); it != outermost_first.rend(); ++it) {
            // innermost nodes wrap first
            if (it->kind == CtxNode::Kind::Let) {
                out = make_let(it->cls, it->var, std::move(out), it->rest);
            } else {
                out = make_try(std::move(out), it->mode, it->cls, it->var, it->rest);
            }
        }
        return out;
    }

    Ctx innermost_first() const {
        return Ctx(outermost_first.rbegin(), outermost_first.rend());
    }
};

Ctx concat(const Ctx& a, const Ctx& b) {
    Ctx out = a;
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

CtxNode random_node(std::mt19937_64& rng, int tag) {
    std::string name = "v" + std::to_string(tag);
    if (rng() % 2 == 0) return ctx_let("C" + std::to_string(tag), name, make_val(Value::null()));
    return ctx_try(AccessMode::RWR, "D" + std::to_string(tag), name,
                   make_val(Value::var(name)));
}

}  // namespace

TEST_CASE("context_plug on the empty context is the identity") {
    ExprPtr e = make_val(Value::null());
    CHECK(expr_eq(context_plug({}, e), e));
}

TEST_CASE("context_plug folds a single let node") {
    Ctx ctx = {ctx_let("C", "x", make_val(Value::var("x")))};
    ExprPtr plugged = context_plug(ctx, make_val(Value::null()));
    ExprPtr expected =
        make_let("C", "x", make_val(Value::null()), make_val(Value::var("x")));
    CHECK(expr_eq(plugged, expected));
}

TEST_CASE("context_plug applies the innermost node first") {
    ExprPtr e2 = make_val(Value::var("a"));
    ExprPtr e3 = make_val(Value::var("b"));
    ExprPtr e = make_val(Value::null());
    Ctx ctx = {ctx_let("C", "x", e2), ctx_try(AccessMode::RWR, "D", "y", e3)};
    ExprPtr expected = make_try(make_let("C", "x", e, e2), AccessMode::RWR, "D", "y", e3);
    CHECK(expr_eq(context_plug(ctx, e), expected));
}

TEST_CASE("context_plug matches the grammar-recursion oracle") {
    std::mt19937_64 rng(42);
    for (int round = 0; round < 200; ++round) {
        BCtxtTerm term;
        std::size_t depth = rng() % 5;
        for (std::size_t i = 0; i < depth; ++i)
            term.outermost_first.push_back(random_node(rng, static_cast<int>(rng() % 7)));
        ExprPtr e = make_val(Value::var("hole"));
        CHECK(expr_eq(context_plug(term.innermost_first(), e), term.plug(e)));
    }
}

TEST_CASE("context composition law") {
    std::mt19937_64 rng(7);
    for (int round = 0; round < 200; ++round) {
        Ctx c1, c2;
        for (std::size_t i = 0; i < rng() % 4; ++i)
            c1.push_back(random_node(rng, static_cast<int>(rng() % 5)));
        for (std::size_t i = 0; i < rng() % 4; ++i)
            c2.push_back(random_node(rng, static_cast<int>(rng() % 5)));
        ExprPtr e = make_val(Value::null());
        CHECK(expr_eq(context_plug(concat(c1, c2), e), context_plug(c2, context_plug(c1, e))));
    }
}

TEST_CASE("expression equality is structural") {
    ExprPtr a = make_let("C", "x", make_val(Value::null()), make_val(Value::var("x")));
    ExprPtr b = make_let("C", "x", make_val(Value::null()), make_val(Value::var("x")));
    CHECK(expr_eq(a, b));
    ExprPtr c = make_let("C", "y", make_val(Value::null()), make_val(Value::var("x")));
    CHECK_FALSE(expr_eq(a, c));
}

TEST_CASE("location values never print as source values") {
    CHECK(to_string(Value::loc(3)) == "loc#3");
    CHECK(to_string(Value::null()) == "null");
    CHECK(to_string(Value::this_ref()) == "this");
}
