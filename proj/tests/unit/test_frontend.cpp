#include "doctest.h"

#include <fstream>
#include <sstream>

#include "jafun/frontend.hpp"
#include "jafun/program.hpp"

using namespace jafun;

namespace {

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(JAFUN_PROGRAMS_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Program parse_ok(const std::string& src) {
    ParseResult r = parse_program(src);
    if (std::holds_alternative<ParseError>(r)) {
        FAIL("parse error: ", to_string(std::get<ParseError>(r)));
    }
    return std::get<Program>(r);
}

}  // namespace

TEST_CASE("minimal class parses") {
    Program p = parse_ok("class A ext Object { }");
    REQUIRE(p.size() == 1);
    CHECK(p[0].name == "A");
    CHECK(p[0].extends == "Object");
    CHECK(p[0].fields.empty());
    CHECK(p[0].methods.empty());
}

TEST_CASE("the doubly-linked-list fixture parses with the expected shape") {
    Program p = parse_ok(fixture("dlist.jf"));
    const ClassDecl* dlist = find_class(p, "DList");
    REQUIRE(dlist != nullptr);
    REQUIRE(dlist->fields.size() == 3);
    CHECK(dlist->fields[0].fmode == FieldMode::REP);
    CHECK(dlist->fields[0].cls == "DList");
    CHECK(dlist->fields[0].name == "prev");
    CHECK(dlist->fields[1].fmode == FieldMode::PLAIN);
    CHECK(dlist->fields[1].cls == "Data");
    CHECK(dlist->fields[1].name == "val");
    CHECK(dlist->fields[2].fmode == FieldMode::REP);
    CHECK(dlist->fields[2].name == "next");
    REQUIRE(dlist->methods.size() == 3);
    CHECK(dlist->methods[0].name == "copy");
    CHECK(dlist->methods[0].annotated);
    CHECK(dlist->methods[0].ret_mode == AccessMode::RWR);
    CHECK(dlist->methods[0].recv_mode == AccessMode::RD);
    CHECK(dlist->methods[1].name == "appRec");
    CHECK(dlist->methods[2].name == "singleton");
    CHECK(dlist->methods[2].recv_mode == AccessMode::ATM);
}

TEST_CASE("nested expressions in argument positions are rejected") {
    ParseResult r = parse_program("class A ext Object { A m() { this.m(this.f) } }");
    REQUIRE(std::holds_alternative<ParseError>(r));
    const ParseError& e = std::get<ParseError>(r);
    CHECK(e.line == 1);
    CHECK(e.column > 0);
}

TEST_CASE("mixed mode annotations are a parse error") {
    ParseResult r = parse_program("class A ext Object { rwr A m() { null } }");
    REQUIRE(std::holds_alternative<ParseError>(r));
}

TEST_CASE("unannotated methods normalize to all-RWR") {
    Program p = parse_ok("class A ext Object { A m(A x) throws A { null } }");
    const MethodDecl& m = p[0].methods[0];
    CHECK_FALSE(m.annotated);
    CHECK(m.ret_mode == AccessMode::RWR);
    CHECK(m.recv_mode == AccessMode::RWR);
    CHECK(m.params[0].mode == AccessMode::RWR);
    CHECK(m.throws_list[0].mode == AccessMode::RWR);
}

TEST_CASE("load prepends the predefined classes") {
    Program p = load({});
    REQUIRE(p.size() == 2);
    CHECK(p[0].name == "Object");
    CHECK_FALSE(p[0].extends.has_value());
    CHECK(p[1].name == "NPE");
    CHECK(p[1].extends == "Object");

    Program q = load(parse_ok("class A ext Object { }"));
    REQUIRE(q.size() == 3);
    CHECK(q[0].name == "Object");
    CHECK(q[1].name == "NPE");
    CHECK(q[2].name == "A");
}

TEST_CASE("load keeps user-redefined predefined classes for well_formed to flag") {
    Program userObject = parse_ok("class Object { Object f; }\nclass NPE ext Object { }");
    Program loaded = load(userObject);
    CHECK(loaded.size() == 2);  // nothing prepended
    // The duplicate-free loaded program still has the user Object first.
    CHECK(loaded[0].fields.size() == 1);

    Program twice = load(parse_ok("class A ext Object { }\nclass A ext Object { }"));
    auto violations = well_formed(twice);
    bool sawDuplicate = false;
    for (const auto& v : violations)
        if (v.kind == ViolationKind::DuplicateClass) sawDuplicate = true;
    CHECK(sawDuplicate);
}

TEST_CASE("load is idempotent") {
    Program p = load(parse_ok("class A ext Object { }"));
    CHECK(load(p) == p);
}

TEST_CASE("comments and whitespace are skipped") {
    Program p = parse_ok("// header\nclass A ext Object { // trailing\n }\n");
    CHECK(p.size() == 1);
}

TEST_CASE("non-ASCII input is rejected") {
    ParseResult r = parse_program("class \xc3\x84 ext Object { }");
    CHECK(std::holds_alternative<ParseError>(r));
}

TEST_CASE("printer output parses back to an equal program") {
    Program p = load(parse_ok(fixture("dlist.jf")));
    Program q = parse_ok(print_program(p));
    CHECK(q == p);
}
