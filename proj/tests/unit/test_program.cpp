#include "doctest.h"

#include "jafun/conformance.hpp"
#include "jafun/frontend.hpp"
#include "jafun/program.hpp"

using namespace jafun;

namespace {

Program parse_loaded(const std::string& src) {
    ParseResult r = parse_program(src);
    REQUIRE(std::holds_alternative<Program>(r));
    return load(std::get<Program>(r));
}

bool has_violation(const std::vector<Violation>& vs, ViolationKind kind) {
    for (const auto& v : vs)
        if (v.kind == kind) return true;
    return false;
}

}  // namespace

TEST_CASE("the loaded empty program is well formed") {
    CHECK(well_formed(load({})).empty());
}

TEST_CASE("duplicate class declarations are flagged") {
    Program p = parse_loaded("class A ext Object { }\nclass A ext Object { }");
    CHECK(has_violation(well_formed(p), ViolationKind::DuplicateClass));
}

TEST_CASE("extends cycles are flagged") {
    // B ext C, C ext B: the loader adds Object/NPE, the cycle remains.
    Program p = parse_loaded("class B ext C { }\nclass C ext B { }");
    auto vs = well_formed(p);
    CHECK(has_violation(vs, ViolationKind::ExtendsCycle));
}

TEST_CASE("missing predefined classes and bad supers are flagged") {
    Program noObject{ClassDecl{"NPE", std::nullopt, {}, {}}};
    auto vs = well_formed(noObject);
    CHECK(has_violation(vs, ViolationKind::MissingObject));
    CHECK(has_violation(vs, ViolationKind::UnknownSuper));  // NPE lacks extends

    Program p = parse_loaded("class A ext Nowhere { }");
    CHECK(has_violation(well_formed(p), ViolationKind::UnknownSuper));

    Program objectWithSuper =
        load(std::get<Program>(parse_program("class Object ext NPE { }")));
    CHECK(has_violation(well_formed(objectWithSuper), ViolationKind::ObjectHasSuper));
}

TEST_CASE("field shadowing and duplicate members are flagged") {
    Program p = parse_loaded(
        "class A ext Object { A f; }\n"
        "class B ext A { A f; }");
    CHECK(has_violation(well_formed(p), ViolationKind::DuplicateField));

    Program q = parse_loaded("class A ext Object { A m() { null } A m() { null } }");
    CHECK(has_violation(well_formed(q), ViolationKind::DuplicateMethod));
}

TEST_CASE("overrides must repeat the signature exactly") {
    Program bad = parse_loaded(
        "class A ext Object { rwr A rd m() { null } }\n"
        "class B ext A { rwr A rwr m() { null } }");
    CHECK(has_violation(well_formed(bad), ViolationKind::BadOverride));

    Program good = parse_loaded(
        "class A ext Object { rwr A rd m() { null } }\n"
        "class B ext A { rwr A rd m() { null } }");
    CHECK(well_formed(good).empty());
}

TEST_CASE("unknown classes in signatures are flagged") {
    Program p = parse_loaded("class A ext Object { Missing f; }");
    CHECK(has_violation(well_formed(p), ViolationKind::UnknownClassInSig));
}

TEST_CASE("find_class returns the first matching declaration") {
    Program p = load({});
    REQUIRE(find_class(p, "Object") != nullptr);
    CHECK(find_class(p, "Object")->name == "Object");
    CHECK(find_class(p, "Nope") == nullptr);
}

TEST_CASE("subtyping follows extends chains") {
    Program p = parse_loaded("class A ext Object { }\nclass B ext A { }");
    CHECK(subtype_leq(p, ClassRef::named("A"), ClassRef::named("A")));
    CHECK(subtype_leq(p, ClassRef::named("NPE"), ClassRef::named("Object")));
    CHECK_FALSE(subtype_leq(p, ClassRef::named("Object"), ClassRef::named("NPE")));
    CHECK(subtype_leq(p, ClassRef::named("B"), ClassRef::named("Object")));
    CHECK(subtype_leq(p, ClassRef::bottom(), ClassRef::named("B")));
    CHECK_FALSE(subtype_leq(p, ClassRef::named("B"), ClassRef::bottom()));
}

TEST_CASE("subtyping is a partial order on generated programs") {
    GenConfig cfg;
    cfg.seed = 11;
    cfg.well_typed_only = false;
    for (std::size_t i = 0; i < 20; ++i) {
        GenConfig c = cfg;
        c.seed = mix_seed(cfg.seed, i);
        Program p = gen_program(c);
        std::vector<ClassRef> classes;
        for (const ClassDecl& cd : p) classes.push_back(ClassRef::named(cd.name));
        for (const ClassRef& a : classes) {
            CHECK(subtype_leq(p, a, a));
            for (const ClassRef& b : classes) {
                for (const ClassRef& c2 : classes) {
                    if (subtype_leq(p, a, b) && subtype_leq(p, b, c2))
                        CHECK(subtype_leq(p, a, c2));
                }
                if (subtype_leq(p, a, b) && subtype_leq(p, b, a))
                    CHECK(a.name() == b.name());
            }
        }
    }
}

TEST_CASE("flds lists base-class fields first") {
    Program p = parse_loaded(
        "class A ext Object { A f; }\n"
        "class B ext A { A g; }");
    auto fields = flds(p, "B");
    REQUIRE(fields.has_value());
    REQUIRE(fields->size() == 2);
    CHECK((*fields)[0].name == "f");
    CHECK((*fields)[1].name == "g");

    CHECK(flds(p, "Object")->empty());
    CHECK_FALSE(flds(p, "Nope").has_value());

    // Prefix property: flds(parent) is a prefix of flds(child).
    auto parentFields = flds(p, "A");
    for (std::size_t i = 0; i < parentFields->size(); ++i)
        CHECK((*parentFields)[i] == (*fields)[i]);
}

TEST_CASE("method lookup walks the inheritance chain") {
    Program p = parse_loaded(
        "class A ext Object { A m() { null } }\n"
        "class B ext A { }");
    auto found = method_lookup(p, "B", "m");
    REQUIRE(found.has_value());
    CHECK(found->cls->name == "A");
    CHECK(found->method->name == "m");
    CHECK_FALSE(method_lookup(p, "Object", "anything").has_value());

    // Lookup from a class that does not declare m equals lookup from its parent.
    auto fromParent = method_lookup(p, "A", "m");
    CHECK(found->method == fromParent->method);
}

TEST_CASE("signature accessors expose the declared types") {
    ParseResult r = parse_program(
        "class DList ext Object {\n"
        "  rwr DList rd copy() { null }\n"
        "  rwr DList rd appRec(rwr DList newPrev) { null }\n"
        "}");
    Program p = load(std::get<Program>(r));
    auto appRec = method_lookup(p, "DList", "appRec");
    REQUIRE(appRec.has_value());
    CHECK(param_names(*appRec->method) == std::vector<std::string>{"newPrev"});
    auto ret = return_type(p, "DList", "copy");
    REQUIRE(ret.has_value());
    CHECK(*ret == ACId{ClassRef::named("DList"), AccessMode::RWR});
    CHECK(throws_of(*method_lookup(p, "DList", "copy")->method).empty());
}
