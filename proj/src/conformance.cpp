#include "jafun/conformance.hpp"

#include <algorithm>
#include <random>

#include "jafun/frontend.hpp"
#include "jafun/typesystem.hpp"

namespace jafun {

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    std::size_t below(std::size_t n) {
        if (n == 0) return 0;
        return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_);
    }
    bool chance(double p) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(eng_) < p;
    }
    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v[below(v.size())];
    }

private:
    std::mt19937_64 eng_;
};

AccessMode random_mode(Rng& rng) {
    switch (rng.below(3)) {
    case 0: return AccessMode::RWR;
    case 1: return AccessMode::RD;
    default: return AccessMode::ATM;
    }
}

/// One generation attempt. Declarations first (so the class table is
/// complete), then type-directed bodies against it.
class ProgramGenerator {
public:
    ProgramGenerator(const GenConfig& cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) {}

    Program generate() {
        gen_skeletons();
        gen_bodies();
        return prog_;
    }

private:
    const GenConfig& cfg_;
    Rng rng_;
    Program prog_;
    std::vector<std::string> user_classes_;
    std::size_t field_counter_ = 0;
    std::size_t method_counter_ = 0;
    std::size_t var_counter_ = 0;
    std::vector<std::string> method_order_;  // global ordinals, for recursion damping
    std::size_t current_ordinal_ = 0;
    bool modes_on_ = true;

    std::string fresh_field() { return "f" + std::to_string(field_counter_++); }
    std::string fresh_method() { return "m" + std::to_string(method_counter_++); }
    std::string fresh_var() { return "x" + std::to_string(var_counter_++); }

    std::size_t method_ordinal(const std::string& name) const {
        for (std::size_t i = 0; i < method_order_.size(); ++i) {
            if (method_order_[i] == name) return i;
        }
        return method_order_.size();
    }

    ClassDecl* mutable_class(const std::string& name) {
        for (ClassDecl& c : prog_) {
            if (c.name == name) return &c;
        }
        return nullptr;
    }

    std::vector<std::string> instantiable_classes() const {
        std::vector<std::string> out = user_classes_;
        out.push_back(kObjectClass);
        out.push_back(kNpeClass);
        return out;
    }

    void gen_skeletons() {
        prog_ = load({});
        std::size_t count = 1 + rng_.below(cfg_.max_classes);
        for (std::size_t i = 0; i < count; ++i) {
            ClassDecl c;
            c.name = "C" + std::to_string(i);
            c.extends = (i > 0 && rng_.chance(0.5)) ? user_classes_[rng_.below(i)]
                                                    : std::string(kObjectClass);
            user_classes_.push_back(c.name);
            prog_.push_back(std::move(c));
        }
        for (const std::string& name : user_classes_) {
            ClassDecl& c = *mutable_class(name);
            std::size_t nFields = rng_.below(cfg_.max_fields + 1);
            for (std::size_t i = 0; i < nFields; ++i) {
                FieldDecl f;
                f.fmode = rng_.chance(0.5) ? FieldMode::REP : FieldMode::PLAIN;
                f.cls = rng_.pick(user_classes_);
                f.name = fresh_field();
                c.fields.push_back(std::move(f));
            }
        }
        ClassDecl main;
        main.name = "Main";
        main.extends = std::string(kObjectClass);
        user_classes_.push_back(main.name);
        prog_.push_back(std::move(main));

        for (const std::string& name : user_classes_) {
            ClassDecl& c = *mutable_class(name);
            std::size_t nMethods = rng_.below(cfg_.max_methods + 1);
            for (std::size_t i = 0; i < nMethods; ++i) {
                c.methods.push_back(gen_signature(c));
            }
            if (c.name == "Main") c.methods.push_back(entry_signature());
        }
    }

    MethodDecl gen_signature(const ClassDecl& c) {
        MethodDecl m;
        // Occasionally reuse an inherited name, repeating the signature
        // exactly so dynamic dispatch gets exercised.
        if (c.extends && rng_.chance(0.25)) {
            std::vector<const MethodDecl*> inherited;
            const ClassDecl* cur = find_class(prog_, *c.extends);
            while (cur != nullptr) {
                for (const MethodDecl& base : cur->methods) {
                    bool clash = false;
                    for (const MethodDecl& mine : c.methods) {
                        if (mine.name == base.name) clash = true;
                    }
                    if (!clash) inherited.push_back(&base);
                }
                if (!cur->extends) break;
                cur = find_class(prog_, *cur->extends);
            }
            if (!inherited.empty()) {
                m = *rng_.pick(inherited);
                m.body = nullptr;
                return m;
            }
        }
        m.annotated = cfg_.well_typed_only || rng_.chance(0.7);
        m.name = fresh_method();
        method_order_.push_back(m.name);
        m.ret_cls = rng_.pick(instantiable_classes());
        m.ret_mode = m.annotated ? random_mode(rng_) : AccessMode::RWR;
        m.recv_mode = m.annotated ? random_mode(rng_) : AccessMode::RWR;
        std::size_t nParams = rng_.below(3);
        for (std::size_t i = 0; i < nParams; ++i) {
            ParamDecl par;
            par.mode = m.annotated ? random_mode(rng_) : AccessMode::RWR;
            par.cls = rng_.pick(instantiable_classes());
            par.name = "p" + std::to_string(i);
            m.params.push_back(std::move(par));
        }
        if (rng_.chance(0.3)) {
            ThrowsDecl t;
            t.mode = m.annotated ? random_mode(rng_) : AccessMode::RWR;
            t.cls = rng_.pick(user_classes_);
            m.throws_list.push_back(std::move(t));
        }
        return m;
    }

    MethodDecl entry_signature() {
        MethodDecl m;
        m.annotated = cfg_.well_typed_only || rng_.chance(0.7);
        m.name = "main";
        method_order_.push_back(m.name);
        m.ret_cls = kObjectClass;
        m.ret_mode = AccessMode::RWR;
        m.recv_mode = m.annotated ? AccessMode::RD : AccessMode::RWR;
        if (rng_.chance(0.5)) {
            // atm Object covers every throwable class and mode.
            m.throws_list.push_back(ThrowsDecl{AccessMode::ATM, kObjectClass});
        }
        return m;
    }

    void gen_bodies() {
        for (ClassDecl& c : prog_) {
            for (MethodDecl& m : c.methods) {
                if (m.body != nullptr) continue;  // predefined classes have none
                modes_on_ = m.annotated;
                current_ordinal_ = method_ordinal(m.name);
                Env gamma;
                gamma = gamma.with(Value::this_ref(),
                                   ACId{ClassRef::named(c.name), m.recv_mode});
                for (const ParamDecl& par : m.params) {
                    gamma = gamma.with(Value::var(par.name),
                                       ACId{ClassRef::named(par.cls), par.mode});
                }
                ACId target{ClassRef::named(m.ret_cls), m.ret_mode};
                m.body = gen_expr(c, m, gamma, throws_of(m), cfg_.max_expr_depth, target);
            }
        }
    }

    bool fits(const ACId& a, const ACId& b) const {
        if (!modes_on_) return subtype_leq(prog_, a.cls, b.cls);
        return acid_leq(prog_, a, b);
    }

    std::vector<std::pair<Value, ACId>> values_fitting(const Env& gamma,
                                                       const ACId& target) const {
        std::vector<std::pair<Value, ACId>> out;
        out.emplace_back(Value::null(), ACId{ClassRef::bottom(), AccessMode::RWR});
        for (const auto& [key, type] : gamma.bindings()) {
            if (fits(type, target)) out.emplace_back(key, type);
        }
        return out;
    }

    Value pick_value(const Env& gamma, const ACId& target) {
        auto candidates = values_fitting(gamma, target);
        return rng_.pick(candidates).first;
    }

    ExprPtr gen_expr(const ClassDecl& c, const MethodDecl& m, const Env& gamma,
                     const ExEnv& xi, std::size_t depth, const ACId& target) {
        if (depth == 0) return make_val(pick_value(gamma, target));
        for (int attempt = 0; attempt < 6; ++attempt) {
            std::optional<ExprPtr> e;
            switch (rng_.below(10)) {
            case 0: e = make_val(pick_value(gamma, target)); break;
            case 1: e = try_let(c, m, gamma, xi, depth, target); break;
            case 2: e = try_new(gamma, target); break;
            case 3:
            case 4: e = try_invoke(gamma, xi, target); break;
            case 5: e = try_field_read(gamma, target); break;
            case 6: e = try_field_write(gamma, target); break;
            case 7: e = try_if(c, m, gamma, xi, depth, target); break;
            case 8: e = try_try(c, m, gamma, xi, depth, target); break;
            default: e = try_throw(gamma, xi); break;
            }
            if (!e && !cfg_.well_typed_only && rng_.chance(0.12)) e = chaos_expr(gamma);
            if (e) return *e;
        }
        return make_val(pick_value(gamma, target));
    }

    std::optional<ExprPtr> try_let(const ClassDecl& c, const MethodDecl& m,
                                   const Env& gamma, const ExEnv& xi, std::size_t depth,
                                   const ACId& target) {
        std::string cls = rng_.pick(instantiable_classes());
        ACId boundTarget{ClassRef::named(cls), AccessMode::ATM};
        ExprPtr bound = gen_expr(c, m, gamma, xi, depth - 1, boundTarget);
        InferResult r = infer(prog_, c, m, xi, gamma, bound);
        if (std::holds_alternative<TypeError>(r)) return std::nullopt;
        ACId boundType = std::get<ACId>(r);
        std::string var = fresh_var();
        Env inner = gamma.with(Value::var(var),
                               ACId{ClassRef::named(cls), boundType.mode});
        ExprPtr body = gen_expr(c, m, inner, xi, depth - 1, target);
        return make_let(cls, var, std::move(bound), std::move(body));
    }

    std::optional<ExprPtr> try_new(const Env& gamma, const ACId& target) {
        std::vector<std::string> candidates;
        for (const std::string& cls : instantiable_classes()) {
            if (subtype_leq(prog_, ClassRef::named(cls), target.cls))
                candidates.push_back(cls);
        }
        if (candidates.empty()) return std::nullopt;
        std::string cls = rng_.pick(candidates);
        AccessMode mode = AccessMode::RWR;
        if (rng_.chance(0.4)) {
            AccessMode alt = random_mode(rng_);
            if (!modes_on_ || mode_leq(alt, target.mode)) mode = alt;
        }
        auto fields = flds(prog_, cls);
        if (!fields) return std::nullopt;
        std::vector<Value> args;
        for (const FieldDecl& f : *fields) {
            AccessMode required = f.fmode == FieldMode::REP ? mode : AccessMode::ATM;
            args.push_back(pick_value(gamma, ACId{ClassRef::named(f.cls), required}));
        }
        return make_new(mode, cls, std::move(args));
    }

    struct Callee {
        Value recv;
        ACId recvType;
        const MethodDecl* md;
    };

    std::optional<ExprPtr> try_invoke(const Env& gamma, const ExEnv& xi,
                                      const ACId& target) {
        std::vector<Callee> candidates;
        for (const auto& [key, type] : gamma.bindings()) {
            if (type.cls.is_bottom()) continue;
            const ClassDecl* cur = find_class(prog_, type.cls.name());
            while (cur != nullptr) {
                for (const MethodDecl& md : cur->methods) {
                    if (modes_on_ && !mode_leq(type.mode, md.recv_mode)) continue;
                    if (!fits(ACId{ClassRef::named(md.ret_cls), md.ret_mode}, target))
                        continue;
                    bool throwsOk = true;
                    for (const ACId& thrown : throws_of(md)) {
                        if (!exenv_covers(prog_, xi, thrown, modes_on_)) throwsOk = false;
                    }
                    if (!throwsOk) continue;
                    candidates.push_back(Callee{key, type, &md});
                }
                if (!cur->extends) break;
                cur = find_class(prog_, *cur->extends);
            }
        }
        if (candidates.empty()) return std::nullopt;
        // Prefer callees declared earlier so most call graphs terminate.
        if (rng_.chance(0.75)) {
            std::vector<Callee> earlier;
            for (const Callee& cd : candidates) {
                if (method_ordinal(cd.md->name) < current_ordinal_) earlier.push_back(cd);
            }
            if (!earlier.empty()) candidates = std::move(earlier);
        }
        const Callee& chosen = rng_.pick(candidates);
        std::vector<Value> args;
        for (const ParamDecl& par : chosen.md->params) {
            ACId want{ClassRef::named(par.cls), par.mode};
            args.push_back(rng_.chance(0.6) ? Value::null() : pick_value(gamma, want));
        }
        return make_invoke(chosen.recv, chosen.md->name, std::move(args));
    }

    std::optional<ExprPtr> try_field_read(const Env& gamma, const ACId& target) {
        std::vector<ExprPtr> candidates;
        for (const auto& [key, type] : gamma.bindings()) {
            if (type.cls.is_bottom()) continue;
            if (modes_on_ && !mode_leq(type.mode, AccessMode::RD)) continue;
            auto fields = flds(prog_, type.cls.name());
            if (!fields) continue;
            for (const FieldDecl& f : *fields) {
                AccessMode mode =
                    f.fmode == FieldMode::REP ? type.mode : AccessMode::ATM;
                if (fits(ACId{ClassRef::named(f.cls), mode}, target))
                    candidates.push_back(make_field_read(key, f.name));
            }
        }
        if (candidates.empty()) return std::nullopt;
        return rng_.pick(candidates);
    }

    std::optional<ExprPtr> try_field_write(const Env& gamma, const ACId& target) {
        std::vector<ExprPtr> candidates;
        for (const auto& [key, type] : gamma.bindings()) {
            if (type.cls.is_bottom()) continue;
            if (modes_on_ && type.mode != AccessMode::RWR) continue;
            auto fields = flds(prog_, type.cls.name());
            if (!fields) continue;
            for (const FieldDecl& f : *fields) {
                AccessMode readMode =
                    f.fmode == FieldMode::REP ? type.mode : AccessMode::ATM;
                if (!fits(ACId{ClassRef::named(f.cls), readMode}, target)) continue;
                AccessMode required =
                    f.fmode == FieldMode::REP ? AccessMode::RWR : AccessMode::ATM;
                Value v = pick_value(gamma, ACId{ClassRef::named(f.cls), required});
                candidates.push_back(make_field_write(key, f.name, v));
            }
        }
        if (candidates.empty()) return std::nullopt;
        return rng_.pick(candidates);
    }

    std::optional<ExprPtr> try_if(const ClassDecl& c, const MethodDecl& m,
                                  const Env& gamma, const ExEnv& xi, std::size_t depth,
                                  const ACId& target) {
        auto any = values_fitting(gamma, ACId{ClassRef::named(kObjectClass), AccessMode::ATM});
        Value lhs = rng_.pick(any).first;
        Value rhs = rng_.chance(0.5) ? Value::null() : rng_.pick(any).first;
        ExprPtr thenBranch = gen_expr(c, m, gamma, xi, depth - 1, target);
        ExprPtr elseBranch = gen_expr(c, m, gamma, xi, depth - 1, target);
        return make_if(std::move(lhs), std::move(rhs), std::move(thenBranch),
                       std::move(elseBranch));
    }

    std::optional<ExprPtr> try_try(const ClassDecl& c, const MethodDecl& m,
                                   const Env& gamma, const ExEnv& xi, std::size_t depth,
                                   const ACId& target) {
        std::vector<std::string> classes = user_classes_;
        classes.push_back(kNpeClass);
        std::string cls = rng_.pick(classes);
        AccessMode mode = random_mode(rng_);
        ACId caught{ClassRef::named(cls), mode};
        ExEnv bodyXi = xi;
        bodyXi.push_back(caught);
        ExprPtr body = gen_expr(c, m, gamma, bodyXi, depth - 1, target);
        std::string var = fresh_var();
        Env handlerEnv = gamma.with(Value::var(var), caught);
        ExprPtr handler = gen_expr(c, m, handlerEnv, xi, depth - 1, target);
        return make_try(std::move(body), mode, cls, var, std::move(handler));
    }

    std::optional<ExprPtr> try_throw(const Env& gamma, const ExEnv& xi) {
        std::vector<Value> candidates;
        for (const auto& [key, type] : gamma.bindings()) {
            if (type.cls.is_bottom()) continue;
            if (exenv_covers(prog_, xi, type, modes_on_)) candidates.push_back(key);
        }
        if (candidates.empty()) return std::nullopt;
        return make_throw(rng_.pick(candidates));
    }

    /// Well-formed but deliberately ill-typed shapes, for exercising the
    /// reducers on stuck states (unrestricted corpora only).
    ExprPtr chaos_expr(const Env& gamma) {
        auto any = values_fitting(gamma, ACId{ClassRef::named(kObjectClass), AccessMode::ATM});
        Value v = rng_.pick(any).first;
        switch (rng_.below(3)) {
        case 0: return make_invoke(v, "nosuchmethod", {});
        case 1: return make_field_read(v, "nosuchfield");
        default: return make_new(AccessMode::RWR, rng_.pick(user_classes_), {v, v, v, v, v});
        }
    }
};

Program degenerate_program() {
    Program p = load({});
    ClassDecl main;
    main.name = "Main";
    main.extends = std::string(kObjectClass);
    MethodDecl m;
    m.annotated = true;
    m.ret_mode = AccessMode::RWR;
    m.ret_cls = kObjectClass;
    m.recv_mode = AccessMode::RD;
    m.name = "main";
    m.body = make_val(Value::null());
    main.methods.push_back(std::move(m));
    p.push_back(std::move(main));
    return p;
}

}  // namespace

Program gen_program(const GenConfig& cfg) {
    for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
        ProgramGenerator gen(cfg, mix_seed(cfg.seed, attempt));
        Program p = gen.generate();
        if (!well_formed(p).empty()) continue;
        if (cfg.well_typed_only && !check_program(p).empty()) continue;
        return p;
    }
    return degenerate_program();
}

namespace {

std::string describe_state(const Program&, std::size_t step, const std::string& what) {
    return "step " + std::to_string(step) + ": " + what;
}

struct RunSetup {
    Program program;
    Heap heap;
    TypedFrameStack stack;
    std::uint64_t seed;
};

std::optional<RunSetup> setup_run(const GenConfig& cfg, std::size_t index) {
    GenConfig derived = cfg;
    derived.seed = mix_seed(cfg.seed, index);
    Program p = gen_program(derived);
    auto st = start_typed(p, "Main", "main");
    if (!st) return std::nullopt;
    return RunSetup{std::move(p), std::move(st->heap), std::move(st->stack), derived.seed};
}

}  // namespace

CheckReport check_engine_equiv_with(const GenConfig& cfg, std::size_t n,
                                    const UntypedStepFn& a, const UntypedStepFn& b) {
    CheckReport report;
    report.property = "engine-equivalence";
    for (std::size_t i = 0; i < n; ++i) {
        auto setup = setup_run(cfg, i);
        if (!setup) continue;
        ++report.programs;
        Heap h = setup->heap;
        FrameStack fs = erase_types(setup->stack);
        for (std::size_t step = 0; step < kCheckFuel; ++step) {
            auto r1 = a(setup->program, h, fs);
            auto r2 = b(setup->program, h, fs);
            ++report.states;
            if (r1.has_value() != r2.has_value()) {
                report.counterexamples.push_back(Counterexample{
                    report.property, setup->seed, step,
                    describe_state(setup->program, step, "one engine stepped, the other not"),
                    setup->program});
                break;
            }
            if (!r1) break;
            if (!(r1->heap == r2->heap) || !(r1->stack == r2->stack) ||
                r1->rule != r2->rule) {
                report.counterexamples.push_back(Counterexample{
                    report.property, setup->seed, step,
                    describe_state(setup->program, step,
                                   std::string("divergent results: ") + rule_label(r1->rule) +
                                       " vs " + rule_label(r2->rule)),
                    setup->program});
                break;
            }
            report.rules_seen.insert(r1->rule);
            h = std::move(r1->heap);
            fs = std::move(r1->stack);
        }
    }
    return report;
}

CheckReport check_engine_equiv(const GenConfig& cfg, std::size_t n) {
    CheckReport report = check_engine_equiv_with(
        cfg, n,
        [](const Program& p, const Heap& h, const FrameStack& fs) { return red(p, h, fs); },
        [](const Program& p, const Heap& h, const FrameStack& fs) { return red2(p, h, fs); });
    if (!cfg.well_typed_only) return report;
    // Typed engines, compared over the same corpus.
    for (std::size_t i = 0; i < n; ++i) {
        auto setup = setup_run(cfg, i);
        if (!setup) continue;
        Heap h = setup->heap;
        TypedFrameStack tfs = setup->stack;
        for (std::size_t step = 0; step < kCheckFuel; ++step) {
            auto r1 = typed_red(setup->program, h, tfs);
            auto r2 = typed_red2(setup->program, h, tfs);
            ++report.states;
            bool diverged = r1.has_value() != r2.has_value();
            if (!diverged && r1) {
                diverged = !(r1->heap == r2->heap) || !(r1->stack == r2->stack) ||
                           r1->rule != r2->rule;
            }
            if (diverged) {
                report.counterexamples.push_back(Counterexample{
                    "typed-engine-equivalence", setup->seed, step,
                    describe_state(setup->program, step, "typed engines diverged"),
                    setup->program});
                break;
            }
            if (!r1) break;
            report.rules_seen.insert(r1->rule);
            h = std::move(r1->heap);
            tfs = std::move(r1->stack);
        }
    }
    return report;
}

CheckReport check_soundness(const GenConfig& cfg, std::size_t n) {
    CheckReport report;
    report.property = "soundness";
    for (std::size_t i = 0; i < n; ++i) {
        auto setup = setup_run(cfg, i);
        if (!setup) continue;
        ++report.programs;
        Heap h = setup->heap;
        TypedFrameStack tfs = setup->stack;
        for (std::size_t step = 0; step < kCheckFuel; ++step) {
            auto tr = typed_red(setup->program, h, tfs);
            if (!tr) break;
            ++report.states;
            auto ur = red(setup->program, h, erase_types(tfs));
            bool ok = ur.has_value() && ur->heap == tr->heap &&
                      ur->stack == erase_types(tr->stack) && ur->rule == tr->rule;
            if (!ok) {
                report.counterexamples.push_back(Counterexample{
                    report.property, setup->seed, step,
                    describe_state(setup->program, step,
                                   "erasure commutation failed after typed step"),
                    setup->program});
                break;
            }
            report.rules_seen.insert(tr->rule);
            h = std::move(tr->heap);
            tfs = std::move(tr->stack);
        }
    }
    return report;
}

std::optional<Counterexample> completeness_violation(const Program& p, const Heap& h,
                                                     const TypedFrameStack& tfs,
                                                     bool check_hypotheses) {
    FrameStack fs = erase_types(tfs);
    auto ur = red(p, h, fs);
    if (!ur) return std::nullopt;
    if (check_hypotheses) {
        if (!well_formed(p).empty()) return std::nullopt;
        if (!type_correct_heap(p, h)) return std::nullopt;
        if (!stack_derivable(p, h, tfs)) return std::nullopt;
        if (!well_formed_framestack(fs)) return std::nullopt;
    }
    auto tr = typed_red(p, h, tfs);
    if (tr && tr->heap == ur->heap && erase_types(tr->stack) == ur->stack)
        return std::nullopt;
    Counterexample ce;
    ce.property = "completeness";
    ce.details = tr ? "typed step disagrees with untyped step"
                    : "red stepped but typed_red did not";
    ce.program = p;
    return ce;
}

CheckReport check_completeness(const GenConfig& cfg, std::size_t n) {
    CheckReport report;
    report.property = "completeness";
    for (std::size_t i = 0; i < n; ++i) {
        auto setup = setup_run(cfg, i);
        if (!setup) continue;
        ++report.programs;
        bool wf_ok = well_formed(setup->program).empty();
        Heap h = setup->heap;
        TypedFrameStack tfs = setup->stack;
        for (std::size_t step = 0; step < kCheckFuel; ++step) {
            FrameStack fs = erase_types(tfs);
            auto ur = red(setup->program, h, fs);
            if (!ur) break;
            ++report.states;
            bool hyps = wf_ok && type_correct_heap(setup->program, h) &&
                        stack_derivable(setup->program, h, tfs) &&
                        well_formed_framestack(fs);
            auto tr = typed_red(setup->program, h, tfs);
            if (hyps) {
                bool ok = tr.has_value() && tr->heap == ur->heap &&
                          erase_types(tr->stack) == ur->stack;
                if (!ok) {
                    report.counterexamples.push_back(Counterexample{
                        report.property, setup->seed, step,
                        describe_state(setup->program, step,
                                       "hypotheses held but typed step missing or different"),
                        setup->program});
                    break;
                }
            }
            if (!tr) break;
            report.rules_seen.insert(tr->rule);
            h = std::move(tr->heap);
            tfs = std::move(tr->stack);
        }
    }
    return report;
}

CheckReport check_preservation(const GenConfig& cfg, std::size_t n) {
    CheckReport report;
    report.property = "preservation";
    for (std::size_t i = 0; i < n; ++i) {
        auto setup = setup_run(cfg, i);
        if (!setup) continue;
        ++report.programs;
        Heap h = setup->heap;
        TypedFrameStack tfs = setup->stack;
        for (std::size_t step = 0; step <= kCheckFuel; ++step) {
            bool derivable = stack_derivable(setup->program, h, tfs);
            bool coherent = type_correct_heap(setup->program, h);
            ++report.states;
            if (!derivable || !coherent) {
                report.counterexamples.push_back(Counterexample{
                    report.property, setup->seed, step,
                    describe_state(setup->program, step,
                                   derivable ? "heap coherence lost" : "derivability lost"),
                    setup->program});
                break;
            }
            if (step == kCheckFuel) break;
            auto tr = typed_red(setup->program, h, tfs);
            if (!tr) break;
            report.rules_seen.insert(tr->rule);
            h = std::move(tr->heap);
            tfs = std::move(tr->stack);
        }
    }
    return report;
}

CheckReport check_structural_invariants(const GenConfig& cfg, std::size_t n) {
    CheckReport report;
    report.property = "structural-invariants";
    for (std::size_t i = 0; i < n; ++i) {
        auto setup = setup_run(cfg, i);
        if (!setup) continue;
        ++report.programs;
        Heap h = setup->heap;
        FrameStack fs = erase_types(setup->stack);
        for (std::size_t step = 0; step < kCheckFuel; ++step) {
            bool wfBefore = well_formed_framestack(fs);
            auto r = red(setup->program, h, fs);
            if (!r) {
                bool final = fs.size() == 1 && fs.front().ctx.empty() &&
                             fs.front().redex->kind == Expr::Kind::Val &&
                             fs.front().redex->val.is_location();
                if (!final && cfg.well_typed_only) {
                    report.counterexamples.push_back(Counterexample{
                        "no-stuck", setup->seed, step,
                        describe_state(setup->program, step,
                                       "well-typed program got stuck"),
                        setup->program});
                }
                break;
            }
            ++report.states;
            for (const auto& [key, obj] : h.objects) {
                if (!r->heap.objects.count(key)) {
                    report.counterexamples.push_back(Counterexample{
                        report.property, setup->seed, step,
                        describe_state(setup->program, step, "heap domain shrank"),
                        setup->program});
                }
            }
            if (wfBefore && !well_formed_framestack(r->stack)) {
                report.counterexamples.push_back(Counterexample{
                    report.property, setup->seed, step,
                    describe_state(setup->program, step, "stack shape not preserved"),
                    setup->program});
            }
            for (std::size_t f = 0; f + 1 < r->stack.size(); ++f) {
                if (!r->stack[f].mode.is_normal()) {
                    report.counterexamples.push_back(Counterexample{
                        report.property, setup->seed, step,
                        describe_state(setup->program, step,
                                       "exceptional mode below the top frame"),
                        setup->program});
                }
            }
            report.rules_seen.insert(r->rule);
            h = std::move(r->heap);
            fs = std::move(r->stack);
        }
    }
    return report;
}

}  // namespace jafun
