#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "jafun/semantics.hpp"
#include "jafun/typed_semantics.hpp"

namespace jafun {

struct GenConfig {
    std::uint64_t seed = 1;
    std::size_t max_classes = 4;
    std::size_t max_fields = 3;
    std::size_t max_methods = 3;
    std::size_t max_expr_depth = 5;
    bool well_typed_only = true;
};

/// Fuel per generated run, sized so the full suite stays fast.
inline constexpr std::size_t kCheckFuel = 300;

/// Deterministic per-index seed derivation (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

/// Deterministic in cfg.seed. Output always passes well_formed and has a
/// zero-parameter Main.main entry; with well_typed_only the generation is
/// type-directed and the output checks with zero diagnostics.
Program gen_program(const GenConfig& cfg);

struct Counterexample {
    std::string property;
    std::uint64_t seed = 0;
    std::size_t step_index = 0;
    std::string details;
    Program program;
};

struct CheckReport {
    std::string property;
    std::size_t programs = 0;
    std::size_t states = 0;
    std::set<RuleName> rules_seen;
    std::vector<Counterexample> counterexamples;
};

using UntypedStepFn =
    std::function<std::optional<Step>(const Program&, const Heap&, const FrameStack&)>;

/// Runs both untyped engines (and both typed engines when
/// well_typed_only) in lockstep from the entry state of n generated
/// programs, recording any pointwise divergence.
CheckReport check_engine_equiv(const GenConfig& cfg, std::size_t n);

/// Same lockstep loop with injectable engines (for mutation fixtures).
CheckReport check_engine_equiv_with(const GenConfig& cfg, std::size_t n,
                                    const UntypedStepFn& a, const UntypedStepFn& b);

/// Erasure commutation at every typed step: typed_red stepping implies
/// red steps to the same heap and the erased stack.
CheckReport check_soundness(const GenConfig& cfg, std::size_t n);

/// Whenever red steps and the four hypotheses hold (well-formed program,
/// coherent heap, derivable typed stack, well-formed frame stack),
/// typed_red steps with matching heap and erasure.
CheckReport check_completeness(const GenConfig& cfg, std::size_t n);

/// Single-state completeness probe; with check_hypotheses=false the
/// derivability/coherence hypotheses are deliberately skipped.
std::optional<Counterexample> completeness_violation(const Program& p, const Heap& h,
                                                     const TypedFrameStack& tfs,
                                                     bool check_hypotheses);

/// Empirical subject reduction: stack_derivable and type_correct_heap
/// after every typed step (and on the start state).
CheckReport check_preservation(const GenConfig& cfg, std::size_t n);

/// Per-step structural invariants on untyped corpus runs: stack-shape
/// preservation, exceptional-mode locality, heap-domain monotonicity;
/// well-typed corpora must additionally never get stuck.
CheckReport check_structural_invariants(const GenConfig& cfg, std::size_t n);

}  // namespace jafun
