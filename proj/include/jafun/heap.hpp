#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "jafun/program.hpp"
#include "jafun/syntax.hpp"

namespace jafun {

/// The preallocated NullPointerException object lives at location 0 in
/// every heap produced by init_heap.
inline constexpr std::size_t kNpeLoc = 0;

/// A runtime location: null or a concrete index into the heap.
class Loc {
public:
    static Loc null() { return Loc{}; }
    static Loc at(std::size_t index) {
        Loc l;
        l.idx_ = index;
        return l;
    }
    bool is_null() const { return !idx_.has_value(); }
    std::size_t index() const { return *idx_; }
    bool operator==(const Loc&) const = default;

private:
    std::optional<std::size_t> idx_;
};

std::string to_string(const Loc& l);

/// Conversions between location values and Locs. `as_location` yields
/// nullopt for Var/This values.
Value to_value(const Loc& l);
std::optional<Loc> as_location(const Value& v);

/// An object: a finite field map plus its class name.
struct HeapObject {
    std::map<std::string, Loc> fields;
    std::string cls;
    bool operator==(const HeapObject&) const = default;
};

/// The store. Heaps are values: every mutating operation returns a new
/// heap, so instances can be shared freely.
struct Heap {
    std::map<std::size_t, HeapObject> objects;
    bool operator==(const Heap&) const = default;
};

/// Heap with exactly one binding: the NPE object at location 0.
Heap init_heap();

/// Picks a fresh location (1 + max key) without installing anything;
/// installation is the reduction rule's job. Undeclared class -> nullopt.
std::optional<std::pair<Loc, Heap>> alloc(const Heap& h, const Program& p,
                                          const std::string& cls);

std::optional<std::string> get_class_name(const Heap& h, std::size_t n);

/// Field binding at object `n`, absent when the object or field is unmapped.
std::optional<Loc> field_read(const Heap& h, std::size_t n, const std::string& field);

/// Insert-or-overwrite of the field binding inside the object at `n`.
/// Unmapped `n` -> nullopt.
std::optional<Heap> field_write(const Heap& h, std::size_t n, const std::string& field,
                                const Loc& value);

/// Heap coherence: every object's key set equals the field names of its
/// declared class, and every stored non-null location is mapped with a
/// class below the field's declared class.
bool type_correct_heap(const Program& p, const Heap& h);

/// One line per object, `<loc>: <class> { <field>=<loc-or-null>, ... }`,
/// locations in ascending order.
std::string dump_heap(const Heap& h);

}  // namespace jafun
