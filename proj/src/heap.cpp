#include "jafun/heap.hpp"

#include <sstream>

namespace jafun {

std::string to_string(const Loc& l) {
    return l.is_null() ? "null" : std::to_string(l.index());
}

Value to_value(const Loc& l) {
    return l.is_null() ? Value::null() : Value::loc(l.index());
}

std::optional<Loc> as_location(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::Null: return Loc::null();
    case Value::Kind::Loc: return Loc::at(v.loc_index());
    default: return std::nullopt;
    }
}

Heap init_heap() {
    Heap h;
    h.objects.emplace(kNpeLoc, HeapObject{{}, kNpeClass});
    return h;
}

std::optional<std::pair<Loc, Heap>> alloc(const Heap& h, const Program& p,
                                          const std::string& cls) {
    if (find_class(p, cls) == nullptr) return std::nullopt;
    std::size_t fresh = h.objects.empty() ? 0 : h.objects.rbegin()->first + 1;
    return std::make_pair(Loc::at(fresh), h);
}

std::optional<std::string> get_class_name(const Heap& h, std::size_t n) {
    auto it = h.objects.find(n);
    if (it == h.objects.end()) return std::nullopt;
    return it->second.cls;
}

std::optional<Loc> field_read(const Heap& h, std::size_t n, const std::string& field) {
    auto it = h.objects.find(n);
    if (it == h.objects.end()) return std::nullopt;
    auto fit = it->second.fields.find(field);
    if (fit == it->second.fields.end()) return std::nullopt;
    return fit->second;
}

std::optional<Heap> field_write(const Heap& h, std::size_t n, const std::string& field,
                                const Loc& value) {
    auto it = h.objects.find(n);
    if (it == h.objects.end()) return std::nullopt;
    Heap out = h;
    out.objects[n].fields[field] = value;
    return out;
}

bool type_correct_heap(const Program& p, const Heap& h) {
    for (const auto& [n, obj] : h.objects) {
        auto declared = flds(p, obj.cls);
        if (!declared) return false;
        if (declared->size() != obj.fields.size()) return false;
        for (const FieldDecl& f : *declared) {
            auto it = obj.fields.find(f.name);
            if (it == obj.fields.end()) return false;
            const Loc& stored = it->second;
            if (stored.is_null()) continue;
            auto cls = get_class_name(h, stored.index());
            if (!cls) return false;
            if (!subtype_leq(p, ClassRef::named(*cls), ClassRef::named(f.cls))) return false;
        }
    }
    return true;
}

std::string dump_heap(const Heap& h) {
    std::ostringstream out;
    for (const auto& [n, obj] : h.objects) {
        out << n << ": " << obj.cls << " {";
        bool first = true;
        for (const auto& [name, loc] : obj.fields) {
            out << (first ? " " : ", ") << name << "=" << to_string(loc);
            first = false;
        }
        out << " }\n";
    }
    return out.str();
}

}  // namespace jafun
