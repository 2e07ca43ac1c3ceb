#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace jafun {

inline constexpr const char* kObjectClass = "Object";
inline constexpr const char* kNpeClass = "NPE";

/// Access modes: rwr (read-write), rd (read-only), atm (sealed).
enum class AccessMode { RWR, RD, ATM };

/// Field annotation: rep (part of the enclosing compound value) or plain.
enum class FieldMode { REP, PLAIN };

std::string to_string(AccessMode m);

/// A class reference: either a declared class name or Bottom, the type of
/// null. Bottom never appears in declarations, only in inferred types.
class ClassRef {
public:
    static ClassRef bottom() { return ClassRef{}; }
    static ClassRef named(std::string name) {
        ClassRef r;
        r.name_ = std::move(name);
        return r;
    }
    bool is_bottom() const { return !name_.has_value(); }
    const std::string& name() const { return *name_; }
    bool operator==(const ClassRef&) const = default;

private:
    std::optional<std::string> name_;
};

/// A (class, access mode) pair: the type attributed to expressions and
/// locations.
struct ACId {
    ClassRef cls;
    AccessMode mode = AccessMode::RWR;
    bool operator==(const ACId&) const = default;
};

std::string to_string(const ACId& t);

/// Values: variables, `this`, `null`, and runtime locations. Location
/// values appear only after substitution, never in parsed source.
class Value {
public:
    enum class Kind { Var, This, Null, Loc };

    static Value var(std::string name) {
        Value v;
        v.kind_ = Kind::Var;
        v.name_ = std::move(name);
        return v;
    }
    static Value this_ref() {
        Value v;
        v.kind_ = Kind::This;
        return v;
    }
    static Value null() { return Value{}; }
    static Value loc(std::size_t index) {
        Value v;
        v.kind_ = Kind::Loc;
        v.loc_ = index;
        return v;
    }

    Kind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    std::size_t loc_index() const { return loc_; }

    /// Null and concrete locations both count as location values.
    bool is_location() const { return kind_ == Kind::Null || kind_ == Kind::Loc; }

    bool operator==(const Value&) const = default;

private:
    Kind kind_ = Kind::Null;
    std::string name_;
    std::size_t loc_ = 0;
};

std::string to_string(const Value& v);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Expression node. One struct covers all nine constructors; only the
/// fields relevant to `kind` are meaningful. Nodes are immutable and
/// shared; argument positions hold Values only, as the grammar demands.
struct Expr {
    enum class Kind { New, Let, FieldRead, FieldWrite, If, Invoke, Val, Throw, TryCatch };

    Kind kind = Kind::Val;
    AccessMode mode = AccessMode::RWR;  // New allocation mode / TryCatch catch mode
    std::string cls;                    // New / Let / TryCatch class name
    std::string var;                    // Let / TryCatch binder
    std::string member;                 // field or method name
    Value recv;                         // FieldRead / FieldWrite / Invoke receiver
    Value val;                          // Val / Throw payload, FieldWrite rhs, If lhs
    Value val2;                         // If rhs
    std::vector<Value> args;            // New / Invoke arguments
    ExprPtr sub1;                       // Let bound / If then / TryCatch body
    ExprPtr sub2;                       // Let body / If else / TryCatch handler
};

ExprPtr make_new(AccessMode mode, std::string cls, std::vector<Value> args);
ExprPtr make_let(std::string cls, std::string var, ExprPtr bound, ExprPtr body);
ExprPtr make_field_read(Value recv, std::string field);
ExprPtr make_field_write(Value recv, std::string field, Value val);
ExprPtr make_if(Value lhs, Value rhs, ExprPtr then_branch, ExprPtr else_branch);
ExprPtr make_invoke(Value recv, std::string method, std::vector<Value> args);
ExprPtr make_val(Value v);
ExprPtr make_throw(Value v);
ExprPtr make_try(ExprPtr body, AccessMode mode, std::string cls, std::string var,
                 ExprPtr handler);

/// Structural (deep) equality.
bool operator==(const Expr& a, const Expr& b);
bool expr_eq(const ExprPtr& a, const ExprPtr& b);

std::string to_string(const Expr& e);

/// One single-hole evaluation-context node. The hole sits where the
/// evaluated subexpression goes; `rest` is the let body / try handler.
struct CtxNode {
    enum class Kind { Let, Try };
    Kind kind = Kind::Let;
    AccessMode mode = AccessMode::RWR;  // Try only
    std::string cls;
    std::string var;
    ExprPtr rest;

    bool operator==(const CtxNode& o) const {
        return kind == o.kind && mode == o.mode && cls == o.cls && var == o.var &&
               expr_eq(rest, o.rest);
    }
};

CtxNode ctx_let(std::string cls, std::string var, ExprPtr body);
CtxNode ctx_try(AccessMode mode, std::string cls, std::string var, ExprPtr handler);

/// Evaluation context: innermost node first.
using Ctx = std::vector<CtxNode>;

/// Folds the context around `e`, innermost node applied first.
ExprPtr context_plug(const Ctx& ctx, ExprPtr e);

/// Execution mode of a frame: normal, or dispatching an exception of a
/// given class.
class ExecMode {
public:
    static ExecMode normal() { return ExecMode{}; }
    static ExecMode exceptional(std::string cls) {
        ExecMode m;
        m.exc_ = std::move(cls);
        return m;
    }
    bool is_normal() const { return !exc_.has_value(); }
    const std::string& exception_class() const { return *exc_; }
    bool operator==(const ExecMode&) const = default;

private:
    std::optional<std::string> exc_;
};

/// One frame: evaluation context, redex, execution mode.
struct Frame {
    Ctx ctx;  // innermost node first
    ExprPtr redex;
    ExecMode mode;

    bool operator==(const Frame& o) const {
        return ctx == o.ctx && expr_eq(redex, o.redex) && mode == o.mode;
    }
};

/// Frame stack; back() is the topmost (currently executing) frame.
using FrameStack = std::vector<Frame>;

struct FieldDecl {
    FieldMode fmode = FieldMode::PLAIN;
    std::string cls;
    std::string name;
    bool operator==(const FieldDecl&) const = default;
};

struct ParamDecl {
    AccessMode mode = AccessMode::RWR;
    std::string cls;
    std::string name;
    bool operator==(const ParamDecl&) const = default;
};

struct ThrowsDecl {
    AccessMode mode = AccessMode::RWR;
    std::string cls;
    bool operator==(const ThrowsDecl&) const = default;
};

/// Method declaration. Unannotated methods are normalized at parse time
/// to all-RWR modes with annotated=false.
struct MethodDecl {
    bool annotated = true;
    AccessMode ret_mode = AccessMode::RWR;
    std::string ret_cls;
    AccessMode recv_mode = AccessMode::RWR;
    std::string name;
    std::vector<ParamDecl> params;
    std::vector<ThrowsDecl> throws_list;
    ExprPtr body;

    bool operator==(const MethodDecl& o) const {
        return annotated == o.annotated && ret_mode == o.ret_mode && ret_cls == o.ret_cls &&
               recv_mode == o.recv_mode && name == o.name && params == o.params &&
               throws_list == o.throws_list && expr_eq(body, o.body);
    }
};

struct ClassDecl {
    std::string name;
    std::optional<std::string> extends;  // absent only for Object
    std::vector<FieldDecl> fields;
    std::vector<MethodDecl> methods;
    bool operator==(const ClassDecl&) const = default;
};

using Program = std::vector<ClassDecl>;

/// Renders a program in the concrete syntax accepted by the parser.
std::string print_program(const Program& p);
std::string print_method(const MethodDecl& m);

}  // namespace jafun
