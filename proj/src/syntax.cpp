#include "jafun/syntax.hpp"

#include <sstream>

namespace jafun {

std::string to_string(AccessMode m) {
    switch (m) {
    case AccessMode::RWR: return "rwr";
    case AccessMode::RD: return "rd";
    case AccessMode::ATM: return "atm";
    }
    return "?";
}

std::string to_string(const ACId& t) {
    std::string cls = t.cls.is_bottom() ? "bottom" : t.cls.name();
    return "<" + cls + ", " + to_string(t.mode) + ">";
}

std::string to_string(const Value& v) {
    switch (v.kind()) {
    case Value::Kind::Var: return v.name();
    case Value::Kind::This: return "this";
    case Value::Kind::Null: return "null";
    case Value::Kind::Loc: return "loc#" + std::to_string(v.loc_index());
    }
    return "?";
}

ExprPtr make_new(AccessMode mode, std::string cls, std::vector<Value> args) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::New;
    e->mode = mode;
    e->cls = std::move(cls);
    e->args = std::move(args);
    return e;
}

ExprPtr make_let(std::string cls, std::string var, ExprPtr bound, ExprPtr body) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Let;
    e->cls = std::move(cls);
    e->var = std::move(var);
    e->sub1 = std::move(bound);
    e->sub2 = std::move(body);
    return e;
}

ExprPtr make_field_read(Value recv, std::string field) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::FieldRead;
    e->recv = std::move(recv);
    e->member = std::move(field);
    return e;
}

ExprPtr make_field_write(Value recv, std::string field, Value val) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::FieldWrite;
    e->recv = std::move(recv);
    e->member = std::move(field);
    e->val = std::move(val);
    return e;
}

ExprPtr make_if(Value lhs, Value rhs, ExprPtr then_branch, ExprPtr else_branch) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::If;
    e->val = std::move(lhs);
    e->val2 = std::move(rhs);
    e->sub1 = std::move(then_branch);
    e->sub2 = std::move(else_branch);
    return e;
}

ExprPtr make_invoke(Value recv, std::string method, std::vector<Value> args) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Invoke;
    e->recv = std::move(recv);
    e->member = std::move(method);
    e->args = std::move(args);
    return e;
}

ExprPtr make_val(Value v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Val;
    e->val = std::move(v);
    return e;
}

ExprPtr make_throw(Value v) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::Throw;
    e->val = std::move(v);
    return e;
}

ExprPtr make_try(ExprPtr body, AccessMode mode, std::string cls, std::string var,
                 ExprPtr handler) {
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::TryCatch;
    e->mode = mode;
    e->cls = std::move(cls);
    e->var = std::move(var);
    e->sub1 = std::move(body);
    e->sub2 = std::move(handler);
    return e;
}

bool expr_eq(const ExprPtr& a, const ExprPtr& b) {
    if (a == b) return true;
    if (!a || !b) return false;
    return *a == *b;
}

bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case Expr::Kind::New:
        return a.mode == b.mode && a.cls == b.cls && a.args == b.args;
    case Expr::Kind::Let:
        return a.cls == b.cls && a.var == b.var && expr_eq(a.sub1, b.sub1) &&
               expr_eq(a.sub2, b.sub2);
    case Expr::Kind::FieldRead:
        return a.recv == b.recv && a.member == b.member;
    case Expr::Kind::FieldWrite:
        return a.recv == b.recv && a.member == b.member && a.val == b.val;
    case Expr::Kind::If:
        return a.val == b.val && a.val2 == b.val2 && expr_eq(a.sub1, b.sub1) &&
               expr_eq(a.sub2, b.sub2);
    case Expr::Kind::Invoke:
        return a.recv == b.recv && a.member == b.member && a.args == b.args;
    case Expr::Kind::Val:
        return a.val == b.val;
    case Expr::Kind::Throw:
        return a.val == b.val;
    case Expr::Kind::TryCatch:
        return a.mode == b.mode && a.cls == b.cls && a.var == b.var &&
               expr_eq(a.sub1, b.sub1) && expr_eq(a.sub2, b.sub2);
    }
    return false;
}

CtxNode ctx_let(std::string cls, std::string var, ExprPtr body) {
    CtxNode n;
    n.kind = CtxNode::Kind::Let;
    n.cls = std::move(cls);
    n.var = std::move(var);
    n.rest = std::move(body);
    return n;
}

CtxNode ctx_try(AccessMode mode, std::string cls, std::string var, ExprPtr handler) {
    CtxNode n;
    n.kind = CtxNode::Kind::Try;
    n.mode = mode;
    n.cls = std::move(cls);
    n.var = std::move(var);
    n.rest = std::move(handler);
    return n;
}

ExprPtr context_plug(const Ctx& ctx, ExprPtr e) {
    for (const CtxNode& node : ctx) {
        if (node.kind == CtxNode::Kind::Let) {
            e = make_let(node.cls, node.var, std::move(e), node.rest);
        } else {
            e = make_try(std::move(e), node.mode, node.cls, node.var, node.rest);
        }
    }
    return e;
}

namespace {

void print_values(std::ostream& out, const std::vector<Value>& vs) {
    for (std::size_t i = 0; i < vs.size(); ++i) {
        if (i > 0) out << ", ";
        out << to_string(vs[i]);
    }
}

void print_expr(std::ostream& out, const Expr& e) {
    switch (e.kind) {
    case Expr::Kind::New:
        out << "new " << to_string(e.mode) << " " << e.cls << "(";
        print_values(out, e.args);
        out << ")";
        break;
    case Expr::Kind::Let:
        out << "let " << e.cls << " " << e.var << " = ";
        print_expr(out, *e.sub1);
        out << " in ";
        print_expr(out, *e.sub2);
        break;
    case Expr::Kind::FieldRead:
        out << to_string(e.recv) << "." << e.member;
        break;
    case Expr::Kind::FieldWrite:
        out << to_string(e.recv) << "." << e.member << " = " << to_string(e.val);
        break;
    case Expr::Kind::If:
        out << "if (" << to_string(e.val) << " == " << to_string(e.val2) << ") ";
        print_expr(out, *e.sub1);
        out << " else ";
        print_expr(out, *e.sub2);
        break;
    case Expr::Kind::Invoke:
        out << to_string(e.recv) << "." << e.member << "(";
        print_values(out, e.args);
        out << ")";
        break;
    case Expr::Kind::Val:
        out << to_string(e.val);
        break;
    case Expr::Kind::Throw:
        out << "throw " << to_string(e.val);
        break;
    case Expr::Kind::TryCatch:
        out << "try { ";
        print_expr(out, *e.sub1);
        out << " } catch (" << to_string(e.mode) << " " << e.cls << " " << e.var << ") { ";
        print_expr(out, *e.sub2);
        out << " }";
        break;
    }
}

}  // namespace

std::string to_string(const Expr& e) {
    std::ostringstream out;
    print_expr(out, e);
    return out.str();
}

std::string print_method(const MethodDecl& m) {
    std::ostringstream out;
    out << "  ";
    if (m.annotated) out << to_string(m.ret_mode) << " ";
    out << m.ret_cls << " ";
    if (m.annotated) out << to_string(m.recv_mode) << " ";
    out << m.name << "(";
    for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (i > 0) out << ", ";
        if (m.annotated) out << to_string(m.params[i].mode) << " ";
        out << m.params[i].cls << " " << m.params[i].name;
    }
    out << ")";
    if (!m.throws_list.empty()) {
        out << " throws ";
        for (std::size_t i = 0; i < m.throws_list.size(); ++i) {
            if (i > 0) out << ", ";
            if (m.annotated) out << to_string(m.throws_list[i].mode) << " ";
            out << m.throws_list[i].cls;
        }
    }
    out << " { " << to_string(*m.body) << " }";
    return out.str();
}

std::string print_program(const Program& p) {
    std::ostringstream out;
    for (const ClassDecl& c : p) {
        out << "class " << c.name;
        if (c.extends) out << " ext " << *c.extends;
        out << " {\n";
        for (const FieldDecl& f : c.fields) {
            out << "  ";
            if (f.fmode == FieldMode::REP) out << "rep ";
            out << f.cls << " " << f.name << ";\n";
        }
        for (const MethodDecl& m : c.methods) {
            out << print_method(m) << "\n";
        }
        out << "}\n\n";
    }
    return out.str();
}

}  // namespace jafun
