#include "mfldp/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

namespace mfldp {

ParseError::ParseError(Kind kind, std::size_t offset, const std::string& what)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), kind_(kind), offset_(offset) {}

using Op = RateExpr::Op;
using Cmp = RateExpr::Cmp;

class RateExpr::Parser {
 public:
  Parser(std::string_view src, const ParseContext& ctx) : src_(src), ctx_(ctx) {}

  RateExpr run() {
    auto pool = std::make_shared<Pool>();
    pool_ = pool.get();
    skip();
    if (pos_ >= src_.size()) fail(ParseError::Kind::Syntax, "empty expression");
    const int root = expr();
    skip();
    if (pos_ < src_.size()) fail(ParseError::Kind::Syntax, "unexpected '" + std::string(1, src_[pos_]) + "'");
    return RateExpr(std::move(pool), root);
  }

 private:
  [[noreturn]] void fail(ParseError::Kind k, const std::string& msg) const { throw ParseError(k, pos_, msg); }
  [[noreturn]] void fail_at(ParseError::Kind k, std::size_t at, const std::string& msg) const {
    throw ParseError(k, at, msg);
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) fail(ParseError::Kind::Syntax, std::string("expected '") + c + "' before end of input");
      fail(ParseError::Kind::Syntax, std::string("expected '") + c + "'");
    }
  }

  int add(Node n) {
    pool_->nodes.push_back(n);
    return static_cast<int>(pool_->nodes.size()) - 1;
  }
  int binary(Op op, int a, int b) {
    Node n{op};
    n.child[0] = a;
    n.child[1] = b;
    return add(n);
  }

  int expr() {
    int lhs = term();
    for (;;) {
      if (accept('+')) lhs = binary(Op::Add, lhs, term());
      else if (accept('-')) lhs = binary(Op::Sub, lhs, term());
      else return lhs;
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept('*')) lhs = binary(Op::Mul, lhs, unary());
      else if (accept('/')) lhs = binary(Op::Div, lhs, unary());
      else return lhs;
    }
  }

  int unary() {
    if (accept('-')) {
      Node n{Op::Neg};
      n.child[0] = unary();
      return add(n);
    }
    if (accept('+')) return unary();
    return primary();
  }

  int primary() {
    skip();
    if (pos_ >= src_.size()) fail(ParseError::Kind::Syntax, "unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      const int e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(ParseError::Kind::Syntax, std::string("unexpected '") + c + "'");
  }

  int number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t n = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_, ++n;
      return n;
    };
    std::size_t nd = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      nd += digits();
    }
    if (nd == 0) fail_at(ParseError::Kind::Syntax, start, "malformed number");
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) fail(ParseError::Kind::Syntax, "malformed exponent");
    }
    double v = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) fail_at(ParseError::Kind::Syntax, start, "malformed number");
    Node n{Op::Num};
    n.value = v;
    return add(n);
  }

  int identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    skip();
    if (pos_ < src_.size() && src_[pos_] == '(') return call(name, start);

    if (name.size() > 1 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) { return std::isdigit(static_cast<unsigned char>(ch)); })) {
      int idx = 0;
      std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (idx < 1 || (ctx_.dim && idx > *ctx_.dim))
        fail_at(ParseError::Kind::UnknownIdentifier, start, "unknown variable '" + std::string(name) + "'");
      Node n{Op::Var};
      n.index = idx - 1;
      return add(n);
    }
    if (auto it = ctx_.params.find(name); it != ctx_.params.end()) {
      Node n{Op::Param};
      n.value = it->second;
      n.index = static_cast<int>(pool_->param_names.size());
      pool_->param_names.emplace_back(name);
      return add(n);
    }
    fail_at(ParseError::Kind::UnknownIdentifier, start, "unknown identifier '" + std::string(name) + "'");
  }

  int call(std::string_view name, std::size_t start) {
    struct Fn {
      std::string_view name;
      Op op;
      int arity;
    };
    static constexpr Fn fns[] = {{"min", Op::Min, 2}, {"max", Op::Max, 2}, {"exp", Op::Exp, 1},
                                 {"log", Op::Log, 1}, {"abs", Op::Abs, 1}, {"cond", Op::Cond, 3}};
    const Fn* fn = nullptr;
    for (const auto& f : fns)
      if (f.name == name) fn = &f;
    if (!fn) fail_at(ParseError::Kind::UnknownIdentifier, start, "unknown function '" + std::string(name) + "'");
    expect('(');
    Node n{fn->op};
    int argc = 0;
    if (fn->op == Op::Cond) {
      const int lhs = expr();
      skip();
      const std::size_t at = pos_;
      Cmp cmp;
      if (accept('<')) cmp = accept('=') ? Cmp::Le : Cmp::Lt;
      else if (accept('>')) cmp = accept('=') ? Cmp::Ge : Cmp::Gt;
      else if (accept('=')) {
        expect('=');
        cmp = Cmp::Eq;
      } else if (accept('!')) {
        expect('=');
        cmp = Cmp::Ne;
      } else
        fail_at(ParseError::Kind::Syntax, at, "expected comparison in cond");
      n.cmp = cmp;
      n.child[0] = lhs;
      n.child[1] = expr();
      argc = 1;
      while (accept(',')) {
        if (argc + 1 > 3) fail_at(ParseError::Kind::Arity, start, "cond takes 3 arguments");
        n.child[argc + 1] = expr();
        ++argc;
      }
    } else {
      skip();
      if (!(pos_ < src_.size() && src_[pos_] == ')')) {
        do {
          if (argc >= fn->arity)
            fail_at(ParseError::Kind::Arity, start,
                    std::string(name) + " takes " + std::to_string(fn->arity) + " argument(s)");
          n.child[argc++] = expr();
        } while (accept(','));
      }
    }
    if (argc != fn->arity)
      fail_at(ParseError::Kind::Arity, start, std::string(name) + " takes " + std::to_string(fn->arity) + " argument(s)");
    expect(')');
    return add(n);
  }

  std::string_view src_;
  const ParseContext& ctx_;
  std::size_t pos_ = 0;
  Pool* pool_ = nullptr;
};

RateExpr RateExpr::parse(std::string_view source, const ParseContext& ctx) { return Parser(source, ctx).run(); }

double RateExpr::eval_node(int id, std::span<const double> x) const {
  const Node& n = pool_->nodes[static_cast<std::size_t>(id)];
  auto arg = [&](int i) { return eval_node(n.child[i], x); };
  switch (n.op) {
    case Op::Num:
    case Op::Param: return n.value;
    case Op::Var: return x[static_cast<std::size_t>(n.index)];
    case Op::Neg: return -arg(0);
    case Op::Add: return arg(0) + arg(1);
    case Op::Sub: return arg(0) - arg(1);
    case Op::Mul: return arg(0) * arg(1);
    case Op::Div: return arg(0) / arg(1);
    case Op::Min: {
      const double a = arg(0), b = arg(1);
      if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
      return std::min(a, b);
    }
    case Op::Max: {
      const double a = arg(0), b = arg(1);
      if (std::isnan(a) || std::isnan(b)) return std::numeric_limits<double>::quiet_NaN();
      return std::max(a, b);
    }
    case Op::Exp: return std::exp(arg(0));
    case Op::Log: return std::log(arg(0));
    case Op::Abs: return std::abs(arg(0));
    case Op::Cond: {
      const double a = arg(0), b = arg(1);
      bool p = false;
      switch (n.cmp) {
        case Cmp::Lt: p = a < b; break;
        case Cmp::Le: p = a <= b; break;
        case Cmp::Gt: p = a > b; break;
        case Cmp::Ge: p = a >= b; break;
        case Cmp::Eq: p = a == b; break;
        case Cmp::Ne: p = a != b; break;
      }
      return p ? arg(2) : arg(3);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

namespace {

void append_number(double v, std::string& out) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

const char* op_text(Op op) {
  switch (op) {
    case Op::Add: return " + ";
    case Op::Sub: return " - ";
    case Op::Mul: return " * ";
    case Op::Div: return " / ";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Abs: return "abs";
    default: return "";
  }
}

const char* cmp_text(Cmp c) {
  switch (c) {
    case Cmp::Lt: return " < ";
    case Cmp::Le: return " <= ";
    case Cmp::Gt: return " > ";
    case Cmp::Ge: return " >= ";
    case Cmp::Eq: return " == ";
    case Cmp::Ne: return " != ";
  }
  return "";
}

}  // namespace

void RateExpr::print_node(int id, std::string& out) const {
  const Node& n = pool_->nodes[static_cast<std::size_t>(id)];
  switch (n.op) {
    case Op::Num: append_number(n.value, out); return;
    case Op::Param: out += pool_->param_names[static_cast<std::size_t>(n.index)]; return;
    case Op::Var: out += "x" + std::to_string(n.index + 1); return;
    case Op::Neg:
      out += "(-";
      print_node(n.child[0], out);
      out += ")";
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      out += "(";
      print_node(n.child[0], out);
      out += op_text(n.op);
      print_node(n.child[1], out);
      out += ")";
      return;
    case Op::Min:
    case Op::Max:
      out += op_text(n.op);
      out += "(";
      print_node(n.child[0], out);
      out += ", ";
      print_node(n.child[1], out);
      out += ")";
      return;
    case Op::Exp:
    case Op::Log:
    case Op::Abs:
      out += op_text(n.op);
      out += "(";
      print_node(n.child[0], out);
      out += ")";
      return;
    case Op::Cond:
      out += "cond(";
      print_node(n.child[0], out);
      out += cmp_text(n.cmp);
      print_node(n.child[1], out);
      out += ", ";
      print_node(n.child[2], out);
      out += ", ";
      print_node(n.child[3], out);
      out += ")";
      return;
  }
}

std::string RateExpr::to_string() const {
  std::string s;
  print_node(root_, s);
  return s;
}

int RateExpr::max_variable() const {
  int m = 0;
  for (const auto& n : pool_->nodes)
    if (n.op == Op::Var) m = std::max(m, n.index + 1);
  return m;
}

bool RateExpr::equal_node(int id, const RateExpr& other, int oid) const {
  const Node& a = pool_->nodes[static_cast<std::size_t>(id)];
  const Node& b = other.pool_->nodes[static_cast<std::size_t>(oid)];
  if (a.op != b.op) return false;
  switch (a.op) {
    case Op::Num: return a.value == b.value || (std::isnan(a.value) && std::isnan(b.value));
    case Op::Var: return a.index == b.index;
    case Op::Param:
      return a.value == b.value &&
             pool_->param_names[static_cast<std::size_t>(a.index)] ==
                 other.pool_->param_names[static_cast<std::size_t>(b.index)];
    default: break;
  }
  if (a.op == Op::Cond && a.cmp != b.cmp) return false;
  for (int i = 0; i < 4; ++i) {
    if ((a.child[i] < 0) != (b.child[i] < 0)) return false;
    if (a.child[i] >= 0 && !equal_node(a.child[i], other, b.child[i])) return false;
  }
  return true;
}

}  // namespace mfldp
