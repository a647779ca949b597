#include "potential.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace gkpot {

struct ExprNode {
    enum Kind { Num, Var, Time, Add, Sub, Mul, Div, Pow, Neg, Call } kind = Num;
    double num = 0;
    int var = 0;
    std::string fn;
    std::vector<std::shared_ptr<const ExprNode>> kids;
};

namespace {

using NodeP = std::shared_ptr<const ExprNode>;

NodeP make(ExprNode::Kind k, std::vector<NodeP> kids = {}) {
    auto p = std::make_shared<ExprNode>();
    p->kind = k;
    p->kids = std::move(kids);
    return p;
}

bool uses_t(const ExprNode& e) {
    if (e.kind == ExprNode::Time) return true;
    for (auto& k : e.kids)
        if (uses_t(*k)) return true;
    return false;
}

bool is_constant(const ExprNode& e) {
    if (e.kind == ExprNode::Var || e.kind == ExprNode::Time) return false;
    for (auto& k : e.kids)
        if (!is_constant(*k)) return false;
    return true;
}

class Parser {
public:
    Parser(const std::string& s, int n, const std::map<std::string, double>& c) : s_(s), n_(n), consts_(c) {}

    NodeP parse() {
        NodeP e = expr();
        skip();
        if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
        return e;
    }

private:
    const std::string& s_;
    size_t pos_ = 0;
    int n_;
    const std::map<std::string, double>& consts_;

    [[noreturn]] void fail(const std::string& what) {
        throw Error(ErrorCode::config, "expression: " + what + " at offset " + std::to_string(pos_) + " in \"" + s_ + "\"");
    }
    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodeP expr() {
        NodeP l = term();
        for (;;) {
            if (eat('+'))
                l = make(ExprNode::Add, {l, term()});
            else if (eat('-'))
                l = make(ExprNode::Sub, {l, term()});
            else
                return l;
        }
    }
    NodeP term() {
        NodeP l = unary();
        for (;;) {
            if (eat('*'))
                l = make(ExprNode::Mul, {l, unary()});
            else if (eat('/'))
                l = make(ExprNode::Div, {l, unary()});
            else
                return l;
        }
    }
    NodeP unary() {
        if (eat('-')) return make(ExprNode::Neg, {unary()});
        if (eat('+')) return unary();
        return power();
    }
    NodeP power() {
        NodeP b = atom();
        if (eat('^')) return make(ExprNode::Pow, {b, unary()});
        return b;
    }
    NodeP atom() {
        skip();
        if (pos_ >= s_.size()) fail("unexpected end");
        char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            NodeP e = expr();
            if (!eat(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<size_t>(end - begin);
            auto p = std::make_shared<ExprNode>();
            p->kind = ExprNode::Num;
            p->num = v;
            return p;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
            std::string id = s_.substr(start, pos_ - start);
            skip();
            if (pos_ < s_.size() && s_[pos_] == '(') {
                static const char* fns[] = {"conj", "abs2", "ln", "log", "exp", "dilog", "re", "im"};
                bool known = false;
                for (auto f : fns) known = known || id == f;
                if (!known) fail("unknown function " + id);
                ++pos_;
                NodeP arg = expr();
                if (!eat(')')) fail("missing ')'");
                auto p = std::make_shared<ExprNode>();
                p->kind = ExprNode::Call;
                p->fn = id == "log" ? "ln" : id;
                p->kids = {arg};
                return p;
            }
            auto p = std::make_shared<ExprNode>();
            if (id == "t") {
                p->kind = ExprNode::Time;
                return p;
            }
            if (id.size() > 1 && id[0] == 'q' && std::all_of(id.begin() + 1, id.end(), ::isdigit)) {
                int k = std::stoi(id.substr(1));
                if (k < 1 || k > n_) fail("coordinate " + id + " outside chart dimension");
                p->kind = ExprNode::Var;
                p->var = k - 1;
                return p;
            }
            p->kind = ExprNode::Num;
            if (auto it = consts_.find(id); it != consts_.end())
                p->num = it->second;
            else if (id == "pi")
                p->num = std::numbers::pi;
            else if (id == "e")
                p->num = std::numbers::e;
            else
                fail("unknown identifier " + id);
            return p;
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }
};

ad::T2 eval_node(const ExprNode& e, std::span<const ad::T2> q, double t) {
    switch (e.kind) {
        case ExprNode::Num: return ad::T2(e.num);
        case ExprNode::Var: return q[e.var];
        case ExprNode::Time: return ad::T2(t);
        case ExprNode::Add: return eval_node(*e.kids[0], q, t) + eval_node(*e.kids[1], q, t);
        case ExprNode::Sub: return eval_node(*e.kids[0], q, t) - eval_node(*e.kids[1], q, t);
        case ExprNode::Mul: return eval_node(*e.kids[0], q, t) * eval_node(*e.kids[1], q, t);
        case ExprNode::Div: return eval_node(*e.kids[0], q, t) / eval_node(*e.kids[1], q, t);
        case ExprNode::Neg: return -eval_node(*e.kids[0], q, t);
        case ExprNode::Pow: {
            ad::T2 b = eval_node(*e.kids[0], q, t);
            if (is_constant(*e.kids[1])) {
                ad::T2 p = eval_node(*e.kids[1], q, t);
                return ad::pow(b, p.v.real());
            }
            return ad::exp(eval_node(*e.kids[1], q, t) * ad::log(b));
        }
        case ExprNode::Call: {
            ad::T2 a = eval_node(*e.kids[0], q, t);
            if (e.fn == "conj") return ad::conj(a);
            if (e.fn == "abs2") return a * ad::conj(a);
            if (e.fn == "ln") return ad::log(a);
            if (e.fn == "exp") return ad::exp(a);
            if (e.fn == "dilog") return dilog(a);
            if (e.fn == "re") return ad::real(a);
            if (e.fn == "im") return ad::imag(a);
            break;
        }
    }
    throw Error(ErrorCode::invalid_argument, "expression: bad node");
}

}  // namespace

Expression Expression::parse(const std::string& text, int n, const std::map<std::string, double>& constants) {
    Expression e;
    Parser p(text, n, constants);
    e.root_ = p.parse();
    e.text_ = text;
    e.n_ = n;
    return e;
}

ad::T2 Expression::eval(std::span<const ad::T2> q, double t) const { return eval_node(*root_, q, t); }

bool Expression::depends_on_t() const { return uses_t(*root_); }

PotentialFn potential_from_expression(const std::string& text, int n, const std::map<std::string, double>& constants) {
    Expression e = Expression::parse(text, n, constants);
    PotentialFn K;
    K.name = text;
    K.n = n;
    K.eval = [e](std::span<const ad::T2> q, double t) { return ad::real(e.eval(q, t)); };
    return K;
}

PotentialFn split_potential(std::string name, std::function<ad::T2(const ad::T2&)> a,
                            std::function<ad::T2(const ad::T2&)> b) {
    PotentialFn K;
    K.name = std::move(name);
    K.n = 2;
    K.eval = [a, b](std::span<const ad::T2> q, double) { return ad::real(a(q[0]) + b(q[1])); };
    return K;
}

PotentialFn scaled(const PotentialFn& K, double s) {
    PotentialFn r = K;
    r.name = std::to_string(s) + "*(" + K.name + ")";
    auto inner = K.eval;
    r.eval = [inner, s](std::span<const ad::T2> q, double t) { return ad::T2(s) * inner(q, t); };
    return r;
}

std::vector<std::string> catalog_names() { return {"quadratic", "split_quadratic", "split_quartic", "dilog"}; }

PotentialFn catalog_potential(const std::string& name, int n, const std::map<std::string, double>& params) {
    auto param = [&](const char* key, double dflt) {
        auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    auto abs2 = [](const ad::T2& q) { return q * ad::conj(q); };
    if (name == "quadratic") {
        PotentialFn K;
        K.name = "quadratic";
        K.n = n;
        K.eval = [abs2](std::span<const ad::T2> q, double) {
            ad::T2 s(0.0);
            for (auto& x : q) s = s + abs2(x);
            return ad::real(s);
        };
        return K;
    }
    if (n != 2) throw Error(ErrorCode::config, "catalog potential " + name + " needs two coordinates");
    const double C = param("C", 2.0);
    if (!(C > 0)) throw Error(ErrorCode::config, "catalog potential " + name + ": C must be positive");
    auto a = [abs2, C](const ad::T2& q) { return abs2(q) / ad::T2(C); };
    if (name == "split_quadratic") return split_potential(name, a, abs2);
    if (name == "split_quartic")
        return split_potential(name, a, [abs2](const ad::T2& q) { return ad::pow(abs2(q), 2) / ad::T2(4.0); });
    if (name == "dilog")
        return split_potential(name, a, [abs2](const ad::T2& q) { return -dilog(-abs2(q)); });
    throw Error(ErrorCode::config, "unknown catalog potential " + name);
}

}  // namespace gkpot
