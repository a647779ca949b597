#pragma once
#include <map>
#include <memory>
#include <string>

#include "chart.hpp"

namespace gkpot {

// Grammar version reported in config echoes and docs/config.md.
constexpr int kExpressionGrammarVersion = 1;

struct ExprNode;

class Expression {
public:
    // constants: extra named values usable in the text (pi and e are built in)
    static Expression parse(const std::string& text, int n, const std::map<std::string, double>& constants = {});
    ad::T2 eval(std::span<const ad::T2> q, double t) const;
    bool depends_on_t() const;
    const std::string& text() const { return text_; }
    int n() const { return n_; }

private:
    std::shared_ptr<const ExprNode> root_;
    std::string text_;
    int n_ = 0;
};

PotentialFn potential_from_expression(const std::string& text, int n,
                                      const std::map<std::string, double>& constants = {});

// built-in catalog: quadratic, split_quadratic, split_quartic, dilog
PotentialFn catalog_potential(const std::string& name, int n, const std::map<std::string, double>& params = {});
std::vector<std::string> catalog_names();

// a(q1) + b(q2) assembled from one-variable pieces
PotentialFn split_potential(std::string name, std::function<ad::T2(const ad::T2&)> a,
                            std::function<ad::T2(const ad::T2&)> b);

PotentialFn scaled(const PotentialFn& K, double s);

}  // namespace gkpot
