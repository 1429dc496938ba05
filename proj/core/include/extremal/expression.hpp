#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace extremal {

// A scalar expression over x1..x<dim>, compiled to a postfix program.
//
// Grammar (standard precedence, left associative):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' integer)?
//   primary := number | 'x'<index> | ('exp' | 'sin' | 'cos') '(' expr ')' | '(' expr ')'
//
// Only smooth primitives are accepted; exponents must be non-negative integer
// literals so every expression is C-infinity wherever its denominators are
// nonzero.
class Expression {
public:
    // offset is added to reported error positions so callers parsing a
    // sub-range of a larger text get positions into that text.
    static Expression parse(std::string_view source, int dim, std::size_t offset = 0);

    double evaluate(std::span<const double> x) const;

    bool is_constant() const noexcept { return !uses_variables_; }
    int dim() const noexcept { return dim_; }

private:
    enum class Op : std::uint8_t { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Exp, Sin, Cos };

    struct Instr {
        Op op;
        std::int32_t index;  // variable index for Var, exponent for Pow
        double value;        // literal for Const
    };

    class Parser;

    std::vector<Instr> program_;
    int dim_ = 0;
    int max_depth_ = 0;
    bool uses_variables_ = false;
};

}  // namespace extremal
