#include "extremal/expression.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "extremal/errors.hpp"

namespace extremal {

class Expression::Parser {
public:
    Parser(std::string_view src, int dim, std::size_t offset, Expression& out)
        : src_(src), dim_(dim), offset_(offset), out_(out) {}

    void run() {
        skip_ws();
        if (pos_ == src_.size()) {
            fail("empty expression");
        }
        expr();
        skip_ws();
        if (pos_ != src_.size()) {
            fail(std::string("unexpected character '") + src_[pos_] + "'");
        }
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, offset_ + pos_); }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void emit(Op op, std::int32_t index = 0, double value = 0.0) {
        out_.program_.push_back({op, index, value});
        switch (op) {
            case Op::Const:
            case Op::Var:
                ++depth_;
                break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
                --depth_;
                break;
            default:
                break;
        }
        if (depth_ > out_.max_depth_) {
            out_.max_depth_ = depth_;
        }
    }

    void expr() {
        term();
        for (;;) {
            if (accept('+')) {
                term();
                emit(Op::Add);
            } else if (accept('-')) {
                term();
                emit(Op::Sub);
            } else {
                return;
            }
        }
    }

    void term() {
        unary();
        for (;;) {
            if (accept('*')) {
                unary();
                emit(Op::Mul);
            } else if (accept('/')) {
                unary();
                emit(Op::Div);
            } else {
                return;
            }
        }
    }

    void unary() {
        if (accept('-')) {
            unary();
            emit(Op::Neg);
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }

    void power() {
        primary();
        if (accept('^')) {
            skip_ws();
            const std::size_t start = pos_;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
                ++pos_;
            }
            if (start == pos_) {
                pos_ = start;
                fail("exponent must be a non-negative integer literal");
            }
            int exponent = 0;
            auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, exponent);
            if (ec != std::errc() || exponent > 64) {
                pos_ = start;
                fail("exponent out of range");
            }
            emit(Op::Pow, exponent);
        }
    }

    void primary() {
        skip_ws();
        if (pos_ >= src_.size()) {
            fail("unexpected end of expression");
        }
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            expr();
            if (!accept(')')) {
                fail("expected ')'");
            }
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            identifier();
            return;
        }
        fail(std::string("unexpected character '") + c + "'");
    }

    void number() {
        const std::size_t start = pos_;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), value);
        if (ec != std::errc()) {
            fail("malformed number");
        }
        pos_ = static_cast<std::size_t>(ptr - src_.data());
        if (!std::isfinite(value)) {
            pos_ = start;
            fail("number out of range");
        }
        emit(Op::Const, 0, value);
    }

    void identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
            ++pos_;
        }
        const std::string_view name = src_.substr(start, pos_ - start);

        if (name == "exp" || name == "sin" || name == "cos") {
            if (!accept('(')) {
                fail("expected '(' after function name");
            }
            expr();
            if (!accept(')')) {
                fail("expected ')'");
            }
            emit(name == "exp" ? Op::Exp : name == "sin" ? Op::Sin : Op::Cos);
            return;
        }

        if (name.size() >= 2 && name[0] == 'x') {
            int index = 0;
            auto digits = name.substr(1);
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
            if (ec == std::errc() && ptr == digits.data() + digits.size() && digits[0] != '0' &&
                index >= 1 && index <= dim_) {
                emit(Op::Var, index - 1);
                out_.uses_variables_ = true;
                return;
            }
        }
        pos_ = start;
        fail("unknown identifier '" + std::string(name) + "'");
    }

    std::string_view src_;
    int dim_;
    std::size_t offset_;
    Expression& out_;
    std::size_t pos_ = 0;
    int depth_ = 0;
};

Expression Expression::parse(std::string_view source, int dim, std::size_t offset) {
    if (dim <= 0) {
        throw DimensionError("expression dimension must be positive");
    }
    Expression e;
    e.dim_ = dim;
    Parser(source, dim, offset, e).run();
    return e;
}

double Expression::evaluate(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) {
        throw DimensionError("expression evaluated at a point of wrong dimension");
    }
    constexpr int kInlineDepth = 32;
    std::array<double, kInlineDepth> inline_stack{};
    std::vector<double> heap_stack;
    double* stack = inline_stack.data();
    if (max_depth_ > kInlineDepth) {
        heap_stack.resize(static_cast<std::size_t>(max_depth_));
        stack = heap_stack.data();
    }

    int top = -1;
    for (const Instr& in : program_) {
        switch (in.op) {
            case Op::Const:
                stack[++top] = in.value;
                break;
            case Op::Var:
                stack[++top] = x[static_cast<std::size_t>(in.index)];
                break;
            case Op::Add:
                stack[top - 1] += stack[top];
                --top;
                break;
            case Op::Sub:
                stack[top - 1] -= stack[top];
                --top;
                break;
            case Op::Mul:
                stack[top - 1] *= stack[top];
                --top;
                break;
            case Op::Div:
                stack[top - 1] /= stack[top];
                --top;
                break;
            case Op::Neg:
                stack[top] = -stack[top];
                break;
            case Op::Pow: {
                double base = stack[top];
                double acc = 1.0;
                for (int e = in.index; e > 0; e >>= 1) {
                    if (e & 1) {
                        acc *= base;
                    }
                    base *= base;
                }
                stack[top] = acc;
                break;
            }
            case Op::Exp:
                stack[top] = std::exp(stack[top]);
                break;
            case Op::Sin:
                stack[top] = std::sin(stack[top]);
                break;
            case Op::Cos:
                stack[top] = std::cos(stack[top]);
                break;
        }
    }
    return stack[0];
}

}  // namespace extremal
