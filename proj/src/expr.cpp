#include "hessianlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <memory>
#include <random>
#include <vector>

namespace hessianlab {

namespace {

using Fn = std::function<double(const std::vector<double>&)>;

struct Parser {
    const std::string& text;
    const int axes;
    std::size_t pos = 0;

    Parser(const std::string& t, int axes) : text(t), axes(axes) {}

    void skip() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool peek(char c) {
        skip();
        return pos < text.size() && text[pos] == c;
    }
    bool take(char c) {
        if (!peek(c)) return false;
        ++pos;
        return true;
    }
    [[noreturn]] void fail(const std::string& what) { throw expr_error(what, pos); }

    /// sin/cos arguments must be affine with frequencies in 2*pi*Z; probed
    /// numerically since the subtree is already compiled to a closure.
    void require_periodic_argument(const Fn& f, std::size_t at) {
        std::vector<double> z(static_cast<std::size_t>(axes), 0.0);
        double f0 = f(z);
        std::vector<double> slope(static_cast<std::size_t>(axes));
        for (int a = 0; a < axes; ++a) {
            z[static_cast<std::size_t>(a)] = 1.0;
            slope[static_cast<std::size_t>(a)] = f(z) - f0;
            z[static_cast<std::size_t>(a)] = 0.0;
        }
        std::mt19937 rng(12345);
        std::uniform_real_distribution<double> U(-1.0, 1.0);
        for (int t = 0; t < 8; ++t) {
            double predicted = f0;
            for (int a = 0; a < axes; ++a) {
                z[static_cast<std::size_t>(a)] = U(rng);
                predicted += slope[static_cast<std::size_t>(a)] * z[static_cast<std::size_t>(a)];
            }
            if (std::fabs(f(z) - predicted) > 1e-9 * (1.0 + std::fabs(predicted)))
                throw expr_error("sin/cos argument is not an affine form", at);
        }
        for (int a = 0; a < axes; ++a) {
            double k = slope[static_cast<std::size_t>(a)] / (2.0 * M_PI);
            if (std::fabs(k - std::round(k)) > 1e-9)
                throw expr_error("non-integer frequency breaks periodicity", at);
        }
    }

    Fn expression() {
        Fn left = term();
        for (;;) {
            if (take('+')) {
                Fn right = term();
                left = [left, right](const std::vector<double>& x) { return left(x) + right(x); };
            } else if (take('-')) {
                Fn right = term();
                left = [left, right](const std::vector<double>& x) { return left(x) - right(x); };
            } else {
                return left;
            }
        }
    }

    Fn term() {
        Fn left = factor();
        for (;;) {
            if (take('*')) {
                Fn right = factor();
                left = [left, right](const std::vector<double>& x) { return left(x) * right(x); };
            } else if (take('/')) {
                Fn right = factor();
                left = [left, right](const std::vector<double>& x) { return left(x) / right(x); };
            } else {
                return left;
            }
        }
    }

    Fn factor() {
        skip();
        if (take('-')) {
            Fn inner = factor();
            return [inner](const std::vector<double>& x) { return -inner(x); };
        }
        if (take('(')) {
            Fn inner = expression();
            if (!take(')')) fail("expected ')'");
            return inner;
        }
        if (pos >= text.size()) fail("unexpected end of expression");
        char c = text[pos];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = std::stod(text.substr(pos), &used);
            pos += used;
            return [v](const std::vector<double>&) { return v; };
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                ++pos;
            std::string name = text.substr(start, pos - start);
            if (name == "pi") {
                return [](const std::vector<double>&) { return M_PI; };
            }
            if (name == "sin" || name == "cos" || name == "exp") {
                std::size_t at = start;
                if (!take('(')) fail("expected '(' after " + name);
                Fn arg = expression();
                if (!take(')')) fail("expected ')'");
                if (name == "exp")
                    return [arg](const std::vector<double>& x) { return std::exp(arg(x)); };
                require_periodic_argument(arg, at);
                if (name == "sin")
                    return [arg](const std::vector<double>& x) { return std::sin(arg(x)); };
                return [arg](const std::vector<double>& x) { return std::cos(arg(x)); };
            }
            // coordinates x1, y1, x2, y2 map to axes 0..3
            if (name.size() == 2 && (name[0] == 'x' || name[0] == 'y') &&
                std::isdigit(static_cast<unsigned char>(name[1]))) {
                int i = name[1] - '1';
                int axis = 2 * i + (name[0] == 'y' ? 1 : 0);
                if (i < 0 || axis >= axes)
                    throw expr_error("coordinate " + name + " not on this grid", start);
                return [axis](const std::vector<double>& x) {
                    return x[static_cast<std::size_t>(axis)];
                };
            }
            throw expr_error("unknown name '" + name + "'", start);
        }
        fail("unexpected character");
    }
};

} // namespace

ScalarField parse_field_expression(const std::string& text, const TorusGrid& grid) {
    Parser p(text, grid.axes());
    Fn f = p.expression();
    p.skip();
    if (p.pos != text.size()) p.fail("trailing input");
    ScalarField out(grid);
    for (std::size_t q = 0; q < grid.points(); ++q) out[q] = f(grid.coords(q));
    return out;
}

} // namespace hessianlab
