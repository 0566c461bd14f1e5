#include <algorithm>
#include <cctype>

#include "vbx/expr.hpp"

namespace vbx {

namespace {

class Parser {
public:
    Parser(std::string_view s, int n) : s_(s), n_(n) {}

    Expr run() {
        Expr e = expr();
        skip();
        if (i_ != s_.size()) fail("unexpected character '" + std::string(1, s_[i_]) + "'");
        return e;
    }

private:
    std::string_view s_;
    std::size_t i_ = 0;
    int n_;

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, i_); }
    [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const { throw ParseError(msg, at); }

    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    // ASCII '-' or U+2212.
    bool minus() {
        skip();
        if (i_ < s_.size() && s_[i_] == '-') {
            ++i_;
            return true;
        }
        if (s_.substr(i_, 3) == "\xE2\x88\x92") {
            i_ += 3;
            return true;
        }
        return false;
    }

    bool accept(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }

    Expr expr() {
        Expr e = term();
        for (;;) {
            if (accept('+'))
                e += term();
            else if (minus())
                e -= term();
            else
                return e;
        }
    }

    Expr term() {
        Expr e = unary();
        for (;;) {
            if (accept('*')) {
                e *= unary();
            } else if (accept('/')) {
                std::size_t at = i_;
                Expr d = unary();
                if (d.is_zero()) fail_at("division by zero", at);
                e /= d;
            } else {
                return e;
            }
        }
    }

    Expr unary() {
        if (minus()) return -unary();
        if (accept('+')) return unary();
        return power();
    }

    Expr power() {
        std::size_t at = i_;
        Expr base = atom();
        if (!accept('^')) return base;
        mpq_class q = exponent();
        try {
            return base.pow(q);
        } catch (const DomainError& e) {
            fail_at(e.what(), at);
        }
    }

    mpz_class integer() {
        skip();
        std::size_t start = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        if (start == i_) fail("expected integer");
        return mpz_class(std::string(s_.substr(start, i_ - start)));
    }

    mpq_class exponent() {
        if (accept('(')) {
            bool neg = minus();
            mpz_class p = integer(), d = 1;
            if (accept('/')) d = integer();
            if (d == 0) fail("zero denominator in exponent");
            expect(')');
            mpq_class q(neg ? mpz_class(-p) : p, d);
            q.canonicalize();
            return q;
        }
        bool neg = minus();
        mpz_class p = integer();
        return mpq_class(neg ? mpz_class(-p) : p);
    }

    Expr atom() {
        skip();
        if (i_ >= s_.size()) fail("unexpected end of input");
        char c = s_[i_];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            mpz_class v = integer();
            if (i_ < s_.size() && s_[i_] == '.') fail("decimal literals are not exact; write a fraction");
            return Expr(mpq_class(v));
        }
        if (accept('(')) {
            Expr e = expr();
            expect(')');
            return e;
        }
        if (!std::isalpha(static_cast<unsigned char>(c))) fail("unexpected character '" + std::string(1, c) + "'");
        std::size_t start = i_;
        while (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) ++i_;
        std::string name(s_.substr(start, i_ - start));
        std::size_t dstart = i_;
        while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_]))) ++i_;
        std::string digits(s_.substr(dstart, i_ - dstart));

        if (digits.empty() && (name == "exp" || name == "log" || name == "sqrt" || name == "sin" || name == "cos")) {
            expect('(');
            std::size_t at = i_;
            Expr a = expr();
            expect(')');
            try {
                if (name == "exp") return vbx::exp(a);
                if (name == "log") return vbx::log(a);
                if (name == "sqrt") return vbx::sqrt(a);
                if (name == "sin") return vbx::sin(a);
                return vbx::cos(a);
            } catch (const DomainError& e) {
                fail_at(e.what(), at);
            }
        }
        if (name == "x" && digits.size() == 1) {
            int k = digits[0] - '0';
            if (k < 1 || k > n_) fail_at("independent variable x" + digits + " outside 1.." + std::to_string(n_), start);
            return Expr::coord(Coordinate::x(k));
        }
        if (name == "u") {
            if (digits.empty()) return Expr::coord(Coordinate::u());
            if (digits.size() > 12) fail_at("derivative index longer than 12 digits", start);
            std::vector<int> idx;
            for (std::size_t k = 0; k < digits.size(); ++k) {
                int d = digits[k] - '0';
                if (d < 1 || d > n_)
                    fail_at("derivative index digit " + std::to_string(d) + " outside 1.." + std::to_string(n_), dstart + k);
                if (!idx.empty() && d < idx.back()) {
                    std::string sorted = digits;
                    std::sort(sorted.begin(), sorted.end());
                    fail_at("unsorted derivative index u" + digits + "; write u" + sorted, start);
                }
                idx.push_back(d);
            }
            return Expr::coord(Coordinate::deriv(idx));
        }
        fail_at("unknown symbol '" + name + digits + "'", start);
    }
};

}  // namespace

Expr Expr::parse(std::string_view text, int n) { return Parser(text, n).run(); }

}  // namespace vbx
