#include "asympode/parser.hpp"

#include "asympode/error.hpp"

#include <cctype>
#include <cmath>
#include <regex>

namespace asympode {

namespace {

enum class Tok { Number, Ident, Symbol, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    int line = 1;
    int col = 1;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_space();
            Token t;
            t.line = line_;
            t.col = col_;
            if (pos_ >= src_.size()) {
                out.push_back(t);
                return out;
            }
            char c = src_[pos_];
            if (std::isdigit(static_cast<unsigned char>(c)) ||
                (c == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
                t.kind = Tok::Number;
                t.text = number();
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                t.kind = Tok::Ident;
                while (pos_ < src_.size() &&
                       (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                    t.text += advance();
            } else if (std::string_view("+-*/^()[]{},;").find(c) != std::string_view::npos) {
                t.kind = Tok::Symbol;
                t.text = std::string(1, advance());
            } else {
                throw Error(ErrorKind::SyntaxError, "line " + std::to_string(line_) + ", column " +
                                                        std::to_string(col_) + ": unexpected character '" +
                                                        std::string(1, c) + "'");
            }
            out.push_back(std::move(t));
        }
    }

private:
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) advance();
    }

    std::string number() {
        std::string s;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
            s += advance();
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t look = pos_ + 1;
            if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
            if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
                while (pos_ < look) s += advance();
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) s += advance();
            }
        }
        return s;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

struct Value {
    enum Kind { Const, Matrix, Scalar, Vector } kind = Const;
    Rational c;
    Mat m;
    std::vector<ScalarTerm> s;
    std::vector<HomogeneousTerm> v;
    std::vector<Composite> comps;
};

class Parser {
public:
    Parser(std::vector<Token> toks, const ParseOptions& opt, int dim)
        : toks_(std::move(toks)), opt_(opt), dim_(dim) {}

    Value parse_all() {
        Value v = sum();
        if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "'");
        return v;
    }

    Rational constant_all() {
        Value v = sum();
        if (peek().kind != Tok::End) fail(peek(), "unexpected '" + peek().text + "'");
        if (v.kind != Value::Const) fail(toks_.front(), "expected a constant expression");
        return v.c;
    }

    void to_vector_terms(Value v, const Token& at, std::vector<HomogeneousTerm>& terms,
                         std::vector<Composite>& comps) {
        promote_vector(v, at);
        // A polynomial tail of mixed degree stands for several homogeneous terms.
        terms.clear();
        for (auto& t : v.v) {
            std::map<int, std::vector<ScalarPoly>> parts;
            for (int i = 0; i < t.dim(); ++i)
                for (const auto& [mono, c] : t.tail[static_cast<std::size_t>(i)].terms()) {
                    int deg = 0;
                    for (int e : mono) deg += e;
                    auto& part = parts[deg];
                    if (part.empty()) part.assign(t.tail.size(), ScalarPoly(dim_));
                    part[static_cast<std::size_t>(i)].add_term(mono, c);
                }
            for (auto& [deg, tail] : parts) terms.push_back(HomogeneousTerm{t.factors, std::move(tail)});
        }
        comps = std::move(v.comps);
    }

    [[noreturn]] void fail(const Token& t, const std::string& msg) const {
        throw Error(ErrorKind::SyntaxError,
                    "line " + std::to_string(t.line) + ", column " + std::to_string(t.col) + ": " + msg);
    }

    void promote_vector(Value& v, const Token& at) {
        if (v.kind == Value::Vector) return;
        if (v.kind == Value::Const && v.c.is_zero()) {
            v.kind = Value::Vector;
            return;
        }
        if (dim_ != 1) fail(at, "expected a vector-valued expression");
        to_scalar(v, at);
        Value out;
        out.kind = Value::Vector;
        for (auto& t : v.s) out.v.push_back(HomogeneousTerm{t.factors, {t.poly}});
        v = std::move(out);
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool accept(const std::string& sym) {
        if (peek().kind == Tok::Symbol && peek().text == sym) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(const std::string& sym) {
        if (!accept(sym)) fail(peek(), "expected '" + sym + "'" + (peek().kind == Tok::End ? " before end of input" : " but found '" + peek().text + "'"));
    }

    // ------------------------------------------------------------ conversions

    void to_scalar(Value& v, const Token& at) {
        if (v.kind == Value::Scalar) return;
        if (v.kind == Value::Const) {
            v.kind = Value::Scalar;
            v.s.clear();
            if (!v.c.is_zero()) v.s.push_back(ScalarTerm{{}, ScalarPoly::constant(dim_, v.c.to_double())});
            return;
        }
        if (v.kind == Value::Vector && dim_ == 1 && v.comps.empty()) {
            Value out;
            out.kind = Value::Scalar;
            for (auto& t : v.v) out.s.push_back(ScalarTerm{t.factors, t.tail[0]});
            v = std::move(out);
            return;
        }
        fail(at, "expected a scalar expression");
    }

    // A vector (or, for d = 1 style use, a scalar) that is linear in x, as a matrix.
    Mat to_linear_map(Value v, const Token& at) {
        std::vector<ScalarPoly> rows;
        if (v.kind == Value::Vector) {
            if (!v.comps.empty() || v.v.size() > 1) fail(at, "norm argument must be linear in x");
            if (v.v.empty()) fail(at, "norm argument is identically zero");
            if (!v.v[0].factors.empty()) fail(at, "norm argument must be linear in x");
            rows = v.v[0].tail;
        } else if (v.kind == Value::Scalar) {
            if (v.s.size() != 1 || !v.s[0].factors.empty()) fail(at, "norm argument must be linear in x");
            rows = {v.s[0].poly};
        } else {
            fail(at, "norm argument must be linear in x");
        }
        Mat m = Mat::Zero(static_cast<Eigen::Index>(rows.size()), dim_);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (const auto& [mono, c] : rows[r].terms()) {
                int deg = 0, var = -1;
                for (int i = 0; i < dim_; ++i) {
                    deg += mono[i];
                    if (mono[i]) var = i;
                }
                if (deg != 1) fail(at, "norm argument must be linear in x");
                m(static_cast<Eigen::Index>(r), var) = c;
            }
        }
        if (m.rows() == dim_ && m.isIdentity(0.0)) return Mat();
        return m;
    }

    // --------------------------------------------------------------- algebra

    static void tidy(Value& v) {
        if (v.kind == Value::Scalar) {
            std::vector<ScalarTerm> out;
            for (auto& t : v.s) {
                auto it = std::find_if(out.begin(), out.end(), [&](const ScalarTerm& o) {
                    return o.factors.size() == t.factors.size() &&
                           std::equal(o.factors.begin(), o.factors.end(), t.factors.begin(), factor_equal);
                });
                if (it == out.end())
                    out.push_back(std::move(t));
                else
                    it->poly = it->poly + t.poly;
            }
            v.s.clear();
            for (auto& t : out)
                if (!t.poly.is_zero()) v.s.push_back(std::move(t));
        } else if (v.kind == Value::Vector) {
            std::vector<HomogeneousTerm> out;
            for (auto& t : v.v) {
                auto it = std::find_if(out.begin(), out.end(), [&](const HomogeneousTerm& o) {
                    return o.dim() == t.dim() && o.factors.size() == t.factors.size() &&
                           std::equal(o.factors.begin(), o.factors.end(), t.factors.begin(), factor_equal);
                });
                if (it == out.end()) {
                    out.push_back(std::move(t));
                } else {
                    for (int i = 0; i < t.dim(); ++i) it->tail[i] = it->tail[i] + t.tail[i];
                }
            }
            v.v.clear();
            for (auto& t : out)
                if (t.tail_degree() >= 0) v.v.push_back(std::move(t));
        }
    }

    Value add(Value a, Value b, const Token& at) {
        if (a.kind == Value::Const && b.kind == Value::Const) {
            a.c += b.c;
            return a;
        }
        if (a.kind == Value::Matrix || b.kind == Value::Matrix) {
            if (a.kind != b.kind || a.m.rows() != b.m.rows() || a.m.cols() != b.m.cols())
                fail(at, "matrix sum needs two matrices of equal shape");
            a.m += b.m;
            return a;
        }
        if (a.kind == Value::Vector || b.kind == Value::Vector) {
            promote_vector(a, at);
            promote_vector(b, at);
            if (!a.v.empty() && !b.v.empty() && a.v[0].dim() != b.v[0].dim())
                fail(at, "vector lengths differ in sum");
            a.v.insert(a.v.end(), b.v.begin(), b.v.end());
            a.comps.insert(a.comps.end(), b.comps.begin(), b.comps.end());
            tidy(a);
            return a;
        }
        to_scalar(a, at);
        to_scalar(b, at);
        a.s.insert(a.s.end(), b.s.begin(), b.s.end());
        tidy(a);
        return a;
    }

    Value scale(Value a, const Rational& c) {
        const double cd = c.to_double();
        switch (a.kind) {
            case Value::Const: a.c *= c; break;
            case Value::Matrix: a.m *= cd; break;
            case Value::Scalar:
                for (auto& t : a.s) t.poly = t.poly * cd;
                break;
            case Value::Vector:
                for (auto& t : a.v)
                    for (auto& p : t.tail) p = p * cd;
                for (auto& comp : a.comps)
                    for (auto& t : comp.numerator)
                        for (auto& p : t.tail) p = p * cd;
                break;
        }
        tidy(a);
        return a;
    }

    static ScalarTerm mul_terms(const ScalarTerm& a, const ScalarTerm& b) {
        ScalarTerm r;
        r.poly = a.poly * b.poly;
        auto f = a.factors;
        f.insert(f.end(), b.factors.begin(), b.factors.end());
        r.factors = canonicalize(std::move(f), r.poly);
        return r;
    }

    Value mul(Value a, Value b, const Token& at) {
        if (a.kind == Value::Const) return scale(std::move(b), a.c);
        if (b.kind == Value::Const) return scale(std::move(a), b.c);
        if (a.kind == Value::Matrix) {
            if (b.kind == Value::Scalar && dim_ == 1) promote_vector(b, at);
            if (b.kind != Value::Vector) fail(at, "a matrix can only multiply a vector");
            if (!b.comps.empty()) fail(at, "a matrix cannot multiply a composite");
            Value out;
            out.kind = Value::Vector;
            for (const auto& t : b.v) {
                if (t.dim() != a.m.cols()) fail(at, "matrix and vector shapes do not match");
                HomogeneousTerm r;
                r.factors = t.factors;
                for (Eigen::Index i = 0; i < a.m.rows(); ++i) {
                    ScalarPoly p(dim_);
                    for (Eigen::Index j = 0; j < a.m.cols(); ++j)
                        if (a.m(i, j) != 0) p = p + t.tail[static_cast<std::size_t>(j)] * a.m(i, j);
                    r.tail.push_back(p);
                }
                out.v.push_back(std::move(r));
            }
            tidy(out);
            return out;
        }
        if (b.kind == Value::Matrix) fail(at, "a matrix must stand to the left of a vector");
        if (a.kind == Value::Vector && b.kind == Value::Vector) {
            if (dim_ == 1 && a.comps.empty() && b.comps.empty()) {
                to_scalar(a, at);
                to_scalar(b, at);
            } else {
                fail(at, "product of two vectors");
            }
        }
        if (a.kind == Value::Vector || b.kind == Value::Vector) {
            Value vec = a.kind == Value::Vector ? std::move(a) : std::move(b);
            Value sc = a.kind == Value::Vector ? std::move(b) : std::move(a);
            to_scalar(sc, at);
            if (!vec.comps.empty()) fail(at, "a composite can only be scaled by constants");
            Value out;
            out.kind = Value::Vector;
            for (const auto& t : vec.v) {
                for (const auto& s : sc.s) {
                    ScalarPoly extra = s.poly;
                    auto f = t.factors;
                    f.insert(f.end(), s.factors.begin(), s.factors.end());
                    HomogeneousTerm r;
                    r.factors = canonicalize(std::move(f), extra);
                    for (const auto& p : t.tail) r.tail.push_back(p * extra);
                    out.v.push_back(std::move(r));
                }
            }
            tidy(out);
            return out;
        }
        to_scalar(a, at);
        to_scalar(b, at);
        Value out;
        out.kind = Value::Scalar;
        for (const auto& x : a.s)
            for (const auto& y : b.s) out.s.push_back(mul_terms(x, y));
        tidy(out);
        return out;
    }

    Value power(Value a, const Rational& q, const Token& at) {
        if (q.sign() < 0) fail(at, "negative exponents are not allowed");
        if (a.kind == Value::Const) {
            if (!q.is_integer()) fail(at, "non-integer power of a constant");
            Rational r(1);
            for (std::int64_t k = 0; k < q.num(); ++k) r *= a.c;
            a.c = r;
            return a;
        }
        if (a.kind == Value::Matrix) fail(at, "power of a matrix");
        if (a.kind == Value::Vector) {
            if (dim_ != 1 || !a.comps.empty()) fail(at, "power of a vector");
            to_scalar(a, at);
        }
        if (q.is_integer()) {
            Value r;
            r.kind = Value::Const;
            r.c = Rational(1);
            for (std::int64_t k = 0; k < q.num(); ++k) r = mul(std::move(r), a, at);
            if (r.kind == Value::Const) to_scalar(r, at);
            return r;
        }
        if (a.s.size() != 1) fail(at, "non-integer power of a sum; use a norm");
        ScalarTerm& t = a.s[0];
        auto c = t.poly.as_constant();
        if (!c) fail(at, "non-integer power of a polynomial; use abs(), sgnpow() or a norm");
        if (*c <= 0) fail(at, "non-integer power of a non-positive coefficient");
        for (auto& f : t.factors) {
            if (auto* n = std::get_if<NormPower>(&f)) {
                n->nu *= q;
            } else if (auto* cp = std::get_if<CoordPower>(&f)) {
                if (cp->type == SignType::Signed) fail(at, "non-integer power of sgnpow(); write sgnpow(x_i, q) directly");
                cp->gamma *= q;
            } else {
                std::get<PolyNormPower>(f).nu *= q;
            }
        }
        ScalarPoly poly = ScalarPoly::constant(dim_, std::pow(*c, q.to_double()));
        t.factors = canonicalize(std::move(t.factors), poly);
        t.poly = poly;
        return a;
    }

    // ---------------------------------------------------------------- grammar

    Value sum() {
        const Token& start = peek();
        Value v;
        bool neg = false;
        if (accept("-")) neg = true;
        else accept("+");
        v = product();
        if (neg) v = scale(std::move(v), Rational(-1));
        (void)start;
        for (;;) {
            const Token& op = peek();
            if (accept("+")) {
                v = add(std::move(v), product(), op);
            } else if (accept("-")) {
                v = add(std::move(v), scale(product(), Rational(-1)), op);
            } else {
                return v;
            }
        }
    }

    Value product() {
        Value v = unary();
        for (;;) {
            const Token& op = peek();
            if (accept("*")) {
                Value rhs = unary();
                if (rhs.kind == Value::Matrix && v.kind != Value::Const && v.kind != Value::Matrix) {
                    // s * M * x: the matrix binds to the rest of the product.
                    const Token& op2 = peek();
                    if (!accept("*")) fail(op2, "a matrix must be followed by * and a vector");
                    rhs = mul(std::move(rhs), product(), op2);
                    return mul(std::move(v), std::move(rhs), op);
                }
                v = mul(std::move(v), std::move(rhs), op);
            } else if (accept("/")) {
                Value d = unary();
                if (d.kind != Value::Const) fail(op, "division is only by constants");
                if (d.c.is_zero()) fail(op, "division by zero");
                v = scale(std::move(v), Rational(1) / d.c);
            } else {
                return v;
            }
        }
    }

    Value unary() {
        if (accept("-")) return scale(unary(), Rational(-1));
        if (accept("+")) return unary();
        return pow_expr();
    }

    Value pow_expr() {
        Value base = primary();
        const Token& op = peek();
        if (accept("^")) {
            Rational q = exponent();
            return power(std::move(base), q, op);
        }
        return base;
    }

    Rational exponent() {
        const Token& t = peek();
        if (accept("{")) {
            Value v = sum();
            expect("}");
            if (v.kind != Value::Const) fail(t, "exponent must be a constant");
            return v.c;
        }
        if (accept("(")) {
            Value v = sum();
            expect(")");
            if (v.kind != Value::Const) fail(t, "exponent must be a constant");
            return v.c;
        }
        if (accept("-")) return -exponent();
        if (t.kind == Tok::Number) {
            next();
            return number(t);
        }
        if (t.kind == Tok::Ident) {
            next();
            auto it = opt_.params.find(t.text);
            if (it == opt_.params.end()) fail(t, "unknown parameter '" + t.text + "' in exponent");
            return it->second;
        }
        fail(t, "expected an exponent");
    }

    Rational number(const Token& t) {
        try {
            return Rational::parse(t.text);
        } catch (const Error&) {
            fail(t, "malformed number '" + t.text + "'");
        }
    }

    Rational constant_in(const std::string& close) {
        const Token& t = peek();
        Value v = sum();
        if (v.kind != Value::Const) fail(t, "expected a constant");
        expect(close);
        return v.c;
    }

    Rational norm_index(const Token& t, const std::string& prefix) {
        const std::string rest = t.text.substr(prefix.size());
        Rational p;
        if (rest == "_") {
            expect("{");
            p = constant_in("}");
        } else {
            for (char c : rest)
                if (!std::isdigit(static_cast<unsigned char>(c))) fail(t, "unknown name '" + t.text + "'");
            p = Rational::parse(rest);
        }
        if (p < Rational(1)) fail(t, "norm index must be at least 1");
        if (opt_.require_smooth_norms && !(p.is_integer() && p.num() % 2 == 0))
            throw Error(ErrorKind::UnsupportedNorm,
                        "line " + std::to_string(t.line) + ", column " + std::to_string(t.col) + ": norm index " +
                            p.str() + " is not an even integer");
        return p;
    }

    int coordinate_of(Value v, const Token& at) {
        to_scalar(v, at);
        if (v.s.size() == 1 && v.s[0].factors.empty() && v.s[0].poly.terms().size() == 1) {
            const auto& [mono, c] = *v.s[0].poly.terms().begin();
            int deg = 0, var = -1;
            for (int i = 0; i < dim_; ++i) {
                deg += mono[i];
                if (mono[i]) var = i;
            }
            if (deg == 1 && c == 1.0) return var;
        }
        fail(at, "expected a single coordinate x_i");
    }

    Value scalar_factor(ScalarFactor f) {
        Value v;
        v.kind = Value::Scalar;
        ScalarPoly poly = ScalarPoly::constant(dim_, 1.0);
        auto factors = canonicalize({std::move(f)}, poly);
        v.s.push_back(ScalarTerm{std::move(factors), poly});
        return v;
    }

    Value primary() {
        const Token& t = peek();
        if (t.kind == Tok::End) fail(t, "unexpected end of input");
        if (t.kind == Tok::Number) {
            next();
            Value v;
            v.c = number(t);
            return v;
        }
        if (accept("(")) {
            Value v = sum();
            expect(")");
            return v;
        }
        if (accept("[")) {
            std::vector<Value> entries;
            std::vector<Token> at;
            do {
                at.push_back(peek());
                entries.push_back(sum());
            } while (accept(","));
            expect("]");
            Value out;
            out.kind = Value::Vector;
            const int n = static_cast<int>(entries.size());
            for (int i = 0; i < n; ++i) {
                Value e = std::move(entries[static_cast<std::size_t>(i)]);
                to_scalar(e, at[static_cast<std::size_t>(i)]);
                for (auto& s : e.s) {
                    HomogeneousTerm h;
                    h.factors = s.factors;
                    h.tail.assign(static_cast<std::size_t>(n), ScalarPoly(dim_));
                    h.tail[static_cast<std::size_t>(i)] = s.poly;
                    out.v.push_back(std::move(h));
                }
            }
            tidy(out);
            return out;
        }
        if (accept("{")) {
            std::vector<std::vector<double>> rows;
            do {
                expect("{");
                std::vector<double> row;
                do {
                    const Token& et = peek();
                    Value e = sum();
                    if (e.kind != Value::Const) fail(et, "matrix entries must be constants");
                    row.push_back(e.c.to_double());
                } while (accept(","));
                expect("}");
                if (!rows.empty() && row.size() != rows.front().size()) fail(t, "ragged matrix literal");
                rows.push_back(std::move(row));
            } while (accept(","));
            expect("}");
            Value v;
            v.kind = Value::Matrix;
            v.m = Mat(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < rows[i].size(); ++j)
                    v.m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
            return v;
        }
        if (t.kind != Tok::Ident) fail(t, "unexpected '" + t.text + "'");
        next();
        const std::string& name = t.text;

        if (name == "x") {
            Value v;
            v.kind = Value::Vector;
            HomogeneousTerm h;
            for (int i = 0; i < dim_; ++i) h.tail.push_back(ScalarPoly::variable(dim_, i));
            v.v.push_back(std::move(h));
            if (dim_ == 1) to_scalar(v, t);
            return v;
        }
        static const std::regex coord_re("x_?([0-9]+)");
        std::smatch match;
        if (std::regex_match(name, match, coord_re)) {
            const int i = std::stoi(match[1].str());
            if (i < 1 || i > dim_)
                fail(t, "coordinate " + name + " outside 1.." + std::to_string(dim_));
            Value v;
            v.kind = Value::Scalar;
            v.s.push_back(ScalarTerm{{}, ScalarPoly::variable(dim_, i - 1)});
            return v;
        }
        if (name.rfind("polynorm", 0) == 0) {
            Rational p = norm_index(t, "polynorm");
            expect("(");
            PolyNormPower f;
            f.p = p;
            f.nu = Rational(1);
            do {
                const Token& at = peek();
                Value e = sum();
                to_scalar(e, at);
                if (e.s.size() > 1 || (e.s.size() == 1 && !e.s[0].factors.empty()))
                    fail(at, "polynorm entries must be polynomials");
                ScalarPoly poly = e.s.empty() ? ScalarPoly(dim_) : e.s[0].poly;
                if (!poly.is_homogeneous()) fail(at, "polynorm entries must be homogeneous");
                f.polys.push_back(poly);
            } while (accept(","));
            expect(")");
            int m = -1;
            for (const auto& poly : f.polys) {
                if (poly.is_zero()) continue;
                if (m >= 0 && poly.degree() != m) fail(t, "polynorm entries must share one degree");
                m = poly.degree();
            }
            if (m < 1) fail(t, "polynorm entries must have positive degree");
            f.m = m;
            return scalar_factor(std::move(f));
        }
        if (name.rfind("norm", 0) == 0) {
            Rational p = norm_index(t, "norm");
            expect("(");
            const Token& at = peek();
            Value arg = sum();
            expect(")");
            NormPower f;
            f.matrix = to_linear_map(std::move(arg), at);
            f.p = p;
            f.nu = Rational(1);
            return scalar_factor(std::move(f));
        }
        if (name == "abs") {
            expect("(");
            const Token& at = peek();
            int i = coordinate_of(sum(), at);
            expect(")");
            return scalar_factor(CoordPower{i, SignType::Abs, Rational(1)});
        }
        if (name == "sgnpow") {
            expect("(");
            const Token& at = peek();
            int i = coordinate_of(sum(), at);
            expect(",");
            const Token& qt = peek();
            Value q = sum();
            expect(")");
            if (q.kind != Value::Const) fail(qt, "sgnpow exponent must be a constant");
            if (q.c.sign() < 0) fail(qt, "negative exponents are not allowed");
            return scalar_factor(CoordPower{i, SignType::Signed, q.c});
        }
        if (name == "comp") {
            expect("(");
            const Token& nt = peek();
            Value num = sum();
            expect(";");
            const Token& dt = peek();
            Value den = sum();
            int depth = 0;
            if (accept(";")) {
                const Token& kt = peek();
                Value k = sum();
                if (k.kind != Value::Const || !k.c.is_integer() || k.c.num() < 1)
                    fail(kt, "composite depth must be a positive integer");
                depth = static_cast<int>(k.c.num());
            }
            expect(")");
            promote_vector(num, nt);
            if (!num.comps.empty()) fail(nt, "nested composites are not supported");
            to_scalar(den, dt);
            if (den.s.empty()) fail(dt, "composite denominator tail is zero");
            Composite c;
            c.numerator = std::move(num.v);
            c.denominator = std::move(den.s);
            c.depth = depth;
            const auto& d0 = c.denominator.front();
            Rational deg(std::max(d0.poly.degree(), 0));
            for (const auto& f : d0.factors) deg += factor_degree(f);
            c.denominator_degree = deg;
            Value out;
            out.kind = Value::Vector;
            out.comps.push_back(std::move(c));
            return out;
        }
        auto it = opt_.params.find(name);
        if (it != opt_.params.end()) {
            Value v;
            v.c = it->second;
            return v;
        }
        fail(t, "unknown name '" + name + "'");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    const ParseOptions& opt_;
    int dim_;
};

int infer_dim(const std::vector<Token>& toks) {
    static const std::regex coord_re("x_?([0-9]+)");
    int dim = 1;
    std::smatch match;
    for (const auto& t : toks)
        if (t.kind == Tok::Ident && std::regex_match(t.text, match, coord_re))
            dim = std::max(dim, std::stoi(match[1].str()));
    return dim;
}

}  // namespace

NonlinearitySpec parse_nonlinearity(std::string_view source, const ParseOptions& options) {
    auto toks = Lexer(source).run();
    const int dim = options.dim > 0 ? options.dim : infer_dim(toks);
    Parser parser(toks, options, dim);
    Value v = parser.parse_all();
    NonlinearitySpec spec;
    spec.dim = dim;
    spec.mode = options.mode;
    spec.remainder_exponent = options.remainder_exponent;
    parser.to_vector_terms(std::move(v), toks.front(), spec.terms, spec.composites);
    for (const auto& t : spec.terms)
        if (t.dim() != dim)
            throw Error(ErrorKind::SyntaxError, "line 1, column 1: nonlinearity has " + std::to_string(t.dim()) +
                                                    " entries but the state dimension is " + std::to_string(dim));
    for (const auto& c : spec.composites)
        for (const auto& t : c.numerator)
            if (t.dim() != dim)
                throw Error(ErrorKind::SyntaxError, "line 1, column 1: composite numerator has " +
                                                        std::to_string(t.dim()) + " entries but the state dimension is " +
                                                        std::to_string(dim));
    spec.validate();
    return spec;
}

Rational parse_constant(std::string_view source, const std::map<std::string, Rational>& params) {
    ParseOptions opt;
    opt.params = params;
    opt.dim = 1;
    Parser parser(Lexer(source).run(), opt, 1);
    return parser.constant_all();
}

}  // namespace asympode
