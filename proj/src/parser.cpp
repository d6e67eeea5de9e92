#include "varicon/parser.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <string>

namespace varicon {
namespace {

bool ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

class Parser {
 public:
  Parser(std::string_view src, const Space& space) : src_(src), space_(space) {}

  ExprPtr run() {
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail_at(const std::string& msg, std::size_t at) const {
    throw ParseError(msg, at);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c, const char* context) {
    if (!consume(c))
      fail(std::string("expected '") + c + "' " + context);
  }

  // sum := product (('+'|'-') product)*
  ExprPtr parse_sum() {
    ExprPtr e = parse_product();
    for (;;) {
      if (consume('+'))
        e = add(e, parse_product());
      else if (consume('-'))
        e = sub(e, parse_product());
      else
        return e;
    }
  }

  // product := unary (('*'|'/') unary)*
  ExprPtr parse_product() {
    ExprPtr e = parse_unary();
    for (;;) {
      if (consume('*'))
        e = mul(e, parse_unary());
      else if (consume('/'))
        e = div(e, parse_unary());
      else
        return e;
    }
  }

  // unary := '-' unary | power
  ExprPtr parse_unary() {
    if (consume('-')) return neg(parse_unary());
    return parse_power();
  }

  // power := primary ('^' exponent)?   with exponent := '-' exponent | power
  ExprPtr parse_power() {
    ExprPtr e = parse_primary();
    if (consume('^')) return pow(e, parse_exponent());
    return e;
  }

  ExprPtr parse_exponent() {
    if (consume('-')) return neg(parse_exponent());
    return parse_power();
  }

  ExprPtr parse_primary() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      ExprPtr e = parse_sum();
      expect(')', "to close parenthesized expression");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (ident_start(c)) return parse_identifier();
    if (c == '\0') fail("unexpected end of input");
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr parse_number() {
    skip_ws();
    const std::size_t start = pos_;
    std::size_t p = pos_;
    while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
    bool any_digit = p > pos_;
    if (p < src_.size() && src_[p] == '.') {
      ++p;
      while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
      any_digit = any_digit || p > start + 1;
    }
    if (!any_digit) fail("malformed numeric literal");
    if (p < src_.size() && (src_[p] == 'e' || src_[p] == 'E')) {
      std::size_t q = p + 1;
      if (q < src_.size() && (src_[q] == '+' || src_[q] == '-')) ++q;
      if (q >= src_.size() || !std::isdigit(static_cast<unsigned char>(src_[q])))
        fail_at("malformed exponent in numeric literal", p);
      while (q < src_.size() && std::isdigit(static_cast<unsigned char>(src_[q]))) ++q;
      p = q;
    }
    const std::string slice(src_.substr(start, p - start));
    char* end = nullptr;
    const double value = std::strtod(slice.c_str(), &end);
    if (end != slice.c_str() + slice.size()) fail_at("malformed numeric literal", start);
    pos_ = p;
    return lit(value);
  }

  std::string_view read_ident() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    return src_.substr(start, pos_ - start);
  }

  ExprPtr parse_identifier() {
    skip_ws();
    const std::size_t start = pos_;
    const std::string_view id = read_ident();

    if (id == "d") {
      expect('(', "after derivative operator d");
      return parse_derivative();
    }
    if (id == "pow") {
      expect('(', "after function name");
      ExprPtr a = parse_sum();
      expect(',', "between pow arguments");
      ExprPtr b = parse_sum();
      expect(')', "to close pow(...)");
      return pow(std::move(a), std::move(b));
    }
    if (id == "sin" || id == "cos" || id == "sqrt" || id == "abs" || id == "sign") {
      expect('(', "after function name");
      ExprPtr a = parse_sum();
      expect(')', "to close function call");
      if (id == "sin") return sin(std::move(a));
      if (id == "cos") return cos(std::move(a));
      if (id == "sqrt") return sqrt(std::move(a));
      if (id == "abs") return abs(std::move(a));
      return sign(std::move(a));
    }

    if (int f = space_.field_index(id); f >= 0) return jet(space_, id);
    if (space_.param_index(id) >= 0) return param(space_, id);
    if (int b = space_.base_index(id); b >= 0) return base_coord(b);
    fail_at("unknown identifier '" + std::string(id) + "'", start);
  }

  // Inside d( ... , mu ): the target is a field name or a nested d(...).
  // Returns the jet coordinate with mu merged into the multi-index.
  ExprPtr parse_derivative() {
    skip_ws();
    const std::size_t target_at = pos_;
    MultiIndex mi;
    std::string_view field;

    if (ident_start(peek())) {
      const std::string_view id = read_ident();
      if (id == "d") {
        expect('(', "after derivative operator d");
        ExprPtr inner = parse_derivative();
        mi = inner->jet_coord().index;
        field = space_.field_name(inner->jet_coord().field);
      } else if (space_.field_index(id) >= 0) {
        field = id;
      } else {
        fail_at("derivative operator applied to a non-field name '" + std::string(id) + "'",
                target_at);
      }
    } else {
      fail_at("derivative operator applied to a non-field expression", target_at);
    }

    expect(',', "between derivative target and base index");
    skip_ws();
    const std::size_t idx_at = pos_;
    std::size_t p = pos_;
    while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
    if (p == pos_) fail("expected a base-coordinate index in d(...)");
    int mu = 0;
    std::from_chars(src_.data() + pos_, src_.data() + p, mu);
    pos_ = p;
    if (mu >= space_.base_dim())
      fail_at("base index " + std::to_string(mu) + " out of range for base dimension " +
                  std::to_string(space_.base_dim()),
              idx_at);
    expect(')', "to close d(...)");

    try {
      mi = MultiIndex::raised(mi, mu);
    } catch (const OrderError&) {
      fail_at("derivative nesting exceeds order 3", target_at);
    }
    return jet(space_, field, mi);
  }

  std::string_view src_;
  const Space& space_;
  std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse(std::string_view src, const Space& space) {
  return Parser(src, space).run();
}

}  // namespace varicon
