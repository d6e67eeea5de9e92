#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "varicon/parser.hpp"

using namespace varicon;

namespace {

SpacePtr mech_space() { return make_space(1, {"x", "y", "theta"}, {"m", "I", "g"}); }

double eval_const(const ExprPtr& e) {
  JetPoint p(1, 1, 0);
  return eval(e, p);
}

std::size_t error_offset(const char* src, const Space& sp) {
  try {
    parse(src, sp);
  } catch (const ParseError& err) {
    return err.offset();
  }
  FAIL("expected a parse error for: ", src);
  return static_cast<std::size_t>(-1);
}

}  // namespace

TEST_CASE("operator precedence and associativity") {
  auto one = make_space(1, {"q"});
  CHECK(eval_const(parse("1 + 2*3", *one)) == 7.0);
  CHECK(eval_const(parse("6 - 2 - 1", *one)) == 3.0);       // left-assoc
  CHECK(eval_const(parse("12/3/2", *one)) == 2.0);          // left-assoc
  CHECK(eval_const(parse("2^3^2", *one)) == 512.0);         // right-assoc
  CHECK(eval_const(parse("-2^2", *one)) == -4.0);           // ^ binds above unary -
  CHECK(eval_const(parse("2^-2", *one)) == 0.25);           // unary - allowed in exponent
  CHECK(eval_const(parse("-2*3", *one)) == -6.0);
  CHECK(eval_const(parse("2--3", *one)) == 5.0);
  CHECK(eval_const(parse("(1 + 2)*3", *one)) == 9.0);
  CHECK(eval_const(parse("pow(2, 3) + pow(2, -1)", *one)) == 8.5);
}

TEST_CASE("numeric literal forms") {
  auto one = make_space(1, {"q"});
  CHECK(eval_const(parse("0.5", *one)) == 0.5);
  CHECK(eval_const(parse(".5", *one)) == 0.5);
  CHECK(eval_const(parse("5.", *one)) == 5.0);
  CHECK(eval_const(parse("1e3", *one)) == 1000.0);
  CHECK(eval_const(parse("2.5e-2", *one)) == 0.025);
  CHECK(eval_const(parse("1E+2", *one)) == 100.0);
}

TEST_CASE("identifier resolution covers fields, parameters and base coordinates") {
  auto sp = mech_space();
  Rng rng(201);
  JetPoint p = vtest::random_jet_point(*sp, 1, rng);
  const double params[] = {2.0, 3.0, 4.0};

  CHECK(eval(parse("x", *sp), p, params) == p.coord({0, {}}));
  CHECK(eval(parse("m", *sp), p, params) == 2.0);
  CHECK(eval(parse("x0", *sp), p, params) == p.base(0));
  CHECK(eval(parse("t", *sp), p, params) == p.base(0));  // alias in one base dimension

  auto four = make_space(4, {"J0", "J1", "J2", "J3"});
  JetPoint q(4, 4, 1);
  for (int mu = 0; mu < 4; ++mu) q.set_base(mu, 1.0 + mu);
  CHECK(eval(parse("x3 - x1", *four), q) == 2.0);
  CHECK_THROWS_AS(parse("t", *four), ParseError);  // no alias beyond m = 1
}

TEST_CASE("derivative operator builds canonical jet coordinates") {
  auto sp = make_space(4, {"J0", "J1", "J2", "J3"});
  auto a = parse("d(d(J0,0),1)", *sp);
  auto b = parse("d(d(J0,1),0)", *sp);
  CHECK(a->jet_coord() == b->jet_coord());
  CHECK(a->jet_coord().index.order() == 2);
  CHECK(a->jet_coord().index[0] == 0);
  CHECK(a->jet_coord().index[1] == 1);

  auto third = parse("d(d(d(J2,3),1),2)", *sp);
  CHECK(third->jet_coord().order() == 3);
  CHECK(third->jet_coord().field == 2);
  CHECK(third->jet_coord().index[0] == 1);
  CHECK(third->jet_coord().index[1] == 2);
  CHECK(third->jet_coord().index[2] == 3);
}

TEST_CASE("parse errors carry byte offsets") {
  auto sp = mech_space();
  CHECK(error_offset("foo", *sp) == 0);
  CHECK(error_offset("x + foo", *sp) == 4);
  CHECK(error_offset("x +", *sp) == 3);
  CHECK(error_offset("(x", *sp) == 2);
  CHECK(error_offset("x )", *sp) == 2);  // trailing input
  CHECK(error_offset("1..2", *sp) == 2); // trailing input after "1."
}

TEST_CASE("derivative operator rejects non-field targets") {
  auto sp = mech_space();
  CHECK_THROWS_WITH_AS(parse("d(y+1, 0)", *sp),
                       doctest::Contains("expected ','"), ParseError);
  CHECK_THROWS_WITH_AS(parse("d(t, 0)", *sp),
                       doctest::Contains("non-field"), ParseError);
  CHECK_THROWS_WITH_AS(parse("d(m, 0)", *sp),
                       doctest::Contains("non-field"), ParseError);
  CHECK_THROWS_WITH_AS(parse("d(3, 0)", *sp),
                       doctest::Contains("non-field"), ParseError);
}

TEST_CASE("derivative operator rejects out-of-range indices and depth overflow") {
  auto sp = mech_space();
  CHECK_THROWS_WITH_AS(parse("d(x, 1)", *sp), doctest::Contains("out of range"), ParseError);
  CHECK_THROWS_WITH_AS(parse("d(d(d(d(x,0),0),0),0)", *sp),
                       doctest::Contains("order 3"), ParseError);
  auto four = make_space(4, {"J0", "J1", "J2", "J3"});
  CHECK_THROWS_WITH_AS(parse("d(J0, 4)", *four), doctest::Contains("out of range"), ParseError);
}

TEST_CASE("reserved words cannot be space names") {
  CHECK_THROWS_AS(make_space(1, {"sin"}), SchemaError);
  CHECK_THROWS_AS(make_space(1, {"d"}), SchemaError);
  CHECK_THROWS_AS(make_space(1, {"x0"}), SchemaError);
  CHECK_THROWS_AS(make_space(1, {"t"}), SchemaError);      // alias is live when m = 1
  CHECK_NOTHROW(make_space(2, {"t"}));                     // but free otherwise
  CHECK_THROWS_AS(make_space(1, {"q", "q"}), SchemaError);
  CHECK_THROWS_AS(make_space(1, {"q"}, {"q"}), SchemaError);
  CHECK_THROWS_AS(make_space(1, {"1bad"}), SchemaError);
}

TEST_CASE("whitespace is insignificant") {
  auto sp = mech_space();
  auto a = parse("  d( x ,0 ) * sin(theta)+ 1 ", *sp);
  auto b = parse("d(x,0)*sin(theta)+1", *sp);
  Rng rng(202);
  JetPoint p = vtest::random_jet_point(*sp, 1, rng);
  CHECK(eval(a, p) == eval(b, p));
}
