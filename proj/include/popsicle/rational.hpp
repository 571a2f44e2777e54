#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/rational_adaptor.hpp>

#include <string>
#include <string_view>

namespace popsicle {

using BigInt = boost::multiprecision::cpp_int;
using Rational =
    boost::multiprecision::number<boost::multiprecision::rational_adaptor<
        boost::multiprecision::cpp_int_backend<>>>;

// Canonical text form: "a" for integers, "a/b" otherwise, b > 0, reduced.
std::string rational_to_string(const Rational& value);

// Accepts "a", "a/b", optional leading '-'. Throws GridError on anything else
// (including zero denominators and decimal points).
Rational parse_rational(std::string_view text);

// base^exponent with exponent >= 0; pow(x, 0) == 1 including x == 0.
Rational rational_pow(const Rational& base, int exponent);

}  // namespace popsicle
