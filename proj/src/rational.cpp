#include "popsicle/rational.hpp"

#include <cctype>

#include "popsicle/errors.hpp"

namespace popsicle {

std::string rational_to_string(const Rational& value) {
  if (denominator(value) == 1) return numerator(value).str();
  return numerator(value).str() + "/" + denominator(value).str();
}

namespace {

bool is_integer_token(std::string_view s) {
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) s.remove_prefix(1);
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const auto fail = [&] {
    throw GridError("invalid rational '" + std::string(text) +
                    "' (expected integer or a/b)");
  };
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    if (!is_integer_token(text)) fail();
    Rational value{std::string(text)};
    return value;
  }
  std::string_view num = text.substr(0, slash);
  std::string_view den = text.substr(slash + 1);
  if (!is_integer_token(num) || !is_integer_token(den)) fail();
  Rational denominator{std::string(den)};
  if (denominator == 0) throw GridError("zero denominator in '" + std::string(text) + "'");
  Rational numerator{std::string(num)};
  return numerator / denominator;
}

Rational rational_pow(const Rational& base, int exponent) {
  if (exponent < 0) throw GridError("negative exponent");
  Rational result = 1;
  Rational acc = base;
  int e = exponent;
  while (e > 0) {
    if (e & 1) result *= acc;
    e >>= 1;
    if (e) acc *= acc;
  }
  return result;
}

}  // namespace popsicle
