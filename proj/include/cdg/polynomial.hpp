#pragma once

#include "cdg/common.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cdg {

/// Bivariate polynomial in global coordinates, stored as monomial terms.
class Polynomial2 {
public:
  struct Term {
    int a = 0;
    int b = 0;
    double c = 0.0;
  };

  Polynomial2() = default;
  explicit Polynomial2(std::vector<Term> terms) : terms_(std::move(terms)) {}
  static Polynomial2 constant(double c) { return Polynomial2({{0, 0, c}}); }

  const std::vector<Term>& terms() const { return terms_; }
  int degree() const {
    int d = 0;
    for (const Term& t : terms_)
      if (t.c != 0.0)
        d = std::max(d, t.a + t.b);
    return d;
  }

  double operator()(const Point& x) const {
    double v = 0.0;
    for (const Term& t : terms_)
      v += t.c * std::pow(x.x(), t.a) * std::pow(x.y(), t.b);
    return v;
  }

  Polynomial2 dx() const {
    std::vector<Term> out;
    for (const Term& t : terms_)
      if (t.a > 0)
        out.push_back({t.a - 1, t.b, t.c * t.a});
    return Polynomial2(std::move(out));
  }
  Polynomial2 dy() const {
    std::vector<Term> out;
    for (const Term& t : terms_)
      if (t.b > 0)
        out.push_back({t.a, t.b - 1, t.c * t.b});
    return Polynomial2(std::move(out));
  }

  Polynomial2 operator+(const Polynomial2& o) const {
    std::vector<Term> out = terms_;
    out.insert(out.end(), o.terms_.begin(), o.terms_.end());
    return Polynomial2(std::move(out));
  }
  Polynomial2 operator*(double s) const {
    std::vector<Term> out = terms_;
    for (Term& t : out)
      t.c *= s;
    return Polynomial2(std::move(out));
  }
  Polynomial2 operator-() const { return *this * -1.0; }
  Polynomial2 operator-(const Polynomial2& o) const { return *this + (-o); }

  /// Integral over the axis-aligned box [x0,x1] x [y0,y1].
  double integrate_box(double x0, double x1, double y0, double y1) const {
    double v = 0.0;
    for (const Term& t : terms_)
      v += t.c * (std::pow(x1, t.a + 1) - std::pow(x0, t.a + 1)) / (t.a + 1) *
           (std::pow(y1, t.b + 1) - std::pow(y0, t.b + 1)) / (t.b + 1);
    return v;
  }

  ScalarField field() const {
    return [p = *this](const Point& x) { return p(x); };
  }

private:
  std::vector<Term> terms_;
};

} // namespace cdg
