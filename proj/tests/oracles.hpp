#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "readcx/gaze.hpp"

namespace oracle {

// Exact rational with a positive denominator, kept in lowest terms.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational(std::int64_t n = 0, std::int64_t d = 1) : num(n), den(d) {
    if (den == 0) throw std::domain_error("zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  friend Rational operator+(Rational a, Rational b) { return {a.num * b.den + b.num * a.den, a.den * b.den}; }
  friend Rational operator-(Rational a, Rational b) { return {a.num * b.den - b.num * a.den, a.den * b.den}; }
  friend Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
  friend Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }
  friend bool operator==(Rational a, Rational b) { return a.num == b.num && a.den == b.den; }
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Average rank of each entry by counting, for every element, how many values
// are strictly smaller and how many are equal: rank = less + (equal + 1) / 2.
inline std::vector<Rational> counted_ranks(const std::vector<int>& v) {
  std::vector<Rational> r;
  for (int x : v) {
    std::int64_t less = 0, equal = 0;
    for (int y : v) {
      less += y < x;
      equal += y == x;
    }
    r.emplace_back(2 * less + equal + 1, 2);
  }
  return r;
}

// Spearman's rho with every intermediate quantity exact. rho^2 is an exact
// fraction; only the final square root is done in floating point.
inline double spearman_exact(const std::vector<int>& x, const std::vector<int>& y) {
  const auto rx = counted_ranks(x);
  const auto ry = counted_ranks(y);
  const auto n = static_cast<std::int64_t>(x.size());
  Rational mx, my;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx = mx + rx[i];
    my = my + ry[i];
  }
  mx = mx / Rational(n);
  my = my / Rational(n);
  Rational sxy, sxx, syy;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy = sxy + (rx[i] - mx) * (ry[i] - my);
    sxx = sxx + (rx[i] - mx) * (rx[i] - mx);
    syy = syy + (ry[i] - my) * (ry[i] - my);
  }
  if (sxx.num == 0 || syy.num == 0) throw std::domain_error("constant input");
  const Rational rho2 = (sxy * sxy) / (sxx * syy);
  const double mag = std::sqrt(static_cast<long double>(rho2.num) / static_cast<long double>(rho2.den));
  return sxy.num < 0 ? -mag : mag;
}

// Every vector of length n over {1, .., base}, in lexicographic order.
inline std::vector<std::vector<int>> all_vectors(std::size_t n, int base) {
  std::vector<std::vector<int>> out;
  std::vector<int> v(n, 1);
  while (true) {
    out.push_back(v);
    std::size_t i = n;
    while (i > 0 && v[i - 1] == base) v[--i] = 1;
    if (i == 0) break;
    ++v[i - 1];
  }
  return out;
}

// Reading measures of one sentence from one participant's chronological log,
// written as a direct reading of the definitions rather than a streaming pass.
inline readcx::GazeMetrics gaze_metrics(const std::vector<readcx::Fixation>& log, const std::string& sid) {
  readcx::GazeMetrics g;
  g.sentence_id = sid;
  std::size_t first = log.size();
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].sentence_id == sid) {
      first = i;
      break;
    }
  }
  for (std::size_t i = first; i < log.size() && log[i].sentence_id == sid; ++i) g.first_pass_duration += log[i].duration_ms;
  for (std::size_t i = 0; i < log.size(); ++i) {
    if (log[i].sentence_id != sid) continue;
    g.fixation_count += 1;
    g.total_fixation_duration += log[i].duration_ms;
    int max_before = 0;
    for (std::size_t j = 0; j < i; ++j) {
      if (log[j].sentence_id == sid) max_before = std::max(max_before, log[j].token_index);
    }
    if (log[i].token_index < max_before) g.regression_duration += log[i].duration_ms;
  }
  return g;
}

}  // namespace oracle
