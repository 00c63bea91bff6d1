#pragma once

// Exponential-series expansions of the first column of a gate product.
//
// For a chain of Fourier gates sharing one frequency w, the column
// (<0|U|0>, <1|U|0>) is a finite sum  sum_n (A_n, B_n) e^{i n w x}.
// fourier_expansion builds the table gate by gate with the compact form
//
//   U_F = [[ a+ e^{iwx} + a- e^{-iwx},    b+ e^{iwx} + b- e^{-iwx}   ],
//          [ -b-* e^{iwx} - b+* e^{-iwx},  a-* e^{iwx} + a+* e^{-iwx} ]]
//
// so that appending a gate shifts every index by +-1. For UAT gates the
// column branches into 2^N exponential terms, one per sign pattern.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qapprox/gateset.hpp"
#include "qapprox/linalg.hpp"

namespace qapprox {

struct CompactCoefficients {
  Complex a_plus;
  Complex a_minus;
  Complex b_plus;
  Complex b_minus;
};

inline CompactCoefficients compact_form(const FourierParams& p) {
  const double cl = std::cos(p.lambda), sl = std::sin(p.lambda);
  const double cp = std::cos(p.phi), sp = std::sin(p.phi);
  const Complex ea = std::polar(1.0, p.alpha);
  const Complex eb = std::polar(1.0, p.beta);
  return {cl * cp * ea, -sl * sp * eb, -cl * sp * ea, -sl * cp * eb};
}

struct FourierTerm {
  int index = 0;
  double frequency = 0.0;
  Complex a;  ///< coefficient of <0|U|0>
  Complex b;  ///< coefficient of <1|U|0>
};

/// Coefficients on the lattice n * base_frequency, n in [-max_index, max_index].
struct FourierTable {
  double base_frequency = 0.0;
  int max_index = 0;
  std::vector<FourierTerm> entries;

  std::size_t size() const { return entries.size(); }
  const FourierTerm& at(int n) const {
    return entries.at(static_cast<std::size_t>(n + max_index));
  }
};

inline FourierTable fourier_expansion(std::span<const FourierParams> gates) {
  if (gates.empty()) throw std::invalid_argument("fourier_expansion: empty gate list");

  double w = 0.0;
  for (const auto& g : gates) {
    for (double v : {g.omega, g.alpha, g.beta, g.phi, g.lambda}) {
      require_finite(v, "fourier_expansion");
    }
    if (w == 0.0 && g.omega != 0.0) w = std::abs(g.omega);
  }
  std::vector<int> shifts;
  shifts.reserve(gates.size());
  for (const auto& g : gates) {
    if (g.omega == 0.0) {
      shifts.push_back(0);
    } else if (std::abs(std::abs(g.omega) - w) <= 1e-12 * w) {
      shifts.push_back(g.omega > 0.0 ? 1 : -1);
    } else {
      throw std::invalid_argument(
          "fourier_expansion: gates must share one frequency (or use 0), got " +
          std::to_string(g.omega) + " and " + std::to_string(w));
    }
  }
  const int top = static_cast<int>(std::count_if(shifts.begin(), shifts.end(),
                                                 [](int s) { return s != 0; }));
  const std::size_t width = static_cast<std::size_t>(2 * top + 1);

  // Column of the identity: A_0 = 1, B_0 = 0.
  std::vector<Complex> a(width), b(width);
  a[static_cast<std::size_t>(top)] = 1.0;

  for (std::size_t g = 0; g < gates.size(); ++g) {
    const auto c = compact_form(gates[g]);
    const int s = shifts[g];
    std::vector<Complex> na(width), nb(width);
    for (int n = -top; n <= top; ++n) {
      const auto i = static_cast<std::size_t>(n + top);
      if (a[i] == Complex{} && b[i] == Complex{}) continue;
      const auto up = static_cast<std::size_t>(n + s + top);
      const auto down = static_cast<std::size_t>(n - s + top);
      na[up] += c.a_plus * a[i] + c.b_plus * b[i];
      nb[up] += -std::conj(c.b_minus) * a[i] + std::conj(c.a_minus) * b[i];
      na[down] += c.a_minus * a[i] + c.b_minus * b[i];
      nb[down] += -std::conj(c.b_plus) * a[i] + std::conj(c.a_plus) * b[i];
    }
    a = std::move(na);
    b = std::move(nb);
  }

  FourierTable table;
  table.base_frequency = w;
  table.max_index = top;
  table.entries.reserve(width);
  for (int n = -top; n <= top; ++n) {
    const auto i = static_cast<std::size_t>(n + top);
    table.entries.push_back({n, n * w, a[i], b[i]});
  }
  return table;
}

/// sum_n B_n e^{i Omega_n x}
inline Complex series_eval(const FourierTable& table, double x) {
  Complex sum;
  for (const auto& e : table.entries) sum += e.b * std::polar(1.0, e.frequency * x);
  return sum;
}

/// sum_n A_n e^{i Omega_n x}
inline Complex series_eval_a(const FourierTable& table, double x) {
  Complex sum;
  for (const auto& e : table.entries) sum += e.a * std::polar(1.0, e.frequency * x);
  return sum;
}

/// One term c e^{i delta} e^{i w . x}; signs[k] = +1 if gate k contributed
/// e^{+i(omega.x + alpha)}, -1 otherwise.
struct UatTerm {
  std::vector<int> signs;
  double c = 0.0;
  double delta = 0.0;
  std::vector<double> w;
};

struct UatExpansion {
  std::size_t input_dim = 0;
  std::vector<UatTerm> terms;
};

/// Expands <1| U_N ... U_1 |0> for UAT gates.
///
/// Each gate routes the <0| component to e^{+i theta} and the <1| component
/// to e^{-i theta}, so a sign pattern fixes the whole path and identifies its
/// term uniquely. The result holds the 2^{N-1} patterns ending in -1.
inline UatExpansion uat_expansion(std::span<const UatParams> gates) {
  if (gates.empty()) throw std::invalid_argument("uat_expansion: empty gate list");
  const std::size_t m = gates.front().omega.size();
  for (const auto& g : gates) {
    if (g.omega.size() != m) {
      throw std::invalid_argument("uat_expansion: gates disagree on input dimension");
    }
  }

  using Key = std::vector<int>;
  std::map<Key, UatTerm> top;  // <0| component
  std::map<Key, UatTerm> bottom;  // <1| component
  top.emplace(Key{}, UatTerm{{}, 1.0, 0.0, std::vector<double>(m, 0.0)});

  auto extend = [m](const UatTerm& t, const UatParams& g, int sign, double factor) {
    UatTerm out = t;
    out.signs.push_back(sign);
    out.c *= factor;
    out.delta += sign * g.alpha;
    for (std::size_t j = 0; j < m; ++j) out.w[j] += sign * g.omega[j];
    return out;
  };
  auto merge = [](std::map<Key, UatTerm>& into, UatTerm&& t) {
    auto [it, fresh] = into.try_emplace(t.signs, t);
    if (!fresh) it->second.c += t.c;
  };

  for (const auto& g : gates) {
    const double cp = std::cos(g.phi), sp = std::sin(g.phi);
    std::map<Key, UatTerm> nt, nb;
    for (const auto& [k, t] : top) {
      merge(nt, extend(t, g, +1, cp));
      merge(nb, extend(t, g, -1, sp));
    }
    for (const auto& [k, t] : bottom) {
      merge(nt, extend(t, g, +1, -sp));
      merge(nb, extend(t, g, -1, cp));
    }
    top = std::move(nt);
    bottom = std::move(nb);
  }

  UatExpansion out;
  out.input_dim = m;
  out.terms.reserve(bottom.size());
  for (auto& [k, t] : bottom) out.terms.push_back(std::move(t));
  return out;
}

inline Complex series_eval(const UatExpansion& e, std::span<const double> x) {
  if (x.size() != e.input_dim) throw std::invalid_argument("series_eval: dimension mismatch");
  Complex sum;
  for (const auto& t : e.terms) {
    double phase = t.delta;
    for (std::size_t j = 0; j < x.size(); ++j) phase += t.w[j] * x[j];
    sum += t.c * std::polar(1.0, phase);
  }
  return sum;
}

}  // namespace qapprox
