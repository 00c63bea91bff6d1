#pragma once

// Benchmark target functions, normalization and dataset grids.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <functional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qapprox/encodings.hpp"
#include "qapprox/linalg.hpp"

namespace qapprox {

inline constexpr std::array<std::string_view, 4> kTargets1d = {"relu", "tanh5", "step", "poly"};
inline constexpr std::array<std::string_view, 4> kTargets2d = {"himmelblau", "brent",
                                                               "threehump", "adjiman"};

inline bool is_target_1d(std::string_view name) {
  return std::find(kTargets1d.begin(), kTargets1d.end(), name) != kTargets1d.end();
}
inline bool is_target_2d(std::string_view name) {
  return std::find(kTargets2d.begin(), kTargets2d.end(), name) != kTargets2d.end();
}

/// Raw one-dimensional benchmark functions on [-1, 1].
inline double eval_1d(std::string_view name, double x) {
  if (name == "relu") return std::max(0.0, x);
  if (name == "tanh5") return std::tanh(5.0 * x);
  if (name == "step") return x == 0.0 ? 0.0 : x / std::abs(x);
  if (name == "poly") return std::abs(3.0 * x * x * x * (1.0 - x * x * x * x));
  throw std::invalid_argument("unknown 1D target '" + std::string(name) + "'");
}

/// Raw two-dimensional benchmark functions on [-5, 5]^2.
inline double eval_2d(std::string_view name, double x, double y) {
  if (name == "himmelblau") {
    const double a = x * x + y - 11.0, b = x + y * y - 7.0;
    return a * a + b * b;
  }
  if (name == "brent") {
    const double u = x / 2.0, v = y / 2.0;
    return u * u + v * v + std::exp(-((u - 5.0) * (u - 5.0) + (v - 5.0) * (v - 5.0)));
  }
  if (name == "threehump") {
    const double u = 2.0 * x / 5.0, v = 2.0 * y / 5.0;
    const double u2 = u * u;
    return 2.0 * u2 - 1.05 * u2 * u2 + u2 * u2 * u2 / 6.0 + u * v + v * v;
  }
  if (name == "adjiman") return std::cos(x) * std::sin(y) - x / (y * y + 1.0);
  throw std::invalid_argument("unknown 2D target '" + std::string(name) + "'");
}

struct TargetFunction {
  std::string name;
  std::size_t dim = 1;
  bool complex = false;
  std::vector<std::pair<double, double>> domain;
  std::function<Complex(std::span<const double>)> raw;
  /// Normalized value = raw / scale.
  double scale = 1.0;

  Complex operator()(std::span<const double> x) const { return raw(x) / scale; }
};

/// Points per dimension of a uniform grid with inclusive endpoints.
struct GridSpec {
  std::vector<std::size_t> shape;

  static GridSpec line(std::size_t n) { return {{n}}; }
  static GridSpec square(std::size_t n) { return {{n, n}}; }
};

/// Grid used to scan for the normalization constant.
inline GridSpec default_scan_grid(std::size_t dim) {
  return dim == 1 ? GridSpec::line(1001) : GridSpec::square(101);
}
/// Training grid when a config does not say otherwise.
inline GridSpec default_training_grid(std::size_t dim) {
  return dim == 1 ? GridSpec::line(101) : GridSpec::square(31);
}

/// Row-major grid points; the first coordinate varies slowest.
inline std::vector<std::vector<double>> grid_points(
    const std::vector<std::pair<double, double>>& domain, const GridSpec& grid) {
  if (grid.shape.size() != domain.size()) {
    throw std::invalid_argument("grid has " + std::to_string(grid.shape.size()) +
                                " dimensions, domain has " + std::to_string(domain.size()));
  }
  std::size_t total = 1;
  for (std::size_t n : grid.shape) {
    if (n < 2) throw std::invalid_argument("grid needs at least 2 points per dimension");
    total *= n;
  }
  std::vector<std::vector<double>> pts;
  pts.reserve(total);
  std::vector<std::size_t> idx(domain.size(), 0);
  for (std::size_t k = 0; k < total; ++k) {
    std::vector<double> x(domain.size());
    for (std::size_t d = 0; d < domain.size(); ++d) {
      const auto [lo, hi] = domain[d];
      const std::size_t n = grid.shape[d];
      // Hit both endpoints exactly.
      x[d] = idx[d] + 1 == n ? hi
                             : lo + (hi - lo) * static_cast<double>(idx[d]) /
                                        static_cast<double>(n - 1);
    }
    pts.push_back(std::move(x));
    for (std::size_t d = domain.size(); d-- > 0;) {
      if (++idx[d] < grid.shape[d]) break;
      idx[d] = 0;
    }
  }
  return pts;
}

/// Registry lookup. Accepts the 1D and 2D names and "re+i*im" for complex
/// compositions of two 1D names. The result is not normalized.
inline TargetFunction make_target(const std::string& name) {
  TargetFunction t;
  t.name = name;
  if (is_target_1d(name)) {
    t.dim = 1;
    t.domain = {{-1.0, 1.0}};
    t.raw = [name](std::span<const double> x) { return Complex{eval_1d(name, x[0]), 0.0}; };
    return t;
  }
  if (is_target_2d(name)) {
    t.dim = 2;
    t.domain = {{-5.0, 5.0}, {-5.0, 5.0}};
    t.raw = [name](std::span<const double> x) { return Complex{eval_2d(name, x[0], x[1]), 0.0}; };
    return t;
  }
  if (const auto plus = name.find("+i*"); plus != std::string::npos) {
    const std::string re = name.substr(0, plus), im = name.substr(plus + 3);
    if (!is_target_1d(re) || !is_target_1d(im)) {
      throw std::invalid_argument("complex target '" + name + "' needs two 1D names");
    }
    t.dim = 1;
    t.complex = true;
    t.domain = {{-1.0, 1.0}};
    t.raw = [re, im](std::span<const double> x) {
      return Complex{eval_1d(re, x[0]), eval_1d(im, x[0])};
    };
    return t;
  }
  throw std::invalid_argument("unknown target '" + name + "'");
}

inline double max_modulus(const TargetFunction& t, const GridSpec& grid) {
  double m = 0.0;
  for (const auto& x : grid_points(t.domain, grid)) m = std::max(m, std::abs(t(x)));
  return m;
}

/// Rescales so that |t| <= 1 on the grid. Functions already inside the unit
/// disc are left alone, so applying this twice changes nothing.
inline TargetFunction normalize(TargetFunction t, const GridSpec& grid) {
  const double m = max_modulus(t, grid);
  if (!std::isfinite(m)) throw std::domain_error("normalize: non-finite target values");
  if (m > 1.0) t.scale *= m;
  return t;
}

/// z(x) = f_re(x) + i f_im(x), normalized over `scan`.
inline TargetFunction make_complex(const std::string& re, const std::string& im,
                                   const GridSpec& scan = GridSpec::line(1001)) {
  return normalize(make_target(re + "+i*" + im), scan);
}

/// Registry target normalized over both the dense scan grid and `training`.
inline TargetFunction prepare_target(const std::string& name, const GridSpec& training) {
  TargetFunction t = make_target(name);
  const GridSpec scan = default_scan_grid(t.dim);
  return normalize(normalize(std::move(t), scan), training);
}

inline Dataset make_dataset(const TargetFunction& t, const GridSpec& grid) {
  Dataset d;
  d.meta.target_name = t.name;
  d.meta.bounds = t.domain;
  d.meta.shape = grid.shape;
  d.meta.scale = t.scale;
  for (auto& x : grid_points(t.domain, grid)) {
    const Complex v = t(x);
    d.points.push_back({std::move(x), v});
  }
  return d;
}

inline Dataset make_dataset(const TargetFunction& t, std::size_t n) {
  return make_dataset(t, t.dim == 1 ? GridSpec::line(n) : GridSpec::square(n));
}

/// Reads a CSV table with a header naming the columns: `x` (and `y` for two
/// inputs) plus either `f` or `re` and `im`. Targets are rescaled into the
/// unit disc the same way registry functions are.
inline Dataset load_tabulated(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tabulated target '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("'" + path + "' is empty");

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string cell; std::getline(ss, cell, ',');) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      out.push_back(cell);
    }
    return out;
  };
  const auto header = split(line);
  auto column = [&header](std::string_view n) -> int {
    const auto it = std::find(header.begin(), header.end(), n);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int cx = column("x"), cy = column("y"), cf = column("f"), cre = column("re"),
            cim = column("im");
  if (cx < 0 || (cf < 0 && (cre < 0 || cim < 0))) {
    throw std::runtime_error("'" + path + "': header needs x and f (or re, im)");
  }

  Dataset d;
  d.meta.target_name = "file:" + path;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    auto num = [&](int c) {
      if (c < 0 || static_cast<std::size_t>(c) >= cells.size()) {
        throw std::runtime_error("'" + path + "' row " + std::to_string(row) + ": missing column");
      }
      return std::stod(cells[static_cast<std::size_t>(c)]);
    };
    DataPoint p;
    p.x.push_back(num(cx));
    if (cy >= 0) p.x.push_back(num(cy));
    p.target = cf >= 0 ? Complex{num(cf), 0.0} : Complex{num(cre), num(cim)};
    d.points.push_back(std::move(p));
  }
  if (d.points.empty()) throw std::runtime_error("'" + path + "' has no data rows");

  const std::size_t dim = d.points.front().x.size();
  d.meta.bounds.clear();
  for (double v : d.points.front().x) d.meta.bounds.emplace_back(v, v);
  double m = 0.0;
  for (const auto& p : d.points) {
    for (std::size_t k = 0; k < dim; ++k) {
      d.meta.bounds[k].first = std::min(d.meta.bounds[k].first, p.x[k]);
      d.meta.bounds[k].second = std::max(d.meta.bounds[k].second, p.x[k]);
    }
    if (p.x.size() != dim) throw std::runtime_error("'" + path + "': ragged input columns");
    m = std::max(m, std::abs(p.target));
  }
  if (m > 1.0) {
    d.meta.scale = m;
    for (auto& p : d.points) p.target /= m;
  }
  d.meta.shape = {d.points.size()};
  return d;
}

}  // namespace qapprox
