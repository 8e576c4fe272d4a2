#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace swarmfield {

struct Vec2
{
  double x = 0.0;
  double y = 0.0;
};

//! Cell-centered uniform grid over the rectangle [0,b] x [0,c].
class Grid
{
public:
  Grid(double b, double c, int nx, int ny);

  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }
  int nx() const noexcept { return nx_; }
  int ny() const noexcept { return ny_; }
  double hx() const noexcept { return b_ / nx_; }
  double hy() const noexcept { return c_ / ny_; }
  double cell_area() const noexcept { return hx() * hy(); }
  std::size_t size() const noexcept
  {
    return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_);
  }

  double xc(int i) const noexcept { return (i + 0.5) * hx(); }
  double yc(int j) const noexcept { return (j + 0.5) * hy(); }
  Vec2 center(int i, int j) const noexcept { return {xc(i), yc(j)}; }

  //! Row-major: rows run along y, columns along x.
  std::size_t index(int i, int j) const noexcept
  {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) +
           static_cast<std::size_t>(i);
  }

  bool contains(Vec2 p) const noexcept
  {
    return p.x >= 0.0 && p.x <= b_ && p.y >= 0.0 && p.y <= c_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  double b_;
  double c_;
  int nx_;
  int ny_;
};

class ScalarField
{
public:
  explicit ScalarField(const Grid& grid, double fill = 0.0);
  ScalarField(const Grid& grid, std::vector<double> values);

  template<class F>
  static ScalarField sample(const Grid& grid, F&& f)
  {
    ScalarField out(grid);
    for (int j = 0; j < grid.ny(); ++j)
      for (int i = 0; i < grid.nx(); ++i)
        out(i, j) = f(grid.center(i, j));
    return out;
  }

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
  double operator()(int i, int j) const noexcept
  {
    return values_[grid_.index(i, j)];
  }
  double& operator[](std::size_t k) noexcept { return values_[k]; }
  double operator[](std::size_t k) const noexcept { return values_[k]; }

  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }

  bool all_finite() const noexcept;
  double max() const noexcept;
  double min() const noexcept;

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double s);

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
  Grid grid_;
  std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(ScalarField a, double s);
ScalarField operator*(const ScalarField& a, const ScalarField& b);

struct VectorField
{
  ScalarField x;
  ScalarField y;

  explicit VectorField(const Grid& grid, double fill = 0.0)
    : x(grid, fill), y(grid, fill)
  {
  }
  VectorField(ScalarField x_, ScalarField y_);

  const Grid& grid() const noexcept { return x.grid(); }
  bool all_finite() const noexcept { return x.all_finite() && y.all_finite(); }
  //! Largest absolute component value.
  double max_abs() const noexcept;

  friend bool operator==(const VectorField&, const VectorField&) = default;
};

//! A spatially constant or grid-sampled non-negative coefficient (sigma, alpha).
using Coefficient = std::variant<double, ScalarField>;

double coefficient_max(const Coefficient& c);
double coefficient_min(const Coefficient& c);
double coefficient_at(const Coefficient& c, std::size_t k);
ScalarField coefficient_field(const Coefficient& c, const Grid& grid);

// Differential operators. Interior cells use second-order central
// differences; see grid.cpp for the boundary-cell stencils.
VectorField gradient(const ScalarField& f);
ScalarField divergence(const VectorField& F);
ScalarField laplacian(const ScalarField& f);

double integrate(const ScalarField& f);
double l2_norm(const ScalarField& f);
ScalarField normalize(const ScalarField& f);
ScalarField uniform_density(const Grid& grid);

//! Checks non-negativity and unit mass to `tol`.
bool is_density(const ScalarField& f, double tol = 1e-9);

double interpolate(const ScalarField& f, Vec2 p);
Vec2 interpolate(const VectorField& F, Vec2 p);

// Serialization. CSV: a "nx,ny,b,c" header line, the values of that header,
// then ny rows of nx values (vector fields: x-component rows, then y rows).
std::string to_csv(const ScalarField& f);
std::string to_csv(const VectorField& F);
ScalarField scalar_from_csv(const std::string& text);
VectorField vector_from_csv(const std::string& text);
std::string to_json(const ScalarField& f);
std::string to_json(const VectorField& F);
ScalarField scalar_from_json(const std::string& text);
VectorField vector_from_json(const std::string& text);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

//! Loads a scalar field from .csv or .json, chosen by extension.
ScalarField load_scalar_field(const std::string& path);

//! Shortest decimal representation that round-trips exactly.
std::string format_double(double v);

} // namespace swarmfield
