#include "swarmfield/grid.hpp"

#include "swarmfield/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace swarmfield {

const char* to_string(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::RegionOutsideDomain: return "RegionOutsideDomain";
    case ErrorCode::NonFiniteVelocity: return "NonFiniteVelocity";
    case ErrorCode::NonFiniteFeedback: return "NonFiniteFeedback";
    case ErrorCode::NonPositiveDensity: return "NonPositiveDensity";
    case ErrorCode::SingularGram: return "SingularGram";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Grid::Grid(double b, double c, int nx, int ny) : b_(b), c_(c), nx_(nx), ny_(ny)
{
  if (!(b > 0.0) || !(c > 0.0) || !std::isfinite(b) || !std::isfinite(c))
    throw Error(ErrorCode::InvalidArgument, "grid extents must be positive");
  if (nx < 3 || ny < 3)
    throw Error(ErrorCode::InvalidArgument, "grid needs at least 3 cells per axis");
}

ScalarField::ScalarField(const Grid& grid, double fill)
  : grid_(grid), values_(grid.size(), fill)
{
}

ScalarField::ScalarField(const Grid& grid, std::vector<double> values)
  : grid_(grid), values_(std::move(values))
{
  if (values_.size() != grid_.size())
    throw Error(ErrorCode::ShapeMismatch, "value count does not match grid");
}

bool ScalarField::all_finite() const noexcept
{
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

double ScalarField::max() const noexcept
{
  return *std::max_element(values_.begin(), values_.end());
}

double ScalarField::min() const noexcept
{
  return *std::min_element(values_.begin(), values_.end());
}

namespace {
void require_same_grid(const Grid& a, const Grid& b)
{
  if (!(a == b))
    throw Error(ErrorCode::ShapeMismatch, "fields live on different grids");
}
} // namespace

ScalarField& ScalarField::operator+=(const ScalarField& o)
{
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k)
    values_[k] += o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o)
{
  require_same_grid(grid_, o.grid_);
  for (std::size_t k = 0; k < values_.size(); ++k)
    values_[k] -= o.values_[k];
  return *this;
}

ScalarField& ScalarField::operator*=(double s)
{
  for (double& v : values_)
    v *= s;
  return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(ScalarField a, double s) { return a *= s; }

ScalarField operator*(const ScalarField& a, const ScalarField& b)
{
  require_same_grid(a.grid(), b.grid());
  ScalarField out(a.grid());
  for (std::size_t k = 0; k < a.size(); ++k)
    out[k] = a[k] * b[k];
  return out;
}

VectorField::VectorField(ScalarField x_, ScalarField y_)
  : x(std::move(x_)), y(std::move(y_))
{
  require_same_grid(x.grid(), y.grid());
}

double VectorField::max_abs() const noexcept
{
  double m = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    m = std::max({m, std::abs(x[k]), std::abs(y[k])});
  return m;
}

double coefficient_max(const Coefficient& c)
{
  if (const double* v = std::get_if<double>(&c))
    return *v;
  return std::get<ScalarField>(c).max();
}

double coefficient_min(const Coefficient& c)
{
  if (const double* v = std::get_if<double>(&c))
    return *v;
  return std::get<ScalarField>(c).min();
}

double coefficient_at(const Coefficient& c, std::size_t k)
{
  if (const double* v = std::get_if<double>(&c))
    return *v;
  return std::get<ScalarField>(c)[k];
}

ScalarField coefficient_field(const Coefficient& c, const Grid& grid)
{
  if (const double* v = std::get_if<double>(&c))
    return ScalarField(grid, *v);
  const auto& f = std::get<ScalarField>(c);
  if (!(f.grid() == grid))
    throw Error(ErrorCode::ShapeMismatch, "coefficient field lives on another grid");
  return f;
}

VectorField gradient(const ScalarField& f)
{
  const Grid& g = f.grid();
  const int nx = g.nx(), ny = g.ny();
  const double hx = g.hx(), hy = g.hy();
  VectorField out(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (i == 0)
        out.x(i, j) = (f(1, j) - f(0, j)) / hx;
      else if (i == nx - 1)
        out.x(i, j) = (f(nx - 1, j) - f(nx - 2, j)) / hx;
      else
        out.x(i, j) = (f(i + 1, j) - f(i - 1, j)) / (2.0 * hx);

      if (j == 0)
        out.y(i, j) = (f(i, 1) - f(i, 0)) / hy;
      else if (j == ny - 1)
        out.y(i, j) = (f(i, ny - 1) - f(i, ny - 2)) / hy;
      else
        out.y(i, j) = (f(i, j + 1) - f(i, j - 1)) / (2.0 * hy);
    }
  }
  return out;
}

// Face-average form: the flux through an interior face is the mean of the two
// neighbouring cells and the wall faces carry nothing. In the interior this is
// the central difference; summed over the grid it telescopes to zero.
ScalarField divergence(const VectorField& F)
{
  const Grid& g = F.grid();
  const int nx = g.nx(), ny = g.ny();
  const double hx = g.hx(), hy = g.hy();
  ScalarField out(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double east = i + 1 < nx ? 0.5 * (F.x(i, j) + F.x(i + 1, j)) : 0.0;
      const double west = i > 0 ? 0.5 * (F.x(i - 1, j) + F.x(i, j)) : 0.0;
      const double north = j + 1 < ny ? 0.5 * (F.y(i, j) + F.y(i, j + 1)) : 0.0;
      const double south = j > 0 ? 0.5 * (F.y(i, j - 1) + F.y(i, j)) : 0.0;
      out(i, j) = (east - west) / hx + (north - south) / hy;
    }
  }
  return out;
}

ScalarField laplacian(const ScalarField& f)
{
  const Grid& g = f.grid();
  const int nx = g.nx(), ny = g.ny();
  const double ihx2 = 1.0 / (g.hx() * g.hx()), ihy2 = 1.0 / (g.hy() * g.hy());
  ScalarField out(g);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const double c = f(i, j);
      // mirrored ghost cells
      const double e = f(std::min(i + 1, nx - 1), j);
      const double w = f(std::max(i - 1, 0), j);
      const double n = f(i, std::min(j + 1, ny - 1));
      const double s = f(i, std::max(j - 1, 0));
      out(i, j) = (e - 2.0 * c + w) * ihx2 + (n - 2.0 * c + s) * ihy2;
    }
  }
  return out;
}

double integrate(const ScalarField& f)
{
  // Neumaier-compensated sum
  double sum = 0.0, comp = 0.0;
  for (double v : f.values()) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v))
      comp += (sum - t) + v;
    else
      comp += (v - t) + sum;
    sum = t;
  }
  return (sum + comp) * f.grid().cell_area();
}

double l2_norm(const ScalarField& f)
{
  return std::sqrt(integrate(f * f));
}

ScalarField normalize(const ScalarField& f)
{
  const double mass = integrate(f);
  if (!(mass > 0.0) || !std::isfinite(mass))
    throw Error(ErrorCode::ZeroMass, "cannot normalize a field with no mass");
  ScalarField out = f;
  out *= 1.0 / mass;
  return out;
}

ScalarField uniform_density(const Grid& grid)
{
  return ScalarField(grid, 1.0 / (grid.b() * grid.c()));
}

bool is_density(const ScalarField& f, double tol)
{
  if (!f.all_finite() || f.min() < 0.0)
    return false;
  return std::abs(integrate(f) - 1.0) <= tol;
}

namespace {
struct Stencil
{
  int i0, j0;
  double tx, ty;
};

Stencil locate(const Grid& g, Vec2 p)
{
  const double u = std::clamp(p.x / g.hx() - 0.5, 0.0, double(g.nx() - 1));
  const double v = std::clamp(p.y / g.hy() - 0.5, 0.0, double(g.ny() - 1));
  const int i0 = std::min(static_cast<int>(u), g.nx() - 2);
  const int j0 = std::min(static_cast<int>(v), g.ny() - 2);
  return {i0, j0, u - i0, v - j0};
}

double blend(const ScalarField& f, const Stencil& s)
{
  return (1.0 - s.tx) * (1.0 - s.ty) * f(s.i0, s.j0) +
         s.tx * (1.0 - s.ty) * f(s.i0 + 1, s.j0) +
         (1.0 - s.tx) * s.ty * f(s.i0, s.j0 + 1) +
         s.tx * s.ty * f(s.i0 + 1, s.j0 + 1);
}
} // namespace

double interpolate(const ScalarField& f, Vec2 p)
{
  return blend(f, locate(f.grid(), p));
}

Vec2 interpolate(const VectorField& F, Vec2 p)
{
  const Stencil s = locate(F.grid(), p);
  return {blend(F.x, s), blend(F.y, s)};
}

std::string format_double(double v)
{
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view tok)
{
  while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t'))
    tok.remove_prefix(1);
  while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
    tok.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
    throw Error(ErrorCode::ParseError, "bad number '" + std::string(tok) + "'");
  return v;
}

std::vector<double> split_numbers(const std::string& line)
{
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t end = line.find(',', start);
    if (end == std::string::npos)
      end = line.size();
    out.push_back(parse_double(std::string_view(line).substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

void append_rows(std::string& out, const ScalarField& f)
{
  const Grid& g = f.grid();
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      if (i)
        out += ',';
      out += format_double(f(i, j));
    }
    out += '\n';
  }
}

std::string csv_header(const Grid& g)
{
  return "nx,ny,b,c\n" + std::to_string(g.nx()) + "," + std::to_string(g.ny()) +
         "," + format_double(g.b()) + "," + format_double(g.c()) + "\n";
}

struct CsvBody
{
  Grid grid;
  std::vector<std::vector<double>> rows;
};

CsvBody read_csv(const std::string& text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("nx,ny,b,c", 0) != 0)
    throw Error(ErrorCode::ParseError, "field CSV must start with 'nx,ny,b,c'");
  if (!std::getline(in, line))
    throw Error(ErrorCode::ParseError, "field CSV is missing its dimensions");
  const auto dims = split_numbers(line);
  if (dims.size() != 4)
    throw Error(ErrorCode::ParseError, "field CSV dimensions need 4 entries");
  CsvBody body{Grid(dims[2], dims[3], int(dims[0]), int(dims[1])), {}};
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r")
      continue;
    body.rows.push_back(split_numbers(line));
    if (int(body.rows.back().size()) != body.grid.nx())
      throw Error(ErrorCode::ParseError, "field CSV row has the wrong width");
  }
  return body;
}

ScalarField rows_to_field(const Grid& g, const std::vector<std::vector<double>>& rows,
                          int first_row)
{
  ScalarField f(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i)
      f(i, j) = rows[first_row + j][i];
  return f;
}

} // namespace

std::string to_csv(const ScalarField& f)
{
  std::string out = csv_header(f.grid());
  append_rows(out, f);
  return out;
}

std::string to_csv(const VectorField& F)
{
  std::string out = csv_header(F.grid());
  append_rows(out, F.x);
  append_rows(out, F.y);
  return out;
}

ScalarField scalar_from_csv(const std::string& text)
{
  const CsvBody body = read_csv(text);
  if (int(body.rows.size()) != body.grid.ny())
    throw Error(ErrorCode::ParseError, "scalar field CSV needs ny rows");
  return rows_to_field(body.grid, body.rows, 0);
}

VectorField vector_from_csv(const std::string& text)
{
  const CsvBody body = read_csv(text);
  if (int(body.rows.size()) != 2 * body.grid.ny())
    throw Error(ErrorCode::ParseError, "vector field CSV needs 2*ny rows");
  return VectorField(rows_to_field(body.grid, body.rows, 0),
                     rows_to_field(body.grid, body.rows, body.grid.ny()));
}

namespace {
nlohmann::json grid_json(const Grid& g)
{
  return {{"nx", g.nx()}, {"ny", g.ny()}, {"b", g.b()}, {"c", g.c()}};
}

Grid grid_from(const nlohmann::json& j)
{
  return Grid(j.at("b").get<double>(), j.at("c").get<double>(),
              j.at("nx").get<int>(), j.at("ny").get<int>());
}

template<class F>
auto parse_json_or_throw(F&& f)
{
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("field JSON: ") + e.what());
  }
}
} // namespace

std::string to_json(const ScalarField& f)
{
  nlohmann::json j = grid_json(f.grid());
  j["values"] = std::vector<double>(f.values().begin(), f.values().end());
  return j.dump();
}

std::string to_json(const VectorField& F)
{
  nlohmann::json j = grid_json(F.grid());
  j["x"] = std::vector<double>(F.x.values().begin(), F.x.values().end());
  j["y"] = std::vector<double>(F.y.values().begin(), F.y.values().end());
  return j.dump();
}

ScalarField scalar_from_json(const std::string& text)
{
  return parse_json_or_throw([&] {
    const auto j = nlohmann::json::parse(text);
    return ScalarField(grid_from(j), j.at("values").get<std::vector<double>>());
  });
}

VectorField vector_from_json(const std::string& text)
{
  return parse_json_or_throw([&] {
    const auto j = nlohmann::json::parse(text);
    const Grid g = grid_from(j);
    return VectorField(ScalarField(g, j.at("x").get<std::vector<double>>()),
                       ScalarField(g, j.at("y").get<std::vector<double>>()));
  });
}

void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  if (!out)
    throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::string read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScalarField load_scalar_field(const std::string& path)
{
  const std::string text = read_text(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0)
    return scalar_from_json(text);
  return scalar_from_csv(text);
}

} // namespace swarmfield
