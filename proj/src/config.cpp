#include "swarmfield/config.hpp"

#include "swarmfield/error.hpp"
#include "swarmfield/hash.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

namespace swarmfield {

namespace {

std::string trim(const std::string& s)
{
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos)
    return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct Key
{
  std::string section;
  std::string key;
};

double to_double(const Key& k, const std::string& raw)
{
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ValidationError(k.section, k.key, "must be a number");
  return v;
}

long long to_int(const Key& k, const std::string& raw)
{
  const std::string s = trim(raw);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ValidationError(k.section, k.key, "must be an integer");
  return v;
}

std::uint64_t to_u64(const Key& k, const std::string& raw)
{
  const std::string s = trim(raw);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ValidationError(k.section, k.key, "must be a non-negative integer");
  return v;
}

bool to_bool(const Key& k, const std::string& raw)
{
  const std::string s = trim(raw);
  if (s == "true")
    return true;
  if (s == "false")
    return false;
  throw ValidationError(k.section, k.key, "must be true or false");
}

std::optional<double> to_auto_or_double(const Key& k, const std::string& raw)
{
  if (trim(raw) == "auto")
    return std::nullopt;
  return to_double(k, raw);
}

std::string auto_or(const std::optional<double>& v)
{
  return v ? format_double(*v) : "auto";
}

struct Field
{
  Key id;
  std::function<std::string(const MissionConfig&)> get;
  std::function<void(MissionConfig&, const Key&, const std::string&)> set;
};

#define SF_DOUBLE(sec, name, member)                                            \
  Field{{sec, name},                                                            \
        [](const MissionConfig& c) { return format_double(c.member); },         \
        [](MissionConfig& c, const Key& k, const std::string& v) {              \
          c.member = to_double(k, v);                                           \
        }}
#define SF_INT(sec, name, member, type)                                         \
  Field{{sec, name},                                                            \
        [](const MissionConfig& c) { return std::to_string(c.member); },        \
        [](MissionConfig& c, const Key& k, const std::string& v) {              \
          const long long x = to_int(k, v);                                     \
          if (x < 0)                                                            \
            throw ValidationError(k.section, k.key, "must be >= 0");            \
          c.member = static_cast<type>(x);                                      \
        }}
#define SF_STRING(sec, name, member)                                            \
  Field{{sec, name}, [](const MissionConfig& c) { return c.member; },           \
        [](MissionConfig& c, const Key&, const std::string& v) {                \
          c.member = trim(v);                                                   \
        }}

const std::vector<Field>& fields()
{
  static const std::vector<Field> table = {
      SF_INT("meta", "schema_version", schema_version, int),

      SF_INT("mission", "n", n, std::size_t),
      SF_DOUBLE("mission", "dt", dt),
      SF_DOUBLE("mission", "period", period),
      SF_DOUBLE("mission", "gamma", gamma),
      SF_DOUBLE("mission", "eta", eta),
      SF_INT("mission", "max_outer", max_outer, int),
      Field{{"mission", "seed"},
            [](const MissionConfig& c) { return std::to_string(c.seed); },
            [](MissionConfig& c, const Key& k, const std::string& v) {
              c.seed = to_u64(k, v);
            }},
      SF_STRING("mission", "truth", truth),
      SF_DOUBLE("mission", "noise_var", noise_var),
      SF_STRING("mission", "uncertainty_stat", uncertainty_stat),
      SF_DOUBLE("mission", "init_x0", init_region.x0),
      SF_DOUBLE("mission", "init_y0", init_region.y0),
      SF_DOUBLE("mission", "init_x1", init_region.x1),
      SF_DOUBLE("mission", "init_y1", init_region.y1),
      SF_INT("mission", "agent_substeps", agent_substeps, int),

      SF_DOUBLE("domain", "b", b),
      SF_DOUBLE("domain", "c", c),
      SF_INT("domain", "nx", nx, int),
      SF_INT("domain", "ny", ny, int),

      SF_DOUBLE("agents", "sigma", sigma),

      Field{{"kde", "bandwidth"},
            [](const MissionConfig& c) { return auto_or(c.kde_bandwidth); },
            [](MissionConfig& c, const Key& k, const std::string& v) {
              c.kde_bandwidth = to_auto_or_double(k, v);
            }},
      SF_DOUBLE("kde", "floor", kde_floor),

      SF_DOUBLE("gp", "signal_var", gp.signal_var),
      SF_DOUBLE("gp", "lengthscale", gp.lengthscale),
      SF_DOUBLE("gp", "noise_var", gp.noise_var),
      SF_INT("gp", "max_points", gp_max_points, std::size_t),
      Field{{"gp", "tune"},
            [](const MissionConfig& c) { return std::string(c.gp_tune ? "true" : "false"); },
            [](MissionConfig& c, const Key& k, const std::string& v) {
              c.gp_tune = to_bool(k, v);
            }},

      SF_INT("planner", "I", modes_i, int),
      SF_INT("planner", "J", modes_j, int),
      SF_INT("planner", "N", intervals, int),
      SF_DOUBLE("planner", "w_f", w_f),
      SF_DOUBLE("planner", "w_p", w_p),
      SF_DOUBLE("planner", "w_v", w_v),
      Field{{"planner", "kl_floor"},
            [](const MissionConfig& c) { return auto_or(c.kl_floor); },
            [](MissionConfig& c, const Key& k, const std::string& v) {
              c.kl_floor = to_auto_or_double(k, v);
            }},
      SF_INT("planner", "max_iters", max_iters, int),
      SF_DOUBLE("planner", "rel_tol", rel_tol),
      SF_DOUBLE("planner", "grad_tol", grad_tol),
      SF_DOUBLE("planner", "max_step", max_step),
      SF_STRING("planner", "costate_boundary", costate_boundary),

      SF_DOUBLE("controller", "alpha", alpha),
      SF_DOUBLE("controller", "v_max", v_max),

      SF_DOUBLE("pde", "cfl", cfl),
      SF_DOUBLE("pde", "dt_max", pde_dt_max),
  };
  return table;
}

#undef SF_DOUBLE
#undef SF_INT
#undef SF_STRING

const Field* find_field(const std::string& section, const std::string& key)
{
  for (const Field& f : fields())
    if (f.id.section == section && f.id.key == key)
      return &f;
  return nullptr;
}

void require(bool ok, const char* section, const char* key, const char* reason)
{
  if (!ok)
    throw ValidationError(section, key, reason);
}

} // namespace

int MissionConfig::steps_per_period() const
{
  return static_cast<int>(std::lround(period / dt));
}

KdeConfig MissionConfig::kde() const
{
  return {kde_bandwidth, kde_floor};
}

ControllerConfig MissionConfig::controller() const
{
  ControllerConfig out;
  out.alpha = alpha;
  out.sigma = sigma;
  if (v_max > 0.0)
    out.v_max = v_max;
  return out;
}

PlannerConfig MissionConfig::planner(double t0) const
{
  PlannerConfig out;
  out.I = modes_i;
  out.J = modes_j;
  out.N = intervals;
  out.t0 = t0;
  out.T = period;
  out.max_iters = max_iters;
  out.rel_tol = rel_tol;
  out.grad_tol = grad_tol;
  out.max_step = max_step;
  out.costate_boundary =
      costate_boundary == "dirichlet" ? CostateBoundary::Dirichlet : CostateBoundary::Natural;
  out.dt_max = pde_dt_max;
  out.cfl = cfl;
  return out;
}

CostFunctional MissionConfig::cost(ScalarField p_f) const
{
  CostFunctional out(std::move(p_f), kl_floor.value_or(-1.0));
  out.w_f = w_f;
  out.w_p = w_p;
  out.w_v = w_v;
  return out;
}

void validate(const MissionConfig& c)
{
  require(c.schema_version == 1, "meta", "schema_version", "must be 1");

  require(c.n >= 1, "mission", "n", "must be >= 1");
  require(c.dt > 0.0 && std::isfinite(c.dt), "mission", "dt", "must be > 0");
  require(c.period > 0.0 && std::isfinite(c.period), "mission", "period", "must be > 0");
  {
    const double r = c.period / c.dt;
    require(std::lround(r) >= 1 && std::abs(r - std::round(r)) <= 1e-9 * r, "mission",
            "period", "must be a positive integer multiple of dt");
  }
  require(c.gamma > 0.0, "mission", "gamma", "must be > 0");
  require(c.eta > 0.0 && std::isfinite(c.eta), "mission", "eta", "must be > 0");
  require(c.max_outer >= 1, "mission", "max_outer", "must be >= 1");
  require(c.truth == "sinc" || c.truth == "bumps", "mission", "truth",
          "must be sinc or bumps");
  require(c.noise_var >= 0.0 && std::isfinite(c.noise_var), "mission", "noise_var",
          "must be >= 0");
  require(c.uncertainty_stat == "variance" || c.uncertainty_stat == "stddev", "mission",
          "uncertainty_stat", "must be variance or stddev");
  require(c.agent_substeps >= 1, "mission", "agent_substeps", "must be >= 1");

  require(c.b > 0.0 && std::isfinite(c.b), "domain", "b", "must be > 0");
  require(c.c > 0.0 && std::isfinite(c.c), "domain", "c", "must be > 0");
  require(c.nx >= 3, "domain", "nx", "must be >= 3");
  require(c.ny >= 3, "domain", "ny", "must be >= 3");

  const Rect& r = c.init_region;
  require(r.x0 >= 0.0 && r.x0 < r.x1, "mission", "init_x0", "must satisfy 0 <= init_x0 < init_x1");
  require(r.x1 <= c.b, "mission", "init_x1", "must be <= domain b");
  require(r.y0 >= 0.0 && r.y0 < r.y1, "mission", "init_y0", "must satisfy 0 <= init_y0 < init_y1");
  require(r.y1 <= c.c, "mission", "init_y1", "must be <= domain c");

  require(c.sigma >= 0.0 && std::isfinite(c.sigma), "agents", "sigma", "must be >= 0");

  require(!c.kde_bandwidth || *c.kde_bandwidth > 0.0, "kde", "bandwidth",
          "must be auto or > 0");
  require(c.kde_floor > 0.0 && c.kde_floor < 1.0, "kde", "floor", "must lie in (0, 1)");

  require(c.gp.signal_var > 0.0, "gp", "signal_var", "must be > 0");
  require(c.gp.lengthscale > 0.0, "gp", "lengthscale", "must be > 0");
  require(c.gp.noise_var > 0.0, "gp", "noise_var", "must be > 0");
  require(c.gp_max_points >= 1, "gp", "max_points", "must be >= 1");

  require(c.modes_i >= 1, "planner", "I", "must be >= 1");
  require(c.modes_j >= 1, "planner", "J", "must be >= 1");
  require(c.intervals >= 1, "planner", "N", "must be >= 1");
  require(c.w_f >= 0.0, "planner", "w_f", "must be >= 0");
  require(c.w_p >= 0.0, "planner", "w_p", "must be >= 0");
  require(c.w_v >= 0.0, "planner", "w_v", "must be >= 0");
  require(c.w_f + c.w_p + c.w_v > 0.0, "planner", "w_f", "weights must not all be zero");
  require(!c.kl_floor || *c.kl_floor > 0.0, "planner", "kl_floor", "must be auto or > 0");
  require(c.max_iters >= 1, "planner", "max_iters", "must be >= 1");
  require(c.rel_tol > 0.0, "planner", "rel_tol", "must be > 0");
  require(c.grad_tol > 0.0, "planner", "grad_tol", "must be > 0");
  require(c.max_step > 0.0, "planner", "max_step", "must be > 0");
  require(c.costate_boundary == "natural" || c.costate_boundary == "dirichlet", "planner",
          "costate_boundary", "must be natural or dirichlet");

  require(c.alpha > 0.0 && std::isfinite(c.alpha), "controller", "alpha", "must be > 0");
  require(c.v_max >= 0.0, "controller", "v_max", "must be >= 0 (0 disables the clamp)");

  require(c.cfl > 0.0 && c.cfl <= 0.9, "pde", "cfl", "must lie in (0, 0.9]");
  require(c.pde_dt_max > 0.0, "pde", "dt_max", "must be > 0");
}

MissionConfig parse_config(const std::string& text)
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ParseError, std::string("config: ") + e.message() +
                                           " (line " + std::to_string(e.line()) + ")");
  }

  MissionConfig cfg;
  for (const auto& [section, body] : tree) {
    if (body.empty())
      throw ValidationError("", section, "unknown key (keys must sit inside a section)");
    for (const auto& [key, value] : body) {
      const Field* f = find_field(section, key);
      if (!f)
        throw ValidationError(section, key, "unknown key");
      f->set(cfg, f->id, value.data());
    }
  }
  validate(cfg);
  return cfg;
}

MissionConfig load_config(const std::string& path)
{
  return parse_config(read_text(path));
}

std::string canonical_serialize(const MissionConfig& cfg)
{
  std::map<std::string, std::map<std::string, std::string>> sections;
  for (const Field& f : fields())
    sections[f.id.section][f.id.key] = f.get(cfg);
  std::string out;
  for (const auto& [name, keys] : sections) {
    if (!out.empty())
      out += '\n';
    out += "[" + name + "]\n";
    for (const auto& [key, value] : keys)
      out += key + " = " + value + "\n";
  }
  return out;
}

std::string canonical_hash(const MissionConfig& cfg)
{
  return sha256_hex(canonical_serialize(cfg));
}

} // namespace swarmfield
