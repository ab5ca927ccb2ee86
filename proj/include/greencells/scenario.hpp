#pragma once

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "greencells/channel.hpp"
#include "greencells/power.hpp"
#include "greencells/quadrature.hpp"

namespace greencells {

enum class ShadowConvention { StdDb, VarDb };
enum class SchemeKind { Nearest, MaxPower };

// Flat, commented key-value scenario file; keys carry explicit units.
// The shadow dB convention is mandatory whenever shadowing is on.
struct Scenario {
  double alpha = 3.76;
  SchemeKind scheme = SchemeKind::Nearest;
  double shadow_sigma_db = 0.0;
  ShadowConvention shadow_convention = ShadowConvention::StdDb;
  bool shadow_convention_set = false;
  double shadow_mu_db = 0.0;
  double lambda_u_per_km2 = 370.0;
  std::vector<double> cell_load_grid = {};
  double p_on_w = 6.8;
  double p_off_w = 4.3;
  double delta = 4.0;
  double p_min_dbm = -106.0;
  bool link_budget = true;  // urban-micro budget folded into p_min, km units
  int quad_order = 6;
  double window_expected_bs = 500.0;
  std::uint64_t trials = 200;
  std::uint64_t seed = 1;
  int threads = 0;
  bool sir_gain_reuse = false;
  std::string out_dir = "out";

  bool operator==(const Scenario&) const = default;

  double sigma_nat() const {
    if (shadow_sigma_db == 0.0) return 0.0;
    const double sigma_db = shadow_convention == ShadowConvention::StdDb
                                ? shadow_sigma_db
                                : std::sqrt(shadow_sigma_db);
    return shadow_db_to_natural(sigma_db);
  }
  double mu_nat() const { return shadow_mu_db * 0.23025850929940457; }

  ChannelModel channel() const { return ChannelModel(alpha, mu_nat(), sigma_nat()); }

  AssociationScheme association() const {
    return scheme == SchemeKind::Nearest ? AssociationScheme::nearest_bs()
                                         : AssociationScheme::max_received_power();
  }

  // Urban micro at 2 GHz: 140.7 dB at 1 km, 20 dB penetration for 80% of
  // users, 5 dBi antenna. Folding the mean linear budget into p_min keeps the
  // transmit-power formula in km units.
  static constexpr double link_budget_gain() {
    return (0.8 * 0.01 + 0.2) * 3.1622776601683795 / 1.1748975549395297e14;
  }

  double p_min_effective_w() const {
    const double raw = dbm_to_watts(p_min_dbm);
    return link_budget ? raw / link_budget_gain() : raw;
  }

  // scale applied to per-km^2 intensities inside transmit power (m^2 for the
  // raw budget, km^2 once the link budget is folded in)
  double intensity_scale() const { return link_budget ? 1.0 : 1e-6; }

  PowerModel power() const {
    return PowerModel(p_on_w, p_off_w, delta, p_min_effective_w());
  }

  QuadratureRule quadrature() const { return gauss_hermite(quad_order); }

  std::vector<double> load_grid_or_default() const {
    if (!cell_load_grid.empty()) return cell_load_grid;
    std::vector<double> g;
    for (double v = 0.25; v <= 8.0 + 1e-9; v += 0.25) g.push_back(v);
    return g;
  }
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(int line, const std::string& msg)
      : std::runtime_error("config line " + std::to_string(line) + ": " + msg) {}
};

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline double parse_double(const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError(line, "expected a number, got '" + v + "'");
  }
}

inline std::vector<double> parse_grid(const std::string& v, int line) {
  std::vector<double> out;
  if (v.find(':') != std::string::npos) {  // lo:hi:step
    std::istringstream ss(v);
    std::string a, b, c;
    if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c))
      throw ConfigError(line, "range must be lo:hi:step");
    const double lo = parse_double(trim(a), line);
    const double hi = parse_double(trim(b), line);
    const double step = parse_double(trim(c), line);
    if (!(step > 0.0 && hi >= lo)) throw ConfigError(line, "bad range bounds");
    for (double x = lo; x <= hi + 1e-12 * step; x += step) out.push_back(x);
    return out;
  }
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(parse_double(item, line));
  }
  return out;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text) {
  Scenario s;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool shadow_on = false;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (val.empty()) throw ConfigError(line_no, "empty value for " + key);

    if (key == "alpha") {
      s.alpha = detail::parse_double(val, line_no);
      if (!(s.alpha > 2.0)) throw ConfigError(line_no, "alpha must exceed 2");
    } else if (key == "scheme") {
      if (val == "nearest") s.scheme = SchemeKind::Nearest;
      else if (val == "max-power") s.scheme = SchemeKind::MaxPower;
      else throw ConfigError(line_no, "scheme must be nearest|max-power");
    } else if (key == "shadow_sigma_db") {
      s.shadow_sigma_db = detail::parse_double(val, line_no);
      if (s.shadow_sigma_db < 0.0) throw ConfigError(line_no, "negative shadowing");
      shadow_on = s.shadow_sigma_db > 0.0;
    } else if (key == "shadow_convention") {
      if (val == "std-db") s.shadow_convention = ShadowConvention::StdDb;
      else if (val == "var-db") s.shadow_convention = ShadowConvention::VarDb;
      else throw ConfigError(line_no, "shadow_convention must be std-db|var-db");
      s.shadow_convention_set = true;
    } else if (key == "shadow_mu_db") {
      s.shadow_mu_db = detail::parse_double(val, line_no);
    } else if (key == "lambda_u_per_km2") {
      s.lambda_u_per_km2 = detail::parse_double(val, line_no);
      if (!(s.lambda_u_per_km2 > 0.0)) throw ConfigError(line_no, "lambda_u must be positive");
    } else if (key == "cell_load_grid") {
      s.cell_load_grid = detail::parse_grid(val, line_no);
      for (double v : s.cell_load_grid)
        if (!(v >= 0.0)) throw ConfigError(line_no, "cell loads must be >= 0");
    } else if (key == "p_on_w") {
      s.p_on_w = detail::parse_double(val, line_no);
    } else if (key == "p_off_w") {
      s.p_off_w = detail::parse_double(val, line_no);
    } else if (key == "delta") {
      s.delta = detail::parse_double(val, line_no);
      if (!(s.delta > 0.0)) throw ConfigError(line_no, "delta must be positive");
    } else if (key == "p_min_dbm") {
      s.p_min_dbm = detail::parse_double(val, line_no);
    } else if (key == "link_budget") {
      if (val == "on") s.link_budget = true;
      else if (val == "off") s.link_budget = false;
      else throw ConfigError(line_no, "link_budget must be on|off");
    } else if (key == "quad_order") {
      s.quad_order = static_cast<int>(detail::parse_double(val, line_no));
      if (s.quad_order < 1 || s.quad_order > 64)
        throw ConfigError(line_no, "quad_order must be in [1,64]");
    } else if (key == "window_expected_bs") {
      s.window_expected_bs = detail::parse_double(val, line_no);
      if (!(s.window_expected_bs > 0.0)) throw ConfigError(line_no, "window too small");
    } else if (key == "trials") {
      s.trials = static_cast<std::uint64_t>(detail::parse_double(val, line_no));
      if (s.trials < 2) throw ConfigError(line_no, "need at least 2 trials");
    } else if (key == "seed") {
      s.seed = static_cast<std::uint64_t>(detail::parse_double(val, line_no));
    } else if (key == "threads") {
      s.threads = static_cast<int>(detail::parse_double(val, line_no));
    } else if (key == "sir_gain_mode") {
      if (val == "fresh") s.sir_gain_reuse = false;
      else if (val == "reuse") s.sir_gain_reuse = true;
      else throw ConfigError(line_no, "sir_gain_mode must be fresh|reuse");
    } else if (key == "out_dir") {
      s.out_dir = val;
    } else {
      throw ConfigError(line_no, "unknown key '" + key + "'");
    }
  }
  if (shadow_on && !s.shadow_convention_set)
    throw ConfigError(line_no, "shadow_convention is mandatory when shadow_sigma_db > 0");
  if (!(s.p_on_w >= s.p_off_w && s.p_off_w > 0.0))
    throw ConfigError(line_no, "power model requires p_on_w >= p_off_w > 0");
  return s;
}

inline std::string serialize_scenario(const Scenario& s) {
  std::ostringstream out;
  out.precision(17);
  out << "# greencells scenario\n";
  out << "alpha = " << s.alpha << "\n";
  out << "scheme = " << (s.scheme == SchemeKind::Nearest ? "nearest" : "max-power") << "\n";
  out << "shadow_sigma_db = " << s.shadow_sigma_db << "\n";
  if (s.shadow_convention_set || s.shadow_sigma_db > 0.0)
    out << "shadow_convention = "
        << (s.shadow_convention == ShadowConvention::StdDb ? "std-db" : "var-db") << "\n";
  out << "shadow_mu_db = " << s.shadow_mu_db << "\n";
  out << "lambda_u_per_km2 = " << s.lambda_u_per_km2 << "\n";
  if (!s.cell_load_grid.empty()) {
    out << "cell_load_grid = ";
    for (std::size_t i = 0; i < s.cell_load_grid.size(); ++i)
      out << (i ? "," : "") << s.cell_load_grid[i];
    out << "\n";
  }
  out << "p_on_w = " << s.p_on_w << "\n";
  out << "p_off_w = " << s.p_off_w << "\n";
  out << "delta = " << s.delta << "\n";
  out << "p_min_dbm = " << s.p_min_dbm << "\n";
  out << "link_budget = " << (s.link_budget ? "on" : "off") << "\n";
  out << "quad_order = " << s.quad_order << "\n";
  out << "window_expected_bs = " << s.window_expected_bs << "\n";
  out << "trials = " << s.trials << "\n";
  out << "seed = " << s.seed << "\n";
  out << "threads = " << s.threads << "\n";
  out << "sir_gain_mode = " << (s.sir_gain_reuse ? "reuse" : "fresh") << "\n";
  out << "out_dir = " << s.out_dir << "\n";
  return out.str();
}

// Environment overrides mirror config keys with the GREENCELLS_ prefix
// (GREENCELLS_SEED, GREENCELLS_TRIALS, GREENCELLS_OUT_DIR, ...).
inline void apply_env_overrides(Scenario& s) {
  const auto get = [](const char* name) -> const char* { return std::getenv(name); };
  if (const char* v = get("GREENCELLS_SEED")) s.seed = std::strtoull(v, nullptr, 10);
  if (const char* v = get("GREENCELLS_TRIALS")) s.trials = std::strtoull(v, nullptr, 10);
  if (const char* v = get("GREENCELLS_THREADS")) s.threads = std::atoi(v);
  if (const char* v = get("GREENCELLS_OUT_DIR")) s.out_dir = v;
  if (const char* v = get("GREENCELLS_SHADOW_CONVENTION")) {
    const std::string sv = v;
    if (sv == "std-db") s.shadow_convention = ShadowConvention::StdDb;
    else if (sv == "var-db") s.shadow_convention = ShadowConvention::VarDb;
    else throw std::runtime_error("GREENCELLS_SHADOW_CONVENTION must be std-db|var-db");
    s.shadow_convention_set = true;
  }
  if (const char* v = get("GREENCELLS_QUAD_ORDER")) s.quad_order = std::atoi(v);
}

// Figure-grade base preset carrying the simulation constants used throughout
// the reproduced figures (alpha 3.76, 370 users/km^2, n = 6, picocell power).
inline Scenario figure_base_scenario() {
  Scenario s;
  s.alpha = 3.76;
  s.lambda_u_per_km2 = 370.0;
  s.shadow_mu_db = 0.0;
  s.quad_order = 6;
  s.p_on_w = 6.8;
  s.p_off_w = 4.3;
  s.delta = 4.0;
  s.p_min_dbm = -106.0;
  s.link_budget = true;
  s.shadow_convention = ShadowConvention::StdDb;
  s.shadow_convention_set = true;
  return s;
}

}  // namespace greencells
