#include "mnar/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "mnar/errors.hpp"

namespace mnar {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ConfigError(key, "expected an integer, got '" + v + "'");
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key, "value out of range");
  return static_cast<int>(x);
}

std::pair<double, double> to_range(const std::string& key, const std::string& v) {
  const auto comma = v.find(',');
  if (comma == std::string::npos) throw ConfigError(key, "expected 'lo,hi'");
  return {to_double(key, trim(v.substr(0, comma))), to_double(key, trim(v.substr(comma + 1)))};
}

ExperimentConfig custom_default() {
  ExperimentConfig c;
  c.id = "custom";
  c.model = ModelSpec::binomial(4);
  c.population = PopulationSpec{TwoTypePopulation{0.2}, 1000};
  c.mode = Mode::Censored;
  c.grid_resolution = 50;
  c.replications = 50;
  c.seed = kDefaultSeed;
  return c;
}

void apply(ExperimentConfig& c, const std::string& key, const std::string& value) {
  if (key == "preset") return;
  if (key == "id") {
    if (value.empty()) throw ConfigError(key, "must not be empty");
    c.id = value;
  } else if (key == "family") {
    Family f{};
    try {
      f = parse_family(value);
    } catch (const DomainError& e) {
      throw ConfigError(key, e.what());
    }
    if (f != Family::Binomial) throw ConfigError(key, "simulations support the binom family only");
    c.model.family = f;
  } else if (key == "kappa") {
    c.model.kappa = to_int(key, value);
    if (c.model.kappa < 1) throw ConfigError(key, "must be >= 1");
  } else if (key == "population") {
    if (value == "two_type") {
      if (!std::holds_alternative<TwoTypePopulation>(c.population.kind))
        c.population.kind = TwoTypePopulation{0.2};
    } else if (value == "uniform_mix") {
      if (!std::holds_alternative<UniformMixPopulation>(c.population.kind))
        c.population.kind = UniformMixPopulation{};
    } else {
      throw ConfigError(key, "expected two_type or uniform_mix, got '" + value + "'");
    }
  } else if (key == "delta") {
    auto* t = std::get_if<TwoTypePopulation>(&c.population.kind);
    if (t == nullptr) throw ConfigError(key, "only valid with population = two_type");
    t->delta = to_double(key, value);
  } else if (key == "range_a" || key == "range_b") {
    auto* u = std::get_if<UniformMixPopulation>(&c.population.kind);
    if (u == nullptr) throw ConfigError(key, "only valid with population = uniform_mix");
    (key == "range_a" ? u->range_a : u->range_b) = to_range(key, value);
  } else if (key == "n_strata") {
    c.population.n_strata = to_int(key, value);
  } else if (key == "mode") {
    try {
      c.mode = parse_mode(value);
    } catch (const DomainError& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "grid_res") {
    c.grid_resolution = to_int(key, value);
  } else if (key == "tol") {
    c.solver.tol = to_double(key, value);
  } else if (key == "max_iter") {
    c.solver.max_iter = static_cast<long>(to_integer(key, value));
  } else if (key == "reps") {
    c.replications = to_int(key, value);
  } else if (key == "seed") {
    const long long s = to_integer(key, value);
    if (s < 0) throw ConfigError(key, "must be nonnegative");
    c.seed = static_cast<std::uint64_t>(s);
  } else {
    throw ConfigError(key, "unknown configuration key");
  }
}

}  // namespace

const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> keys = {
      "preset", "id",   "family", "kappa",    "population", "delta",    "range_a", "range_b",
      "n_strata", "mode", "grid_res", "tol",  "max_iter",   "reps",     "seed"};
  return keys;
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    const std::string where = "line " + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ConfigError(where, "empty key");
    if (!kv.emplace(key, value).second) throw ConfigError(where, "duplicate key '" + key + "'");
  }
  return kv;
}

std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::vector<ExperimentConfig> resolve_experiments(const KeyValues& kv) {
  std::vector<ExperimentConfig> configs;
  if (auto it = kv.find("preset"); it != kv.end()) {
    configs = table_preset(it->second);
    if (kv.count("id")) throw ConfigError("id", "cannot rename preset configurations");
  } else {
    configs.push_back(custom_default());
  }
  // population must be applied before its dependent keys.
  for (auto& c : configs) {
    if (auto it = kv.find("population"); it != kv.end()) apply(c, it->first, it->second);
    for (const auto& [key, value] : kv)
      if (key != "population") apply(c, key, value);
    c.validate();
  }
  return configs;
}

}  // namespace mnar
