#include "intsys/cli/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "intsys/grid.hpp"
#include "json.hpp"

namespace intsys::cli {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error(field + ": " + message), field_(std::move(field)) {}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

std::vector<double> number_array(const json& j, const std::string& path, std::size_t expected) {
  if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
  if (j.size() != expected) throw ConfigError(path, "expected " + std::to_string(expected));
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ConfigError(path + "[" + std::to_string(k) + "]", "expected a number");
    out.push_back(j[k].get<double>());
  }
  return out;
}

}  // namespace

SystemConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("$", "expected an object");

  struct {
    std::string name;
    int dof = 0;
    std::vector<std::string> integrals;
    Box box;
    ConfigDefaults defaults;
  } cfg;
  const json& name = require(doc, "name", "");
  if (!name.is_string()) throw ConfigError("name", "expected a string");
  cfg.name = name.get<std::string>();

  const json& dof = require(doc, "dof", "");
  if (!dof.is_number_integer() || dof.get<long long>() < 1 || dof.get<long long>() > 3) {
    throw ConfigError("dof", "expected an integer in 1..3");
  }
  cfg.dof = dof.get<int>();
  const std::size_t n = static_cast<std::size_t>(cfg.dof);

  const json& integrals = require(doc, "integrals", "");
  if (!integrals.is_array()) throw ConfigError("integrals", "expected an array of strings");
  if (integrals.size() != n) throw ConfigError("integrals", "expected " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!integrals[i].is_string()) throw ConfigError("integrals[" + std::to_string(i) + "]", "expected a string");
    cfg.integrals.push_back(integrals[i].get<std::string>());
  }

  const json& box = require(doc, "box", "");
  if (!box.is_object()) throw ConfigError("box", "expected an object with min and max");
  auto lo = number_array(require(box, "min", "box"), "box.min", 2 * n);
  auto hi = number_array(require(box, "max", "box"), "box.max", 2 * n);
  for (std::size_t k = 0; k < 2 * n; ++k) {
    if (!(lo[k] < hi[k])) {
      throw ConfigError("box", "min must be below max on axis " + std::to_string(k));
    }
  }
  cfg.box = Box(lo, hi);

  if (auto it = doc.find("defaults"); it != doc.end()) {
    const json& d = *it;
    if (!d.is_object()) throw ConfigError("defaults", "expected an object");
    if (auto r = d.find("resolution"); r != d.end()) {
      if (!r->is_number_integer() || r->get<long long>() < 2) {
        throw ConfigError("defaults.resolution", "expected an integer >= 2");
      }
      cfg.defaults.resolution = r->get<std::size_t>();
    }
    if (auto a = d.find("atol"); a != d.end()) {
      if (!a->is_number() || !(a->get<double>() > 0.0)) throw ConfigError("defaults.atol", "expected a positive number");
      cfg.defaults.atol = a->get<double>();
    }
    if (auto s = d.find("seed"); s != d.end()) {
      if (!s->is_number_unsigned()) throw ConfigError("defaults.seed", "expected a non-negative integer");
      cfg.defaults.seed = s->get<std::uint64_t>();
    }
    if (auto l = d.find("lattice"); l != d.end()) {
      if (!l->is_string()) throw ConfigError("defaults.lattice", "expected a lattice string lo:hi:count,...");
      cfg.defaults.lattice = l->get<std::string>();
      try {
        auto lat = ImageLattice::parse(*cfg.defaults.lattice);
        if (lat.dim() != n) throw ConfigError("defaults.lattice", "expected " + std::to_string(n) + " axes");
      } catch (const InvalidArgument& e) {
        throw ConfigError("defaults.lattice", e.what());
      }
    }
  }

  auto vars = expr::VariableList::canonical(cfg.dof);
  std::vector<expr::Expr> parsed;
  for (std::size_t i = 0; i < n; ++i) {
    try {
      parsed.push_back(expr::parse(cfg.integrals[i], vars));
    } catch (const expr::ParseError& e) {
      throw ConfigError("integrals[" + std::to_string(i) + "]", e.what());
    }
  }
  hamsys::IntegrableSystem system(cfg.name, cfg.dof, std::move(parsed), cfg.box);
  return SystemConfig{cfg.name, cfg.dof, cfg.integrals, cfg.box, cfg.defaults, fnv1a_hex(doc.dump()),
                      std::move(system)};
}

SystemConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("$", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace intsys::cli
