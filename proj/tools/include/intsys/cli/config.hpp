#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "intsys/hamsys.hpp"

namespace intsys::cli {

/// Schema violation; the message starts with the offending field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

struct ConfigDefaults {
  std::optional<std::size_t> resolution;
  std::optional<double> atol;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> lattice;
};

struct SystemConfig {
  std::string name;
  int dof = 0;
  std::vector<std::string> integrals;
  Box box;
  ConfigDefaults defaults;
  std::string digest;  // FNV-1a of the normalized JSON document
  hamsys::IntegrableSystem system;
};

SystemConfig parse_config(std::string_view text);
SystemConfig load_config(const std::filesystem::path& path);

std::string fnv1a_hex(std::string_view bytes);

}  // namespace intsys::cli
