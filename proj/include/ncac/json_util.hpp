#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ncac/errors.hpp"

// Strict JSON access: unknown keys, missing keys, and type mismatches all
// raise ConfigError naming the offending path, so a typo in a config dies
// loudly instead of silently falling back to a default.
namespace ncac::jsonu {

using json = nlohmann::json;

json parse_file(const std::filesystem::path& path);

// obj must be a JSON object whose keys are a subset of required + optional,
// with every required key present. `where` is the path prefix for messages
// (e.g. "config.phi").
void check_keys(const json& obj, const std::string& where,
                const std::vector<std::string>& required,
                const std::vector<std::string>& optional);

double get_double(const json& obj, const std::string& where, const std::string& key);
double get_double_or(const json& obj, const std::string& where, const std::string& key,
                     double fallback);
long get_int(const json& obj, const std::string& where, const std::string& key);
long get_int_or(const json& obj, const std::string& where, const std::string& key, long fallback);
std::uint64_t get_uint64_or(const json& obj, const std::string& where, const std::string& key,
                            std::uint64_t fallback);
bool get_bool_or(const json& obj, const std::string& where, const std::string& key, bool fallback);
std::string get_string(const json& obj, const std::string& where, const std::string& key);
std::string get_string_or(const json& obj, const std::string& where, const std::string& key,
                          const std::string& fallback);

} // namespace ncac::jsonu
