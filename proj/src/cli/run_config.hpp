#pragma once

#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssldyn/errors.hpp"

namespace ssldyn::cli {

using json = nlohmann::json;

/// Loads a JSON config document; the file must hold a single object.
json load_config_file(const std::string& path);

/// Rejects keys outside `allowed` (one level of nesting via "a.b" entries).
void reject_unknown_keys(const json& doc, const std::set<std::string>& allowed,
                         const std::string& context);

/// Applies "key=value" or "group.key=value" overrides; values are parsed as
/// JSON scalars (strings may be given bare).
void apply_overrides(json& doc, const std::vector<std::string>& sets);

double require_num(const json& doc, const std::string& key);
double num_or(const json& doc, const std::string& key, double dflt);
long require_int(const json& doc, const std::string& key);
long int_or(const json& doc, const std::string& key, long dflt);
std::string require_str(const json& doc, const std::string& key);
std::string str_or(const json& doc, const std::string& key,
                   const std::string& dflt);
bool bool_or(const json& doc, const std::string& key, bool dflt);

}  // namespace ssldyn::cli
