#include "cli/run_config.hpp"

#include <fstream>

namespace ssldyn::cli {

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) throw IoError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ValidationError("config parse error in " + path + ": " + e.what());
  }
  if (!doc.is_object())
    throw ValidationError("config must be a JSON object: " + path);
  return doc;
}

void reject_unknown_keys(const json& doc, const std::set<std::string>& allowed,
                         const std::string& context) {
  for (const auto& [key, value] : doc.items()) {
    if (value.is_object()) {
      for (const auto& [sub, subval] : value.items()) {
        (void)subval;
        if (!allowed.count(key + "." + sub))
          throw ValidationError(context + ": unknown key '" + key + "." + sub +
                                "'");
      }
      continue;
    }
    if (!allowed.count(key))
      throw ValidationError(context + ": unknown key '" + key + "'");
  }
}

void apply_overrides(json& doc, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ValidationError("--set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;  // bare string
    }
    const auto dot = key.find('.');
    if (dot == std::string::npos) {
      doc[key] = value;
    } else {
      doc[key.substr(0, dot)][key.substr(dot + 1)] = value;
    }
  }
}

namespace {

const json* find(const json& doc, const std::string& key) {
  const auto dot = key.find('.');
  if (dot == std::string::npos) {
    const auto it = doc.find(key);
    return it == doc.end() ? nullptr : &*it;
  }
  const auto it = doc.find(key.substr(0, dot));
  if (it == doc.end() || !it->is_object()) return nullptr;
  const auto jt = it->find(key.substr(dot + 1));
  return jt == it->end() ? nullptr : &*jt;
}

}  // namespace

double require_num(const json& doc, const std::string& key) {
  const json* v = find(doc, key);
  if (!v) throw ValidationError("missing required key '" + key + "'");
  if (!v->is_number())
    throw ValidationError("key '" + key + "' must be a number");
  return v->get<double>();
}

double num_or(const json& doc, const std::string& key, double dflt) {
  const json* v = find(doc, key);
  if (!v) return dflt;
  if (!v->is_number())
    throw ValidationError("key '" + key + "' must be a number");
  return v->get<double>();
}

long require_int(const json& doc, const std::string& key) {
  const json* v = find(doc, key);
  if (!v) throw ValidationError("missing required key '" + key + "'");
  if (!v->is_number_integer())
    throw ValidationError("key '" + key + "' must be an integer");
  return v->get<long>();
}

long int_or(const json& doc, const std::string& key, long dflt) {
  const json* v = find(doc, key);
  if (!v) return dflt;
  if (!v->is_number_integer())
    throw ValidationError("key '" + key + "' must be an integer");
  return v->get<long>();
}

std::string require_str(const json& doc, const std::string& key) {
  const json* v = find(doc, key);
  if (!v) throw ValidationError("missing required key '" + key + "'");
  if (!v->is_string())
    throw ValidationError("key '" + key + "' must be a string");
  return v->get<std::string>();
}

std::string str_or(const json& doc, const std::string& key,
                   const std::string& dflt) {
  const json* v = find(doc, key);
  if (!v) return dflt;
  if (!v->is_string())
    throw ValidationError("key '" + key + "' must be a string");
  return v->get<std::string>();
}

bool bool_or(const json& doc, const std::string& key, bool dflt) {
  const json* v = find(doc, key);
  if (!v) return dflt;
  if (!v->is_boolean())
    throw ValidationError("key '" + key + "' must be a boolean");
  return v->get<bool>();
}

}  // namespace ssldyn::cli
