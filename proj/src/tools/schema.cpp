// SPDX-License-Identifier: Apache-2.0
#include "agentkit/tools/schema.hpp"

#include <cmath>
#include <regex>

namespace agentkit::tools {
namespace {

bool is_integer(const Json& v) {
  if (v.is_number_integer() || v.is_number_unsigned()) return true;
  if (!v.is_number_float()) return false;
  double d = v.get<double>();
  return std::isfinite(d) && std::floor(d) == d;
}

bool has_type(const Json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  if (t == "number") return v.is_number();
  if (t == "integer") return is_integer(v);
  return false;
}

std::string escape_pointer(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

/// Number of Unicode code points, which is what string length means in JSON Schema.
std::size_t code_points(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

class Validator {
 public:
  std::vector<SchemaViolation> out;

  void check(const Json& schema, const Json& v, const std::string& path) {
    if (schema.is_boolean()) {
      if (!schema.get<bool>()) fail(path, "schema false rejects every value");
      return;
    }
    if (!schema.is_object()) return;

    if (auto it = schema.find("type"); it != schema.end()) {
      bool ok = false;
      if (it->is_string()) ok = has_type(v, it->get<std::string>());
      else if (it->is_array())
        for (const auto& t : *it) ok = ok || (t.is_string() && has_type(v, t.get<std::string>()));
      if (!ok) fail(path, "expected type " + it->dump() + ", got " + v.type_name());
    }
    if (auto it = schema.find("enum"); it != schema.end() && it->is_array()) {
      bool ok = false;
      for (const auto& e : *it) ok = ok || equal(e, v);
      if (!ok) fail(path, "value not in enum " + it->dump());
    }
    if (auto it = schema.find("const"); it != schema.end()) {
      if (!equal(*it, v)) fail(path, "value does not equal const " + it->dump());
    }

    if (v.is_number()) numeric(schema, v, path);
    if (v.is_string()) string_rules(schema, v.get<std::string>(), path);
    if (v.is_array()) array_rules(schema, v, path);
    if (v.is_object()) object_rules(schema, v, path);

    if (auto it = schema.find("allOf"); it != schema.end() && it->is_array()) {
      for (const auto& sub : *it) check(sub, v, path);
    }
    if (auto it = schema.find("anyOf"); it != schema.end() && it->is_array()) {
      bool ok = false;
      for (const auto& sub : *it) ok = ok || passes(sub, v);
      if (!ok) fail(path, "value matches no anyOf branch");
    }
    if (auto it = schema.find("oneOf"); it != schema.end() && it->is_array()) {
      int n = 0;
      for (const auto& sub : *it) n += passes(sub, v) ? 1 : 0;
      if (n != 1) fail(path, "value matches " + std::to_string(n) + " oneOf branches, expected 1");
    }
    if (auto it = schema.find("not"); it != schema.end()) {
      if (passes(*it, v)) fail(path, "value matches a 'not' schema");
    }
  }

 private:
  void fail(const std::string& path, std::string msg) { out.push_back({path, std::move(msg)}); }

  static bool passes(const Json& schema, const Json& v) {
    Validator sub;
    sub.check(schema, v, "");
    return sub.out.empty();
  }

  static bool equal(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return a.get<double>() == b.get<double>();
    if (a.type() != b.type()) return false;
    if (a.is_array()) {
      if (a.size() != b.size()) return false;
      for (std::size_t i = 0; i < a.size(); ++i)
        if (!equal(a[i], b[i])) return false;
      return true;
    }
    if (a.is_object()) {
      if (a.size() != b.size()) return false;
      for (auto it = a.begin(); it != a.end(); ++it) {
        auto jt = b.find(it.key());
        if (jt == b.end() || !equal(*it, *jt)) return false;
      }
      return true;
    }
    return a == b;
  }

  void numeric(const Json& s, const Json& v, const std::string& path) {
    const double x = v.get<double>();
    auto num = [&](const char* k, double& out) {
      auto it = s.find(k);
      if (it == s.end() || !it->is_number()) return false;
      out = it->get<double>();
      return true;
    };
    double b;
    if (num("minimum", b) && x < b) fail(path, "value below minimum " + Json(b).dump());
    if (num("maximum", b) && x > b) fail(path, "value above maximum " + Json(b).dump());
    if (num("exclusiveMinimum", b) && x <= b) fail(path, "value not above exclusiveMinimum " + Json(b).dump());
    if (num("exclusiveMaximum", b) && x >= b) fail(path, "value not below exclusiveMaximum " + Json(b).dump());
    if (num("multipleOf", b) && b > 0) {
      double q = x / b;
      if (!std::isfinite(q) || std::fabs(q - std::round(q)) > 1e-9) fail(path, "value not a multiple of " + Json(b).dump());
    }
  }

  void string_rules(const Json& s, const std::string& str, const std::string& path) {
    const auto len = code_points(str);
    if (auto it = s.find("minLength"); it != s.end() && it->is_number() && len < it->get<double>())
      fail(path, "string shorter than minLength " + it->dump());
    if (auto it = s.find("maxLength"); it != s.end() && it->is_number() && len > it->get<double>())
      fail(path, "string longer than maxLength " + it->dump());
    if (auto it = s.find("pattern"); it != s.end() && it->is_string()) {
      try {
        if (!std::regex_search(str, std::regex(it->get<std::string>(), std::regex::ECMAScript)))
          fail(path, "string does not match pattern " + it->dump());
      } catch (const std::regex_error&) {
        fail(path, "unsupported pattern " + it->dump());
      }
    }
  }

  void array_rules(const Json& s, const Json& v, const std::string& path) {
    if (auto it = s.find("minItems"); it != s.end() && it->is_number() && v.size() < it->get<double>())
      fail(path, "array has fewer than minItems " + it->dump());
    if (auto it = s.find("maxItems"); it != s.end() && it->is_number() && v.size() > it->get<double>())
      fail(path, "array has more than maxItems " + it->dump());
    if (auto it = s.find("uniqueItems"); it != s.end() && it->is_boolean() && it->get<bool>()) {
      for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j)
          if (equal(v[i], v[j])) {
            fail(path, "array items " + std::to_string(i) + " and " + std::to_string(j) + " are equal");
            i = j = v.size();
          }
    }
    if (auto it = s.find("items"); it != s.end()) {
      if (it->is_array()) {
        for (std::size_t i = 0; i < v.size() && i < it->size(); ++i)
          check((*it)[i], v[i], path + "/" + std::to_string(i));
        if (auto ad = s.find("additionalItems"); ad != s.end())
          for (std::size_t i = it->size(); i < v.size(); ++i) check(*ad, v[i], path + "/" + std::to_string(i));
      } else {
        for (std::size_t i = 0; i < v.size(); ++i) check(*it, v[i], path + "/" + std::to_string(i));
      }
    }
    if (auto it = s.find("contains"); it != s.end()) {
      bool ok = false;
      for (const auto& item : v) ok = ok || passes(*it, item);
      if (!ok) fail(path, "no array item matches 'contains'");
    }
  }

  void object_rules(const Json& s, const Json& v, const std::string& path) {
    if (auto it = s.find("required"); it != s.end() && it->is_array()) {
      for (const auto& key : *it)
        if (key.is_string() && !v.contains(key.get<std::string>()))
          fail(path + "/" + escape_pointer(key.get<std::string>()), "missing required property '" + key.get<std::string>() + "'");
    }
    if (auto it = s.find("minProperties"); it != s.end() && it->is_number() && v.size() < it->get<double>())
      fail(path, "object has fewer than minProperties " + it->dump());
    if (auto it = s.find("maxProperties"); it != s.end() && it->is_number() && v.size() > it->get<double>())
      fail(path, "object has more than maxProperties " + it->dump());

    const Json* props = nullptr;
    if (auto it = s.find("properties"); it != s.end() && it->is_object()) props = &*it;
    const Json* patterns = nullptr;
    if (auto it = s.find("patternProperties"); it != s.end() && it->is_object()) patterns = &*it;
    const Json* additional = nullptr;
    if (auto it = s.find("additionalProperties"); it != s.end()) additional = &*it;

    for (auto it = v.begin(); it != v.end(); ++it) {
      const std::string child = path + "/" + escape_pointer(it.key());
      bool matched = false;
      if (props) {
        if (auto p = props->find(it.key()); p != props->end()) {
          matched = true;
          check(*p, *it, child);
        }
      }
      if (patterns) {
        for (auto p = patterns->begin(); p != patterns->end(); ++p) {
          try {
            if (std::regex_search(it.key(), std::regex(p.key(), std::regex::ECMAScript))) {
              matched = true;
              check(*p, *it, child);
            }
          } catch (const std::regex_error&) {
            fail(child, "unsupported pattern " + Json(p.key()).dump());
          }
        }
      }
      if (!matched && additional) {
        if (additional->is_boolean() && !additional->get<bool>())
          fail(child, "additional property '" + it.key() + "' not allowed");
        else
          check(*additional, *it, child);
      }
    }
  }
};

}  // namespace

std::vector<SchemaViolation> validate_instance(const Json& schema, const Json& instance) {
  Validator v;
  v.check(schema, instance, "");
  return std::move(v.out);
}

}  // namespace agentkit::tools
