#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace singspec {

// Minimal ordered JSON value for report emission.  Doubles are printed with
// %.17g so identical runs produce byte-identical files; nlohmann/json is used
// for parsing inputs only.
class JsonValue {
 public:
  enum class Type { null, boolean, number, integer, string, array, object };

  JsonValue() : type_(Type::null) {}
  JsonValue(bool b) : type_(Type::boolean), bool_(b) {}
  JsonValue(double d) : type_(Type::number), num_(d) {}
  JsonValue(long long i) : type_(Type::integer), int_(i) {}
  JsonValue(int i) : type_(Type::integer), int_(i) {}
  JsonValue(const char* s) : type_(Type::string), str_(s) {}
  JsonValue(std::string s) : type_(Type::string), str_(std::move(s)) {}

  static JsonValue array() {
    JsonValue v;
    v.type_ = Type::array;
    return v;
  }
  static JsonValue object() {
    JsonValue v;
    v.type_ = Type::object;
    return v;
  }

  JsonValue& push(JsonValue v) {
    items_.push_back(std::move(v));
    return items_.back();
  }
  JsonValue& set(const std::string& key, JsonValue v) {
    fields_.emplace_back(key, std::move(v));
    return fields_.back().second;
  }

  std::string dump(int indent = 0) const;

 private:
  void write(std::string& out, int indent, int depth) const;

  Type type_;
  bool bool_ = false;
  double num_ = 0.0;
  long long int_ = 0;
  std::string str_;
  std::vector<JsonValue> items_;
  std::vector<std::pair<std::string, JsonValue>> fields_;
};

std::string format_double(double v);  // %.17g

// FNV-1a 64-bit content hash as fixed-width hex, for artifact manifests
std::string fnv1a64_hex(const std::string& bytes);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace singspec
