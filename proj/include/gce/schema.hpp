#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "gce/error.hpp"

namespace gce {

using json = nlohmann::json;

enum class FeatureKind { Categorical, Continuous };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::Categorical;
  std::vector<std::string> categories; // categorical only
  std::size_t bin_count = 10;          // continuous only
  bool actionable = true;

  // Number of distinct value indices an item on this feature can take.
  std::size_t cardinality() const noexcept {
    return kind == FeatureKind::Categorical ? categories.size() : bin_count;
  }
};

enum class ColumnType { OneHot, Raw };

// Where one schema feature lands in the model's input vector. Raw columns
// are fed as (x - offset) / scale.
struct ColumnSpan {
  std::string feature;
  ColumnType type = ColumnType::Raw;
  std::size_t column = 0;
  std::size_t width = 1;
  double offset = 0.0;
  double scale = 1.0;

  friend bool operator==(const ColumnSpan&, const ColumnSpan&) = default;
};

class FeatureSchema {
public:
  FeatureSchema() = default;

  explicit FeatureSchema(std::vector<Feature> features, std::vector<ColumnSpan> encoding = {})
      : features_(std::move(features)), encoding_(std::move(encoding)) {
    if (features_.empty()) throw SchemaError("schema declares no features");
    std::set<std::string> names;
    for (const auto& f : features_) {
      if (f.name.empty()) throw SchemaError("feature with empty name");
      if (!names.insert(f.name).second) throw SchemaError("duplicate feature '" + f.name + "'");
      if (f.kind == FeatureKind::Categorical) {
        if (f.categories.empty())
          throw SchemaError("categorical feature '" + f.name + "' has no categories");
        std::set<std::string> labels(f.categories.begin(), f.categories.end());
        if (labels.size() != f.categories.size())
          throw SchemaError("categorical feature '" + f.name + "' repeats a category");
      } else if (f.bin_count < 2) {
        throw SchemaError("continuous feature '" + f.name + "' needs bin_count >= 2");
      }
    }
  }

  std::size_t size() const noexcept { return features_.size(); }
  const Feature& operator[](std::size_t i) const noexcept { return features_[i]; }
  const std::vector<Feature>& features() const noexcept { return features_; }
  const std::vector<ColumnSpan>& encoding() const noexcept { return encoding_; }

  std::optional<std::size_t> index_of(std::string_view name) const noexcept {
    for (std::size_t i = 0; i < features_.size(); ++i)
      if (features_[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<std::uint32_t> category_index(std::size_t feature, std::string_view label) const {
    const auto& cats = features_[feature].categories;
    for (std::size_t i = 0; i < cats.size(); ++i)
      if (cats[i] == label) return static_cast<std::uint32_t>(i);
    return std::nullopt;
  }

private:
  std::vector<Feature> features_;
  std::vector<ColumnSpan> encoding_;
};

inline json encoding_to_json(const std::vector<ColumnSpan>& encoding) {
  json arr = json::array();
  for (const auto& c : encoding) {
    json e{{"feature", c.feature},
           {"type", c.type == ColumnType::OneHot ? "one_hot" : "raw"},
           {"column", c.column},
           {"width", c.width}};
    if (c.type == ColumnType::Raw) {
      e["offset"] = c.offset;
      e["scale"] = c.scale;
    }
    arr.push_back(std::move(e));
  }
  return arr;
}

inline std::vector<ColumnSpan> encoding_from_json(const json& arr) {
  std::vector<ColumnSpan> out;
  for (const auto& e : arr) {
    ColumnSpan c;
    c.feature = e.at("feature").get<std::string>();
    const auto type = e.at("type").get<std::string>();
    if (type == "one_hot") c.type = ColumnType::OneHot;
    else if (type == "raw") c.type = ColumnType::Raw;
    else throw FormatError("unknown encoding type '" + type + "'");
    c.column = e.at("column").get<std::size_t>();
    c.width = e.value("width", std::size_t{1});
    c.offset = e.value("offset", 0.0);
    c.scale = e.value("scale", 1.0);
    out.push_back(std::move(c));
  }
  return out;
}

inline json schema_to_json(const FeatureSchema& schema) {
  json features = json::array();
  for (const auto& f : schema.features()) {
    json j{{"name", f.name}, {"actionable", f.actionable}};
    if (f.kind == FeatureKind::Categorical) {
      j["kind"] = "categorical";
      j["values"] = f.categories;
    } else {
      j["kind"] = "continuous";
      j["bin_count"] = f.bin_count;
    }
    features.push_back(std::move(j));
  }
  json out{{"features", std::move(features)}};
  if (!schema.encoding().empty()) out["encoding"] = encoding_to_json(schema.encoding());
  return out;
}

inline FeatureSchema schema_from_json(const json& j) {
  try {
    std::vector<Feature> features;
    for (const auto& fj : j.at("features")) {
      Feature f;
      f.name = fj.at("name").get<std::string>();
      f.actionable = fj.value("actionable", true);
      const auto kind = fj.at("kind").get<std::string>();
      if (kind == "categorical") {
        f.kind = FeatureKind::Categorical;
        f.categories = fj.at("values").get<std::vector<std::string>>();
      } else if (kind == "continuous") {
        f.kind = FeatureKind::Continuous;
        f.bin_count = fj.value("bin_count", std::size_t{10});
      } else {
        throw SchemaError("feature '" + f.name + "': unknown kind '" + kind + "'");
      }
      features.push_back(std::move(f));
    }
    std::vector<ColumnSpan> encoding;
    if (j.contains("encoding")) encoding = encoding_from_json(j.at("encoding"));
    return FeatureSchema(std::move(features), std::move(encoding));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed schema: ") + e.what());
  }
}

inline FeatureSchema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("schema file '" + path + "': " + e.what());
  }
  return schema_from_json(j);
}

inline void save_schema(const FeatureSchema& schema, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << schema_to_json(schema).dump(2) << '\n';
}

} // namespace gce
