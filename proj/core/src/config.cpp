#include "scenmap/config.hpp"

#include <fmt/format.h>

#include "json.hpp"
#include "scenmap/error.hpp"

namespace scenmap::config {

using nlohmann::json;

namespace {

json parse_document(std::string_view text, std::string_view what) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::invalid_input, fmt::format("{}: {}", what, e.what()));
  }
  if (!doc.is_object()) throw Error(ErrorKind::invalid_input, fmt::format("{}: top level must be an object", what));
  if (doc.contains("version")) {
    if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kSchemaFormatVersion) {
      throw Error(ErrorKind::invalid_input,
                  fmt::format("{}: unsupported version {} (expected {})", what, doc["version"].dump(), kSchemaFormatVersion));
    }
  }
  return doc;
}

// Wraps nlohmann type errors into the library's error type.
template <typename T>
T field(const json& obj, const char* key, std::string_view what) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::invalid_input, fmt::format("{}: field '{}' is missing or has the wrong type", what, key));
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, std::string_view what) {
  if (!obj.contains(key)) return fallback;
  return field<T>(obj, key, what);
}

}  // namespace

SurveySchema parse_schema(std::string_view json_text) {
  constexpr std::string_view what = "schema";
  const json doc = parse_document(json_text, what);

  SurveySchema schema;
  schema.scale_points = field_or<int>(doc, "scale_points", 7, what);
  schema.orientation = parse_orientation(field_or<std::string>(doc, "orientation", "descending", what));
  schema.id_column = field_or<std::string>(doc, "id_column", "id", what);

  if (!doc.contains("dimensions") || !doc["dimensions"].is_array()) {
    throw Error(ErrorKind::invalid_input, "schema: 'dimensions' must be an array");
  }
  int position = 0;
  for (const auto& d : doc["dimensions"]) {
    ++position;
    if (d.is_string()) {
      schema.dimensions.push_back(Dimension{position, d.get<std::string>(), std::nullopt});
      continue;
    }
    if (!d.is_object()) throw Error(ErrorKind::invalid_input, "schema: each dimension is a name or an object");
    Dimension dim{field_or<int>(d, "index", position, what), field<std::string>(d, "name", what), std::nullopt};
    if (d.contains("orientation")) dim.orientation = parse_orientation(field<std::string>(d, "orientation", what));
    schema.dimensions.push_back(std::move(dim));
  }

  if (doc.contains("topics")) {
    position = 0;
    for (const auto& t : doc.at("topics")) {
      ++position;
      design::Topic topic;
      if (t.is_string()) {
        topic.index = position;
        topic.label = t.get<std::string>();
      } else {
        topic.index = field_or<int>(t, "index", position, what);
        topic.label = field<std::string>(t, "label", what);
        topic.description = field_or<std::string>(t, "description", "", what);
        if (t.contains("cell_id") && !t["cell_id"].is_null()) topic.cell_id = field<int>(t, "cell_id", what);
      }
      schema.topics.topics.push_back(std::move(topic));
    }
  }

  if (doc.contains("factors")) {
    for (const auto& f : doc.at("factors")) {
      schema.factors.factors.push_back(
          design::Factor{field<std::string>(f, "name", what), field<std::vector<std::string>>(f, "levels", what)});
    }
  }

  schema.validate();
  return schema;
}

simulate::GroundTruth parse_truth(std::string_view json_text) {
  constexpr std::string_view what = "ground truth";
  const json doc = parse_document(json_text, what);

  simulate::GroundTruth truth;
  truth.scale_points = field_or<int>(doc, "scale_points", 7, what);
  truth.orientation = parse_orientation(field_or<std::string>(doc, "orientation", "descending", what));
  truth.dimensions = field<std::vector<std::string>>(doc, "dimensions", what);
  truth.missing_rate = field_or<double>(doc, "missing_rate", 0.0, what);
  const std::size_t m = truth.dimensions.size();

  if (doc.contains("trait_sd") && doc["trait_sd"].is_array()) {
    truth.trait_sds = field<std::vector<double>>(doc, "trait_sd", what);
  } else {
    truth.trait_sds.assign(m, field_or<double>(doc, "trait_sd", 0.0, what));
  }

  auto per_dimension = [&](const json& topic, const char* key, std::optional<double> fallback) {
    std::vector<double> out(m);
    if (!topic.contains(key)) {
      if (!fallback) throw Error(ErrorKind::invalid_input, fmt::format("{}: topic lacks '{}'", what, key));
      out.assign(m, *fallback);
      return out;
    }
    const json& v = topic.at(key);
    if (v.is_number()) {
      out.assign(m, v.get<double>());
    } else if (v.is_object()) {
      for (std::size_t d = 0; d < m; ++d) out[d] = field<double>(v, truth.dimensions[d].c_str(), what);
    } else if (v.is_array() && v.size() == m) {
      out = v.get<std::vector<double>>();
    } else {
      throw Error(ErrorKind::invalid_input, fmt::format("{}: '{}' must be a number, per-dimension object or array", what, key));
    }
    return out;
  };

  int position = 0;
  for (const auto& t : field<json>(doc, "topics", what)) {
    ++position;
    simulate::TopicTruth topic;
    topic.index = field_or<int>(t, "index", position, what);
    topic.label = field_or<std::string>(t, "label", "", what);
    topic.means = per_dimension(t, "mean", std::nullopt);
    topic.sds = per_dimension(t, "sd", field_or<double>(doc, "sd", 0.0, what));
    truth.topics.push_back(std::move(topic));
  }

  truth.validate();
  return truth;
}

std::string write_schema(const SurveySchema& schema) {
  nlohmann::ordered_json doc;
  doc["version"] = kSchemaFormatVersion;
  doc["scale_points"] = schema.scale_points;
  doc["orientation"] = to_string(schema.orientation);
  doc["id_column"] = schema.id_column;
  doc["dimensions"] = nlohmann::ordered_json::array();
  for (const auto& d : schema.dimensions) {
    nlohmann::ordered_json dim{{"index", d.index}, {"name", d.name}};
    if (d.orientation) dim["orientation"] = to_string(*d.orientation);
    doc["dimensions"].push_back(std::move(dim));
  }
  doc["topics"] = nlohmann::ordered_json::array();
  for (const auto& t : schema.topics.topics) {
    nlohmann::ordered_json topic{{"index", t.index}, {"label", t.label}, {"description", t.description}};
    if (t.cell_id) topic["cell_id"] = *t.cell_id;
    doc["topics"].push_back(std::move(topic));
  }
  doc["factors"] = nlohmann::ordered_json::array();
  for (const auto& f : schema.factors.factors) doc["factors"].push_back({{"name", f.name}, {"levels", f.levels}});
  return doc.dump(2) + "\n";
}

}  // namespace scenmap::config
