#include "scamrank/encode.hpp"

#include <set>

namespace scamrank {

using nlohmann::json;

namespace {

Encoding build_encoding(std::span<const FeatureVector> vectors, const FeatureSchema& schema) {
  Encoding enc;
  enc.schema = schema;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    ColumnMeta col;
    col.name = schema[i].name;
    col.kind = schema[i].kind;
    if (col.kind == FeatureKind::Categorical) {
      // Sorted token order keeps codes independent of row order.
      std::set<std::string> tokens;
      for (auto& v : vectors)
        if (auto* s = std::get_if<std::string>(&v.values[i])) tokens.insert(*s);
      int code = 1;
      for (auto& t : tokens) col.dictionary.emplace(t, code++);
    }
    enc.columns.push_back(std::move(col));
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].kind == FeatureKind::Categorical) continue;
    ColumnMeta ind;
    ind.name = schema[i].name + "__missing";
    ind.kind = FeatureKind::Boolean;
    ind.indicator_of = i;
    enc.columns.push_back(std::move(ind));
  }
  return enc;
}

}  // namespace

void encode_row(const Encoding& enc, const FeatureVector& v, std::span<double> values,
                std::span<std::uint8_t> missing) {
  validate(v, enc.schema);
  for (std::size_t c = 0; c < enc.columns.size(); ++c) {
    const auto& col = enc.columns[c];
    if (col.indicator_of) {
      values[c] = is_missing(v.values[*col.indicator_of]) ? 1.0 : 0.0;
      missing[c] = 0;
      continue;
    }
    const auto& val = v.values[c];
    if (col.kind == FeatureKind::Categorical) {
      int code = 0;
      if (auto* s = std::get_if<std::string>(&val))
        if (auto it = col.dictionary.find(*s); it != col.dictionary.end()) code = it->second;
      values[c] = code;
      missing[c] = 0;
    } else if (is_missing(val)) {
      values[c] = kMissingSentinel;
      missing[c] = 1;
    } else {
      values[c] = std::get<double>(val);
      missing[c] = 0;
    }
  }
}

DesignMatrix encode_with(const Encoding& encoding, std::span<const FeatureVector> vectors,
                         const std::optional<std::vector<int>>& labels) {
  if (labels && labels->size() != vectors.size()) throw SchemaError("label count does not match vector count");
  DesignMatrix m;
  m.encoding = encoding;
  m.rows = vectors.size();
  m.cols = encoding.columns.size();
  m.values.assign(m.rows * m.cols, 0.0);
  m.missing.assign(m.rows * m.cols, 0);
  for (std::size_t r = 0; r < m.rows; ++r)
    encode_row(encoding, vectors[r], std::span<double>(m.values.data() + r * m.cols, m.cols),
               std::span<std::uint8_t>(m.missing.data() + r * m.cols, m.cols));
  m.labels = labels;
  return m;
}

DesignMatrix encode_dataset(std::span<const FeatureVector> vectors, const std::optional<std::vector<int>>& labels,
                            const FeatureSchema& schema) {
  for (auto& v : vectors) validate(v, schema);
  return encode_with(build_encoding(vectors, schema), vectors, labels);
}

json encoding_to_json(const Encoding& e) {
  json cols = json::array();
  for (auto& c : e.columns) {
    json jc{{"name", c.name}, {"kind", to_string(c.kind)}};
    if (!c.dictionary.empty()) jc["dictionary"] = c.dictionary;
    if (c.indicator_of) jc["indicator_of"] = *c.indicator_of;
    cols.push_back(std::move(jc));
  }
  return json{{"schema", schema_to_json(e.schema)}, {"columns", cols}};
}

Encoding encoding_from_json(const json& j) {
  Encoding e;
  e.schema = schema_from_json(j.at("schema"));
  for (auto& jc : j.at("columns")) {
    ColumnMeta c;
    c.name = jc.at("name").get<std::string>();
    auto kind = jc.at("kind").get<std::string>();
    c.kind = kind == "C" ? FeatureKind::Categorical : kind == "B" ? FeatureKind::Boolean : FeatureKind::Numeric;
    if (auto it = jc.find("dictionary"); it != jc.end()) c.dictionary = it->get<std::map<std::string, int>>();
    if (auto it = jc.find("indicator_of"); it != jc.end()) c.indicator_of = it->get<std::size_t>();
    e.columns.push_back(std::move(c));
  }
  return e;
}

}  // namespace scamrank
