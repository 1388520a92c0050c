#include "relmine/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "relmine/error.hpp"

namespace relmine {

namespace {

constexpr int kFormatVersion = 1;

std::string number_text(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << "{\"rows\": " << m.rows() << ", \"cols\": " << m.cols()
      << ", \"data\": [";
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (i > 0) out << ", ";
    out << number_text(m.data()[i]);
  }
  out << "]}";
}

Matrix parse_matrix(const nlohmann::json& j, const std::string& name) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") ||
      !j.contains("data")) {
    throw DataError("model block '" + name + "' is not a matrix object");
  }
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t cols = j.at("cols").get<std::size_t>();
  const auto& data = j.at("data");
  if (!data.is_array() || data.size() != rows * cols) {
    throw DataError("model block '" + name + "' has " +
                    std::to_string(data.size()) + " values, expected " +
                    std::to_string(rows * cols));
  }
  std::vector<double> values;
  values.reserve(data.size());
  for (const auto& v : data) values.push_back(v.get<double>());
  return Matrix(rows, cols, std::move(values));
}

}  // namespace

void write_model(std::ostream& out, const GgnnParams& params,
                 const ActivityVocabulary& vocab) {
  out << "{\n";
  out << "  \"format\": \"relmine-model\",\n";
  out << "  \"version\": " << kFormatVersion << ",\n";
  out << "  \"dim\": " << params.dim << ",\n";
  out << "  \"steps\": " << params.steps << ",\n";
  out << "  \"readout\": \"" << readout_mode_name(params.readout) << "\",\n";
  out << "  \"activities\": [";
  // Activities only; the pseudo-activity is re-appended on load.
  for (std::size_t i = 0; i + 1 < vocab.size(); ++i) {
    if (i > 0) out << ", ";
    out << '"' << json_escape(vocab.name_of(i)) << '"';
  }
  out << "],\n";
  out << "  \"blocks\": {\n";
  const auto blocks = params.blocks();
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out << "    \"" << blocks[i].first << "\": ";
    write_matrix(out, *blocks[i].second);
    out << (i + 1 < blocks.size() ? ",\n" : "\n");
  }
  out << "  }\n";
  out << "}\n";
}

LoadedModel read_model(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || doc.value("format", "") != "relmine-model") {
    throw DataError("not a relmine model file");
  }
  if (doc.value("version", 0) != kFormatVersion) {
    throw DataError("unsupported model format version");
  }

  LoadedModel model;
  const auto dim = doc.at("dim").get<std::size_t>();
  const auto steps = doc.at("steps").get<std::size_t>();
  const auto readout = readout_mode_from_name(doc.at("readout").get<std::string>());
  model.params = GgnnParams::zeros(dim, steps, readout);

  std::vector<std::string> activities;
  for (const auto& a : doc.at("activities")) {
    activities.push_back(a.get<std::string>());
  }
  model.vocab = ActivityVocabulary(std::move(activities));

  const auto& blocks_json = doc.at("blocks");
  for (auto& [name, target] : model.params.blocks()) {
    if (!blocks_json.contains(name)) {
      throw DataError("model file is missing block '" + name + "'");
    }
    Matrix parsed = parse_matrix(blocks_json.at(name), name);
    if (parsed.rows() != target->rows() || parsed.cols() != target->cols()) {
      throw DataError("model block '" + name + "' has shape " +
                      std::to_string(parsed.rows()) + "x" +
                      std::to_string(parsed.cols()) + ", expected " +
                      std::to_string(target->rows()) + "x" +
                      std::to_string(target->cols()));
    }
    *target = std::move(parsed);
  }
  if (!model.params.all_finite()) {
    throw DataError("model file contains non-finite parameters");
  }
  return model;
}

void save_model_file(const std::string& path, const GgnnParams& params,
                     const ActivityVocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  write_model(out, params, vocab);
  if (!out) throw ConfigError("failed writing model to '" + path + "'");
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  return read_model(in);
}

}  // namespace relmine
