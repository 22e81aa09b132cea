#pragma once

// JSON model documents. Tensors are stored row-major with explicit shapes;
// doubles are written in shortest round-trip form, so save/load/save is
// byte-stable.

#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "gridcast/error.hpp"
#include "gridcast/lstm.hpp"

namespace gridcast {

inline constexpr int kModelFormatVersion = 1;

namespace detail {

template <class Derived>
nlohmann::json tensor_to_json(const Eigen::MatrixBase<Derived>& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline Matrix tensor_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const std::string& name) {
  if (j.at("rows").get<Eigen::Index>() != rows || j.at("cols").get<Eigen::Index>() != cols)
    fail(ErrorKind::Shape, "tensor '" + name + "' has an unexpected shape");
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows * cols)
    fail(ErrorKind::Shape, "tensor '" + name + "' has the wrong number of entries");
  Matrix m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double v = data[k++].get<double>();
      if (!std::isfinite(v)) fail(ErrorKind::Validation, "tensor '" + name + "' holds a non-finite value");
      m(i, c) = v;
    }
  return m;
}

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::json to_json(const LstmModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.layers) {
    layers.push_back({{"hidden", l.hidden_size()},
                      {"input", l.input_size()},
                      {"w_forget", detail::tensor_to_json(l.w_forget)},
                      {"w_input", detail::tensor_to_json(l.w_input)},
                      {"w_candidate", detail::tensor_to_json(l.w_candidate)},
                      {"w_output", detail::tensor_to_json(l.w_output)},
                      {"b_forget", detail::tensor_to_json(l.b_forget)},
                      {"b_input", detail::tensor_to_json(l.b_input)},
                      {"b_candidate", detail::tensor_to_json(l.b_candidate)},
                      {"b_output", detail::tensor_to_json(l.b_output)}});
  }
  return {{"format_version", kModelFormatVersion},
          {"lookback", model.lookback},
          {"resolution", std::string(to_string(model.resolution))},
          {"columns", model.columns},
          {"dropout_rate", model.dropout_rate},
          {"layers", layers},
          {"head", {{"w", detail::tensor_to_json(model.head_w)}, {"b", detail::tensor_to_json(model.head_b)}}},
          {"scaler", {{"means", detail::to_std(model.scaler.means)}, {"stds", detail::to_std(model.scaler.stds)}}}};
}

inline LstmModel model_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kModelFormatVersion)
      fail(ErrorKind::Parse, "unsupported model format_version " + std::to_string(version));
    LstmModel m;
    m.lookback = j.at("lookback").get<std::size_t>();
    const auto res = j.at("resolution").get<std::string>();
    if (res != "daily" && res != "hourly") fail(ErrorKind::Parse, "unknown resolution '" + res + "'");
    m.resolution = res == "daily" ? Resolution::Daily : Resolution::Hourly;
    m.columns = j.at("columns").get<std::vector<std::string>>();
    m.dropout_rate = j.at("dropout_rate").get<double>();
    for (const auto& lj : j.at("layers")) {
      const auto h = lj.at("hidden").get<Eigen::Index>();
      const auto in = lj.at("input").get<Eigen::Index>();
      LstmLayerParams p;
      p.w_forget = detail::tensor_from_json(lj.at("w_forget"), h, h + in, "w_forget");
      p.w_input = detail::tensor_from_json(lj.at("w_input"), h, h + in, "w_input");
      p.w_candidate = detail::tensor_from_json(lj.at("w_candidate"), h, h + in, "w_candidate");
      p.w_output = detail::tensor_from_json(lj.at("w_output"), h, h + in, "w_output");
      p.b_forget = detail::tensor_from_json(lj.at("b_forget"), h, 1, "b_forget");
      p.b_input = detail::tensor_from_json(lj.at("b_input"), h, 1, "b_input");
      p.b_candidate = detail::tensor_from_json(lj.at("b_candidate"), h, 1, "b_candidate");
      p.b_output = detail::tensor_from_json(lj.at("b_output"), h, 1, "b_output");
      m.layers.push_back(std::move(p));
    }
    const auto top = m.layers.empty() ? 0 : m.layers.back().hidden_size();
    m.head_w = detail::tensor_from_json(j.at("head").at("w"), 1, top, "head.w");
    m.head_b = detail::tensor_from_json(j.at("head").at("b"), 1, 1, "head.b");
    m.scaler.means = detail::to_eigen(j.at("scaler").at("means").get<std::vector<double>>());
    m.scaler.stds = detail::to_eigen(j.at("scaler").at("stds").get<std::vector<double>>());
    m.check();
    require(m.scaler.columns() == m.input_size() && m.scaler.stds.size() == m.input_size(), ErrorKind::Shape,
            "scaler does not match the model input");
    require((m.scaler.stds.array() > 0.0).all(), ErrorKind::Validation, "scaler stds must be positive");
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("malformed model document: ") + e.what());
  }
}

inline std::string serialize_model(const LstmModel& model) { return to_json(model).dump(1) + "\n"; }

inline LstmModel parse_model(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::Parse, std::string("model file is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << contents;
  if (!out) fail(ErrorKind::Io, "failed writing '" + path + "'");
}

inline void save_model(const LstmModel& model, const std::string& path) { write_file(path, serialize_model(model)); }
inline LstmModel load_model(const std::string& path) { return parse_model(read_file(path)); }

}  // namespace gridcast
