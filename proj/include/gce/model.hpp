#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gce/dataset.hpp"
#include "gce/error.hpp"
#include "gce/schema.hpp"
#include "gce/triple.hpp"

namespace gce {

// y = W x + b with W stored row-major (outputs x inputs).
struct DenseLayer {
  std::size_t outputs = 0;
  std::size_t inputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;
};

// ReLU hidden layers, softmax over a two-class output. Dropout from training
// is absent at inference.
class Mlp {
public:
  Mlp() = default;

  explicit Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw DimensionMismatch("network has no layers");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& L = layers_[l];
      if (L.weights.size() != L.outputs * L.inputs || L.bias.size() != L.outputs || L.inputs == 0)
        throw DimensionMismatch("layer " + std::to_string(l) + ": weight/bias shapes disagree");
      if (l > 0 && L.inputs != layers_[l - 1].outputs)
        throw DimensionMismatch("layer " + std::to_string(l) + " expects " + std::to_string(L.inputs) +
                                " inputs but previous layer emits " +
                                std::to_string(layers_[l - 1].outputs));
    }
    if (layers_.back().outputs != 2) throw DimensionMismatch("final layer must have 2 outputs");
  }

  std::size_t input_dim() const noexcept { return layers_.front().inputs; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::array<double, 2> forward(std::span<const double> x) const {
    if (x.size() != input_dim())
      throw DimensionMismatch("expected " + std::to_string(input_dim()) + " inputs, got " +
                              std::to_string(x.size()));
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const auto& L = layers_[l];
      next.assign(L.bias.begin(), L.bias.end());
      for (std::size_t o = 0; o < L.outputs; ++o) {
        const double* w = L.weights.data() + o * L.inputs;
        double acc = 0.0;
        for (std::size_t i = 0; i < L.inputs; ++i) acc += w[i] * cur[i];
        next[o] += acc;
      }
      if (l + 1 < layers_.size())
        for (auto& v : next) v = std::max(v, 0.0);
      cur.swap(next);
    }
    const double m = std::max(cur[0], cur[1]);
    const double e0 = std::exp(cur[0] - m);
    const double e1 = std::exp(cur[1] - m);
    return {e0 / (e0 + e1), e1 / (e0 + e1)};
  }

private:
  std::vector<DenseLayer> layers_;
};

// Maps a raw row (schema order) onto the model's input vector.
class InputEncoder {
public:
  InputEncoder() = default;

  InputEncoder(std::vector<ColumnSpan> spans, const FeatureSchema& schema) {
    std::vector<int> seen(schema.size(), 0);
    for (const auto& s : spans) {
      auto f = schema.index_of(s.feature);
      if (!f) throw EncodingMismatch(s.feature, "not a schema feature");
      if (seen[*f]++) throw EncodingMismatch(s.feature, "encoded more than once");
      const auto& feat = schema[*f];
      if (s.type == ColumnType::OneHot) {
        if (feat.kind != FeatureKind::Categorical)
          throw EncodingMismatch(s.feature, "one-hot encoding of a continuous feature");
        if (s.width != feat.categories.size())
          throw EncodingMismatch(s.feature, "one-hot width " + std::to_string(s.width) + " but " +
                                                std::to_string(feat.categories.size()) + " categories");
      } else {
        if (s.width != 1) throw EncodingMismatch(s.feature, "raw columns have width 1");
        if (s.scale == 0.0 || !std::isfinite(s.scale) || !std::isfinite(s.offset))
          throw EncodingMismatch(s.feature, "invalid offset/scale");
      }
      width_ = std::max(width_, s.column + s.width);
      columns_.push_back({*f, s});
    }
    for (std::size_t f = 0; f < schema.size(); ++f)
      if (!seen[f]) throw EncodingMismatch(schema[f].name, "feature missing from encoding");

    std::vector<int> used(width_, 0);
    for (const auto& c : columns_)
      for (std::size_t k = 0; k < c.span.width; ++k)
        if (used[c.span.column + k]++)
          throw EncodingMismatch(c.span.feature, "column " + std::to_string(c.span.column + k) +
                                                     " overlaps another feature");
    for (std::size_t k = 0; k < width_; ++k)
      if (!used[k]) throw EncodingMismatch(schema[0].name, "column " + std::to_string(k) + " unassigned");
  }

  std::size_t width() const noexcept { return width_; }

  std::vector<ColumnSpan> spans() const {
    std::vector<ColumnSpan> out;
    for (const auto& c : columns_) out.push_back(c.span);
    return out;
  }

  void encode(std::span<const double> raw, std::span<double> out) const noexcept {
    std::fill(out.begin(), out.end(), 0.0);
    for (const auto& c : columns_) {
      const double v = raw[c.feature];
      if (c.span.type == ColumnType::OneHot) out[c.span.column + static_cast<std::size_t>(v)] = 1.0;
      else out[c.span.column] = (v - c.span.offset) / c.span.scale;
    }
  }

  std::vector<double> encode(std::span<const double> raw) const {
    std::vector<double> out(width_);
    encode(raw, out);
    return out;
  }

private:
  struct Column {
    std::size_t feature;
    ColumnSpan span;
  };
  std::vector<Column> columns_;
  std::size_t width_ = 0;
};

// Anything that decides favorability of a raw row.
template <class T>
concept RecourseOracle = requires(const T& m, std::span<const double> row) {
  { m.favorable(row) } -> std::convertible_to<bool>;
};

// Black-box binary classifier over raw rows.
class ModelOracle {
public:
  ModelOracle() = default;
  ModelOracle(Mlp net, InputEncoder encoder, std::size_t favorable_class)
      : net_(std::move(net)), encoder_(std::move(encoder)), favorable_(favorable_class) {
    if (favorable_ > 1) throw DimensionMismatch("favorable_class must be 0 or 1");
    if (encoder_.width() != net_.input_dim())
      throw DimensionMismatch("encoding spans " + std::to_string(encoder_.width()) +
                              " columns but the network takes " + std::to_string(net_.input_dim()));
  }

  std::array<double, 2> probabilities(std::span<const double> raw) const {
    thread_local std::vector<double> buf;
    buf.resize(encoder_.width());
    encoder_.encode(raw, buf);
    return net_.forward(buf);
  }

  // Ties count as unfavorable.
  bool favorable(std::span<const double> raw) const {
    const auto p = probabilities(raw);
    return p[favorable_] > p[1 - favorable_];
  }

  std::size_t favorable_class() const noexcept { return favorable_; }
  const Mlp& network() const noexcept { return net_; }
  const InputEncoder& encoder() const noexcept { return encoder_; }

private:
  Mlp net_;
  InputEncoder encoder_;
  std::size_t favorable_ = 1;
};

inline json model_to_json(const ModelOracle& model) {
  json layers = json::array();
  for (const auto& L : model.network().layers()) {
    json rows = json::array();
    for (std::size_t o = 0; o < L.outputs; ++o)
      rows.push_back(std::vector<double>(L.weights.begin() + static_cast<std::ptrdiff_t>(o * L.inputs),
                                         L.weights.begin() + static_cast<std::ptrdiff_t>((o + 1) * L.inputs)));
    layers.push_back({{"weights", std::move(rows)}, {"bias", L.bias}});
  }
  return {{"version", 1},
          {"favorable_class", model.favorable_class()},
          {"input_encoding", encoding_to_json(model.encoder().spans())},
          {"layers", std::move(layers)}};
}

inline ModelOracle model_from_json(const json& j, const FeatureSchema& schema) {
  std::vector<DenseLayer> layers;
  std::vector<ColumnSpan> spans;
  std::size_t favorable = 1;
  try {
    if (j.value("version", 1) != 1) throw FormatError("unsupported weights file version");
    favorable = j.at("favorable_class").get<std::size_t>();
    spans = encoding_from_json(j.at("input_encoding"));
    for (const auto& lj : j.at("layers")) {
      DenseLayer L;
      const auto& rows = lj.at("weights");
      L.outputs = rows.size();
      L.inputs = L.outputs ? rows.front().size() : 0;
      for (const auto& row : rows) {
        if (row.size() != L.inputs) throw DimensionMismatch("ragged weight matrix");
        for (const auto& v : row) L.weights.push_back(v.get<double>());
      }
      L.bias = lj.at("bias").get<std::vector<double>>();
      layers.push_back(std::move(L));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed weights file: ") + e.what());
  }
  if (!schema.encoding().empty()) {
    for (const auto& declared : schema.encoding()) {
      auto it = std::find_if(spans.begin(), spans.end(),
                             [&](const ColumnSpan& c) { return c.feature == declared.feature; });
      if (it == spans.end() || !(*it == declared))
        throw EncodingMismatch(declared.feature, "weights file and schema sidecar disagree");
    }
  }
  return ModelOracle(Mlp(std::move(layers)), InputEncoder(std::move(spans), schema), favorable);
}

inline ModelOracle load_model(const std::string& weights_path, const FeatureSchema& schema) {
  std::ifstream in(weights_path);
  if (!in) throw Error("cannot open weights file '" + weights_path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("weights file '" + weights_path + "': " + e.what());
  }
  return model_from_json(j, schema);
}

inline void save_model(const ModelOracle& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << model_to_json(model).dump(1) << '\n';
}

// Single-layer network whose favorable class wins iff w.x + b > 0.
inline ModelOracle linear_oracle(const FeatureSchema& schema, std::vector<ColumnSpan> spans,
                                 std::span<const double> w, double b) {
  DenseLayer L;
  L.outputs = 2;
  L.inputs = w.size();
  L.weights.assign(w.size(), 0.0);
  L.weights.insert(L.weights.end(), w.begin(), w.end());
  L.bias = {0.0, b};
  return ModelOracle(Mlp({std::move(L)}), InputEncoder(std::move(spans), schema), 1);
}

// Sorted positions of the rows the oracle predicts unfavorable.
struct AffectedSet {
  std::vector<std::uint32_t> indices;

  std::size_t size() const noexcept { return indices.size(); }
  bool empty() const noexcept { return indices.empty(); }
};

template <RecourseOracle Oracle>
AffectedSet affected_set(const Oracle& oracle, const RawDataset& data) {
  AffectedSet out;
  for (std::size_t r = 0; r < data.size(); ++r)
    if (!oracle.favorable(data.rows[r])) out.indices.push_back(static_cast<std::uint32_t>(r));
  return out;
}

namespace detail {

// Writes the Then assignment into `row`; returns how many features changed.
inline std::size_t write_then(std::vector<double>& row, const ItemSet& then, const BinningSpec& binning,
                              const FeatureSchema& schema) {
  std::size_t changed = 0;
  for (const auto& it : then) {
    double& cell = row[it.feature];
    if (schema[it.feature].kind == FeatureKind::Categorical) {
      const double target = static_cast<double>(it.value);
      if (cell != target) {
        cell = target;
        ++changed;
      }
    } else {
      const auto& bins = binning.bins(it.feature);
      if (bins.bin_of(cell) != it.value) {
        cell = bins.representatives[it.value];
        ++changed;
      }
    }
  }
  return changed;
}

} // namespace detail

// The counterfactual input a triple prescribes for `row`: Then categories are
// substituted, Then bins become their representative unless the value already
// lies in the bin. Features outside the Then condition are untouched.
inline std::vector<double> apply_then(std::span<const double> row, const Triple& triple,
                                      const BinningSpec& binning, const FeatureSchema& schema) {
  const auto bins = discretize_row(row, binning, schema);
  if (!triple.covers(bins)) throw NotCovered();
  std::vector<double> out(row.begin(), row.end());
  detail::write_then(out, triple.then, binning, schema);
  return out;
}

} // namespace gce
