#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gce/error.hpp"
#include "gce/schema.hpp"

namespace gce {

// Rows of raw feature values in schema order. Categorical cells hold the
// category index, continuous cells the raw number.
struct RawDataset {
  std::vector<std::vector<double>> rows;

  std::size_t size() const noexcept { return rows.size(); }
  bool empty() const noexcept { return rows.empty(); }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

// RFC 4180-ish: commas, double-quoted fields with "" escapes.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  out.push_back(trim(cell));
  return out;
}

inline std::optional<double> parse_finite(const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

} // namespace detail

// Reads a headered CSV. Columns are matched to schema features by name;
// columns the schema does not mention are ignored. Row numbers in errors are
// 1-based data rows (the header is row 0).
inline RawDataset read_dataset(std::istream& in, const FeatureSchema& schema) {
  std::string line;
  if (!std::getline(in, line)) throw MissingColumn(schema[0].name);
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split_csv_line(line);

  std::vector<std::size_t> column_of(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    auto it = std::find(header.begin(), header.end(), schema[f].name);
    if (it == header.end()) throw MissingColumn(schema[f].name);
    column_of[f] = static_cast<std::size_t>(it - header.begin());
  }

  RawDataset data;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row_number;
    const auto cells = detail::split_csv_line(line);
    std::vector<double> row(schema.size());
    for (std::size_t f = 0; f < schema.size(); ++f) {
      const auto& feature = schema[f];
      const std::string cell = column_of[f] < cells.size() ? cells[column_of[f]] : std::string{};
      if (feature.kind == FeatureKind::Categorical) {
        auto idx = schema.category_index(f, cell);
        if (!idx) throw UnknownCategory(row_number, feature.name, cell);
        row[f] = static_cast<double>(*idx);
      } else {
        auto v = detail::parse_finite(cell);
        if (!v) throw UnparsableNumber(row_number, feature.name, cell);
        row[f] = *v;
      }
    }
    data.rows.push_back(std::move(row));
  }
  return data;
}

inline RawDataset load_dataset(const std::string& csv_path, const FeatureSchema& schema) {
  std::ifstream in(csv_path);
  if (!in) throw Error("cannot open dataset '" + csv_path + "'");
  return read_dataset(in, schema);
}

inline void write_dataset(std::ostream& out, const RawDataset& data, const FeatureSchema& schema) {
  for (std::size_t f = 0; f < schema.size(); ++f) out << (f ? "," : "") << schema[f].name;
  out << '\n';
  std::ostringstream num;
  num.precision(17);
  for (const auto& row : data.rows) {
    for (std::size_t f = 0; f < schema.size(); ++f) {
      if (f) out << ',';
      if (schema[f].kind == FeatureKind::Categorical) {
        out << schema[f].categories[static_cast<std::size_t>(row[f])];
      } else {
        num.str({});
        num << row[f];
        out << num.str();
      }
    }
    out << '\n';
  }
}

// Equal-width bins of one continuous feature. Bins are left-closed and
// right-open except the last, which is closed.
struct FeatureBins {
  std::vector<double> edges;           // bin_count + 1, strictly ascending
  std::vector<double> representatives; // bin_count, midpoints

  std::size_t count() const noexcept { return representatives.size(); }

  // Values outside [edges.front(), edges.back()] clamp to the edge bins.
  std::uint32_t bin_of(double x) const noexcept {
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::ptrdiff_t j = (it - edges.begin()) - 1;
    j = std::clamp<std::ptrdiff_t>(j, 0, static_cast<std::ptrdiff_t>(count()) - 1);
    return static_cast<std::uint32_t>(j);
  }

  bool contains(std::uint32_t bin, double x) const noexcept { return bin_of(x) == bin; }
};

// Per-feature bins; empty for categorical features.
class BinningSpec {
public:
  BinningSpec() = default;
  explicit BinningSpec(std::vector<std::optional<FeatureBins>> bins) : bins_(std::move(bins)) {}

  std::size_t size() const noexcept { return bins_.size(); }
  bool is_binned(std::size_t feature) const noexcept { return bins_[feature].has_value(); }
  const FeatureBins& bins(std::size_t feature) const { return bins_.at(feature).value(); }

private:
  std::vector<std::optional<FeatureBins>> bins_;
};

inline BinningSpec fit_bins(const RawDataset& data, const FeatureSchema& schema) {
  if (data.empty()) throw Error("cannot fit bins on an empty dataset");
  std::vector<std::optional<FeatureBins>> out(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    if (schema[f].kind != FeatureKind::Continuous) continue;
    double lo = data.rows.front()[f];
    double hi = lo;
    for (const auto& row : data.rows) {
      lo = std::min(lo, row[f]);
      hi = std::max(hi, row[f]);
    }
    if (!(lo < hi)) throw DegenerateFeature(schema[f].name);
    const std::size_t k = schema[f].bin_count;
    const double width = (hi - lo) / static_cast<double>(k);
    FeatureBins b;
    b.edges.resize(k + 1);
    for (std::size_t j = 0; j < k; ++j) b.edges[j] = lo + static_cast<double>(j) * width;
    b.edges[k] = hi;
    for (std::size_t j = 1; j <= k; ++j)
      if (!(b.edges[j] > b.edges[j - 1])) throw DegenerateFeature(schema[f].name);
    b.representatives.resize(k);
    for (std::size_t j = 0; j < k; ++j) b.representatives[j] = 0.5 * (b.edges[j] + b.edges[j + 1]);
    out[f] = std::move(b);
  }
  return BinningSpec(std::move(out));
}

inline std::vector<std::uint32_t> discretize_row(std::span<const double> raw, const BinningSpec& binning,
                                                 const FeatureSchema& schema) {
  std::vector<std::uint32_t> out(schema.size());
  for (std::size_t f = 0; f < schema.size(); ++f) {
    out[f] = schema[f].kind == FeatureKind::Continuous ? binning.bins(f).bin_of(raw[f])
                                                       : static_cast<std::uint32_t>(raw[f]);
  }
  return out;
}

// Row-major matrix of value indices plus the raw rows it was built from.
class DiscretizedDataset {
public:
  DiscretizedDataset() = default;
  DiscretizedDataset(std::size_t features, std::vector<std::uint32_t> cells,
                     std::vector<std::size_t> cardinalities, RawDataset raw = {})
      : features_(features), cells_(std::move(cells)), cardinalities_(std::move(cardinalities)),
        raw_(std::move(raw)) {
    if (features_ == 0 || cells_.size() % features_ != 0)
      throw DimensionMismatch("discretized cell count is not a multiple of the feature count");
    if (cells_.empty()) throw Error("discretized dataset needs at least one row");
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (cells_[i] >= cardinalities_[i % features_])
        throw DimensionMismatch("value index out of range at cell " + std::to_string(i));
  }

  std::size_t row_count() const noexcept { return cells_.size() / features_; }
  std::size_t feature_count() const noexcept { return features_; }
  std::size_t cardinality(std::size_t feature) const noexcept { return cardinalities_[feature]; }
  std::uint32_t value(std::size_t row, std::size_t feature) const noexcept {
    return cells_[row * features_ + feature];
  }
  std::span<const std::uint32_t> row(std::size_t r) const noexcept {
    return {cells_.data() + r * features_, features_};
  }
  const RawDataset& raw() const noexcept { return raw_; }

private:
  std::size_t features_ = 0;
  std::vector<std::uint32_t> cells_;
  std::vector<std::size_t> cardinalities_;
  RawDataset raw_;
};

inline DiscretizedDataset discretize(const RawDataset& data, const BinningSpec& binning,
                                     const FeatureSchema& schema) {
  std::vector<std::uint32_t> cells;
  cells.reserve(data.size() * schema.size());
  for (const auto& row : data.rows) {
    auto d = discretize_row(row, binning, schema);
    cells.insert(cells.end(), d.begin(), d.end());
  }
  std::vector<std::size_t> card;
  for (const auto& f : schema.features()) card.push_back(f.cardinality());
  return DiscretizedDataset(schema.size(), std::move(cells), std::move(card), data);
}

} // namespace gce
