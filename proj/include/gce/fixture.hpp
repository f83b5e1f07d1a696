#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "gce/dataset.hpp"
#include "gce/model.hpp"
#include "gce/schema.hpp"

namespace gce {

// Synthetic credit-style dataset with a linear scoring model, for
// end-to-end runs without a trained network.
struct Fixture {
  FeatureSchema schema;
  RawDataset data;
  ModelOracle model;
};

namespace detail {

// Portable draws from mt19937_64 (the engine's output sequence is fixed by
// the standard; the library distributions are not).
class FixtureRng {
public:
  explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint32_t pick(std::span<const double> weights) {
    double total = 0.0;
    for (auto w : weights) total += w;
    double u = uniform() * total;
    for (std::uint32_t i = 0; i < weights.size(); ++i) {
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    return static_cast<std::uint32_t>(weights.size() - 1);
  }

private:
  std::mt19937_64 engine_;
};

inline double round_to(double v, double step) { return std::round(v / step) * step; }

} // namespace detail

inline FeatureSchema credit_fixture_schema() {
  auto cat = [](std::string name, std::vector<std::string> values, bool actionable) {
    Feature f;
    f.name = std::move(name);
    f.kind = FeatureKind::Categorical;
    f.categories = std::move(values);
    f.actionable = actionable;
    return f;
  };
  auto num = [](std::string name, bool actionable) {
    Feature f;
    f.name = std::move(name);
    f.kind = FeatureKind::Continuous;
    f.bin_count = 10;
    f.actionable = actionable;
    return f;
  };
  std::vector<Feature> features{
      cat("sex", {"male", "female"}, false),
      cat("foreign_worker", {"no", "yes"}, false),
      num("age", false),
      cat("checking", {"none", "negative", "low", "high"}, true),
      cat("savings", {"little", "moderate", "rich"}, true),
      cat("housing", {"rent", "own", "free"}, true),
      num("employment_years", true),
      num("duration_months", true),
      num("credit_amount", true),
  };

  std::vector<ColumnSpan> enc;
  std::size_t col = 0;
  for (const auto& f : features) {
    ColumnSpan s;
    s.feature = f.name;
    if (f.kind == FeatureKind::Categorical) {
      s.type = ColumnType::OneHot;
      s.width = f.categories.size();
    } else {
      s.type = ColumnType::Raw;
      s.width = 1;
    }
    s.column = col;
    col += s.width;
    enc.push_back(s);
  }
  // standardize the raw columns roughly
  enc[2].offset = 40.0, enc[2].scale = 12.0;
  enc[6].offset = 6.0, enc[6].scale = 5.0;
  enc[7].offset = 24.0, enc[7].scale = 12.0;
  enc[8].offset = 4000.0, enc[8].scale = 3000.0;
  return FeatureSchema(std::move(features), std::move(enc));
}

inline Fixture make_credit_fixture(std::size_t rows = 300, std::uint64_t seed = 7) {
  auto schema = credit_fixture_schema();
  detail::FixtureRng rng(seed);

  RawDataset data;
  for (std::size_t r = 0; r < rows; ++r) {
    const double sex = rng.pick(std::array{0.6, 0.4});
    const double foreign = rng.pick(std::array{0.85, 0.15});
    const double age = detail::round_to(rng.uniform(19.0, 70.0), 1.0);
    const double checking = rng.pick(std::array{0.35, 0.25, 0.25, 0.15});
    const double savings = rng.pick(std::array{0.55, 0.3, 0.15});
    const double housing = rng.pick(std::array{0.3, 0.6, 0.1});
    const double employment = detail::round_to(rng.uniform(0.0, 20.0), 0.5);
    const double duration = detail::round_to(rng.uniform(4.0, 60.0), 1.0);
    const double amount = detail::round_to(rng.uniform(300.0, 12000.0), 50.0);
    data.rows.push_back({sex, foreign, age, checking, savings, housing, employment, duration, amount});
  }

  // Encoded column order: sex(2) foreign(2) age checking(4) savings(3)
  // housing(3) employment duration amount.
  const std::vector<double> w{
      0.0,  0.0,                // sex
      0.0,  -0.3,               // foreign_worker
      0.25,                     // age
      0.4,  -1.6, 0.3, 1.4,     // checking
      -0.5, 0.6,  1.3,          // savings
      -0.4, 0.5,  0.0,          // housing
      0.35,                     // employment_years
      -0.7,                     // duration_months
      -0.45,                    // credit_amount
  };
  auto model = linear_oracle(schema, schema.encoding(), w, 0.15);
  return {std::move(schema), std::move(data), std::move(model)};
}

// Writes dataset.csv, schema.json and model.json into `dir`.
inline void write_fixture(const Fixture& fx, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "dataset.csv");
    write_dataset(out, fx.data, fx.schema);
  }
  save_schema(fx.schema, (dir / "schema.json").string());
  save_model(fx.model, (dir / "model.json").string());
}

} // namespace gce
