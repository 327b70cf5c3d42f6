#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bessrl/errors.hpp"
#include "bessrl/rng.hpp"

namespace bessrl {

inline constexpr std::int64_t kStepSeconds = 30 * 60;

// Uniformly spaced 30-minute price series. price_max is the normalization
// constant (by default the maximum over the full series); train_end/val_end
// record a chronological split as [0, train_end), [train_end, val_end),
// [val_end, ...).
struct PriceSeries {
  std::vector<std::int64_t> timestamps_utc;  // epoch seconds, strictly increasing
  std::vector<double> prices_usd;            // $/MWh
  double price_max = 0.0;
  int train_end = 0;
  int val_end = 0;

  int size() const { return static_cast<int>(prices_usd.size()); }
  void validate() const;  // throws DataError on spacing/shape violations
};

// Contiguous chronological slice of a series.
struct Segment {
  int start = 0;
  int length = 0;
};

struct SplitSegments {
  Segment train, val, test;
};

// Parses epoch seconds from "YYYY-MM-DDTHH:MM:SS" (UTC); throws DataError.
std::int64_t parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(std::int64_t epoch_seconds);

// CSV with header "timestamp,price_usd_per_mwh", ISO-8601 timestamps.
// Malformed rows and spacing violations are reported with line numbers.
PriceSeries load_csv(const std::string& path);
void save_csv(const PriceSeries& series, const std::string& path);

// x_t = price_t / price_max. price_max defaults to the maximum over the full
// loaded series; pass an explicit positive value to override.
std::vector<double> normalize(const PriceSeries& series, double price_max = 0.0);
std::vector<double> denormalize(std::span<const double> normalized, double price_max);

// Chronological contiguous split; records the indices in the series.
SplitSegments chrono_split(PriceSeries& series, int n_train, int n_val, int n_test);

struct SynthParams {
  double base_usd = 50.0;
  double daily_amplitude_usd = 20.0;
  double weekly_amplitude_usd = 8.0;
  double noise_sigma_usd = 5.0;
  double spike_prob = 0.01;
  double spike_magnitude_usd = 100.0;
  double floor_usd = 0.0;  // set negative to allow negative prices
  std::int64_t start_epoch_seconds = 1483228800;  // 2017-01-01T00:00:00 UTC
};

// Daily sinusoid (48-step period) + weekly modulation + Gaussian noise +
// occasional spikes, floored at floor_usd. Deterministic per seed.
PriceSeries synth_prices(int length, std::uint64_t seed, const SynthParams& params = {});

}  // namespace bessrl
