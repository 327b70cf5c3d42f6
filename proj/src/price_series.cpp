#include "bessrl/price_series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

namespace bessrl {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;

bool is_leap(int year) { return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0; }

const int kDaysPerMonth[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};

std::int64_t days_from_civil(int y, int m, int d) {
  // days since 1970-01-01, Howard Hinnant's algorithm
  y -= m <= 2;
  std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  int yoe = static_cast<int>(y - era * 400);
  int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  int doe = static_cast<int>(z - era * 146097);
  int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe + era * 400);
  int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  int mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

}  // namespace

std::int64_t parse_iso8601_utc(const std::string& text) {
  int y, mo, d, h, mi, s;
  char sep;
  if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d", &y, &mo, &d, &sep, &h, &mi, &s) != 7 ||
      (sep != 'T' && sep != ' '))
    throw DataError("timestamp '" + text + "' is not ISO-8601 (YYYY-MM-DDTHH:MM:SS)");
  if (mo < 1 || mo > 12) throw DataError("timestamp '" + text + "': month out of range");
  int dim = kDaysPerMonth[mo - 1] + (mo == 2 && is_leap(y) ? 1 : 0);
  if (d < 1 || d > dim) throw DataError("timestamp '" + text + "': day out of range");
  if (h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
    throw DataError("timestamp '" + text + "': time out of range");
  return days_from_civil(y, mo, d) * kSecondsPerDay + h * 3600 + mi * 60 + s;
}

std::string format_iso8601_utc(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / kSecondsPerDay;
  std::int64_t rem = epoch_seconds % kSecondsPerDay;
  if (rem < 0) {
    rem += kSecondsPerDay;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d", y, m, d,
                static_cast<int>(rem / 3600), static_cast<int>((rem / 60) % 60),
                static_cast<int>(rem % 60));
  return buf;
}

void PriceSeries::validate() const {
  if (timestamps_utc.size() != prices_usd.size())
    throw DataError("price series: timestamp/price count mismatch");
  for (size_t i = 1; i < timestamps_utc.size(); ++i) {
    std::int64_t gap = timestamps_utc[i] - timestamps_utc[i - 1];
    if (gap != kStepSeconds)
      throw DataError("price series: nonuniform spacing at row " + std::to_string(i + 1) +
                      " (gap " + std::to_string(gap) + "s between " +
                      format_iso8601_utc(timestamps_utc[i - 1]) + " and " +
                      format_iso8601_utc(timestamps_utc[i]) + ", expected " +
                      std::to_string(kStepSeconds) + "s)");
  }
  for (size_t i = 0; i < prices_usd.size(); ++i)
    if (!std::isfinite(prices_usd[i]))
      throw DataError("price series: non-finite price at row " + std::to_string(i + 1));
}

PriceSeries load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp,price_usd_per_mwh")
    throw DataError("'" + path + "': expected header 'timestamp,price_usd_per_mwh', got '" + line +
                    "'");

  PriceSeries s;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw DataError("'" + path + "' line " + std::to_string(line_no) + ": missing comma");
    std::string ts_text = line.substr(0, comma);
    std::string price_text = line.substr(comma + 1);
    std::int64_t ts;
    try {
      ts = parse_iso8601_utc(ts_text);
    } catch (const DataError& e) {
      throw DataError("'" + path + "' line " + std::to_string(line_no) + ": " + e.what());
    }
    char* end = nullptr;
    double price = std::strtod(price_text.c_str(), &end);
    if (end == price_text.c_str() || *end != '\0' || !std::isfinite(price))
      throw DataError("'" + path + "' line " + std::to_string(line_no) + ": bad price '" +
                      price_text + "'");
    if (!s.timestamps_utc.empty()) {
      std::int64_t gap = ts - s.timestamps_utc.back();
      if (gap == 0)
        throw DataError("'" + path + "' line " + std::to_string(line_no) +
                        ": duplicated timestamp " + ts_text);
      if (gap != kStepSeconds)
        throw DataError("'" + path + "' line " + std::to_string(line_no) + ": spacing gap of " +
                        std::to_string(gap) + "s after " +
                        format_iso8601_utc(s.timestamps_utc.back()) + ", expected " +
                        std::to_string(kStepSeconds) + "s");
    }
    s.timestamps_utc.push_back(ts);
    s.prices_usd.push_back(price);
  }
  if (s.prices_usd.empty()) throw DataError("'" + path + "' has no data rows");
  s.price_max = *std::max_element(s.prices_usd.begin(), s.prices_usd.end());
  return s;
}

void save_csv(const PriceSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << "timestamp,price_usd_per_mwh\n";
  char buf[64];
  for (int i = 0; i < series.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", series.prices_usd[static_cast<size_t>(i)]);
    out << format_iso8601_utc(series.timestamps_utc[static_cast<size_t>(i)]) << ',' << buf << '\n';
  }
  if (!out) throw DataError("write to '" + path + "' failed");
}

std::vector<double> normalize(const PriceSeries& series, double price_max) {
  double pm = price_max > 0.0 ? price_max : series.price_max;
  if (!(pm > 0.0)) throw DataError("normalize: price_max must be > 0");
  std::vector<double> x(series.prices_usd.size());
  for (size_t i = 0; i < x.size(); ++i) x[i] = series.prices_usd[i] / pm;
  return x;
}

std::vector<double> denormalize(std::span<const double> normalized, double price_max) {
  if (!(price_max > 0.0)) throw DataError("denormalize: price_max must be > 0");
  std::vector<double> p(normalized.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = normalized[i] * price_max;
  return p;
}

SplitSegments chrono_split(PriceSeries& series, int n_train, int n_val, int n_test) {
  if (n_train < 1 || n_val < 1 || n_test < 1)
    throw DataError("chrono_split: every segment needs at least one step");
  long need = static_cast<long>(n_train) + n_val + n_test;
  if (need > series.size())
    throw DataError("chrono_split: series has " + std::to_string(series.size()) +
                    " points, need " + std::to_string(need) + " (short by " +
                    std::to_string(need - series.size()) + ")");
  series.train_end = n_train;
  series.val_end = n_train + n_val;
  SplitSegments s;
  s.train = {0, n_train};
  s.val = {n_train, n_val};
  s.test = {n_train + n_val, n_test};
  return s;
}

PriceSeries synth_prices(int length, std::uint64_t seed, const SynthParams& params) {
  if (length <= 0) throw ConfigError("synth_prices: length must be > 0");
  Rng rng(mix_seed(seed, 0x5e11e5));
  PriceSeries s;
  s.timestamps_utc.resize(static_cast<size_t>(length));
  s.prices_usd.resize(static_cast<size_t>(length));
  constexpr double kDailyPeriod = 48.0;
  constexpr double kWeeklyPeriod = 48.0 * 7.0;
  for (int t = 0; t < length; ++t) {
    double daily = params.daily_amplitude_usd * std::sin(2.0 * std::numbers::pi * t / kDailyPeriod);
    double weekly = params.weekly_amplitude_usd * std::sin(2.0 * std::numbers::pi * t / kWeeklyPeriod);
    double noise = params.noise_sigma_usd * rng.normal();
    double spike = 0.0;
    double u = rng.uniform();
    if (u < params.spike_prob) spike = params.spike_magnitude_usd * (0.5 + rng.uniform());
    double price = params.base_usd + daily + weekly + noise + spike;
    s.prices_usd[static_cast<size_t>(t)] = std::max(price, params.floor_usd);
    s.timestamps_utc[static_cast<size_t>(t)] = params.start_epoch_seconds + t * kStepSeconds;
  }
  s.price_max = *std::max_element(s.prices_usd.begin(), s.prices_usd.end());
  return s;
}

}  // namespace bessrl
