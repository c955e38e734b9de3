#include "lsmdp/trace_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "lsmdp/csv.hpp"
#include "lsmdp/rng.hpp"

namespace lsmdp {

namespace chr = std::chrono;

PowerTrace PowerTrace::make(std::vector<Timestamp> timestamps, std::vector<double> power_kw,
                            std::optional<std::string> season) {
  if (timestamps.size() != power_kw.size()) {
    throw ValidationError(fmt::format("{} timestamps for {} power samples", timestamps.size(),
                                      power_kw.size()));
  }
  for (std::size_t i = 0; i < power_kw.size(); ++i) {
    if (!(power_kw[i] >= 0.0) || !std::isfinite(power_kw[i])) {
      throw ValidationError(fmt::format("sample {}: power {} kW is negative or not finite", i,
                                        power_kw[i]));
    }
    if (i > 0 && !(timestamps[i] > timestamps[i - 1])) {
      throw ValidationError(fmt::format("sample {}: timestamps not strictly increasing", i));
    }
  }
  return PowerTrace(std::move(timestamps), std::move(power_kw), std::move(season));
}

// ---------------------------------------------------------------------------

namespace {

// Parses exactly `width` digits at text[pos].
int fixed_digits(std::string_view text, std::size_t pos, std::size_t width) {
  if (pos + width > text.size()) throw ValidationError(fmt::format("bad timestamp '{}'", text));
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, value);
  if (ec != std::errc{} || ptr != text.data() + pos + width) {
    throw ValidationError(fmt::format("bad timestamp '{}'", text));
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

chr::sys_days parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw ValidationError(fmt::format("bad date '{}', expected YYYY-MM-DD", text));
  }
  const chr::year_month_day ymd{chr::year{fixed_digits(text, 0, 4)},
                                chr::month{static_cast<unsigned>(fixed_digits(text, 5, 2))},
                                chr::day{static_cast<unsigned>(fixed_digits(text, 8, 2))}};
  if (!ymd.ok()) throw ValidationError(fmt::format("invalid calendar date '{}'", text));
  return chr::sys_days{ymd};
}

Timestamp parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ValidationError("missing timestamp");

  const bool all_digits = std::all_of(text.begin() + (text.front() == '-' ? 1 : 0), text.end(),
                                      [](char c) { return c >= '0' && c <= '9'; });
  if (all_digits) {
    std::int64_t secs = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), secs);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ValidationError(fmt::format("bad timestamp '{}'", text));
    }
    return Timestamp{chr::seconds{secs}};
  }

  const auto day = parse_date(text.substr(0, std::min<std::size_t>(10, text.size())));
  std::string_view rest = text.substr(std::min<std::size_t>(10, text.size()));
  if (rest.empty()) return Timestamp{day};
  if (rest.front() != 'T' && rest.front() != ' ') {
    throw ValidationError(fmt::format("bad timestamp '{}'", text));
  }
  rest.remove_prefix(1);
  if (!rest.empty() && rest.back() == 'Z') rest.remove_suffix(1);
  if (rest.size() != 5 && rest.size() != 8) {
    throw ValidationError(fmt::format("bad timestamp '{}'", text));
  }
  if (rest[2] != ':' || (rest.size() == 8 && rest[5] != ':')) {
    throw ValidationError(fmt::format("bad timestamp '{}'", text));
  }
  const int hh = fixed_digits(rest, 0, 2);
  const int mm = fixed_digits(rest, 3, 2);
  const int ss = rest.size() == 8 ? fixed_digits(rest, 6, 2) : 0;
  if (hh > 23 || mm > 59 || ss > 59) {
    throw ValidationError(fmt::format("bad time of day in '{}'", text));
  }
  return Timestamp{day} + chr::hours{hh} + chr::minutes{mm} + chr::seconds{ss};
}

std::string format_timestamp(Timestamp ts) {
  const auto day = chr::floor<chr::days>(ts);
  const chr::year_month_day ymd{day};
  const chr::hh_mm_ss hms{ts - day};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                     hms.hours().count(), hms.minutes().count(), hms.seconds().count());
}

// ---------------------------------------------------------------------------

PowerTrace read_trace_csv(std::istream& in) {
  const auto rows = csv::read(in);
  if (rows.empty()) throw ValidationError("trace CSV is empty (header row required)");
  const auto& header = rows.front();
  if (header.size() != 2 || trim(header[0]) != "timestamp" || trim(header[1]) != "power_kw") {
    throw ValidationError("trace CSV header must be 'timestamp,power_kw'");
  }
  std::vector<Timestamp> ts;
  std::vector<double> power;
  ts.reserve(rows.size() - 1);
  power.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 2) {
      throw ValidationError(fmt::format("trace CSV line {}: expected 2 fields, got {}", r + 1,
                                        row.size()));
    }
    try {
      ts.push_back(parse_timestamp(row[0]));
    } catch (const ValidationError& e) {
      throw ValidationError(fmt::format("trace CSV line {}: {}", r + 1, e.what()));
    }
    power.push_back(csv::parse_double(row[1], fmt::format("trace CSV line {}", r + 1)));
  }
  return PowerTrace::make(std::move(ts), std::move(power));
}

PowerTrace read_trace_csv_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  return read_trace_csv(in);
}

void write_trace_csv(std::ostream& out, const PowerTrace& trace) {
  out << "timestamp,power_kw\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << format_timestamp(trace.timestamps()[i]) << ','
        << csv::format_double(trace.power_kw()[i]) << '\n';
  }
}

PowerTrace filter_dates(const PowerTrace& trace, std::optional<chr::sys_days> from,
                        std::optional<chr::sys_days> to) {
  std::vector<Timestamp> ts;
  std::vector<double> power;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    const auto day = chr::floor<chr::days>(trace.timestamps()[i]);
    if (from && day < *from) continue;
    if (to && day > *to) continue;
    ts.push_back(trace.timestamps()[i]);
    power.push_back(trace.power_kw()[i]);
  }
  std::optional<std::string> label = trace.season();
  if (from || to) {
    label = fmt::format("{}..{}", from ? format_timestamp(Timestamp{*from}).substr(0, 10) : "",
                        to ? format_timestamp(Timestamp{*to}).substr(0, 10) : "");
  }
  return PowerTrace::make(std::move(ts), std::move(power), std::move(label));
}

// ---------------------------------------------------------------------------

PowerTrace synthesize_neighborhood(const PowerTrace& base, std::size_t n_houses,
                                   double noise_frac, std::uint64_t seed) {
  if (base.empty()) throw ValidationError("cannot synthesize a neighborhood from an empty trace");
  if (n_houses < 1) throw ValidationError("neighborhood needs at least one house");
  if (!(noise_frac >= 0.0 && noise_frac < 1.0)) {
    throw ValidationError(fmt::format("noise fraction {} outside [0, 1)", noise_frac));
  }
  std::vector<double> total(base.size(), 0.0);
  for (std::size_t house = 0; house < n_houses; ++house) {
    auto rng = make_rng(seed, house);
    std::uniform_real_distribution<double> factor(1.0 - noise_frac, 1.0 + noise_frac);
    for (std::size_t i = 0; i < base.size(); ++i) {
      const double f = noise_frac == 0.0 ? 1.0 : factor(rng);
      total[i] += f * base.power_kw()[i];
    }
  }
  return PowerTrace::make(base.timestamps(), std::move(total), base.season());
}

PowerTrace synthetic_hvac_trace(chr::sys_days start, std::size_t days, Season season,
                                std::uint64_t seed) {
  auto rng = make_rng(seed);
  std::normal_distribution<double> shock(0.0, 1.0);
  const bool summer = season == Season::kSummer;
  // Summer: cooling peaking at 15:00. Winter: heating peaking at 05:00, larger.
  const double peak_hour = summer ? 15.0 : 5.0;
  const double mean_kw = summer ? 1.3 : 6.0;
  const double swing_kw = summer ? 1.1 : 4.0;
  const double noise_kw = summer ? 0.25 : 0.9;

  std::vector<Timestamp> ts;
  std::vector<double> power;
  ts.reserve(days * 24);
  power.reserve(days * 24);
  double daily_offset = 0.0;
  double ar = 0.0;
  for (std::size_t d = 0; d < days; ++d) {
    daily_offset = 0.6 * daily_offset + 0.4 * swing_kw * 0.3 * shock(rng);
    for (int h = 0; h < 24; ++h) {
      ar = 0.7 * ar + noise_kw * std::sqrt(1.0 - 0.49) * shock(rng);
      const double phase = 2.0 * std::numbers::pi * (h - peak_hour) / 24.0;
      const double kw = mean_kw + swing_kw * std::cos(phase) + daily_offset + ar;
      ts.push_back(Timestamp{start + chr::days{d}} + chr::hours{h});
      power.push_back(std::max(0.0, kw));
    }
  }
  return PowerTrace::make(std::move(ts), std::move(power),
                          std::string(summer ? "summer" : "winter"));
}

// ---------------------------------------------------------------------------

Discretization discretize(const PowerTrace& trace, std::size_t n_states) {
  if (n_states < 2) {
    throw ValidationError(fmt::format("need at least 2 states, got {}", n_states));
  }
  if (trace.size() < 2) throw ValidationError("need at least 2 samples to discretize");
  const auto [lo, hi] = std::minmax_element(trace.power_kw().begin(), trace.power_kw().end());
  if (!(*hi > *lo)) {
    throw ValidationError(fmt::format("trace is constant at {} kW; power range is zero", *lo));
  }
  auto states = StateSpace::equal_width(*lo, *hi, n_states);
  std::vector<std::size_t> sequence;
  sequence.reserve(trace.size());
  for (double p : trace.power_kw()) sequence.push_back(states.state_of(p));
  return Discretization{std::move(states), std::move(sequence)};
}

TransitionMatrix estimate_matrix(std::span<const std::size_t> state_sequence,
                                 std::size_t n_states, double smoothing) {
  if (state_sequence.size() < 2) {
    throw ValidationError("need at least 2 states in the sequence to estimate transitions");
  }
  if (!(smoothing >= 0.0) || !std::isfinite(smoothing)) {
    throw ValidationError(fmt::format("smoothing {} must be non-negative", smoothing));
  }
  DenseMatrix counts(n_states, n_states, 0.0);
  for (std::size_t i = 0; i + 1 < state_sequence.size(); ++i) {
    const auto from = state_sequence[i];
    const auto to = state_sequence[i + 1];
    if (from >= n_states || to >= n_states) {
      throw ValidationError(fmt::format("state index out of range at position {}", i));
    }
    counts(from, to) += 1.0;
  }
  for (std::size_t r = 0; r < n_states; ++r) {
    auto row = counts.row(r);
    double total = 0.0;
    for (double c : row) total += c;
    if (total == 0.0) {
      row[r] = 1.0;
      continue;
    }
    for (double& c : row) c += smoothing;
    total += smoothing * static_cast<double>(n_states);
    for (double& c : row) c /= total;
  }
  return TransitionMatrix::make(std::move(counts));
}

// ---------------------------------------------------------------------------

NoisyEnsemble perturb_ensemble(const TransitionMatrix& base, std::size_t n_members, double sigma,
                               std::uint64_t seed) {
  if (n_members < 1) throw ValidationError("ensemble needs at least one member");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ValidationError(fmt::format("noise sigma {} must be non-negative", sigma));
  }
  const std::size_t n = base.n_states();
  NoisyEnsemble out{base, {}, sigma, seed};
  out.members.reserve(n_members);
  if (sigma == 0.0) {
    out.members.assign(n_members, base);
    return out;
  }

  std::vector<std::size_t> support;
  std::vector<double> noise;
  for (std::size_t m = 0; m < n_members; ++m) {
    auto rng = make_rng(seed, m);
    std::normal_distribution<double> gauss(0.0, sigma);
    DenseMatrix member = base.matrix();
    for (std::size_t r = 0; r < n; ++r) {
      support.clear();
      for (std::size_t c = 0; c < n; ++c) {
        if (base.prob(r, c) > 0.0) support.push_back(c);
      }
      // A single-entry row admits no zero-sum perturbation.
      if (support.size() < 2) continue;

      noise.resize(support.size());
      double mean = 0.0;
      for (double& e : noise) {
        e = gauss(rng);
        mean += e;
      }
      mean /= static_cast<double>(noise.size());

      auto row = member.row(r);
      double total = 0.0;
      for (std::size_t j = 0; j < support.size(); ++j) {
        double& p = row[support[j]];
        p = std::max(0.0, p + noise[j] - mean);
        total += p;
      }
      for (std::size_t c : support) row[c] /= total;
    }
    out.members.push_back(TransitionMatrix::make(std::move(member)));
  }
  return out;
}

DenseMatrix ensemble_mean(const NoisyEnsemble& ensemble) {
  const std::size_t n = ensemble.base.n_states();
  DenseMatrix mean(n, n, 0.0);
  for (const auto& m : ensemble.members) {
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) mean(r, c) += m.prob(r, c);
    }
  }
  const double k = static_cast<double>(ensemble.members.size());
  for (std::size_t r = 0; r < n; ++r) {
    for (double& v : mean.row(r)) v /= k;
  }
  return mean;
}

}  // namespace lsmdp
