#include "cts/core.hpp"

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace cts {

std::vector<double> TimeSeriesMatrix::column(long v) const {
  std::vector<double> out(static_cast<size_t>(T));
  for (long t = 0; t < T; ++t) out[t] = at(t, v);
  return out;
}

long TimeSeriesMatrix::column_index(const std::string& name) const {
  for (long v = 0; v < N; ++v)
    if (names[v] == name) return v;
  throw validation_error("unknown variable name: " + name);
}

void TimeSeriesMatrix::validate() const {
  if (T < 1 || N < 1) throw validation_error("matrix must have T >= 1, N >= 1");
  if (static_cast<long>(names.size()) != N)
    throw validation_error("name count does not match column count");
  if (static_cast<long>(values.size()) != T * N)
    throw validation_error("value buffer does not match T*N");
  std::unordered_set<std::string> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second)
      throw validation_error("duplicate variable name: " + n);
  for (long t = 0; t < T; ++t)
    for (long v = 0; v < N; ++v)
      if (!std::isfinite(at(t, v)))
        throw validation_error("non-finite value at row " + std::to_string(t) +
                               ", column " + std::to_string(v));
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

}  // namespace

TimeSeriesMatrix load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw validation_error(path + ": empty file");
  TimeSeriesMatrix m;
  m.names = split_line(line);
  m.N = static_cast<long>(m.names.size());
  long row = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.eof()) break;
    auto cells = split_line(line);
    if (static_cast<long>(cells.size()) != m.N)
      throw validation_error(path + ": row " + std::to_string(row + 1) +
                             " has " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(m.N));
    for (long v = 0; v < m.N; ++v) {
      double x;
      const auto& s = cells[v];
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
      if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(x))
        throw validation_error(path + ": unparseable or non-finite cell at row " +
                               std::to_string(row + 1) + ", column " +
                               m.names[v]);
      m.values.push_back(x);
    }
    ++row;
  }
  if (row == 0) throw validation_error(path + ": no data rows");
  m.T = row;
  m.validate();
  return m;
}

void save_csv(const TimeSeriesMatrix& m, const std::string& path) {
  m.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (long v = 0; v < m.N; ++v) {
    if (v) out << ',';
    out << m.names[v];
  }
  out << '\n';
  for (long t = 0; t < m.T; ++t) {
    for (long v = 0; v < m.N; ++v) {
      if (v) out << ',';
      out << format_double(m.at(t, v));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

ScaledWindow minmax_scale(const std::vector<double>& window, long n_channels,
                          double eps_floor) {
  if (n_channels < 1 || window.size() % static_cast<size_t>(n_channels) != 0)
    throw validation_error("window length not divisible by channel count");
  const long len = static_cast<long>(window.size()) / n_channels;
  ScaledWindow out;
  out.scaled.resize(window.size());
  out.ch_min.resize(n_channels);
  out.ch_max.resize(n_channels);
  for (long c = 0; c < n_channels; ++c) {
    double lo = window[c * len], hi = window[c * len];
    for (long k = 1; k < len; ++k) {
      lo = std::min(lo, window[c * len + k]);
      hi = std::max(hi, window[c * len + k]);
    }
    out.ch_min[c] = lo;
    out.ch_max[c] = hi;
    if (hi - lo <= eps_floor) {
      for (long k = 0; k < len; ++k) out.scaled[c * len + k] = 0.5;
    } else {
      for (long k = 0; k < len; ++k) {
        double s = (window[c * len + k] - lo) / (hi - lo);
        out.scaled[c * len + k] = std::clamp(s, 0.0, 1.0);
      }
    }
  }
  return out;
}

std::vector<double> minmax_invert(const ScaledWindow& w) {
  const long n_channels = static_cast<long>(w.ch_min.size());
  const long len = static_cast<long>(w.scaled.size()) / n_channels;
  std::vector<double> out(w.scaled.size());
  for (long c = 0; c < n_channels; ++c) {
    const double lo = w.ch_min[c], hi = w.ch_max[c];
    for (long k = 0; k < len; ++k)
      out[c * len + k] = lo + w.scaled[c * len + k] * (hi - lo);
  }
  return out;
}

long window_count(long T, long C, long H, long delta, long stride) {
  if (T < 0 || C < 0 || H < 0 || delta < 0 || stride < 1)
    throw validation_error("window_count arguments out of range");
  if (T < C + H + delta) return 0;
  return (T - H - C - delta) / stride + 1;
}

uint64_t derive_seed(uint64_t seed, uint64_t tag) {
  uint64_t z = seed * 6364136223846793005ULL + tag * 1442695040888963407ULL;
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> d(lo, hi);
  return d(eng_);
}

double Rng::normal(double mean, double stddev) {
  std::normal_distribution<double> d(mean, stddev);
  return d(eng_);
}

long Rng::uniform_int(long lo, long hi) {
  std::uniform_int_distribution<long> d(lo, hi);
  return d(eng_);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s) {
  double x;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw validation_error("unparseable number: " + s);
  return x;
}

}  // namespace cts
