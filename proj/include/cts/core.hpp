#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cts {

// Input/config problems exit the CLI with code 1; everything else
// (I/O, divergence, internal failures) stays std::runtime_error -> code 2.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Column-per-variable series, row-major storage, immutable by convention
// once constructed.
struct TimeSeriesMatrix {
  std::vector<std::string> names;
  std::vector<double> values;  // T*N, row t contiguous
  long T = 0;
  long N = 0;

  double at(long t, long v) const { return values[t * N + v]; }
  double& at(long t, long v) { return values[t * N + v]; }
  std::vector<double> column(long v) const;
  long column_index(const std::string& name) const;
  void validate() const;
};

struct WindowSpec {
  long context_len = 30;
  long horizon = 10;
  long stride = 1;
};

struct ScaledWindow {
  std::vector<double> scaled;
  std::vector<double> ch_min;
  std::vector<double> ch_max;
};

TimeSeriesMatrix load_csv(const std::string& path);
void save_csv(const TimeSeriesMatrix& m, const std::string& path);

// Per-channel min-max onto [0,1]; a channel whose spread is <= eps_floor
// maps to constant 0.5 and inverts back to its constant.
ScaledWindow minmax_scale(const std::vector<double>& window, long n_channels,
                          double eps_floor = 0.0);
std::vector<double> minmax_invert(const ScaledWindow& w);

// Valid anchors are t in {C+delta, C+delta+stride, ..., T-H}.
long window_count(long T, long C, long H, long delta, long stride);

// Splittable seeding: one root seed, distinct tags per consumer.
uint64_t derive_seed(uint64_t seed, uint64_t tag);

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}
  double uniform(double lo, double hi);
  double normal(double mean = 0.0, double stddev = 1.0);
  long uniform_int(long lo, long hi);  // inclusive bounds
  template <class T>
  void shuffle(std::vector<T>& v) {
    std::shuffle(v.begin(), v.end(), eng_);
  }

 private:
  std::mt19937_64 eng_;
};

// 17-significant-digit form; reparses to the identical double.
std::string format_double(double x);
double parse_double(const std::string& s);

}  // namespace cts
