#pragma once

// Reproducible demand-trace generators. All randomness flows through one
// mt19937_64 and a fixed bits-to-double mapping, so a (kind, parameters,
// seed) triple produces the same trace on every platform. The standard
// distribution adapters are implementation-defined and would break that.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace resmove {

enum class TraceKind { uniform, zipf, hotspot_shift };

inline const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::uniform: return "uniform";
    case TraceKind::zipf: return "zipf";
    case TraceKind::hotspot_shift: return "hotspot-shift";
  }
  return "?";
}

inline TraceKind trace_kind_from_name(const std::string& name) {
  if (name == "uniform") return TraceKind::uniform;
  if (name == "zipf") return TraceKind::zipf;
  if (name == "hotspot-shift") return TraceKind::hotspot_shift;
  throw std::invalid_argument("unknown trace kind: " + name);
}

struct TraceSpec {
  TraceKind kind = TraceKind::uniform;
  int n = 0;
  long long length = 0;
  std::uint64_t seed = 0;
  double zipf_exponent = 1.0;  // zipf only
  long long period = 1;        // hotspot-shift: demands before the hot node moves
  double hot_weight = 0.9;     // hotspot-shift: probability of hitting the hot node
};

namespace detail {

// Uniform double in [0, 1) from the top 53 bits of the engine's output.
inline double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline int uniform_node(std::mt19937_64& rng, int n) {
  int v = static_cast<int>(unit_double(rng) * n);
  return v < n ? v : n - 1;
}

}  // namespace detail

inline std::vector<int> generate_trace(const TraceSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("generate_trace: n must be >= 1");
  if (spec.length < 0)
    throw std::invalid_argument("generate_trace: length must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::vector<int> trace;
  trace.reserve(static_cast<size_t>(spec.length));

  switch (spec.kind) {
    case TraceKind::uniform: {
      for (long long i = 0; i < spec.length; ++i)
        trace.push_back(detail::uniform_node(rng, spec.n));
      break;
    }
    case TraceKind::zipf: {
      if (!(spec.zipf_exponent > 0.0))
        throw std::invalid_argument("generate_trace: zipf exponent must be > 0");
      // Inverse-CDF sampling over ranks 1..n; node id = rank - 1.
      std::vector<double> cdf(static_cast<size_t>(spec.n));
      double total = 0.0;
      for (int r = 1; r <= spec.n; ++r) {
        total += std::pow(static_cast<double>(r), -spec.zipf_exponent);
        cdf[static_cast<size_t>(r) - 1] = total;
      }
      for (long long i = 0; i < spec.length; ++i) {
        double u = detail::unit_double(rng) * total;
        int lo = 0, hi = spec.n - 1;
        while (lo < hi) {
          int mid = (lo + hi) / 2;
          if (cdf[static_cast<size_t>(mid)] <= u)
            lo = mid + 1;
          else
            hi = mid;
        }
        trace.push_back(lo);
      }
      break;
    }
    case TraceKind::hotspot_shift: {
      if (spec.period < 1)
        throw std::invalid_argument("generate_trace: period must be >= 1");
      if (!(spec.hot_weight >= 0.0 && spec.hot_weight <= 1.0))
        throw std::invalid_argument("generate_trace: hot weight outside [0, 1]");
      for (long long i = 0; i < spec.length; ++i) {
        int hot = static_cast<int>((i / spec.period) % spec.n);
        if (detail::unit_double(rng) < spec.hot_weight)
          trace.push_back(hot);
        else
          trace.push_back(detail::uniform_node(rng, spec.n));
      }
      break;
    }
  }
  return trace;
}

}  // namespace resmove
