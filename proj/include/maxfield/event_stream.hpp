#pragma once

#include <cstdint>
#include <vector>

#include "maxfield/geometry.hpp"
#include "maxfield/rng.hpp"

namespace maxfield {

struct MagnitudeEvent {
  double m = 0.0;
  std::uint64_t index = 0;
};

/// Magnitudes of a Poisson process with intensity rate * exp(-m) dm,
/// produced in decreasing order: Gamma_i = Gamma_{i-1} + E_i and
/// m_i = log(rate) - log(Gamma_i). The number of events above u is
/// Poisson with mean rate * exp(-u).
class MagnitudeStream {
 public:
  explicit MagnitudeStream(double rate = 1.0);

  MagnitudeEvent next(RngStream& rng);
  double gamma() const { return gamma_; }
  double rate() const { return rate_; }

  static double magnitude_from_gamma(double gamma, double rate = 1.0);

 private:
  double rate_;
  double log_rate_;
  double gamma_ = 0.0;
  std::uint64_t count_ = 0;
};

/// Axis-aligned box holding the event centres.
struct Window {
  std::vector<double> lower;
  std::vector<double> upper;

  double volume() const;
  std::size_t dimension() const { return lower.size(); }
};

struct SpatialEvent {
  Site y;
  double m = 0.0;
  std::uint64_t index = 0;
};

/// Events of a Poisson process on window x R with intensity
/// multiplicity * dy * exp(-m) dm: magnitudes m_i = -log(Gamma_i / (|W| multiplicity)),
/// centres uniform on the window.
class SpatialEventStream {
 public:
  explicit SpatialEventStream(Window window, double multiplicity = 1.0);

  SpatialEvent next(RngStream& rng);
  /// Same as next() but writes the centre into an existing buffer.
  double next_into(RngStream& rng, std::vector<double>& centre);
  const Window& window() const { return window_; }

 private:
  Window window_;
  MagnitudeStream magnitudes_;
  std::uint64_t count_ = 0;
};

/// Truncation of an infinite event stream.
struct StopRule {
  double bound = 0.0;  ///< upper bound B on one event's additive term at any site
  std::uint64_t max_events = 1'000'000;
};

/// True iff no further event can raise the running minimum (m + B < z_min)
/// or the event cap has been reached.
bool should_stop(double m, double z_min, const StopRule& rule, std::uint64_t events_applied);

}  // namespace maxfield
