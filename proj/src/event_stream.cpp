#include "maxfield/event_stream.hpp"

#include <cmath>
#include <stdexcept>

namespace maxfield {

MagnitudeStream::MagnitudeStream(double rate) : rate_(rate), log_rate_(std::log(rate)) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::invalid_argument("MagnitudeStream: rate must be > 0");
}

MagnitudeEvent MagnitudeStream::next(RngStream& rng) {
  gamma_ += rng.exponential();
  return {log_rate_ - std::log(gamma_), count_++};
}

double MagnitudeStream::magnitude_from_gamma(double gamma, double rate) {
  return std::log(rate) - std::log(gamma);
}

double Window::volume() const {
  if (lower.size() != upper.size() || lower.empty()) throw std::invalid_argument("Window: malformed bounds");
  double v = 1.0;
  for (std::size_t i = 0; i < lower.size(); ++i) v *= upper[i] - lower[i];
  return v;
}

namespace {
Window checked(Window w) {
  if (!(w.volume() > 0.0) || !std::isfinite(w.volume())) {
    throw std::invalid_argument("SpatialEventStream: window volume must be positive and finite");
  }
  return w;
}
}  // namespace

SpatialEventStream::SpatialEventStream(Window window, double multiplicity)
    : window_(checked(std::move(window))), magnitudes_(window_.volume() * multiplicity) {}

double SpatialEventStream::next_into(RngStream& rng, std::vector<double>& centre) {
  const double m = magnitudes_.next(rng).m;
  ++count_;
  centre.resize(window_.dimension());
  for (std::size_t i = 0; i < centre.size(); ++i) {
    centre[i] = window_.lower[i] + (window_.upper[i] - window_.lower[i]) * rng.uniform();
  }
  return m;
}

SpatialEvent SpatialEventStream::next(RngStream& rng) {
  SpatialEvent e;
  e.index = count_;
  e.m = next_into(rng, e.y.coords);
  return e;
}

bool should_stop(double m, double z_min, const StopRule& rule, std::uint64_t events_applied) {
  if (events_applied >= rule.max_events) return true;
  return m + rule.bound < z_min;
}

}  // namespace maxfield
