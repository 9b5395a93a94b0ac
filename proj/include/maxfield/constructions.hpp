#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "maxfield/event_stream.hpp"
#include "maxfield/gauss_field.hpp"
#include "maxfield/geometry.hpp"
#include "maxfield/magnitude_link.hpp"
#include "maxfield/rng.hpp"
#include "maxfield/shape_fields.hpp"

namespace maxfield {

/// theorem1: max-stable, Gaussian Y independent of m.
/// theorem2: Gaussian Y with magnitude-dependent correlation length.
/// theorem3: shifted log-densities with magnitude-dependent standard deviation.
enum class Construction { Theorem1, Theorem2, Theorem3 };

std::string_view to_string(Construction c);
Construction parse_construction(std::string_view name);

/// The simulator will not run this configuration (unbounded scales, a
/// window too small for the largest scale, ...). The message names the guard.
class SimulationRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TruncationConfig {
  /// Gaussian constructions: per-event probability that Y exceeds the
  /// bound B at some site. B = mean + sd * Phi^{-1}(1 - epsilon / p).
  double epsilon = 1e-6;
  /// Overrides the epsilon-derived bound when set.
  std::optional<double> bound;
  std::uint64_t max_events = 1'000'000;
  /// Magnitude quantization of the factorization cache; 0 disables it.
  double delta_m = 0.01;
  /// Shape construction: window buffer in units of the largest scale.
  double buffer_sd = 13.0;
  /// Shape construction: absolute buffer, overrides buffer_sd.
  std::optional<double> buffer;
  /// Shape construction: events above this magnitude are dropped. Required when d > 0.
  std::optional<double> magnitude_ceiling;
  /// Shape construction: the stream is cut at the magnitude whose peak
  /// contribution is floor_margin below the margin location. Bounds the
  /// largest scale when d < 0.
  double floor_margin = 4.0;
};

struct ModelConfig {
  Construction construction = Construction::Theorem2;
  double variance = 1.0;                    // Gaussian constructions
  ShapeFamily family = ShapeFamily::Gauss;  // shape construction
  MagnitudeLink link;
  TruncationConfig truncation;

  GaussConfig gauss() const { return {variance, link}; }
};

struct RealizationMeta {
  std::uint64_t events = 0;  ///< events applied to the field
  std::uint64_t skipped_above_ceiling = 0;
  bool cap_hit = false;
  bool floor_hit = false;
  double last_magnitude = 0.0;  ///< magnitude of the first event not applied
};

/// Z_k at every site of a SiteSet.
struct FieldRealization {
  std::vector<double> z;
  int k = 1;
  RealizationMeta meta;
};

class FieldSimulator {
 public:
  FieldSimulator(SiteSet sites, ModelConfig config);
  virtual ~FieldSimulator() = default;

  const SiteSet& sites() const { return sites_; }
  const ModelConfig& config() const { return config_; }

  /// Block maxima for each k in ks (ascending, distinct, >= 1).
  ///
  /// The componentwise maximum of k independent fields is driven by the
  /// superposition of k independent event streams, which is one stream with
  /// intensity k exp(-m) dm. Each event carries a block label uniform on
  /// [0, K), K = max(ks); Z_k uses the events labelled < k, so all
  /// requested k share one stream and Z_k is nondecreasing in k.
  virtual std::vector<FieldRealization> block_maxima(std::span<const int> ks, RngStream& rng) const = 0;

  FieldRealization block_maxima(int k, RngStream& rng) const;
  FieldRealization realize(RngStream& rng) const { return block_maxima(1, rng); }

  /// Configuration and truncation settings in effect.
  virtual nlohmann::json describe() const;

 protected:
  static void check_ks(std::span<const int> ks);

  SiteSet sites_;
  ModelConfig config_;
};

/// Theorem 1 and 2: Z(x) = max over events of m + Y_m(x).
class GaussMaxSimulator final : public FieldSimulator {
 public:
  GaussMaxSimulator(SiteSet sites, ModelConfig config);

  using FieldSimulator::block_maxima;
  std::vector<FieldRealization> block_maxima(std::span<const int> ks, RngStream& rng) const override;
  nlohmann::json describe() const override;

  double contribution_bound() const { return bound_; }
  const FactorizationCache& cache() const { return *cache_; }

 private:
  double bound_;
  std::unique_ptr<FactorizationCache> cache_;
};

/// Theorem 3 in R^1: Z(x) = max over events (y, m) of m + log f(x - y; s(m)).
class ShapeMaxSimulator final : public FieldSimulator {
 public:
  ShapeMaxSimulator(SiteSet sites, ModelConfig config);

  using FieldSimulator::block_maxima;
  std::vector<FieldRealization> block_maxima(std::span<const int> ks, RngStream& rng) const override;
  nlohmann::json describe() const override;

  const Window& window() const { return window_; }
  double max_scale() const { return s_max_; }
  double magnitude_floor() const { return m_floor_; }

 private:
  Window window_;
  double s_max_ = 1.0;
  double m_floor_ = -std::numeric_limits<double>::infinity();
};

/// Throws SimulationRefused or std::invalid_argument on a bad configuration.
std::unique_ptr<FieldSimulator> make_simulator(const SiteSet& sites, const ModelConfig& config);

/// Contribution bound of the Gaussian constructions for p sites.
double gaussian_contribution_bound(double variance, std::size_t sites, double epsilon);

/// Margin location of the shape construction, -log(1 - d) for d < 1.
double shape_margin_location(const MagnitudeLink& link);

struct SampleDiagnostics {
  std::uint64_t total_events = 0;
  std::uint64_t max_events = 0;
  std::uint64_t cap_hits = 0;
  std::uint64_t floor_hits = 0;
  std::uint64_t skipped_above_ceiling = 0;
  double min_last_magnitude = 0.0;
};

/// n replicates x p sites of Z_k, row-major. Replicate r used stream
/// (seed, first_replicate + r).
struct MaximaSample {
  std::size_t rows = 0;
  std::size_t sites = 0;
  int k = 1;
  std::uint64_t seed = 0;
  std::uint64_t first_replicate = 0;
  std::vector<double> values;
  SampleDiagnostics diagnostics;

  double operator()(std::size_t r, std::size_t s) const { return values[r * sites + s]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * sites, sites}; }
  std::vector<double> column(std::size_t s) const;
};

MaximaSample simulate_sample(const FieldSimulator& sim, int k, std::size_t n, std::uint64_t seed,
                             std::uint64_t first_replicate = 0, unsigned threads = 0);

/// One sample per k from shared per-replicate streams (see block_maxima).
std::vector<MaximaSample> simulate_coupled_samples(const FieldSimulator& sim, std::span<const int> ks,
                                                   std::size_t n, std::uint64_t seed, unsigned threads = 0);

/// CSV with header rep,k,site_0,...,site_{p-1}.
std::string sample_to_csv(const MaximaSample& sample);
nlohmann::json sample_metadata(const MaximaSample& sample, const FieldSimulator& sim);

}  // namespace maxfield
