#include "maxfield/constructions.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/distributions/normal.hpp>

#include "maxfield/io.hpp"
#include "maxfield/parallel.hpp"

namespace maxfield {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double min_of(const std::vector<double>& z) { return *std::min_element(z.begin(), z.end()); }

std::vector<FieldRealization> empty_fields(std::span<const int> ks, std::size_t p) {
  std::vector<FieldRealization> out(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    out[j].z.assign(p, -kInf);
    out[j].k = ks[j];
  }
  return out;
}

void finish(std::vector<FieldRealization>& out, const RealizationMeta& meta) {
  for (auto& r : out) r.meta = meta;
}

}  // namespace

std::string_view to_string(Construction c) {
  switch (c) {
    case Construction::Theorem1: return "theorem1";
    case Construction::Theorem2: return "theorem2";
    case Construction::Theorem3: return "theorem3";
  }
  return "?";
}

Construction parse_construction(std::string_view name) {
  std::string lower(name);
  for (char& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  if (lower == "theorem1") return Construction::Theorem1;
  if (lower == "theorem2") return Construction::Theorem2;
  if (lower == "theorem3") return Construction::Theorem3;
  throw std::invalid_argument("unknown construction '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------

FieldSimulator::FieldSimulator(SiteSet sites, ModelConfig config)
    : sites_(std::move(sites)), config_(std::move(config)) {
  const auto& t = config_.truncation;
  if (t.max_events < 1) throw std::invalid_argument("max_events must be >= 1");
  if (!(t.epsilon > 0.0 && t.epsilon < 1.0)) throw std::invalid_argument("epsilon must lie in (0, 1)");
  if (!std::isfinite(config_.link.c) || !std::isfinite(config_.link.d)) {
    throw std::invalid_argument("link parameters c and d must be finite");
  }
}

void FieldSimulator::check_ks(std::span<const int> ks) {
  if (ks.empty()) throw std::invalid_argument("block_maxima: no block sizes");
  for (std::size_t j = 0; j < ks.size(); ++j) {
    if (ks[j] < 1) throw std::invalid_argument("block_maxima: block size must be >= 1");
    if (j > 0 && ks[j] <= ks[j - 1]) throw std::invalid_argument("block_maxima: block sizes must be ascending and distinct");
  }
}

FieldRealization FieldSimulator::block_maxima(int k, RngStream& rng) const {
  const int ks[1] = {k};
  return std::move(block_maxima(std::span<const int>(ks), rng).front());
}

nlohmann::json FieldSimulator::describe() const {
  const auto& t = config_.truncation;
  nlohmann::json j;
  j["construction"] = std::string(to_string(config_.construction));
  j["sites"] = sites_.size();
  j["dimension"] = sites_.dimension();
  j["c"] = config_.link.c;
  j["d"] = config_.link.d;
  j["max_events"] = t.max_events;
  return j;
}

// ---------------------------------------------------------------------------

double gaussian_contribution_bound(double variance, std::size_t sites, double epsilon) {
  // union bound over sites: P(max_i Y_i > B) <= p * P(Y_0 > B) = epsilon
  boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(boost::math::complement(normal, epsilon / static_cast<double>(sites)));
  return -0.5 * variance + std::sqrt(variance) * z;
}

GaussMaxSimulator::GaussMaxSimulator(SiteSet sites, ModelConfig config)
    : FieldSimulator(std::move(sites), std::move(config)) {
  if (config_.construction == Construction::Theorem3) {
    throw std::invalid_argument("GaussMaxSimulator: theorem3 needs ShapeMaxSimulator");
  }
  if (config_.construction == Construction::Theorem1 && config_.link.d != 0.0) {
    throw std::invalid_argument("theorem1 is the max-stable case and requires d = 0");
  }
  config_.gauss().validate();
  if (!(config_.truncation.delta_m >= 0.0)) throw std::invalid_argument("delta_m must be >= 0");
  bound_ = config_.truncation.bound ? *config_.truncation.bound
                                    : gaussian_contribution_bound(config_.variance, sites_.size(),
                                                                  config_.truncation.epsilon);
  cache_ = std::make_unique<FactorizationCache>(sites_, config_.gauss(), config_.truncation.delta_m);
}

std::vector<FieldRealization> GaussMaxSimulator::block_maxima(std::span<const int> ks, RngStream& rng) const {
  check_ks(ks);
  const std::size_t p = sites_.size();
  const int top = ks.back();
  const bool labelled = ks.size() > 1;
  const double mean = config_.gauss().mean();
  const StopRule rule{bound_, config_.truncation.max_events};

  auto out = empty_fields(ks, p);
  MagnitudeStream stream(static_cast<double>(top));
  std::vector<double> y(p);
  Factor scratch;
  RealizationMeta meta;

  while (true) {
    const double m = stream.next(rng).m;
    if (should_stop(m, min_of(out.front().z), rule, meta.events)) {
      meta.cap_hit = meta.events >= rule.max_events;
      meta.last_magnitude = m;
      break;
    }
    const auto label = labelled ? static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(top))) : 0;
    simulate_gauss(cache_->get(m, scratch), mean, rng, y);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      if (label >= ks[j]) continue;
      auto& z = out[j].z;
      for (std::size_t i = 0; i < p; ++i) z[i] = std::max(z[i], m + y[i]);
    }
    ++meta.events;
  }
  finish(out, meta);
  return out;
}

nlohmann::json GaussMaxSimulator::describe() const {
  auto j = FieldSimulator::describe();
  const auto& t = config_.truncation;
  j["variance"] = config_.variance;
  j["mean"] = config_.gauss().mean();
  j["epsilon"] = t.epsilon;
  j["contribution_bound"] = bound_;
  j["delta_m"] = t.delta_m;
  const auto stats = cache_->stats();
  // hit and miss counts depend on thread scheduling and are left out
  j["cache"] = {{"enabled", cache_->enabled()}, {"entries", stats.entries}, {"max_jitter", stats.max_jitter}};
  return j;
}

// ---------------------------------------------------------------------------

double shape_margin_location(const MagnitudeLink& link) {
  if (!(link.d < 1.0)) throw std::invalid_argument("shape_margin_location: needs d < 1");
  return -std::log1p(-link.d);
}

ShapeMaxSimulator::ShapeMaxSimulator(SiteSet sites, ModelConfig config)
    : FieldSimulator(std::move(sites), std::move(config)) {
  if (config_.construction != Construction::Theorem3) {
    throw std::invalid_argument("ShapeMaxSimulator: construction must be theorem3");
  }
  if (sites_.dimension() != 1) {
    throw std::invalid_argument("theorem3 shape functions are one-dimensional; sites must be in R^1");
  }
  const auto& link = config_.link;
  const auto& t = config_.truncation;

  if (link.d >= 1.0) {
    throw SimulationRefused("theorem3 refused: d >= 1 makes m + log f(0; s(m)) non-increasing in m, "
                            "so the event stream cannot be truncated");
  }
  if (link.d > 0.0 && !t.magnitude_ceiling) {
    throw SimulationRefused("theorem3 refused: d > 0 makes the scale s grow without bound with the "
                            "magnitude; a Monte Carlo simulation needs an unbounded window. "
                            "Supply an explicit magnitude ceiling to simulate a truncated model");
  }
  if (!(t.floor_margin > 0.0)) throw std::invalid_argument("floor_margin must be > 0");

  if (link.d < 0.0) {
    const double z_floor = shape_margin_location(link) - t.floor_margin;
    const double peak1 = peak_log_density(config_.family, 1.0);
    m_floor_ = (z_floor - peak1 - link.d * link.c) / (1.0 - link.d);
    s_max_ = link.scale(m_floor_);
  } else if (link.d > 0.0) {
    s_max_ = link.scale(*t.magnitude_ceiling);
  } else {
    s_max_ = 1.0;
  }

  const double min_buffer = 6.0 * s_max_;
  double buffer = 0.0;
  if (t.buffer) {
    buffer = *t.buffer;
  } else {
    if (t.buffer_sd < 6.0) {
      throw SimulationRefused("theorem3 refused: buffer of " + format_double(t.buffer_sd) +
                              " scales is below the 6-scale edge-effect guard");
    }
    buffer = t.buffer_sd * s_max_;
  }
  if (!(buffer >= min_buffer)) {
    throw SimulationRefused("theorem3 refused: window buffer " + format_double(buffer) +
                            " is smaller than 6 x the largest admissible scale (" + format_double(min_buffer) + ")");
  }

  double lo = kInf, hi = -kInf;
  for (const auto& s : sites_.sites()) {
    lo = std::min(lo, s.coords[0]);
    hi = std::max(hi, s.coords[0]);
  }
  window_ = Window{{lo - buffer}, {hi + buffer}};
}

std::vector<FieldRealization> ShapeMaxSimulator::block_maxima(std::span<const int> ks, RngStream& rng) const {
  check_ks(ks);
  const std::size_t p = sites_.size();
  const int top = ks.back();
  const bool labelled = ks.size() > 1;
  const auto& link = config_.link;
  const auto family = config_.family;
  const auto& t = config_.truncation;
  const double ceiling = t.magnitude_ceiling ? *t.magnitude_ceiling : kInf;

  std::vector<double> xs(p);
  for (std::size_t i = 0; i < p; ++i) xs[i] = sites_[i].coords[0];

  auto out = empty_fields(ks, p);
  SpatialEventStream stream(window_, static_cast<double>(top));
  std::vector<double> centre(1);
  RealizationMeta meta;

  while (true) {
    const double m = stream.next_into(rng, centre);
    if (m > ceiling) {
      ++meta.skipped_above_ceiling;
      continue;
    }
    const double s = link.scale(m);
    // m + peak(s(m)) is increasing in m for d < 1, so the current event's
    // peak bounds every later event as well
    const StopRule rule{peak_log_density(family, s), t.max_events};
    if (should_stop(m, min_of(out.front().z), rule, meta.events)) {
      meta.cap_hit = meta.events >= rule.max_events;
      meta.last_magnitude = m;
      break;
    }
    if (m < m_floor_) {
      meta.floor_hit = true;
      meta.last_magnitude = m;
      break;
    }
    const auto label = labelled ? static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(top))) : 0;
    for (std::size_t j = 0; j < ks.size(); ++j) {
      if (label >= ks[j]) continue;
      auto& z = out[j].z;
      for (std::size_t i = 0; i < p; ++i) z[i] = std::max(z[i], m + log_density(family, xs[i] - centre[0], s));
    }
    ++meta.events;
  }
  finish(out, meta);
  return out;
}

nlohmann::json ShapeMaxSimulator::describe() const {
  auto j = FieldSimulator::describe();
  const auto& t = config_.truncation;
  j["family"] = std::string(to_string(config_.family));
  j["window"] = {window_.lower[0], window_.upper[0]};
  j["max_scale"] = s_max_;
  j["buffer_sd"] = t.buffer_sd;
  if (t.buffer) j["buffer"] = *t.buffer;
  j["floor_margin"] = t.floor_margin;
  j["magnitude_floor"] = std::isfinite(m_floor_) ? nlohmann::json(m_floor_) : nlohmann::json(nullptr);
  j["magnitude_ceiling"] = t.magnitude_ceiling ? nlohmann::json(*t.magnitude_ceiling) : nlohmann::json(nullptr);
  if (config_.link.d < 1.0) j["margin_location"] = shape_margin_location(config_.link);
  return j;
}

std::unique_ptr<FieldSimulator> make_simulator(const SiteSet& sites, const ModelConfig& config) {
  if (config.construction == Construction::Theorem3) return std::make_unique<ShapeMaxSimulator>(sites, config);
  return std::make_unique<GaussMaxSimulator>(sites, config);
}

// ---------------------------------------------------------------------------

std::vector<double> MaximaSample::column(std::size_t s) const {
  std::vector<double> col(rows);
  for (std::size_t r = 0; r < rows; ++r) col[r] = values[r * sites + s];
  return col;
}

namespace {

SampleDiagnostics summarize(const std::vector<RealizationMeta>& metas) {
  SampleDiagnostics d;
  d.min_last_magnitude = kInf;
  for (const auto& m : metas) {
    d.total_events += m.events;
    d.max_events = std::max(d.max_events, m.events);
    d.cap_hits += m.cap_hit ? 1 : 0;
    d.floor_hits += m.floor_hit ? 1 : 0;
    d.skipped_above_ceiling += m.skipped_above_ceiling;
    d.min_last_magnitude = std::min(d.min_last_magnitude, m.last_magnitude);
  }
  return d;
}

}  // namespace

MaximaSample simulate_sample(const FieldSimulator& sim, int k, std::size_t n, std::uint64_t seed,
                             std::uint64_t first_replicate, unsigned threads) {
  if (n < 1) throw std::invalid_argument("simulate_sample: n must be >= 1");
  MaximaSample sample;
  sample.rows = n;
  sample.sites = sim.sites().size();
  sample.k = k;
  sample.seed = seed;
  sample.first_replicate = first_replicate;
  sample.values.resize(n * sample.sites);
  std::vector<RealizationMeta> metas(n);

  parallel_for(n, threads, [&](std::size_t r) {
    RngStream rng(seed, first_replicate + r);
    FieldRealization field = sim.block_maxima(k, rng);
    std::copy(field.z.begin(), field.z.end(), sample.values.begin() + static_cast<std::ptrdiff_t>(r * sample.sites));
    metas[r] = field.meta;
  });
  sample.diagnostics = summarize(metas);
  return sample;
}

std::vector<MaximaSample> simulate_coupled_samples(const FieldSimulator& sim, std::span<const int> ks,
                                                   std::size_t n, std::uint64_t seed, unsigned threads) {
  if (n < 1) throw std::invalid_argument("simulate_coupled_samples: n must be >= 1");
  const std::size_t p = sim.sites().size();
  std::vector<MaximaSample> samples(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    samples[j].rows = n;
    samples[j].sites = p;
    samples[j].k = ks[j];
    samples[j].seed = seed;
    samples[j].values.resize(n * p);
  }
  std::vector<RealizationMeta> metas(n);
  parallel_for(n, threads, [&](std::size_t r) {
    RngStream rng(seed, r);
    auto fields = sim.block_maxima(ks, rng);
    for (std::size_t j = 0; j < ks.size(); ++j) {
      std::copy(fields[j].z.begin(), fields[j].z.end(), samples[j].values.begin() + static_cast<std::ptrdiff_t>(r * p));
    }
    metas[r] = fields.front().meta;
  });
  const auto diag = summarize(metas);
  for (auto& s : samples) s.diagnostics = diag;
  return samples;
}

std::string sample_to_csv(const MaximaSample& sample) {
  std::string out = "rep,k";
  for (std::size_t s = 0; s < sample.sites; ++s) out += ",site_" + std::to_string(s);
  out += '\n';
  for (std::size_t r = 0; r < sample.rows; ++r) {
    out += std::to_string(sample.first_replicate + r);
    out += ',';
    out += std::to_string(sample.k);
    for (std::size_t s = 0; s < sample.sites; ++s) {
      out += ',';
      out += format_double(sample(r, s));
    }
    out += '\n';
  }
  return out;
}

nlohmann::json sample_metadata(const MaximaSample& sample, const FieldSimulator& sim) {
  nlohmann::json j;
  j["model"] = sim.describe();
  j["k"] = sample.k;
  j["n"] = sample.rows;
  j["seed"] = sample.seed;
  j["first_replicate"] = sample.first_replicate;
  const auto& d = sample.diagnostics;
  nlohmann::json trunc = {{"total_events", d.total_events},
                          {"max_events_per_replicate", d.max_events},
                          {"mean_events_per_replicate", static_cast<double>(d.total_events) / static_cast<double>(sample.rows)},
                          {"cap_hits", d.cap_hits},
                          {"floor_hits", d.floor_hits},
                          {"skipped_above_ceiling", d.skipped_above_ceiling},
                          {"lowest_truncation_magnitude", d.min_last_magnitude}};
  if (const auto* g = dynamic_cast<const GaussMaxSimulator*>(&sim)) {
    trunc["correlation_perturbation_bound"] = g->cache().perturbation_bound(d.min_last_magnitude);
  }
  j["truncation"] = trunc;
  return j;
}

}  // namespace maxfield
