#include "maxfield/gauss_field.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace maxfield {

void GaussConfig::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw std::invalid_argument("GaussConfig: variance must be > 0");
  if (!std::isfinite(link.c) || !std::isfinite(link.d)) throw std::invalid_argument("GaussConfig: link parameters must be finite");
}

double correlation(double h, double m, const MagnitudeLink& link) {
  if (h < 0.0) throw std::invalid_argument("correlation: negative distance");
  if (h == 0.0) return 1.0;
  return std::exp(-h / link.scale(m));
}

Eigen::MatrixXd build_covariance(const SiteSet& sites, double m, const GaussConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = cfg.variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      cov(i, j) = cov(j, i) = cfg.variance * correlation(sites.distance(i, j), m, cfg.link);
    }
  }
  return cov;
}

Factor factorize_covariance(const Eigen::MatrixXd& cov) {
  const double scale = cov.diagonal().mean();
  const auto n = cov.rows();
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};
  for (double jitter = 1e-12; jitter <= 1.0000001e-6; jitter *= 10.0) {
    llt.compute(cov + jitter * scale * Eigen::MatrixXd::Identity(n, n));
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
  }
  throw FactorizationError("covariance matrix is not positive definite even with jitter 1e-6");
}

namespace {
constexpr double kSlotHalfRange = 64.0;
constexpr std::size_t kMaxSlots = std::size_t{1} << 22;
}  // namespace

FactorizationCache::FactorizationCache(const SiteSet& sites, GaussConfig cfg, double delta_m)
    : distances_(sites.distances()), cfg_(cfg), delta_m_(delta_m), h_max_(sites.max_distance()) {
  cfg_.validate();
  if (!(delta_m >= 0.0) || !std::isfinite(delta_m)) throw std::invalid_argument("FactorizationCache: delta_m must be >= 0");
  if (!enabled()) return;
  if (!cfg_.link.active()) {
    slot_lo_ = 0;
    slot_count_ = 1;
  } else {
    const double half = std::ceil(kSlotHalfRange / delta_m_);
    const std::size_t want = 2 * static_cast<std::size_t>(std::min(half, double(kMaxSlots))) + 1;
    slot_count_ = std::min(want, kMaxSlots);
    slot_lo_ = -static_cast<std::int64_t>(slot_count_ / 2);
  }
  slots_ = std::make_unique<std::atomic<Factor*>[]>(slot_count_);
  for (std::size_t i = 0; i < slot_count_; ++i) slots_[i].store(nullptr, std::memory_order_relaxed);
}

FactorizationCache::~FactorizationCache() {
  for (std::size_t i = 0; i < slot_count_; ++i) delete slots_[i].load(std::memory_order_relaxed);
}

std::int64_t FactorizationCache::key(double m) const {
  if (!cfg_.link.active()) return 0;
  return static_cast<std::int64_t>(std::llround(m / delta_m_));
}

double FactorizationCache::quantize(double m) const {
  if (!enabled() || !cfg_.link.active()) return m;
  return static_cast<double>(key(m)) * delta_m_;
}

double FactorizationCache::perturbation_bound(double m) const {
  if (!enabled() || !cfg_.link.active()) return 0.0;
  const double d = std::abs(cfg_.link.d);
  return h_max_ * d * delta_m_ * std::exp(d * std::abs(m - cfg_.link.c));
}

void FactorizationCache::note_jitter(double j) const {
  double cur = max_jitter_.load(std::memory_order_relaxed);
  while (j > cur && !max_jitter_.compare_exchange_weak(cur, j, std::memory_order_relaxed)) {
  }
}

Factor FactorizationCache::compute(double m) const {
  const auto n = distances_.rows();
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = cfg_.variance;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      cov(i, j) = cov(j, i) = cfg_.variance * correlation(distances_(i, j), m, cfg_.link);
    }
  }
  Factor f = factorize_covariance(cov);
  note_jitter(f.jitter);
  return f;
}

const Factor& FactorizationCache::get(double m, Factor& scratch) const {
  if (!enabled()) {
    misses_.fetch_add(1, std::memory_order_relaxed);
    scratch = compute(m);
    return scratch;
  }
  const std::int64_t k = key(m);
  const std::int64_t idx = k - slot_lo_;
  if (idx >= 0 && static_cast<std::size_t>(idx) < slot_count_) {
    auto& slot = slots_[static_cast<std::size_t>(idx)];
    if (Factor* f = slot.load(std::memory_order_acquire)) {
      hits_.fetch_add(1, std::memory_order_relaxed);
      return *f;
    }
    misses_.fetch_add(1, std::memory_order_relaxed);
    auto fresh = std::make_unique<Factor>(compute(static_cast<double>(k) * delta_m_));
    Factor* expected = nullptr;
    if (slot.compare_exchange_strong(expected, fresh.get(), std::memory_order_acq_rel)) {
      entries_.fetch_add(1, std::memory_order_relaxed);
      return *fresh.release();
    }
    return *expected;
  }

  std::lock_guard lock(overflow_mutex_);
  auto it = overflow_.find(k);
  if (it != overflow_.end()) {
    hits_.fetch_add(1, std::memory_order_relaxed);
    return *it->second;
  }
  misses_.fetch_add(1, std::memory_order_relaxed);
  entries_.fetch_add(1, std::memory_order_relaxed);
  auto [pos, inserted] =
      overflow_.emplace(k, std::make_unique<Factor>(compute(static_cast<double>(k) * delta_m_)));
  return *pos->second;
}

FactorizationCache::Stats FactorizationCache::stats() const {
  return {hits_.load(), misses_.load(), entries_.load(), max_jitter_.load()};
}

void simulate_gauss(const Factor& factor, double mean, RngStream& rng, std::span<double> out) {
  const auto n = factor.lower.rows();
  // eps is consumed in site order
  double eps[64];
  std::unique_ptr<double[]> heap;
  double* e = eps;
  if (n > 64) {
    heap = std::make_unique<double[]>(static_cast<std::size_t>(n));
    e = heap.get();
  }
  for (Eigen::Index i = 0; i < n; ++i) e[i] = rng.normal();
  const double* L = factor.lower.data();
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = mean;
  // L is column-major and lower triangular
  for (Eigen::Index j = 0; j < n; ++j) {
    const double ej = e[j];
    const double* col = L + j * n;
    for (Eigen::Index i = j; i < n; ++i) out[static_cast<std::size_t>(i)] += col[i] * ej;
  }
}

Eigen::VectorXd simulate_gauss_field(const SiteSet& sites, double m, const GaussConfig& cfg, RngStream& rng) {
  const Factor f = factorize_covariance(build_covariance(sites, m, cfg));
  Eigen::VectorXd y(static_cast<Eigen::Index>(sites.size()));
  simulate_gauss(f, cfg.mean(), rng, std::span<double>(y.data(), sites.size()));
  return y;
}

}  // namespace maxfield
