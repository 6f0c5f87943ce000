#include "rchow/numeric.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <string>

#include <boost/math/distributions/normal.hpp>

#include "rchow/error.hpp"

namespace rchow {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SizeCapExceeded: return "SizeCapExceeded";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NegativeQuadraticForm: return "NegativeQuadraticForm";
    case ErrorKind::NonMultilinearBasis: return "NonMultilinearBasis";
    case ErrorKind::UnknownFamily: return "UnknownFamily";
    case ErrorKind::IntegralDiverges: return "IntegralDiverges";
    case ErrorKind::NotPSD: return "NotPSD";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::UnknownStrategy: return "UnknownStrategy";
    case ErrorKind::InvalidHypothesis: return "InvalidHypothesis";
    case ErrorKind::AllPointsPruned: return "AllPointsPruned";
    case ErrorKind::BasisMismatch: return "BasisMismatch";
    case ErrorKind::OracleFailure: return "OracleFailure";
    case ErrorKind::AcceptanceTooLow: return "AcceptanceTooLow";
    case ErrorKind::ZeroChowVector: return "ZeroChowVector";
    case ErrorKind::CoverTooLarge: return "CoverTooLarge";
    case ErrorKind::EmptyHoldout: return "EmptyHoldout";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

double normal_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi); }

double normal_cdf(double t) { return 0.5 * std::erfc(-t / std::sqrt(2.0)); }

double normal_quantile(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::InvalidArgument, "normal_quantile needs p in (0,1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632BE59BD9B4E019ULL));
}

namespace {

std::size_t default_threads() {
  if (const char* env = std::getenv("ROBUST_CHOW_THREADS")) {
    try {
      const long value = std::stol(env);
      if (value >= 1) return static_cast<std::size_t>(value);
    } catch (...) {
    }
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::atomic<std::size_t>& thread_cap() {
  static std::atomic<std::size_t> cap{default_threads()};
  return cap;
}

thread_local bool tls_inside_worker = false;

}  // namespace

std::size_t worker_threads() { return thread_cap().load(); }

void set_worker_threads(std::size_t count) { thread_cap().store(count == 0 ? 1 : count); }

bool inside_worker() { return tls_inside_worker; }

WorkerScope::WorkerScope() : previous_(tls_inside_worker) { tls_inside_worker = true; }

WorkerScope::~WorkerScope() { tls_inside_worker = previous_; }

}  // namespace rchow
