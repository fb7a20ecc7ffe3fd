#ifndef POLYMHD_COMMON_HPP
#define POLYMHD_COMMON_HPP

#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

namespace polymhd {

using Eigen::Matrix3d;
using Eigen::MatrixXd;
using Eigen::Vector3d;
using Eigen::VectorXd;

/// Thrown when an input file cannot be parsed.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown on invalid mesh connectivity (dangling faces, over-shared faces, non-planar faces).
struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown on degenerate geometry (non-positive volumes or areas).
struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a local dense solve is too ill-conditioned to trust.
struct ConditioningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a per-cell eliminated block cannot be inverted during condensation.
struct CondensationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a global factorization or the Newton iteration fails.
struct SolveError : std::runtime_error {
  SolveError(const std::string& msg, std::vector<double> history = {})
      : std::runtime_error(msg), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Thrown when a relative error has a vanishing denominator.
struct DegenerateProblemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Runs fn(i) for i in [0, n) on `workers` threads, chunked by index range.
/// Each index is processed exactly once; results written by fn must go to
/// per-index storage so the outcome is independent of the thread count.
/// The first exception thrown by fn is rethrown on the calling thread.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned workers = 1) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  workers = std::min<unsigned>(workers, static_cast<unsigned>(n));
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr error;
  std::mutex error_mutex;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end]() {
      try {
        for (std::size_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace polymhd

#endif
