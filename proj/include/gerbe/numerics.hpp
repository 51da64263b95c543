#pragma once

#include <Eigen/Dense>
#include <atomic>
#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gerbe {

using cplx = std::complex<double>;

// Desk scale: chart dimension <= 3 and matrix dimension <= 3 throughout,
// so all matrices live on the stack (dynamic size, fixed capacity).
using Mat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;   // chart points / tangents
using Coef = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;  // algebra coefficients

inline Mat mat_identity(int n) { return Mat::Identity(n, n); }
inline Mat mat_zero(int n) { return Mat::Zero(n, n); }
inline double frob(const Mat& m) { return m.norm(); }

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};
struct DescriptorMismatch : Error { using Error::Error; };
struct OutOfBranch : Error { using Error::Error; };
struct NonComposable : Error { using Error::Error; };
struct SingularTStar : Error { using Error::Error; };
struct ParseError : Error {
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), byte_offset(offset) {}
  std::size_t byte_offset;
};
struct BoundaryProximity : Error { using Error::Error; };
struct NotABigon : Error { using Error::Error; };
struct ItineraryGap : Error { using Error::Error; };
struct MissingTransition : Error { using Error::Error; };
struct NoUniqueConvention : Error { using Error::Error; };
struct LoadError : Error { using Error::Error; };

// Shipped default tolerances, collected in one place.
struct Tolerances {
  double group_constraint = 1e-7;       // constraint residual after projection
  double basis_closure = 1e-9;          // bracket re-expansion of the basis
  double exp_log_roundtrip = 1e-8;
  double reexpansion = 1e-8;            // adjoint/bracket re-expansion
  double axiom = 1e-8;                  // crossed-module axioms on samples
  double differential_vs_fd = 1e-5;     // analytic differentials vs central FD
  double fd_step = 1e-4;                // chart finite differences (d, dphi, ...)
  double curve_fd_step = 1e-5;          // parameter finite differences along curves
  double fake_flat = 1e-4;              // fake-curvature probe threshold
  double gauge_residual = 1e-5;         // Eqs. (A.1.1)/(A.1.2) residuals
  double transport_consistency = 1e-6;  // soe identities at default steps
  double word_adjacency = 1e-7;         // transport-word junction matching
};

inline const Tolerances& tols() {
  static const Tolerances t;
  return t;
}

// Deterministic, platform-independent RNG (splitmix64 core).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int below(int n) { return int(next_u64() % std::uint64_t(n)); }

 private:
  std::uint64_t state_;
};

// Runs fn(i) for i in [0, n); work is split across threads and results must be
// written to index-addressed slots so the merge order is deterministic.
inline void parallel_for_index(int n, const std::function<void(int)>& fn) {
  unsigned hw = std::thread::hardware_concurrency();
  int workers = int(hw == 0 ? 1 : hw);
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> cursor{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        int i = cursor.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace gerbe
